#include "ngcl/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <sstream>

#include <spdlog/spdlog.h>

#include "ngcl/error.hpp"
#include "ngcl/random.hpp"
#include "ngcl/textio.hpp"

namespace ngcl {

namespace {

std::optional<double> ratio(int num, int den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / den;
}

void check_pairs(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw ShapeError("score / label length mismatch");
  if (scores.empty()) throw InvalidArgument("no scores to evaluate");
}

}  // namespace

ConfusionResult confusion_metrics(std::span<const double> scores, std::span<const int> labels, double threshold) {
  check_pairs(scores, labels);
  ConfusionCounts c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    const bool actual = labels[i] != 0;
    if (predicted && actual) ++c.tp;
    else if (predicted) ++c.fp;
    else if (actual) ++c.fn;
    else ++c.tn;
  }
  Metrics m;
  m.acc = ratio(c.tp + c.tn, c.total());
  m.sen = ratio(c.tp, c.tp + c.fn);
  m.spe = ratio(c.tn, c.tn + c.fp);
  m.ppv = ratio(c.tp, c.tp + c.fp);
  m.npv = ratio(c.tn, c.tn + c.fn);
  return {c, m};
}

RocCurve roc_auc(std::span<const double> scores, std::span<const int> labels) {
  check_pairs(scores, labels);
  const auto positives = std::count_if(labels.begin(), labels.end(), [](int l) { return l != 0; });
  const auto negatives = static_cast<long>(labels.size()) - positives;
  if (positives == 0 || negatives == 0) throw DegenerateError("AUC undefined for single-class labels");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });

  RocCurve roc;
  roc.points.push_back({0.0, 0.0});
  long tp = 0;
  long fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double s = scores[order[i]];
    while (i < order.size() && scores[order[i]] == s) {
      if (labels[order[i]] != 0) ++tp;
      else ++fp;
      ++i;
    }
    const RocPoint next{static_cast<double>(fp) / negatives, static_cast<double>(tp) / positives};
    const RocPoint& prev = roc.points.back();
    roc.auc += (next.fpr - prev.fpr) * (next.tpr + prev.tpr) / 2.0;
    roc.points.push_back(next);
  }
  return roc;
}

std::vector<std::vector<int>> kfold_split(int n_items, std::span<const int> labels, int k, std::uint64_t seed) {
  if (k < 2) throw InvalidArgument("k-fold needs k >= 2");
  if (static_cast<int>(labels.size()) != n_items) throw ShapeError("label count does not match item count");
  std::map<int, std::vector<int>> by_class;
  for (int i = 0; i < n_items; ++i) by_class[labels[i]].push_back(i);
  for (const auto& [cls, members] : by_class) {
    if (static_cast<int>(members.size()) < k) {
      throw DataError("class " + std::to_string(cls) + " has " + std::to_string(members.size()) +
                      " members, fewer than k=" + std::to_string(k) + " folds");
    }
  }
  std::mt19937_64 rng(seed);
  std::vector<std::vector<int>> folds(static_cast<std::size_t>(k));
  std::size_t deal = 0;
  for (auto& [cls, members] : by_class) {
    std::shuffle(members.begin(), members.end(), rng);
    for (int idx : members) folds[deal++ % static_cast<std::size_t>(k)].push_back(idx);
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

Summary summarize(std::span<const std::optional<double>> values) {
  std::vector<double> v;
  for (const auto& x : values)
    if (x) v.push_back(*x);
  Summary s;
  s.defined = static_cast<int>(v.size());
  if (v.empty()) return s;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  s.mean = mean;
  if (v.size() >= 2) {
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    s.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return s;
}

Aggregate aggregate_folds(std::span<const FoldReport> folds) {
  auto collect = [&](auto getter) {
    std::vector<std::optional<double>> v;
    for (const auto& f : folds) v.push_back(getter(f));
    return summarize(v);
  };
  Aggregate a;
  a.acc = collect([](const FoldReport& f) { return f.metrics.acc; });
  a.sen = collect([](const FoldReport& f) { return f.metrics.sen; });
  a.spe = collect([](const FoldReport& f) { return f.metrics.spe; });
  a.ppv = collect([](const FoldReport& f) { return f.metrics.ppv; });
  a.npv = collect([](const FoldReport& f) { return f.metrics.npv; });
  a.auc = collect([](const FoldReport& f) { return f.auc; });
  return a;
}

TrainedModel train_model(std::span<const BrainGraph> graphs, const TrainingSetup& setup, std::uint64_t seed) {
  if (graphs.empty()) throw DataError("no graphs to train on");
  TrainedModel model;
  if (setup.use_pretraining) {
    auto pre = pretrain(graphs, setup.pretrain, setup.policy, derive_seed(seed, 1));
    model.encoder = std::move(pre.params);
    model.pretrain_trace = std::move(pre.trace);
  } else {
    model.encoder = init_encoder(static_cast<int>(graphs.front().features.values.cols()), setup.pretrain.hidden,
                                 derive_seed(seed, 1));
  }
  auto ft = finetune(graphs, model.encoder, setup.gat, setup.finetune, derive_seed(seed, 2));
  model.gat = std::move(ft.gat);
  model.encoder = std::move(ft.encoder);
  model.finetune_loss = std::move(ft.epoch_loss);
  return model;
}

EvaluationOutput evaluate_model(std::span<const BrainGraph> graphs, const EncoderParams& enc, const GatParams& gat,
                                double threshold, bool keep_details) {
  if (graphs.empty()) throw DataError("no graphs to evaluate");
  EvaluationOutput out;
  std::vector<double> scores;
  std::vector<int> labels;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    const auto& g = graphs[i];
    const Matrix h = encode_nodes(enc, g.adjacency, g.features.values);
    const auto f = gat_forward(gat, h, g.adjacency);
    scores.push_back(f.probability);
    labels.push_back(to_int(g.label));
    if (keep_details) {
      out.graphs.push_back({static_cast<int>(i), to_int(g.label), f.probability, encode_graph(enc, h), attention_map(f)});
    }
  }
  const auto cm = confusion_metrics(scores, labels, threshold);
  out.report.counts = cm.counts;
  out.report.metrics = cm.metrics;
  try {
    auto roc = roc_auc(scores, labels);
    out.report.roc = std::move(roc.points);
    out.report.auc = roc.auc;
  } catch (const DegenerateError&) {
    out.report.auc = std::nullopt;
  }
  return out;
}

CrossValidationResult cross_validate(std::span<const BrainGraph> graphs, const TrainingSetup& setup, int k,
                                     std::uint64_t seed, bool keep_details) {
  std::vector<int> labels;
  for (const auto& g : graphs) labels.push_back(to_int(g.label));
  const auto folds = kfold_split(static_cast<int>(graphs.size()), labels, k, derive_seed(seed, 0));

  CrossValidationResult result;
  for (int fold = 0; fold < k; ++fold) {
    std::vector<BrainGraph> train;
    std::vector<BrainGraph> test;
    const auto& held = folds[fold];
    for (int i = 0; i < static_cast<int>(graphs.size()); ++i) {
      if (std::binary_search(held.begin(), held.end(), i)) test.push_back(graphs[i]);
      else train.push_back(graphs[i]);
    }
    const auto model = train_model(train, setup, derive_seed(seed, 100 + static_cast<std::uint64_t>(fold)));
    auto eval = evaluate_model(test, model.encoder, model.gat, setup.threshold, keep_details);
    eval.report.fold = fold + 1;
    spdlog::info("fold {}/{}: acc={:.4f} auc={}", fold + 1, k, eval.report.metrics.acc.value_or(NAN),
                 eval.report.auc ? format_double(*eval.report.auc) : "NA");
    if (keep_details) {
      for (auto& o : eval.graphs) o.index = held[static_cast<std::size_t>(o.index)];
      result.outputs.push_back(std::move(eval.graphs));
    }
    result.folds.push_back(std::move(eval.report));
  }
  result.aggregate = aggregate_folds(result.folds);
  return result;
}

namespace {

std::string fmt_opt(const std::optional<double>& v) { return v ? format_double(*v) : "NA"; }

std::optional<double> parse_opt(const std::string& s, const std::string& src, long line) {
  if (s == "NA") return std::nullopt;
  auto v = parse_double(s);
  if (!v) throw ParseError(src, line, "bad number '" + s + "'");
  return v;
}

}  // namespace

void write_fold_report(const std::filesystem::path& path, std::span<const FoldReport> folds, const Aggregate& agg) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "fold,tp,fp,tn,fn,acc,sen,spe,ppv,npv,auc\n";
  for (const auto& f : folds) {
    out << f.fold << ',' << f.counts.tp << ',' << f.counts.fp << ',' << f.counts.tn << ',' << f.counts.fn << ','
        << fmt_opt(f.metrics.acc) << ',' << fmt_opt(f.metrics.sen) << ',' << fmt_opt(f.metrics.spe) << ','
        << fmt_opt(f.metrics.ppv) << ',' << fmt_opt(f.metrics.npv) << ',' << fmt_opt(f.auc) << '\n';
  }
  const Summary* cols[] = {&agg.acc, &agg.sen, &agg.spe, &agg.ppv, &agg.npv, &agg.auc};
  out << "mean,,,,";
  for (const auto* s : cols) out << ',' << fmt_opt(s->mean);
  out << "\nsd,,,,";
  for (const auto* s : cols) out << ',' << fmt_opt(s->sd);
  out << '\n';
}

FoldReportDocument read_fold_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingArtifactError("cannot open fold report " + path.string());
  const auto src = path.string();
  FoldReportDocument doc;
  std::string line;
  long lineno = 0;
  std::vector<std::optional<double>> means;
  std::vector<std::optional<double>> sds;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 || trim(line).empty()) continue;
    const auto f = split(trim(line), ',');
    if (f.size() != 11) throw ParseError(src, lineno, "expected 11 fields");
    if (f[0] == "mean" || f[0] == "sd") {
      auto& dst = f[0] == "mean" ? means : sds;
      for (int c = 5; c < 11; ++c) dst.push_back(parse_opt(f[c], src, lineno));
      continue;
    }
    FoldReport r;
    auto as_int = [&](const std::string& s) {
      auto v = parse_long(s);
      if (!v) throw ParseError(src, lineno, "bad integer '" + s + "'");
      return static_cast<int>(*v);
    };
    r.fold = as_int(f[0]);
    r.counts = {as_int(f[1]), as_int(f[2]), as_int(f[3]), as_int(f[4])};
    r.metrics = {parse_opt(f[5], src, lineno), parse_opt(f[6], src, lineno), parse_opt(f[7], src, lineno),
                 parse_opt(f[8], src, lineno), parse_opt(f[9], src, lineno)};
    r.auc = parse_opt(f[10], src, lineno);
    doc.folds.push_back(std::move(r));
  }
  doc.aggregate = aggregate_folds(doc.folds);
  return doc;
}

std::string render_report_table(const FoldReportDocument& doc) {
  std::ostringstream out;
  auto pct = [](const std::optional<double>& v) {
    std::ostringstream s;
    if (v) s << std::fixed << std::setprecision(2) << 100.0 * *v;
    else s << "NA";
    return s.str();
  };
  auto cell = [](const std::string& s, int w) {
    std::ostringstream o;
    o << std::setw(w) << s;
    return o.str();
  };
  const char* names[] = {"ACC(%)", "SEN(%)", "SPE(%)", "PPV(%)", "NPV(%)", "AUC(%)"};
  out << cell("fold", 6);
  for (const char* n : names) out << cell(n, 16);
  out << '\n';
  for (const auto& f : doc.folds) {
    out << cell(std::to_string(f.fold), 6);
    for (const auto& v : {f.metrics.acc, f.metrics.sen, f.metrics.spe, f.metrics.ppv, f.metrics.npv, f.auc})
      out << cell(pct(v), 16);
    out << '\n';
  }
  const Summary* cols[] = {&doc.aggregate.acc, &doc.aggregate.sen, &doc.aggregate.spe,
                           &doc.aggregate.ppv, &doc.aggregate.npv, &doc.aggregate.auc};
  out << cell("mean", 6);
  for (const auto* s : cols) out << cell(pct(s->mean) + " +/- " + pct(s->sd), 16);
  out << '\n';
  return out.str();
}

}  // namespace ngcl
