#include "ngcl/pipeline.hpp"

#include <fstream>

#include <spdlog/spdlog.h>

#include "ngcl/biomarkers.hpp"
#include "ngcl/connectivity.hpp"
#include "ngcl/error.hpp"
#include "ngcl/signalio.hpp"
#include "ngcl/textio.hpp"

namespace ngcl {

std::vector<BrainGraph> graphs_from_recording(const Recording& rec, const PipelineConfig& cfg) {
  rec.validate();
  if (!rec.onset_sample) throw DataError("recording has no seizure onset annotation");
  const auto [inter, ictal] = clip_peri_ictal(rec, cfg.pre_s, cfg.post_s);
  std::vector<BrainGraph> out;
  for (const auto& [clip, label] : {std::pair{&inter, Label::kInterictal}, std::pair{&ictal, Label::kIctal}}) {
    for (const auto& seg : segment_windows(*clip, cfg.window_s, cfg.overlap, label)) {
      const auto conn = multiband_graph(seg, cfg.bands, cfg.mvar_order, cfg.dtf_normalized);
      out.push_back(build_graph(conn, node_feature_matrix(seg), label));
    }
  }
  return out;
}

BuildResult build_graphs(std::span<const std::filesystem::path> recordings, const PipelineConfig& cfg) {
  BuildResult result;
  for (const auto& path : recordings) {
    try {
      auto graphs = graphs_from_recording(load_recording(path), cfg);
      if (!result.graphs.empty() && !graphs.empty() && graphs.front().nodes() != result.graphs.front().nodes())
        throw ShapeError("channel count differs from earlier recordings");
      spdlog::info("{}: {} graphs", path.string(), graphs.size());
      for (auto& g : graphs) result.graphs.push_back(std::move(g));
    } catch (const Error& e) {
      spdlog::error("{}: {}", path.string(), e.what());
      result.failures.push_back({path, e.what(), e.kind()});
    }
  }
  return result;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

}  // namespace

void write_loss_trace(const std::filesystem::path& path, std::span<const LossRecord> trace) {
  auto out = open_out(path);
  out << "epoch,batch,l_graph,l_info,l_total\n";
  for (const auto& r : trace)
    out << r.epoch << ',' << r.batch << ',' << format_double(r.l_graph) << ',' << format_double(r.l_info) << ','
        << format_double(r.l_total) << '\n';
}

void write_roc(const std::filesystem::path& path, std::span<const FoldReport> folds) {
  auto out = open_out(path);
  out << "fold,fpr,tpr\n";
  for (const auto& f : folds)
    for (const auto& p : f.roc) out << f.fold << ',' << format_double(p.fpr) << ',' << format_double(p.tpr) << '\n';
}

void write_attention(const std::filesystem::path& path, std::span<const std::vector<GraphOutput>> per_fold) {
  auto out = open_out(path);
  out << "fold,graph,label,layer,head,src,dst,weight\n";
  for (std::size_t fold = 0; fold < per_fold.size(); ++fold) {
    for (const auto& g : per_fold[fold]) {
      for (std::size_t l = 0; l < g.attention.size(); ++l) {
        for (std::size_t h = 0; h < g.attention[l].size(); ++h) {
          const auto& a = g.attention[l][h];
          for (Eigen::Index i = 0; i < a.rows(); ++i)
            for (Eigen::Index j = 0; j < a.cols(); ++j)
              if (a(i, j) != 0.0)
                out << fold << ',' << g.index << ',' << g.label << ',' << l << ',' << h << ',' << j << ',' << i << ','
                    << format_double(a(i, j)) << '\n';
        }
      }
    }
  }
}

void write_embeddings(const std::filesystem::path& path, std::span<const std::vector<GraphOutput>> per_fold) {
  auto out = open_out(path);
  Eigen::Index width = 0;
  for (const auto& fold : per_fold)
    if (!fold.empty()) width = fold.front().graph_embedding.size();
  out << "fold,graph,label,probability";
  for (Eigen::Index c = 0; c < width; ++c) out << ",e" << c;
  out << '\n';
  for (std::size_t fold = 0; fold < per_fold.size(); ++fold) {
    for (const auto& g : per_fold[fold]) {
      out << fold << ',' << g.index << ',' << g.label << ',' << format_double(g.probability);
      for (Eigen::Index c = 0; c < g.graph_embedding.size(); ++c) out << ',' << format_double(g.graph_embedding(c));
      out << '\n';
    }
  }
}

}  // namespace ngcl
