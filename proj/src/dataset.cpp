#include "ngcl/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "ngcl/error.hpp"
#include "ngcl/random.hpp"
#include "ngcl/textio.hpp"

namespace ngcl {

void save_dataset(const std::filesystem::path& path, std::span<const BrainGraph> graphs) {
  if (graphs.empty()) throw InvalidArgument("save_dataset: no graphs");
  const auto n = graphs.front().nodes();
  const auto& names = graphs.front().features.feature_names;
  const auto f = graphs.front().features.values.cols();
  for (const auto& g : graphs) {
    g.validate();
    if (g.nodes() != n || g.features.values.cols() != f)
      throw ShapeError("save_dataset: graphs differ in node or feature count");
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "ngcl-graphs 1\nnodes " << n << "\nfeatures " << f;
  for (const auto& name : names) out << ' ' << name;
  out << "\ngraphs " << graphs.size() << '\n';
  for (const auto& g : graphs) {
    Eigen::Index edges = 0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        if (g.adjacency(i, j) != 0.0) ++edges;
    out << "graph " << to_int(g.label) << ' ' << edges << '\n';
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        if (g.adjacency(i, j) != 0.0) out << j << ' ' << i << ' ' << format_double(g.adjacency(i, j)) << '\n';
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index c = 0; c < f; ++c) out << (c ? " " : "") << format_double(g.features.values(i, c));
      out << '\n';
    }
  }
  if (!out) throw DataError("write failed: " + path.string());
}

namespace {

class LineReader {
 public:
  LineReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  std::vector<std::string> next() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_;
      auto t = trim(line);
      if (t.empty()) continue;
      std::vector<std::string> tokens;
      std::istringstream ss(t);
      for (std::string tok; ss >> tok;) tokens.push_back(tok);
      return tokens;
    }
    fail("unexpected end of file");
  }

  long integer(const std::string& tok) {
    auto v = parse_long(tok);
    if (!v) fail("expected an integer, got '" + tok + "'");
    return *v;
  }

  double real(const std::string& tok) {
    auto v = parse_double(tok);
    if (!v) fail("expected a number, got '" + tok + "'");
    return *v;
  }

  std::vector<std::string> expect(const std::string& keyword, std::size_t min_tokens) {
    auto t = next();
    if (t.empty() || t[0] != keyword || t.size() < min_tokens) fail("expected '" + keyword + "' record");
    return t;
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(source_, line_, what); }

 private:
  std::istream& in_;
  std::string source_;
  long line_ = 0;
};

}  // namespace

std::vector<BrainGraph> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingArtifactError("cannot open dataset " + path.string());
  LineReader r(in, path.string());
  auto header = r.next();
  if (header.size() != 2 || header[0] != "ngcl-graphs" || header[1] != "1") r.fail("not an ngcl-graphs v1 file");
  const long n = r.integer(r.expect("nodes", 2)[1]);
  auto ft = r.expect("features", 2);
  const long f = r.integer(ft[1]);
  if (n < 1 || f < 1 || static_cast<long>(ft.size()) != f + 2) r.fail("bad nodes/features header");
  std::vector<std::string> names(ft.begin() + 2, ft.end());
  const long count = r.integer(r.expect("graphs", 2)[1]);
  if (count < 0) r.fail("negative graph count");

  std::vector<BrainGraph> graphs;
  graphs.reserve(static_cast<std::size_t>(count));
  for (long gi = 0; gi < count; ++gi) {
    auto gh = r.expect("graph", 3);
    BrainGraph g;
    const long label = r.integer(gh[1]);
    if (label != 0 && label != 1) r.fail("label must be 0 or 1");
    g.label = label_from_int(static_cast<int>(label));
    const long edges = r.integer(gh[2]);
    g.adjacency = Eigen::MatrixXd::Zero(n, n);
    for (long e = 0; e < edges; ++e) {
      auto t = r.next();
      if (t.size() != 3) r.fail("expected 'src dst weight'");
      const long src = r.integer(t[0]);
      const long dst = r.integer(t[1]);
      if (src < 0 || src >= n || dst < 0 || dst >= n) r.fail("edge endpoint out of range");
      g.adjacency(dst, src) = r.real(t[2]);
    }
    g.features.values.resize(n, f);
    g.features.feature_names = names;
    for (long i = 0; i < n; ++i) {
      auto t = r.next();
      if (static_cast<long>(t.size()) != f) r.fail("feature row has wrong width");
      for (long c = 0; c < f; ++c) g.features.values(i, c) = r.real(t[static_cast<std::size_t>(c)]);
    }
    try {
      g.validate();
    } catch (const Error& e) {
      r.fail(e.what());
    }
    graphs.push_back(std::move(g));
  }
  return graphs;
}

std::vector<int> synth_soz_nodes(const SynthSpec& spec) {
  if (spec.nodes < 2 || spec.soz_size < 1 || spec.soz_size >= spec.nodes)
    throw InvalidArgument("synth: need 1 <= soz_size < nodes");
  Rng rng(derive_seed(spec.seed, 0));
  std::vector<int> ids(static_cast<std::size_t>(spec.nodes));
  std::iota(ids.begin(), ids.end(), 0);
  std::shuffle(ids.begin(), ids.end(), rng);
  ids.resize(static_cast<std::size_t>(spec.soz_size));
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<BrainGraph> synth_graph_dataset(const SynthSpec& spec) {
  if (spec.n_per_class < 1) throw InvalidArgument("synth: n_per_class must be >= 1");
  if (!(spec.noise >= 0.0 && spec.noise <= 1.0)) throw InvalidArgument("synth: noise must be in [0, 1]");
  const auto soz = synth_soz_nodes(spec);
  const int n = spec.nodes;
  std::vector<bool> is_soz(static_cast<std::size_t>(n), false);
  for (int v : soz) is_soz[static_cast<std::size_t>(v)] = true;

  Rng rng(derive_seed(spec.seed, 1));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto u = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  std::vector<BrainGraph> graphs;
  graphs.reserve(static_cast<std::size_t>(2 * spec.n_per_class));
  for (int g = 0; g < 2 * spec.n_per_class; ++g) {
    const Label label = (g % 2 == 0) ? Label::kInterictal : Label::kIctal;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        // a(i, j): edge j -> i.
        if (label == Label::kIctal) {
          if (unit(rng) < 0.7) a(i, j) = u(0.5, 1.0);
        } else if (is_soz[i] && !is_soz[j]) {
          if (unit(rng) < 0.6) a(i, j) = u(0.5, 1.0);
        } else {
          if (unit(rng) < 0.05) a(i, j) = u(0.1, 0.3);
        }
        if (unit(rng) < spec.noise) a(i, j) = (a(i, j) == 0.0) ? u(0.1, 1.0) : 0.0;
      }
    }
    Eigen::MatrixXd x(n, static_cast<Eigen::Index>(kFeatureNames.size()));
    for (int i = 0; i < n; ++i) {
      for (Eigen::Index c = 0; c < x.cols(); ++c) {
        if (c <= 1) x(i, c) = is_soz[i] ? u(0.6, 1.0) : u(0.0, 0.4);
        else x(i, c) = unit(rng);
      }
    }
    BrainGraph bg;
    bg.adjacency = std::move(a);
    bg.features.values = std::move(x);
    bg.label = label;
    graphs.push_back(std::move(bg));
  }
  return graphs;
}

}  // namespace ngcl
