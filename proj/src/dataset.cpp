#include "gad/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include <json.hpp>

#include "gad/errors.hpp"
#include "gad/log.hpp"
#include "gad/rng.hpp"

namespace gad {
namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

void strip_line(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

void strip_bom(std::string& line) {
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
}

bool parse_id(std::string_view text, std::uint64_t& out) {
  if (text.empty()) return false;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

// Splits "a,b" into exactly two fields.
bool split_pair(std::string_view line, std::string_view& a, std::string_view& b) {
  const auto comma = line.find(',');
  if (comma == std::string_view::npos || line.find(',', comma + 1) != std::string_view::npos) {
    return false;
  }
  a = line.substr(0, comma);
  b = line.substr(comma + 1);
  return true;
}

// Nodes within distance 2 of `source`, source included.
std::vector<bool> within_two_hops(const SparseGraph& g, NodeId source) {
  std::vector<bool> near(g.num_nodes(), false);
  near[source] = true;
  for (NodeId j : g.neighbors(source)) {
    near[j] = true;
    for (NodeId k : g.neighbors(j)) near[k] = true;
  }
  return near;
}

// Edge emission order; see write_edges_csv.
std::vector<Edge> emission_order(const SparseGraph& g) {
  const std::size_t n = g.num_nodes();
  std::vector<Edge> out;
  out.reserve(g.edge_count());
  std::vector<bool> appeared(n, false);
  // Edges (k, m), k < m, already emitted to introduce k.
  std::set<Edge> introducing;

  for (NodeId k = 0; k < n; ++k) {
    const auto nbrs = g.neighbors(k);
    if (nbrs.empty()) continue;
    const bool has_lower = nbrs.front() < k;
    bool self_done = false;
    if (!appeared[k] && !has_lower) {
      if (g.has_self_loop(k)) {
        out.emplace_back(k, k);
        self_done = true;
      } else {
        const NodeId m = *std::upper_bound(nbrs.begin(), nbrs.end(), k);
        out.emplace_back(k, m);
        introducing.emplace(k, m);
        appeared[m] = true;
      }
    }
    appeared[k] = true;
    for (NodeId j : nbrs) {
      if (j < k) {
        if (!introducing.contains({j, k})) out.emplace_back(j, k);
      } else if (j == k && !self_done) {
        out.emplace_back(k, k);
      }
    }
  }
  return out;
}

}  // namespace

NodeId IdMap::intern(std::uint64_t original) {
  const auto [it, inserted] = dense_.try_emplace(original, static_cast<NodeId>(originals_.size()));
  if (inserted) originals_.push_back(original);
  return it->second;
}

std::optional<NodeId> IdMap::find(std::uint64_t original) const {
  const auto it = dense_.find(original);
  if (it == dense_.end()) return std::nullopt;
  return it->second;
}

IdMap IdMap::identity(std::size_t n) {
  IdMap m;
  for (std::size_t i = 0; i < n; ++i) m.intern(i);
  return m;
}

IdMap IdMap::from_originals(std::vector<std::uint64_t> originals) {
  IdMap m;
  for (std::uint64_t id : originals) {
    const std::size_t before = m.size();
    m.intern(id);
    if (m.size() == before) throw InputError("duplicate original id " + std::to_string(id));
  }
  return m;
}

EdgeList parse_edges_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("edge file is empty");
  strip_line(line);
  strip_bom(line);
  if (line != "id_1,id_2") throw ParseError("expected header id_1,id_2", 1);

  EdgeList out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    strip_line(line);
    if (line.empty()) continue;
    std::string_view a, b;
    std::uint64_t u = 0, v = 0;
    if (!split_pair(line, a, b) || !parse_id(a, u) || !parse_id(b, v)) {
      throw ParseError("malformed edge row '" + line + "'", line_no);
    }
    const NodeId du = out.id_map.intern(u);
    const NodeId dv = out.id_map.intern(v);
    out.edges.emplace_back(du, dv);
  }
  return out;
}

EdgeList load_edges_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_edges_csv(in);
}

FeatureMatrix parse_features_json(std::istream& in, IdMap& id_map, const FeatureLoadOptions& opts) {
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed feature JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("feature JSON must be an object");

  std::vector<std::pair<NodeId, std::vector<std::size_t>>> rows;
  rows.reserve(doc.size());
  std::size_t dim = 0;
  for (const auto& [key, value] : doc.items()) {
    std::uint64_t original = 0;
    if (!parse_id(key, original)) throw ParseError("feature key '" + key + "' is not a node id");
    if (!value.is_array()) throw ParseError("features of node " + key + " must be an array");
    std::vector<std::size_t> idx;
    idx.reserve(value.size());
    for (const auto& v : value) {
      if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
        throw ParseError("feature index of node " + key + " must be a nonnegative integer");
      }
      idx.push_back(v.get<std::size_t>());
      dim = std::max(dim, idx.back() + 1);
    }
    rows.emplace_back(id_map.intern(original), std::move(idx));
  }

  FeatureMatrix x(id_map.size(), dim);
  std::vector<bool> present(id_map.size(), false);
  for (const auto& [node, idx] : rows) {
    present[node] = true;
    for (std::size_t c : idx) x(node, c) = 1.0;
  }
  const auto missing = static_cast<std::size_t>(std::count(present.begin(), present.end(), false));
  if (missing > 0) warn(std::to_string(missing) + " node(s) have no features; using zero rows");

  if (opts.l2_normalize) {
    for (std::size_t i = 0; i < x.rows(); ++i) {
      double norm = 0.0;
      for (double v : x.row(i)) norm += v * v;
      if (norm > 0.0) {
        norm = std::sqrt(norm);
        for (double& v : x.row(i)) v /= norm;
      }
    }
  }
  return x;
}

FeatureMatrix load_features_json(const std::filesystem::path& path, IdMap& id_map,
                                 const FeatureLoadOptions& opts) {
  auto in = open_input(path);
  return parse_features_json(in, id_map, opts);
}

Labels parse_labels_csv(std::istream& in, const IdMap& id_map) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("label file is empty");
  strip_line(line);
  strip_bom(line);
  if (line != "node_id,label") throw ParseError("expected header node_id,label", 1);

  Labels labels(id_map.size(), 0);
  std::vector<bool> seen(id_map.size(), false);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    strip_line(line);
    if (line.empty()) continue;
    std::string_view a, b;
    std::uint64_t id = 0;
    if (!split_pair(line, a, b) || !parse_id(a, id) || (b != "0" && b != "1")) {
      throw ParseError("malformed label row '" + line + "'", line_no);
    }
    const auto dense = id_map.find(id);
    if (!dense) throw DataError("label for unknown node " + std::to_string(id));
    labels[*dense] = b == "1" ? 1 : 0;
    seen[*dense] = true;
  }
  const auto missing = std::find(seen.begin(), seen.end(), false);
  if (missing != seen.end()) {
    throw DataError("no label for node " +
                    std::to_string(id_map.original(static_cast<NodeId>(missing - seen.begin()))));
  }
  return labels;
}

Labels load_labels_csv(const std::filesystem::path& path, const IdMap& id_map) {
  auto in = open_input(path);
  return parse_labels_csv(in, id_map);
}

Dataset load_dataset(const std::filesystem::path& edges, const std::filesystem::path& features,
                     const std::optional<std::filesystem::path>& labels,
                     const FeatureLoadOptions& opts) {
  EdgeList list = load_edges_csv(edges);
  Dataset d;
  d.features = load_features_json(features, list.id_map, opts);
  d.graph = build_from_edges(list.edges, list.id_map.size());
  d.id_map = std::move(list.id_map);
  if (labels) d.labels = load_labels_csv(*labels, d.id_map);
  return d;
}

Dataset generate_synthetic(std::size_t n, double avg_degree, std::size_t feat_dim,
                           std::uint64_t seed) {
  if (n < 10) throw InputError("generate_synthetic: n must be >= 10");
  if (feat_dim < 1) throw InputError("generate_synthetic: feat_dim must be >= 1");
  if (!(avg_degree >= 0.0)) throw InputError("generate_synthetic: avg_degree must be >= 0");

  Rng rng(seed);
  const double p = std::min(1.0, avg_degree / static_cast<double>(n - 1));
  std::vector<Edge> edges;
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = i + 1; j < n; ++j)
      if (rng.unit() < p) edges.emplace_back(i, j);

  Dataset d;
  d.graph = build_from_edges(edges, n);
  d.id_map = IdMap::identity(n);
  d.labels = Labels(n, 0);

  const std::size_t buckets = std::max<std::size_t>(1, feat_dim / 4);
  const double span = 2.0 * avg_degree + 1.0;
  d.features = FeatureMatrix(n, feat_dim);
  for (NodeId i = 0; i < n; ++i) {
    const auto deg = static_cast<double>(d.graph.degree(i));
    const auto bucket = std::min(buckets - 1, static_cast<std::size_t>(deg * buckets / span));
    d.features(i, bucket) = 1.0;
    for (std::size_t c = buckets; c < feat_dim; ++c)
      if (rng.unit() < 0.1) d.features(i, c) = 1.0;
  }
  return d;
}

Dataset inject_anomalies(const Dataset& d, const InjectionConfig& cfg, InjectionReport* report) {
  const std::size_t n = d.num_nodes();
  if (cfg.clique_size < 2) throw InputError("inject_anomalies: clique_size must be >= 2");
  if (!(cfg.feature_swap_fraction >= 0.0 && cfg.feature_swap_fraction <= 1.0)) {
    throw InputError("inject_anomalies: feature_swap_fraction must lie in [0,1]");
  }
  const std::size_t needed = cfg.num_cliques * cfg.clique_size;
  if (needed > n) {
    throw InputError("inject_anomalies: " + std::to_string(needed) + " clique members requested from " +
                     std::to_string(n) + " nodes");
  }

  Rng rng(cfg.seed);
  std::vector<NodeId> pool(n);
  for (NodeId i = 0; i < n; ++i) pool[i] = i;
  for (std::size_t k = 0; k < needed; ++k) std::swap(pool[k], pool[k + rng.below(n - k)]);

  InjectionReport rep;
  std::vector<Edge> edges = d.graph.edges();
  const std::size_t before = d.graph.edge_count();
  for (std::size_t c = 0; c < cfg.num_cliques; ++c) {
    std::vector<NodeId> members(pool.begin() + c * cfg.clique_size,
                                pool.begin() + (c + 1) * cfg.clique_size);
    for (std::size_t a = 0; a < members.size(); ++a)
      for (std::size_t b = a + 1; b < members.size(); ++b) edges.emplace_back(members[a], members[b]);
    rep.cliques.push_back(std::move(members));
  }

  Dataset out = d;
  out.graph = build_from_edges(edges, n);
  rep.edges_added = out.graph.edge_count() - before;
  if (!out.labels) out.labels = Labels(n, 0);

  const auto swaps = static_cast<std::size_t>(
      std::ceil(cfg.feature_swap_fraction * static_cast<double>(cfg.clique_size)));
  for (const auto& members : rep.cliques) {
    for (NodeId v : members) (*out.labels)[v] = 1;
    for (std::size_t s = 0; s < swaps; ++s) {
      const NodeId v = members[s];
      const std::vector<bool> near = within_two_hops(out.graph, v);
      std::vector<NodeId> candidates;
      for (NodeId u = 0; u < n; ++u)
        if (!near[u]) candidates.push_back(u);
      if (candidates.empty()) {
        for (NodeId u = 0; u < n; ++u)
          if (u != v) candidates.push_back(u);
      }
      const NodeId src = candidates[rng.below(candidates.size())];
      std::copy(d.features.row(src).begin(), d.features.row(src).end(), out.features.row(v).begin());
      rep.swapped.push_back(v);
    }
  }
  if (report != nullptr) *report = std::move(rep);
  return out;
}

Dataset canonicalize(const Dataset& d) {
  const std::size_t n = d.num_nodes();
  std::vector<Edge> sorted = d.graph.edges();  // (min,max), ascending
  std::vector<NodeId> new_id(n, static_cast<NodeId>(-1));
  NodeId next = 0;
  auto assign = [&](NodeId v) {
    if (new_id[v] == static_cast<NodeId>(-1)) new_id[v] = next++;
  };
  for (const auto& [a, b] : sorted) {
    assign(a);
    assign(b);
  }
  for (NodeId v = 0; v < n; ++v) assign(v);

  std::vector<Edge> relabeled;
  relabeled.reserve(sorted.size());
  for (const auto& [a, b] : sorted) relabeled.emplace_back(new_id[a], new_id[b]);

  std::size_t dim = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < d.features.cols(); ++c)
      if (d.features(i, c) != 0.0) dim = std::max(dim, c + 1);

  Dataset out;
  out.graph = build_from_edges(relabeled, n);
  out.features = FeatureMatrix(n, dim);
  std::vector<std::uint64_t> originals(n);
  if (d.labels) out.labels = Labels(n, 0);
  for (NodeId v = 0; v < n; ++v) {
    const NodeId t = new_id[v];
    originals[t] = d.id_map.original(v);
    for (std::size_t c = 0; c < dim; ++c) out.features(t, c) = d.features(v, c);
    if (d.labels) (*out.labels)[t] = (*d.labels)[v];
  }
  out.id_map = IdMap::from_originals(std::move(originals));
  return out;
}

void write_edges_csv(std::ostream& out, const Dataset& d) {
  out << "id_1,id_2\n";
  for (const auto& [a, b] : emission_order(d.graph))
    out << d.id_map.original(a) << ',' << d.id_map.original(b) << '\n';
}

void write_features_json(std::ostream& out, const Dataset& d) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  for (NodeId i = 0; i < d.num_nodes(); ++i) {
    auto idx = nlohmann::ordered_json::array();
    for (std::size_t c = 0; c < d.features.cols(); ++c)
      if (d.features(i, c) != 0.0) idx.push_back(c);
    doc[std::to_string(d.id_map.original(i))] = std::move(idx);
  }
  out << doc.dump() << '\n';
}

void write_labels_csv(std::ostream& out, const Dataset& d) {
  if (!d.labels) throw InputError("dataset has no labels to write");
  out << "node_id,label\n";
  for (NodeId i = 0; i < d.num_nodes(); ++i)
    out << d.id_map.original(i) << ',' << static_cast<int>((*d.labels)[i]) << '\n';
}

}  // namespace gad
