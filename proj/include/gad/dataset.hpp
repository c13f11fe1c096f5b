#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <unordered_map>
#include <vector>

#include "gad/anomaly.hpp"
#include "gad/graph.hpp"
#include "gad/matrix.hpp"

namespace gad {

// Bijection between original node ids and dense ids 0..N-1. Dense ids are
// assigned in first-appearance order.
class IdMap {
 public:
  // Returns the dense id, assigning the next one if `original` is new.
  NodeId intern(std::uint64_t original);
  std::optional<NodeId> find(std::uint64_t original) const;

  std::size_t size() const noexcept { return originals_.size(); }
  std::uint64_t original(NodeId dense) const { return originals_[dense]; }
  const std::vector<std::uint64_t>& originals() const noexcept { return originals_; }

  static IdMap identity(std::size_t n);
  // Throws InputError on duplicate ids.
  static IdMap from_originals(std::vector<std::uint64_t> originals);

  friend bool operator==(const IdMap& a, const IdMap& b) { return a.originals_ == b.originals_; }

 private:
  std::vector<std::uint64_t> originals_;
  std::unordered_map<std::uint64_t, NodeId> dense_;
};

struct Dataset {
  SparseGraph graph;
  FeatureMatrix features;
  std::optional<Labels> labels;
  IdMap id_map;

  std::size_t num_nodes() const { return graph.num_nodes(); }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct EdgeList {
  std::vector<Edge> edges;  // dense ids, file order
  IdMap id_map;
};

// CSV with header `id_1,id_2`, nonnegative integer ids, LF or CRLF. Throws
// ParseError with the line number on a malformed row, InputError on an
// empty file, DataError if the file cannot be opened.
EdgeList parse_edges_csv(std::istream& in);
EdgeList load_edges_csv(const std::filesystem::path& path);

struct FeatureLoadOptions {
  bool l2_normalize = false;
};

// JSON object: original-id string -> array of nonnegative feature indices.
// Multi-hot rows with d = max index + 1. Ids unknown to `id_map` are
// appended to it (they become isolated nodes); known ids absent from the
// file get a zero row and a warning. Throws ParseError on malformed JSON.
FeatureMatrix parse_features_json(std::istream& in, IdMap& id_map,
                                  const FeatureLoadOptions& opts = {});
FeatureMatrix load_features_json(const std::filesystem::path& path, IdMap& id_map,
                                 const FeatureLoadOptions& opts = {});

// CSV `node_id,label`, label in {0,1}, one row per node of id_map. Throws
// ParseError on malformed rows and DataError on unknown or missing nodes.
Labels parse_labels_csv(std::istream& in, const IdMap& id_map);
Labels load_labels_csv(const std::filesystem::path& path, const IdMap& id_map);

// Edges + features (+ optional labels) into one Dataset.
Dataset load_dataset(const std::filesystem::path& edges, const std::filesystem::path& features,
                     const std::optional<std::filesystem::path>& labels = std::nullopt,
                     const FeatureLoadOptions& opts = {});

// Erdos-Renyi graph with edge probability avg_degree / (n - 1); features are
// multi-hot with a one-hot degree bucket in the first max(1, feat_dim / 4)
// columns and the remaining columns on with probability 0.1. Labels all 0.
// Throws InputError if n < 10 or feat_dim < 1.
Dataset generate_synthetic(std::size_t n, double avg_degree, std::size_t feat_dim,
                           std::uint64_t seed);

struct InjectionConfig {
  std::size_t num_cliques = 5;
  std::size_t clique_size = 5;
  double feature_swap_fraction = 1.0;
  std::uint64_t seed = 0;
};

struct InjectionReport {
  std::vector<std::vector<NodeId>> cliques;
  std::vector<NodeId> swapped;  // nodes whose features were replaced
  std::size_t edges_added = 0;
};

// Planted cliques plus feature swaps. Clique members are drawn uniformly and
// disjoint; every missing pair inside a clique becomes an edge. For
// ceil(fraction * clique_size) members per clique the feature row is
// replaced with the original row of a uniformly drawn node at graph distance
// > 2 (or unreachable). All touched nodes are labeled 1; existing labels are
// kept. Throws InputError when the nodes do not suffice.
Dataset inject_anomalies(const Dataset& d, const InjectionConfig& cfg,
                         InjectionReport* report = nullptr);

// Relabels nodes so that the emitted files re-ingest to exactly this dataset:
// non-isolated nodes in first-appearance order of the edge file, isolated
// nodes after them. Also drops trailing all-zero feature columns, which a
// feature file cannot express.
Dataset canonicalize(const Dataset& d);

// Every undirected edge once, original ids, ordered so that re-ingesting a
// canonical dataset reproduces its dense ids.
void write_edges_csv(std::ostream& out, const Dataset& d);
// Every node in dense order; values are the indices of nonzero columns.
void write_features_json(std::ostream& out, const Dataset& d);
// Throws InputError when the dataset has no labels.
void write_labels_csv(std::ostream& out, const Dataset& d);

}  // namespace gad
