#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace gad {

using NodeId = std::uint32_t;
using Edge = std::pair<NodeId, NodeId>;

// Undirected graph in compressed-row form. Every undirected edge {i,j} with
// i != j is stored in both rows; a self-loop (i,i) is stored once in row i.
// Neighbor lists are sorted ascending and duplicate-free. Immutable.
class SparseGraph {
 public:
  SparseGraph() : row_offsets_{0} {}

  // Validates the CSR arrays (symmetry, sorting, ranges) and throws
  // InputError on violation.
  SparseGraph(std::size_t num_nodes, std::vector<std::size_t> row_offsets,
              std::vector<NodeId> col_indices);

  std::size_t num_nodes() const noexcept { return row_offsets_.size() - 1; }
  // Undirected edges, self-loops included.
  std::size_t edge_count() const noexcept { return edge_count_; }
  std::size_t self_loop_count() const noexcept { return self_loops_; }
  // Stored (row, col) entries: 2 * edge_count() - self_loop_count().
  std::size_t nnz() const noexcept { return col_indices_.size(); }

  std::span<const NodeId> neighbors(NodeId i) const {
    return {col_indices_.data() + row_offsets_[i], row_offsets_[i + 1] - row_offsets_[i]};
  }
  std::size_t degree(NodeId i) const { return row_offsets_[i + 1] - row_offsets_[i]; }
  bool has_edge(NodeId i, NodeId j) const;
  bool has_self_loop(NodeId i) const { return has_edge(i, i); }

  const std::vector<std::size_t>& row_offsets() const noexcept { return row_offsets_; }
  const std::vector<NodeId>& col_indices() const noexcept { return col_indices_; }

  // mirror()[p] is the storage position of the reverse entry (j,i) of the
  // entry (i,j) stored at position p. Lets backward passes gather along
  // incoming edges row by row instead of scattering.
  const std::vector<std::size_t>& mirror() const noexcept { return mirror_; }

  // Unordered edge list with i <= j, in row order.
  std::vector<Edge> edges() const;

  friend bool operator==(const SparseGraph& a, const SparseGraph& b) {
    return a.row_offsets_ == b.row_offsets_ && a.col_indices_ == b.col_indices_;
  }

 private:
  std::vector<std::size_t> row_offsets_;
  std::vector<NodeId> col_indices_;
  std::vector<std::size_t> mirror_;
  std::size_t edge_count_ = 0;
  std::size_t self_loops_ = 0;
};

// Symmetrizes and deduplicates; (i,i) pairs become self-loops. Throws
// InputError naming the first pair with an id >= num_nodes.
SparseGraph build_from_edges(std::span<const Edge> edges, std::size_t num_nodes);

using DegreeVector = std::vector<std::size_t>;

DegreeVector compute_degrees(const SparseGraph& g);

// Adds (i,i) to every row that lacks it.
SparseGraph with_self_loops(const SparseGraph& g);
// Removes every (i,i).
SparseGraph without_self_loops(const SparseGraph& g);

// D^-1/2 A D^-1/2 over the pattern of `pattern`; values[p] is the weight of
// the entry stored at position p.
struct NormalizedAdjacency {
  SparseGraph pattern;
  std::vector<double> values;

  std::size_t num_nodes() const noexcept { return pattern.num_nodes(); }
};

// Degrees are recomputed after self-loop augmentation. Isolated nodes (only
// possible without self-loops) keep an empty row and trigger a warning.
NormalizedAdjacency symmetric_normalize(const SparseGraph& g, bool add_self_loops);

}  // namespace gad
