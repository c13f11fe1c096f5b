#include "gad/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gad/errors.hpp"
#include "gad/log.hpp"

namespace gad {

SparseGraph::SparseGraph(std::size_t num_nodes, std::vector<std::size_t> row_offsets,
                         std::vector<NodeId> col_indices)
    : row_offsets_(std::move(row_offsets)), col_indices_(std::move(col_indices)) {
  if (row_offsets_.size() != num_nodes + 1 || row_offsets_.front() != 0 ||
      row_offsets_.back() != col_indices_.size()) {
    throw InputError("inconsistent CSR row offsets");
  }
  for (std::size_t i = 0; i < num_nodes; ++i) {
    if (row_offsets_[i + 1] < row_offsets_[i]) throw InputError("CSR row offsets not monotone");
    for (std::size_t p = row_offsets_[i]; p < row_offsets_[i + 1]; ++p) {
      if (col_indices_[p] >= num_nodes) {
        throw InputError("CSR column " + std::to_string(col_indices_[p]) + " out of range in row " +
                         std::to_string(i));
      }
      if (p > row_offsets_[i] && col_indices_[p] <= col_indices_[p - 1]) {
        throw InputError("CSR row " + std::to_string(i) + " not strictly ascending");
      }
      if (col_indices_[p] == i) ++self_loops_;
    }
  }

  mirror_.resize(col_indices_.size());
  for (std::size_t i = 0; i < num_nodes; ++i) {
    for (std::size_t p = row_offsets_[i]; p < row_offsets_[i + 1]; ++p) {
      const NodeId j = col_indices_[p];
      const auto row_j = neighbors(j);
      const auto it = std::lower_bound(row_j.begin(), row_j.end(), static_cast<NodeId>(i));
      if (it == row_j.end() || *it != i) {
        throw InputError("CSR not symmetric: (" + std::to_string(i) + "," + std::to_string(j) +
                         ") has no reverse entry");
      }
      mirror_[p] = row_offsets_[j] + static_cast<std::size_t>(it - row_j.begin());
    }
  }
  edge_count_ = (col_indices_.size() - self_loops_) / 2 + self_loops_;
}

bool SparseGraph::has_edge(NodeId i, NodeId j) const {
  const auto row = neighbors(i);
  return std::binary_search(row.begin(), row.end(), j);
}

std::vector<Edge> SparseGraph::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count_);
  for (NodeId i = 0; i < num_nodes(); ++i)
    for (NodeId j : neighbors(i))
      if (i <= j) out.emplace_back(i, j);
  return out;
}

SparseGraph build_from_edges(std::span<const Edge> edges, std::size_t num_nodes) {
  std::vector<Edge> entries;
  entries.reserve(edges.size() * 2);
  for (const auto& [u, v] : edges) {
    if (u >= num_nodes || v >= num_nodes) {
      throw InputError("edge (" + std::to_string(u) + "," + std::to_string(v) +
                       ") out of range for " + std::to_string(num_nodes) + " nodes");
    }
    entries.emplace_back(u, v);
    if (u != v) entries.emplace_back(v, u);
  }
  std::sort(entries.begin(), entries.end());
  entries.erase(std::unique(entries.begin(), entries.end()), entries.end());

  std::vector<std::size_t> offsets(num_nodes + 1, 0);
  std::vector<NodeId> cols;
  cols.reserve(entries.size());
  for (const auto& [u, v] : entries) {
    ++offsets[u + 1];
    cols.push_back(v);
  }
  for (std::size_t i = 0; i < num_nodes; ++i) offsets[i + 1] += offsets[i];
  return SparseGraph(num_nodes, std::move(offsets), std::move(cols));
}

DegreeVector compute_degrees(const SparseGraph& g) {
  DegreeVector d(g.num_nodes());
  for (NodeId i = 0; i < g.num_nodes(); ++i) d[i] = g.degree(i);
  return d;
}

SparseGraph with_self_loops(const SparseGraph& g) {
  std::vector<std::size_t> offsets(g.num_nodes() + 1, 0);
  std::vector<NodeId> cols;
  cols.reserve(g.nnz() + g.num_nodes());
  for (NodeId i = 0; i < g.num_nodes(); ++i) {
    bool placed = false;
    for (NodeId j : g.neighbors(i)) {
      if (!placed && j >= i) {
        if (j != i) cols.push_back(i);
        placed = true;
      }
      cols.push_back(j);
    }
    if (!placed) cols.push_back(i);
    offsets[i + 1] = cols.size();
  }
  return SparseGraph(g.num_nodes(), std::move(offsets), std::move(cols));
}

SparseGraph without_self_loops(const SparseGraph& g) {
  std::vector<std::size_t> offsets(g.num_nodes() + 1, 0);
  std::vector<NodeId> cols;
  cols.reserve(g.nnz());
  for (NodeId i = 0; i < g.num_nodes(); ++i) {
    for (NodeId j : g.neighbors(i))
      if (j != i) cols.push_back(j);
    offsets[i + 1] = cols.size();
  }
  return SparseGraph(g.num_nodes(), std::move(offsets), std::move(cols));
}

NormalizedAdjacency symmetric_normalize(const SparseGraph& g, bool add_self_loops) {
  NormalizedAdjacency out{add_self_loops ? with_self_loops(g) : g, {}};
  const SparseGraph& p = out.pattern;
  const DegreeVector deg = compute_degrees(p);

  std::size_t isolated = 0;
  for (std::size_t d : deg) isolated += d == 0;
  if (isolated > 0) {
    warn(std::to_string(isolated) + " isolated node(s) without self-loops receive no messages");
  }

  out.values.resize(p.nnz());
  for (NodeId i = 0; i < p.num_nodes(); ++i) {
    std::size_t pos = p.row_offsets()[i];
    for (NodeId j : p.neighbors(i))
      out.values[pos++] = 1.0 / std::sqrt(static_cast<double>(deg[i] * deg[j]));
  }
  return out;
}

}  // namespace gad
