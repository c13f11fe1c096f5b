#include "gad/anomaly.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <unordered_set>

#include <json.hpp>

#include "gad/errors.hpp"
#include "gad/kernels.hpp"
#include "gad/log.hpp"
#include "gad/model.hpp"
#include "gad/rng.hpp"
#include "gad/training.hpp"

namespace gad {
namespace {

double pair_error(const DenseMatrix& z, NodeId i, NodeId j, double target) {
  double s = 0.0;
  for (std::size_t c = 0; c < z.cols(); ++c) s += z(i, c) * z(j, c);
  const double diff = target - sigmoid(s);
  return diff * diff;
}

// Non-neighbors of i (A_ij = 0, i itself included), k of them without
// replacement, or all of them when there are no more than k.
std::vector<NodeId> sample_non_neighbors(const SparseGraph& g, NodeId i, std::size_t k,
                                         std::uint64_t seed) {
  const std::size_t n = g.num_nodes();
  const auto nbrs = g.neighbors(i);
  const std::size_t edges = nbrs.size() - (g.has_self_loop(i) ? 1 : 0);
  const std::size_t available = n - edges;
  auto is_neighbor = [&](NodeId j) { return j != i && std::binary_search(nbrs.begin(), nbrs.end(), j); };

  std::vector<NodeId> out;
  Rng rng(seed);
  if (2 * k >= available) {
    std::vector<NodeId> all;
    all.reserve(available);
    for (NodeId j = 0; j < n; ++j)
      if (!is_neighbor(j)) all.push_back(j);
    if (k >= all.size()) return all;
    for (std::size_t t = 0; t < k; ++t) std::swap(all[t], all[t + rng.below(all.size() - t)]);
    all.resize(k);
    return all;
  }
  std::unordered_set<NodeId> seen;
  while (out.size() < k) {
    const auto j = static_cast<NodeId>(rng.below(n));
    if (is_neighbor(j) || !seen.insert(j).second) continue;
    out.push_back(j);
  }
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace

std::string to_string(ScoreMode mode) { return mode == ScoreMode::dense ? "dense" : "sampled"; }

AnomalyScores node_scores(const SparseGraph& g, const DenseMatrix& z, ScoreMode mode,
                          std::uint64_t seed) {
  AnomalyScores out;
  out.mode = mode;
  const std::size_t n = g.num_nodes();
  if (mode == ScoreMode::dense) {
    out.values = reconstruction_row_errors(g, z);
    for (double& v : out.values) v /= static_cast<double>(n);
    return out;
  }
  if (z.rows() != n) {
    throw InputError("embeddings " + z.shape_string() + " for a graph of " + std::to_string(n) +
                     " nodes");
  }
  out.values.assign(n, 0.0);
#pragma omp parallel for schedule(dynamic, 32)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
    const auto i = static_cast<NodeId>(ii);
    double sum = 0.0;
    std::size_t count = 0;
    for (NodeId j : g.neighbors(i)) {
      if (j == i) continue;
      sum += pair_error(z, i, j, 1.0);
      ++count;
    }
    const std::size_t k = std::max(count, kMinSampledNonNeighbors);
    for (NodeId j : sample_non_neighbors(g, i, k, mix_seed(seed, i))) {
      sum += pair_error(z, i, j, 0.0);
      ++count;
    }
    out.values[i] = sum / static_cast<double>(count);
  }
  return out;
}

double select_threshold(const std::vector<double>& scores, const ThresholdPolicy& policy) {
  if (scores.empty()) throw InputError("select_threshold: no scores");
  if (policy.kind == ThresholdPolicy::Kind::fixed) {
    if (!(policy.value >= 0.0)) throw ConfigError("fixed threshold must be >= 0");
    return policy.value;
  }
  const double q = policy.value;
  if (!(q > 0.0 && q < 1.0)) throw ConfigError("contamination rate must lie in (0,1)");

  std::vector<double> sorted = scores;
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() == sorted.back()) {
    warn("all anomaly scores are equal; strict thresholding flags no node");
  }
  const double pos = (1.0 - q) * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0 || sorted[lo] == sorted[hi]) return sorted[lo];
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::vector<bool> classify(const std::vector<double>& scores, double threshold) {
  std::vector<bool> flags(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) flags[i] = scores[i] > threshold;
  return flags;
}

double mann_whitney_u(const std::vector<double>& scores, const Labels& labels) {
  if (scores.size() != labels.size()) {
    throw InputError("scores and labels differ in length (" + std::to_string(scores.size()) +
                     " vs " + std::to_string(labels.size()) + ")");
  }
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Ranks are 1-based; tied blocks share their average rank. All quantities
  // are multiples of 1/2 and exact in double precision.
  double rank_sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t start = 0; start < n;) {
    std::size_t end = start + 1;
    while (end < n && scores[order[end]] == scores[order[start]]) ++end;
    const double midrank = 0.5 * static_cast<double>(start + 1 + end);
    for (std::size_t k = start; k < end; ++k) {
      if (labels[order[k]] != 0) {
        rank_sum += midrank;
        ++positives;
      }
    }
    start = end;
  }
  const double p = static_cast<double>(positives);
  return rank_sum - p * (p + 1.0) / 2.0;
}

double roc_auc(const std::vector<double>& scores, const Labels& labels) {
  const std::size_t positives =
      static_cast<std::size_t>(std::count_if(labels.begin(), labels.end(), [](auto l) { return l != 0; }));
  const std::size_t negatives = labels.size() - positives;
  if (positives == 0 || negatives == 0) {
    throw UndefinedMetricError("AUC is undefined: labels contain a single class");
  }
  return mann_whitney_u(scores, labels) /
         (static_cast<double>(positives) * static_cast<double>(negatives));
}

MetricsReport precision_recall_f1(const std::vector<bool>& flags, const Labels& labels) {
  if (flags.size() != labels.size()) {
    throw InputError("flags and labels differ in length (" + std::to_string(flags.size()) +
                     " vs " + std::to_string(labels.size()) + ")");
  }
  MetricsReport m;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    const bool truth = labels[i] != 0;
    if (flags[i] && truth) ++m.tp;
    else if (flags[i]) ++m.fp;
    else if (truth) ++m.fn;
    else ++m.tn;
  }
  const auto ratio = [](std::size_t num, std::size_t den, bool& undefined) {
    undefined = den == 0;
    return undefined ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  m.precision = ratio(m.tp, m.tp + m.fp, m.precision_undefined);
  m.recall = ratio(m.tp, m.tp + m.fn, m.recall_undefined);
  m.f1_undefined = m.precision + m.recall == 0.0;
  m.f1 = m.f1_undefined ? 0.0 : 2.0 * m.precision * m.recall / (m.precision + m.recall);
  return m;
}

MetricsReport evaluate_metrics(const std::vector<double>& scores, const std::vector<bool>& flags,
                               const Labels& labels) {
  MetricsReport m = precision_recall_f1(flags, labels);
  m.auc = roc_auc(scores, labels);
  return m;
}

void write_scores_csv(std::ostream& out, const std::vector<double>& scores,
                      const std::vector<bool>& flags,
                      const std::vector<std::uint64_t>& original_ids) {
  if (flags.size() != scores.size() || (!original_ids.empty() && original_ids.size() != scores.size())) {
    throw InputError("write_scores_csv: column lengths differ");
  }
  out << "node_id,score,flag\n";
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out << (original_ids.empty() ? i : original_ids[i]) << ',' << format_double(scores[i]) << ','
        << (flags[i] ? 1 : 0) << '\n';
  }
}

ScoreTable read_scores_csv(std::istream& in) {
  ScoreTable table;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError("scores file is empty");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "node_id,score,flag") throw ParseError("expected header node_id,score,flag", 1);
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 3) throw ParseError("expected 3 fields", line_no);
    try {
      std::size_t used = 0;
      table.node_ids.push_back(std::stoull(f[0], &used));
      if (used != f[0].size()) throw ParseError("bad node id", line_no);
      table.scores.push_back(std::stod(f[1], &used));
      if (used != f[1].size()) throw ParseError("bad score", line_no);
    } catch (const std::logic_error&) {
      throw ParseError("malformed number", line_no);
    }
    if (f[2] != "0" && f[2] != "1") throw ParseError("flag must be 0 or 1", line_no);
    table.flags.push_back(f[2] == "1");
  }
  return table;
}

std::string metrics_to_json(const MetricsReport& m) {
  nlohmann::ordered_json j;
  j["auc"] = m.auc;
  j["f1"] = m.f1;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  j["confusion"] = {{"tp", m.tp}, {"fp", m.fp}, {"tn", m.tn}, {"fn", m.fn}};
  j["undefined"] = {{"precision", m.precision_undefined},
                    {"recall", m.recall_undefined},
                    {"f1", m.f1_undefined}};
  return j.dump(2) + "\n";
}

}  // namespace gad
