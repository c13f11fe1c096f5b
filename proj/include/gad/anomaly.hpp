#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gad/graph.hpp"
#include "gad/matrix.hpp"

namespace gad {

enum class ScoreMode { dense, sampled };

std::string to_string(ScoreMode mode);

// Per-node reconstruction error.
//   dense:   score(i) = (1/N) sum_j (A_ij - sigmoid(z_i.z_j))^2, diagonal included
//   sampled: mean squared error over node i's edges plus k = max(deg(i), 16)
//            non-neighbors drawn without replacement (all of them if fewer)
struct AnomalyScores {
  std::vector<double> values;
  ScoreMode mode = ScoreMode::dense;
};

inline constexpr std::size_t kMinSampledNonNeighbors = 16;

// Sampled mode is deterministic given seed and independent of thread count.
AnomalyScores node_scores(const SparseGraph& g, const DenseMatrix& z, ScoreMode mode,
                          std::uint64_t seed = 0);

struct ThresholdPolicy {
  enum class Kind { fixed, contamination };
  Kind kind = Kind::contamination;
  double value = 0.05;  // the threshold (fixed) or the rate q (contamination)

  static ThresholdPolicy fixed(double threshold) { return {Kind::fixed, threshold}; }
  static ThresholdPolicy contamination(double rate) { return {Kind::contamination, rate}; }
};

// fixed -> the value; contamination(q) -> the (1-q)-quantile of the scores
// with linear interpolation between order statistics. Warns when all scores
// are equal (strict comparison then flags nothing). Throws InputError on
// empty scores and ConfigError when q is outside (0,1) or a fixed value < 0.
double select_threshold(const std::vector<double>& scores, const ThresholdPolicy& policy);

// flag(i) = score(i) > threshold
std::vector<bool> classify(const std::vector<double>& scores, double threshold);

using Labels = std::vector<std::uint8_t>;

// Mann-Whitney U of the positive class with midranks for ties.
double mann_whitney_u(const std::vector<double>& scores, const Labels& labels);

// P(random positive outranks random negative), ties count 1/2. Throws
// UndefinedMetricError unless both classes are present.
double roc_auc(const std::vector<double>& scores, const Labels& labels);

struct MetricsReport {
  double auc = 0.0;
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  // Set when the metric's denominator was zero and 0 was reported instead.
  bool precision_undefined = false;
  bool recall_undefined = false;
  bool f1_undefined = false;
};

// Fills the confusion counts, precision, recall, and f1 (auc untouched).
// Throws InputError on a length mismatch.
MetricsReport precision_recall_f1(const std::vector<bool>& flags, const Labels& labels);

// Confusion-based metrics plus AUC.
MetricsReport evaluate_metrics(const std::vector<double>& scores, const std::vector<bool>& flags,
                               const Labels& labels);

// CSV `node_id,score,flag`; node_id is the original id from `original_ids`
// (dense ids when empty), scores with 17 significant digits, flag as 0/1.
void write_scores_csv(std::ostream& out, const std::vector<double>& scores,
                      const std::vector<bool>& flags,
                      const std::vector<std::uint64_t>& original_ids = {});

struct ScoreTable {
  std::vector<std::uint64_t> node_ids;
  std::vector<double> scores;
  std::vector<bool> flags;
};

// Throws ParseError (with line number) on malformed input.
ScoreTable read_scores_csv(std::istream& in);

// JSON document with auc, f1, precision, recall, and a confusion object.
std::string metrics_to_json(const MetricsReport& m);

}  // namespace gad
