#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gad/graph.hpp"
#include "gad/matrix.hpp"
#include "gad/model.hpp"

namespace gad {

// Glorot-uniform weights (limit sqrt(6 / (fan_in + fan_out))); GAT attention
// vectors are drawn as a (2 d_out) x 1 matrix with the same rule.
std::vector<LayerParams> init_params(std::span<const std::size_t> dims, EncoderKind kind,
                                     std::uint64_t seed);

struct AdamState {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t t = 0;
  std::vector<std::vector<double>> m;  // lazily sized on the first step
  std::vector<std::vector<double>> v;
};

// One bias-corrected Adam update of every parameter tensor. Throws InputError
// on a shape mismatch and TrainingError on a non-finite gradient.
void adam_step(AdamState& state, std::span<const std::span<double>> params,
               std::span<const std::span<const double>> grads);

std::vector<std::span<double>> parameter_views(GAEModel& model);
std::vector<std::span<const double>> gradient_views(const ModelGradients& grads);

struct TrainConfig {
  int epochs = 200;
  double lr = 0.01;
  double lambda = 1e-4;
  std::uint64_t seed = 0;
  double neg_ratio = 1.0;
  std::size_t dense_limit = kDefaultDenseLimit;
  EncoderKind encoder_kind = EncoderKind::gat;
  std::vector<std::size_t> hidden_dims{64};
  std::size_t embed_dim = 32;
  bool self_loops = true;
  double leaky_slope = 0.2;
  int log_every = 1;

  // Throws ConfigError when epochs < 1, lr <= 0, or other fields are invalid.
  void validate() const;
};

struct TrainRecord {
  int epoch = 0;
  double recon = 0.0;
  double reg = 0.0;
  double total = 0.0;

  friend bool operator==(const TrainRecord&, const TrainRecord&) = default;
};

using TrainLog = std::vector<TrainRecord>;

struct TrainResult {
  GAEModel model;
  TrainLog log;
  LossMode loss_mode = LossMode::dense;
};

// Full-batch training: one forward/backward/Adam step per epoch. The loss of
// epoch e is measured before its update. Epoch 1, every log_every-th epoch,
// and the final epoch are logged. Graphs above dense_limit nodes use the
// sampled loss with a fresh negative sample per epoch. Throws TrainingError
// (with the last good epoch) if the loss or any parameter goes non-finite.
TrainResult train(const SparseGraph& g, const DenseMatrix& x, const TrainConfig& cfg);

// Header `epoch,recon,reg,total`; floats with 17 significant digits.
void write_train_log_csv(std::ostream& out, const TrainLog& log);
std::string format_double(double v);

}  // namespace gad
