#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "actionscore/common.hpp"
#include "actionscore/trace.hpp"

namespace actionscore::toy {

// mt19937_64 with hand-pinned output transforms. The standard leaves
// normal/uniform distribution algorithms implementation-defined; traces are
// compared byte-for-byte, so the transforms are fixed here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform01();                            // [0, 1)
  double uniform(double lo, double hi);          // [lo, hi)
  double gaussian();                             // standard normal, Box-Muller
  std::int64_t below(std::int64_t n);            // uniform in [0, n)

 private:
  std::mt19937_64 gen_;
  double cached_gaussian_ = 0.0;
  bool has_cached_gaussian_ = false;
};

enum class Task { classify, multitask };

std::string_view task_name(Task task);

// Per-component trace names in ascending order: classify logs "loss",
// multitask logs "local" and "positive".
std::vector<std::string> task_components(Task task);

struct ToyTrainConfig {
  int dim = 2;
  int classes = 4;
  int points_per_class = 100;
  double spread = 5.0;       // distance scale of class centers (unit blobs)
  double noise_rate = 0.1;   // fraction of labels flipped, exact count
  int epochs = 100;
  double learning_rate = 0.05;
  int batch_size = 32;
  std::uint64_t seed = 1;
  Task task = Task::classify;
};

void validate_config(const ToyTrainConfig& config);

struct ToyPoint {
  std::vector<double> x;
  int label = 0;
};

struct ToyDataset {
  int dim = 0;
  int classes = 0;
  std::uint64_t seed = 0;
  std::vector<ToyPoint> points;
  std::vector<bool> noise_flags;  // true where the label was flipped
};

// C unit-variance Gaussian blobs of equal size, centers `spread` apart
// (evenly spaced on a circle in the first two dimensions; on a line when
// dim == 1). Exactly round(noise_rate * n) points, chosen by seed, get their
// label reassigned uniformly among the other classes. Deterministic per
// (config, seed).
ToyDataset generate_blobs(const ToyTrainConfig& config);

// Zero-padded positional id, e.g. sample_id(3, 400) == "p0003".
std::string sample_id(std::size_t index, std::size_t dataset_size);

// Class indices as text labels, keyed by positional sample id.
LabelMap dataset_labels(const ToyDataset& dataset);

// Ids of noise-flagged points, ascending.
std::vector<std::string> flagged_sample_ids(const ToyDataset& dataset);

// Linear model: class logits W x + b, plus a scalar regression head
// v . x + c used by the multitask loss.
struct ModelParams {
  int classes = 0;
  int dim = 0;
  std::vector<double> weights;      // classes x dim, row-major
  std::vector<double> bias;         // classes
  std::vector<double> reg_weights;  // dim
  double reg_bias = 0.0;

  static ModelParams zeros(int classes, int dim);
};

// Seeded uniform init in [-0.01, 0.01].
ModelParams init_params(const ToyTrainConfig& config, Rng& rng);

struct LossGrad {
  double loss = 0.0;
  ModelParams grad;
};

// Stabilized softmax cross-entropy -log softmax(Wx+b)[y] with its analytic
// gradient. Finite inputs never produce NaN.
LossGrad softmax_xent(const ModelParams& params, std::span<const double> x,
                      int label);

// 0.5 r^2 for |r| < 1, |r| - 0.5 otherwise.
double smooth_l1(double residual);

// Regression target used by the multitask demo: Euclidean norm of x.
double regression_target(std::span<const double> x);

struct MultitaskLoss {
  double total = 0.0;
  double positive = 0.0;  // cross-entropy component
  double local = 0.0;     // smooth-L1 regression component
  ModelParams grad;
};

// total = positive + local; gradient covers both heads.
MultitaskLoss multitask_loss(const ModelParams& params,
                             std::span<const double> x, int label,
                             double target);

// Mini-batch SGD on data generated from `config`; after every epoch n the
// current parameters score each eval sample and one record per
// (sample, component) is appended, samples and components in ascending
// order. Emits epochs * |eval| * |components| records. Any non-finite loss
// aborts with a diagnostic.
ModelParams train_and_trace(const ToyTrainConfig& config,
                            const ToyDataset& eval_set, TraceWriter& out);

}  // namespace actionscore::toy
