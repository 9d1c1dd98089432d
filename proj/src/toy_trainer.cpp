#include "actionscore/toy_trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace actionscore::toy {

namespace {

// Keeps the training RNG stream distinct from the dataset RNG stream.
constexpr std::uint64_t kTrainerSeedSalt = 0x9e3779b97f4a7c15ULL;

void check_finite(double loss, std::string_view component,
                  std::string_view where, std::int64_t epoch) {
  if (!std::isfinite(loss)) {
    throw Error("training diverged: non-finite " + std::string(component) +
                " loss at epoch " + std::to_string(epoch) + " (" +
                std::string(where) + ")");
  }
}

std::vector<double> class_center(const ToyTrainConfig& config, int cls) {
  std::vector<double> center(static_cast<std::size_t>(config.dim), 0.0);
  if (config.dim == 1) {
    center[0] = config.spread * static_cast<double>(cls);
  } else {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(cls) /
                         static_cast<double>(config.classes);
    center[0] = config.spread * std::cos(angle);
    center[1] = config.spread * std::sin(angle);
  }
  return center;
}

void axpy(double alpha, const ModelParams& g, ModelParams& p) {
  for (std::size_t i = 0; i < p.weights.size(); ++i) {
    p.weights[i] += alpha * g.weights[i];
  }
  for (std::size_t i = 0; i < p.bias.size(); ++i) {
    p.bias[i] += alpha * g.bias[i];
  }
  for (std::size_t i = 0; i < p.reg_weights.size(); ++i) {
    p.reg_weights[i] += alpha * g.reg_weights[i];
  }
  p.reg_bias += alpha * g.reg_bias;
}

}  // namespace

double Rng::uniform01() {
  // 53-bit mantissa read, the usual bit-exact construction.
  return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform01();
}

double Rng::gaussian() {
  if (has_cached_gaussian_) {
    has_cached_gaussian_ = false;
    return cached_gaussian_;
  }
  double u1 = uniform01();
  while (u1 == 0.0) u1 = uniform01();
  const double u2 = uniform01();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_gaussian_ = radius * std::sin(angle);
  has_cached_gaussian_ = true;
  return radius * std::cos(angle);
}

std::int64_t Rng::below(std::int64_t n) {
  if (n <= 0) throw Error("Rng::below: n must be positive");
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t draw = gen_();
  while (draw >= limit) draw = gen_();
  return static_cast<std::int64_t>(draw % bound);
}

std::string_view task_name(Task task) {
  return task == Task::classify ? "classify" : "multitask";
}

std::vector<std::string> task_components(Task task) {
  if (task == Task::classify) return {"loss"};
  return {"local", "positive"};
}

void validate_config(const ToyTrainConfig& config) {
  if (config.dim < 1) throw Error("config: dim must be >= 1");
  if (config.classes < 2) throw Error("config: classes must be >= 2");
  if (config.points_per_class < 1) {
    throw Error("config: points_per_class must be >= 1");
  }
  if (!(config.spread > 0.0)) throw Error("config: spread must be positive");
  if (!(config.noise_rate >= 0.0 && config.noise_rate < 1.0)) {
    throw Error("config: noise_rate must be in [0, 1)");
  }
  if (config.epochs < 1) throw Error("config: epochs must be >= 1");
  if (!(config.learning_rate >= 0.0)) {
    throw Error("config: learning_rate must be non-negative");
  }
  if (config.batch_size < 1) throw Error("config: batch_size must be >= 1");
}

ToyDataset generate_blobs(const ToyTrainConfig& config) {
  validate_config(config);
  Rng rng(config.seed);

  ToyDataset dataset;
  dataset.dim = config.dim;
  dataset.classes = config.classes;
  dataset.seed = config.seed;
  const std::size_t total = static_cast<std::size_t>(config.classes) *
                            static_cast<std::size_t>(config.points_per_class);
  dataset.points.reserve(total);

  for (int cls = 0; cls < config.classes; ++cls) {
    const std::vector<double> center = class_center(config, cls);
    for (int i = 0; i < config.points_per_class; ++i) {
      ToyPoint point;
      point.label = cls;
      point.x.resize(static_cast<std::size_t>(config.dim));
      for (std::size_t d = 0; d < point.x.size(); ++d) {
        point.x[d] = center[d] + rng.gaussian();
      }
      dataset.points.push_back(std::move(point));
    }
  }
  dataset.noise_flags.assign(total, false);

  const std::int64_t flips =
      std::llround(config.noise_rate * static_cast<double>(total));
  if (flips > 0) {
    // Partial Fisher-Yates picks exactly `flips` distinct indices.
    std::vector<std::size_t> order(total);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::int64_t i = 0; i < flips; ++i) {
      const std::int64_t j =
          i + rng.below(static_cast<std::int64_t>(total) - i);
      std::swap(order[static_cast<std::size_t>(i)],
                order[static_cast<std::size_t>(j)]);
      const std::size_t pick = order[static_cast<std::size_t>(i)];
      ToyPoint& point = dataset.points[pick];
      const std::int64_t other = rng.below(config.classes - 1);
      point.label = other >= point.label ? static_cast<int>(other) + 1
                                         : static_cast<int>(other);
      dataset.noise_flags[pick] = true;
    }
  }
  return dataset;
}

std::string sample_id(std::size_t index, std::size_t dataset_size) {
  const std::size_t max_index = dataset_size == 0 ? 0 : dataset_size - 1;
  // Fixed width keeps byte order equal to index order.
  const std::size_t width =
      std::max<std::size_t>(4, std::to_string(max_index).size());
  std::string digits = std::to_string(index);
  if (digits.size() < width) {
    digits.insert(0, width - digits.size(), '0');
  }
  return "p" + digits;
}

LabelMap dataset_labels(const ToyDataset& dataset) {
  LabelMap labels;
  for (std::size_t i = 0; i < dataset.points.size(); ++i) {
    labels.entries[sample_id(i, dataset.points.size())] = {
        std::to_string(dataset.points[i].label), ""};
  }
  return labels;
}

std::vector<std::string> flagged_sample_ids(const ToyDataset& dataset) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < dataset.points.size(); ++i) {
    if (dataset.noise_flags[i]) {
      ids.push_back(sample_id(i, dataset.points.size()));
    }
  }
  return ids;
}

ModelParams ModelParams::zeros(int classes, int dim) {
  ModelParams params;
  params.classes = classes;
  params.dim = dim;
  params.weights.assign(static_cast<std::size_t>(classes) *
                            static_cast<std::size_t>(dim),
                        0.0);
  params.bias.assign(static_cast<std::size_t>(classes), 0.0);
  params.reg_weights.assign(static_cast<std::size_t>(dim), 0.0);
  params.reg_bias = 0.0;
  return params;
}

ModelParams init_params(const ToyTrainConfig& config, Rng& rng) {
  ModelParams params = ModelParams::zeros(config.classes, config.dim);
  for (auto& w : params.weights) w = rng.uniform(-0.01, 0.01);
  for (auto& b : params.bias) b = rng.uniform(-0.01, 0.01);
  if (config.task == Task::multitask) {
    for (auto& w : params.reg_weights) w = rng.uniform(-0.01, 0.01);
    params.reg_bias = rng.uniform(-0.01, 0.01);
  }
  return params;
}

LossGrad softmax_xent(const ModelParams& params, std::span<const double> x,
                      int label) {
  const std::size_t classes = static_cast<std::size_t>(params.classes);
  const std::size_t dim = static_cast<std::size_t>(params.dim);
  if (x.size() != dim) throw Error("softmax_xent: dimension mismatch");
  if (label < 0 || label >= params.classes) {
    throw Error("softmax_xent: label out of range");
  }

  std::vector<double> logits(classes, 0.0);
  for (std::size_t c = 0; c < classes; ++c) {
    double z = params.bias[c];
    for (std::size_t d = 0; d < dim; ++d) {
      z += params.weights[c * dim + d] * x[d];
    }
    logits[c] = z;
  }
  const double z_max = *std::max_element(logits.begin(), logits.end());
  double denom = 0.0;
  for (double z : logits) denom += std::exp(z - z_max);

  LossGrad result;
  result.loss = -(logits[static_cast<std::size_t>(label)] - z_max -
                  std::log(denom));
  result.grad = ModelParams::zeros(params.classes, params.dim);
  for (std::size_t c = 0; c < classes; ++c) {
    const double p = std::exp(logits[c] - z_max) / denom;
    const double delta = p - (static_cast<int>(c) == label ? 1.0 : 0.0);
    result.grad.bias[c] = delta;
    for (std::size_t d = 0; d < dim; ++d) {
      result.grad.weights[c * dim + d] = delta * x[d];
    }
  }
  return result;
}

double smooth_l1(double residual) {
  const double a = std::abs(residual);
  return a < 1.0 ? 0.5 * residual * residual : a - 0.5;
}

double regression_target(std::span<const double> x) {
  double sum = 0.0;
  for (double v : x) sum += v * v;
  return std::sqrt(sum);
}

MultitaskLoss multitask_loss(const ModelParams& params,
                             std::span<const double> x, int label,
                             double target) {
  MultitaskLoss result;
  LossGrad xent = softmax_xent(params, x, label);
  result.positive = xent.loss;
  result.grad = std::move(xent.grad);

  double prediction = params.reg_bias;
  for (std::size_t d = 0; d < x.size(); ++d) {
    prediction += params.reg_weights[d] * x[d];
  }
  const double residual = prediction - target;
  result.local = smooth_l1(residual);
  const double dloss = std::abs(residual) < 1.0
                           ? residual
                           : (residual > 0.0 ? 1.0 : -1.0);
  for (std::size_t d = 0; d < x.size(); ++d) {
    result.grad.reg_weights[d] = dloss * x[d];
  }
  result.grad.reg_bias = dloss;

  result.total = result.positive + result.local;
  return result;
}

ModelParams train_and_trace(const ToyTrainConfig& config,
                            const ToyDataset& eval_set, TraceWriter& out) {
  validate_config(config);
  if (eval_set.points.empty()) {
    throw Error("train_and_trace: eval set is empty");
  }
  const std::vector<std::string> components = task_components(config.task);
  if (out.header().declared_components != components) {
    throw Error("train_and_trace: trace header components do not match task");
  }

  const ToyDataset train_set = generate_blobs(config);
  const std::size_t n = train_set.points.size();

  Rng rng(config.seed ^ kTrainerSeedSalt);
  ModelParams params = init_params(config, rng);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const std::int64_t j =
          static_cast<std::int64_t>(i) +
          rng.below(static_cast<std::int64_t>(n - i));
      std::swap(order[i], order[static_cast<std::size_t>(j)]);
    }

    for (std::size_t start = 0; start < n;
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop =
          std::min(n, start + static_cast<std::size_t>(config.batch_size));
      ModelParams grad_sum = ModelParams::zeros(config.classes, config.dim);
      for (std::size_t i = start; i < stop; ++i) {
        const ToyPoint& point = train_set.points[order[i]];
        if (config.task == Task::classify) {
          LossGrad lg = softmax_xent(params, point.x, point.label);
          check_finite(lg.loss, "loss", "train", epoch);
          axpy(1.0, lg.grad, grad_sum);
        } else {
          MultitaskLoss ml = multitask_loss(params, point.x, point.label,
                                            regression_target(point.x));
          check_finite(ml.total, "total", "train", epoch);
          axpy(1.0, ml.grad, grad_sum);
        }
      }
      const double scale =
          -config.learning_rate / static_cast<double>(stop - start);
      axpy(scale, grad_sum, params);
    }

    // End-of-epoch evaluation at one coherent parameter vector; records go
    // out in ascending (sample, component) order.
    for (std::size_t i = 0; i < eval_set.points.size(); ++i) {
      const ToyPoint& point = eval_set.points[i];
      const std::string id = sample_id(i, eval_set.points.size());
      if (config.task == Task::classify) {
        const LossGrad lg = softmax_xent(params, point.x, point.label);
        check_finite(lg.loss, "loss", "eval sample " + id, epoch);
        out.append({epoch, id, "loss", lg.loss});
      } else {
        const MultitaskLoss ml = multitask_loss(params, point.x, point.label,
                                                regression_target(point.x));
        check_finite(ml.local, "local", "eval sample " + id, epoch);
        check_finite(ml.positive, "positive", "eval sample " + id, epoch);
        out.append({epoch, id, "local", ml.local});
        out.append({epoch, id, "positive", ml.positive});
      }
    }
  }
  return params;
}

}  // namespace actionscore::toy
