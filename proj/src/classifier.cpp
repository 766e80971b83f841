#include "albudget/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "albudget/error.hpp"
#include "albudget/rng.hpp"

namespace albudget {

namespace {

void compute_logits(const SoftmaxHead& head, std::span<const double> features,
                    std::vector<double>& logits) {
  const int k_count = head.class_count;
  const int d = head.feature_dim;
  logits.resize(static_cast<std::size_t>(k_count));
  for (int k = 0; k < k_count; ++k) {
    const double* row = head.weights.data() + static_cast<std::size_t>(k) * d;
    double z = head.bias[static_cast<std::size_t>(k)];
    for (int j = 0; j < d; ++j) z += row[j] * features[static_cast<std::size_t>(j)];
    logits[static_cast<std::size_t>(k)] = z;
  }
}

void check_features(const SoftmaxHead& head, std::span<const double> features) {
  if (static_cast<int>(features.size()) != head.feature_dim) {
    fail(ErrorKind::shape_mismatch, "feature dim " + std::to_string(features.size()) +
                                        ", head expects " + std::to_string(head.feature_dim));
  }
  for (double v : features) {
    if (!std::isfinite(v)) fail(ErrorKind::bad_input, "non-finite feature value");
  }
}

void check_batch(const SoftmaxHead& head, std::span<const TrainExample> batch) {
  if (batch.empty()) fail(ErrorKind::bad_input, "empty batch");
  double weight_sum = 0.0;
  for (const TrainExample& ex : batch) {
    check_features(head, ex.features);
    if (ex.label < 0 || ex.label >= head.class_count) {
      fail(ErrorKind::bad_input, "label " + std::to_string(ex.label) + " out of range");
    }
    if (!(ex.weight >= 0.0) || !std::isfinite(ex.weight)) {
      fail(ErrorKind::bad_input, "example weight must be finite and >= 0");
    }
    weight_sum += ex.weight;
  }
  if (weight_sum <= 0.0) fail(ErrorKind::degenerate_batch, "batch weights sum to zero");
}

// -log p(y) computed as logsumexp(z - zmax) - (z_y - zmax).
double example_nll(const std::vector<double>& logits, int label) {
  double z_max = logits[0];
  for (double z : logits) z_max = std::max(z_max, z);
  double sum = 0.0;
  for (double z : logits) sum += std::exp(z - z_max);
  return std::log(sum) - (logits[static_cast<std::size_t>(label)] - z_max);
}

void softmax_inplace(std::vector<double>& logits) {
  double z_max = logits[0];
  for (double z : logits) z_max = std::max(z_max, z);
  double sum = 0.0;
  for (double& z : logits) {
    z = std::exp(z - z_max);
    sum += z;
  }
  for (double& z : logits) z /= sum;
}

}  // namespace

void validate_prob_vector(const ProbVector& p) {
  if (p.probs.empty()) fail(ErrorKind::bad_input, "empty probability vector");
  double sum = 0.0;
  for (double v : p.probs) {
    if (!(v >= 0.0 && v <= 1.0)) {
      fail(ErrorKind::bad_input, "probability out of [0,1]: " + format_double(v));
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    fail(ErrorKind::bad_input, "probabilities sum to " + format_double(sum));
  }
}

int argmax_class(const ProbVector& p) {
  int best = 0;
  for (int k = 1; k < p.size(); ++k) {
    if (p.probs[static_cast<std::size_t>(k)] > p.probs[static_cast<std::size_t>(best)]) {
      best = k;
    }
  }
  return best;
}

SoftmaxHead SoftmaxHead::zeros(int class_count, int feature_dim) {
  if (class_count < 1 || feature_dim < 1) {
    fail(ErrorKind::invalid_config, "head dimensions must be positive");
  }
  SoftmaxHead head;
  head.class_count = class_count;
  head.feature_dim = feature_dim;
  head.weights.assign(static_cast<std::size_t>(class_count) * feature_dim, 0.0);
  head.bias.assign(static_cast<std::size_t>(class_count), 0.0);
  return head;
}

ProbVector predict_proba(const SoftmaxHead& head, std::span<const double> features) {
  check_features(head, features);
  ProbVector p;
  compute_logits(head, features, p.probs);
  softmax_inplace(p.probs);
  return p;
}

double nll_loss(const SoftmaxHead& head, std::span<const TrainExample> batch) {
  check_batch(head, batch);
  std::vector<double> logits;
  double loss_sum = 0.0;
  double weight_sum = 0.0;
  for (const TrainExample& ex : batch) {
    compute_logits(head, ex.features, logits);
    loss_sum += ex.weight * example_nll(logits, ex.label);
    weight_sum += ex.weight;
  }
  return loss_sum / weight_sum;
}

HeadGradients gradients(const SoftmaxHead& head, std::span<const TrainExample> batch) {
  check_batch(head, batch);
  const int k_count = head.class_count;
  const int d = head.feature_dim;

  HeadGradients grad;
  grad.weights.assign(head.weights.size(), 0.0);
  grad.bias.assign(head.bias.size(), 0.0);

  std::vector<double> probs;
  double weight_sum = 0.0;
  for (const TrainExample& ex : batch) {
    compute_logits(head, ex.features, probs);
    softmax_inplace(probs);
    weight_sum += ex.weight;
    for (int k = 0; k < k_count; ++k) {
      const double delta =
          ex.weight * (probs[static_cast<std::size_t>(k)] - (k == ex.label ? 1.0 : 0.0));
      grad.bias[static_cast<std::size_t>(k)] += delta;
      double* row = grad.weights.data() + static_cast<std::size_t>(k) * d;
      for (int j = 0; j < d; ++j) row[j] += delta * ex.features[static_cast<std::size_t>(j)];
    }
  }
  const double inv = 1.0 / weight_sum;
  for (double& g : grad.weights) g *= inv;
  for (double& g : grad.bias) g *= inv;
  return grad;
}

SoftmaxHead sgd_fit(const SoftmaxHead& head, std::span<const TrainExample> trainset,
                    const TrainConfig& config) {
  if (config.epochs < 1) fail(ErrorKind::invalid_config, "epochs must be >= 1");
  if (config.batch_size < 1) fail(ErrorKind::invalid_config, "batch_size must be >= 1");
  if (config.learning_rate < 0.0 || !std::isfinite(config.learning_rate)) {
    fail(ErrorKind::invalid_config, "learning_rate must be finite and >= 0");
  }
  check_batch(head, trainset);

  std::set<int> labels;
  for (const TrainExample& ex : trainset) labels.insert(ex.label);
  if (labels.size() < 2) {
    fail(ErrorKind::degenerate_training, "training set has a single class");
  }

  SoftmaxHead fitted = head;
  if (config.learning_rate == 0.0) return fitted;

  const std::size_t n = trainset.size();
  std::vector<std::size_t> order(n);
  std::vector<TrainExample> batch;
  batch.reserve(static_cast<std::size_t>(config.batch_size));

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(config.shuffle_seed ^ static_cast<std::uint64_t>(epoch));
    shuffle(order, rng);

    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop = std::min(n, start + static_cast<std::size_t>(config.batch_size));
      batch.clear();
      double weight_sum = 0.0;
      for (std::size_t i = start; i < stop; ++i) {
        batch.push_back(trainset[order[i]]);
        weight_sum += trainset[order[i]].weight;
      }
      if (weight_sum <= 0.0) continue;  // nothing to learn from an all-zero-weight batch

      const HeadGradients grad = gradients(fitted, batch);
      for (std::size_t i = 0; i < fitted.weights.size(); ++i) {
        fitted.weights[i] -= config.learning_rate * grad.weights[i];
      }
      for (std::size_t i = 0; i < fitted.bias.size(); ++i) {
        fitted.bias[i] -= config.learning_rate * grad.bias[i];
      }
    }
  }
  return fitted;
}

Metrics evaluate(const SoftmaxHead& head, std::span<const Instance> testset) {
  if (testset.empty()) fail(ErrorKind::bad_input, "empty test set");
  std::vector<double> logits;
  std::size_t correct = 0;
  double nll_sum = 0.0;
  for (const Instance& inst : testset) {
    check_features(head, inst.view());
    compute_logits(head, inst.view(), logits);
    nll_sum += example_nll(logits, inst.label);
    softmax_inplace(logits);
    int best = 0;
    for (int k = 1; k < head.class_count; ++k) {
      if (logits[static_cast<std::size_t>(k)] > logits[static_cast<std::size_t>(best)]) best = k;
    }
    if (best == inst.label) ++correct;
  }
  Metrics metrics;
  metrics.accuracy = static_cast<double>(correct) / static_cast<double>(testset.size());
  metrics.mean_nll = nll_sum / static_cast<double>(testset.size());
  return metrics;
}

}  // namespace albudget
