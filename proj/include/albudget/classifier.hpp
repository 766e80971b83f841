#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "albudget/dataset.hpp"

namespace albudget {

// Class-probability distribution; entries in [0,1] summing to 1 within 1e-9.
struct ProbVector {
  std::vector<double> probs;

  int size() const { return static_cast<int>(probs.size()); }
};

void validate_prob_vector(const ProbVector& p);

// Index of the largest probability; ties resolve to the lowest class.
int argmax_class(const ProbVector& p);

// The trainable output layer: K x d weights plus per-class bias, the only
// parameters in the system. Features stay frozen.
struct SoftmaxHead {
  int class_count = 0;
  int feature_dim = 0;
  std::vector<double> weights;  // row-major, class-major
  std::vector<double> bias;

  static SoftmaxHead zeros(int class_count, int feature_dim);

  double weight(int k, int j) const {
    return weights[static_cast<std::size_t>(k) * static_cast<std::size_t>(feature_dim) +
                   static_cast<std::size_t>(j)];
  }
};

struct TrainConfig {
  int epochs = 15;
  int batch_size = 32;
  double learning_rate = 0.05;
  std::uint64_t shuffle_seed = 0;
  double pseudo_weight = 1.0;  // weight applied to pseudo-labeled examples
};

struct TrainExample {
  std::span<const double> features;
  int label = 0;
  double weight = 1.0;
};

struct HeadGradients {
  std::vector<double> weights;  // same layout as SoftmaxHead::weights
  std::vector<double> bias;
};

struct Metrics {
  double accuracy = 0.0;
  double mean_nll = 0.0;
};

// softmax(W x + b), stabilized by max-logit subtraction.
ProbVector predict_proba(const SoftmaxHead& head, std::span<const double> features);

// Weighted mean of -log p(label | x) over the batch.
double nll_loss(const SoftmaxHead& head, std::span<const TrainExample> batch);

// Exact gradient of nll_loss: weighted mean of outer(p - onehot(y), x).
HeadGradients gradients(const SoftmaxHead& head, std::span<const TrainExample> batch);

// Mini-batch SGD, warm-started from `head`. Epoch e shuffles with
// shuffle_seed XOR e; batches and reductions run in a fixed order, so
// identical inputs give a bitwise-identical result.
SoftmaxHead sgd_fit(const SoftmaxHead& head, std::span<const TrainExample> trainset,
                    const TrainConfig& config);

// Accuracy (argmax, ties to lowest class) and unweighted mean NLL.
Metrics evaluate(const SoftmaxHead& head, std::span<const Instance> testset);

}  // namespace albudget
