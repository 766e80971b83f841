#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace albudget {

struct Instance {
  std::int64_t id = 0;
  std::vector<double> features;
  int label = 0;  // ground truth; the engine reads it only through the oracle and evaluation

  std::span<const double> view() const { return {features.data(), features.size()}; }
};

// Immutable after load: train/test splits over dense ids 0..N-1, plus a
// content digest over the canonical CSV serialization.
struct Dataset {
  std::string name;
  int feature_dim = 0;
  int class_count = 0;
  std::vector<Instance> train;
  std::vector<Instance> test;
  std::string digest;

  std::size_t total_size() const { return train.size() + test.size(); }
  const Instance& train_by_id(std::int64_t id) const;

  // Validates invariants, builds the id index, computes the digest.
  void finalize();

 private:
  std::unordered_map<std::int64_t, std::size_t> train_index_;
};

struct SyntheticSpec {
  int class_count = 10;
  int feature_dim = 32;
  int per_class = 600;
  double separation = 6.0;
  double noise_sigma = 1.0;
  std::uint64_t rng_seed = 42;
};

// K isotropic Gaussian clusters; means drawn by seeded rejection so every
// pairwise distance is >= separation. 80/20 train/test split per class.
Dataset generate_synthetic(const SyntheticSpec& spec);

// Embedding CSV, format v1:
//   header   dim=<d>,classes=<K>
//   rows     <id>,<train|test>,<label>,<f0>,...,<f{d-1}>
// Feature values round-trip bit-exact (shortest decimal form). UTF-8, LF.
Dataset load_embedding_csv(const std::string& path);
std::string serialize_embedding_csv(const Dataset& dataset);
void write_embedding_csv(const Dataset& dataset, const std::string& path);

// FNV-1a 64 over the canonical serialization, as 16 hex digits.
std::string compute_dataset_digest(const Dataset& dataset);

std::string format_double(double value);         // shortest round-trip decimal
double parse_double(const std::string& token);   // strict; throws format error

}  // namespace albudget
