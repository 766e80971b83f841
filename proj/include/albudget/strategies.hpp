#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "albudget/classifier.hpp"

namespace albudget {

enum class UncertaintyKind { entropy, margin, least_confidence };

const char* uncertainty_kind_name(UncertaintyKind kind);
UncertaintyKind uncertainty_kind_from_name(const std::string& name);

struct StrategyConfig {
  UncertaintyKind uncertainty = UncertaintyKind::entropy;
  double beta = 1.0;        // density exponent; 0 reduces to pure uncertainty
  int batch_k = 20;         // queries per round
  int density_sample = 2000;  // cap on pairwise comparisons per candidate
};

struct ScoredInstance {
  std::int64_t id = 0;
  double uncertainty = 0.0;  // [0,1]
  double density = 0.0;      // [-1,1]
  double hybrid = 0.0;       // uncertainty * max(density,0)^beta
};

// All three measures map one-hot to 0 and uniform to 1 exactly.
double entropy_uncertainty(const ProbVector& p);
double margin_uncertainty(const ProbVector& p);
double least_confidence(const ProbVector& p);
double uncertainty_score(UncertaintyKind kind, const ProbVector& p);

double hybrid_score(double uncertainty, double density, double beta);

// Ids of the min(k, |scored|) highest hybrid scores, ordered by
// (score desc, id asc); ties broken by lower id.
std::vector<std::int64_t> select_batch(std::span<const ScoredInstance> scored, int k);

// Mean cosine similarity between a candidate and a seeded subsample of the
// pool. Shared by the standalone density() and the per-round loop scorer so
// both produce identical values.
class PoolDensity {
 public:
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  PoolDensity(std::vector<std::span<const double>> pool, int sample_cap);

  // Scores `candidate` against the pool with the entry at `exclude_pos`
  // removed (npos keeps the whole pool). Pure; safe to call concurrently.
  double score(std::span<const double> candidate, std::size_t exclude_pos,
               std::uint64_t rng_seed) const;

  std::size_t pool_size() const { return pool_.size(); }

 private:
  std::vector<std::span<const double>> pool_;
  std::vector<double> norms_;
  int sample_cap_;
};

// Mean cosine similarity between candidate and min(|pool|, sample_cap) pool
// members sampled without replacement; zero-norm vectors contribute 0.
double density(std::span<const double> candidate,
               const std::vector<std::span<const double>>& pool, int sample_cap,
               std::uint64_t rng_seed);

}  // namespace albudget
