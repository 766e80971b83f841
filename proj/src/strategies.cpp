#include "albudget/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "albudget/error.hpp"
#include "albudget/rng.hpp"

namespace albudget {

const char* uncertainty_kind_name(UncertaintyKind kind) {
  switch (kind) {
    case UncertaintyKind::entropy: return "entropy";
    case UncertaintyKind::margin: return "margin";
    case UncertaintyKind::least_confidence: return "lc";
  }
  fail(ErrorKind::bad_input, "unknown uncertainty kind");
}

UncertaintyKind uncertainty_kind_from_name(const std::string& name) {
  if (name == "entropy") return UncertaintyKind::entropy;
  if (name == "margin") return UncertaintyKind::margin;
  if (name == "lc") return UncertaintyKind::least_confidence;
  fail(ErrorKind::invalid_config, "unknown uncertainty measure: " + name);
}

namespace {

double clamp_unit(double x) { return std::min(1.0, std::max(0.0, x)); }

// Exact endpoints matter downstream; float rounding in the general formula
// must not push a uniform vector off 1.0.
bool all_equal(const std::vector<double>& p) {
  for (std::size_t i = 1; i < p.size(); ++i) {
    if (p[i] != p[0]) return false;
  }
  return true;
}

}  // namespace

double entropy_uncertainty(const ProbVector& p) {
  validate_prob_vector(p);
  const std::size_t k = p.size();
  if (k == 1) return 0.0;
  if (all_equal(p.probs)) return 1.0;
  double h = 0.0;
  for (double q : p.probs) {
    if (q > 0.0) h -= q * std::log(q);
  }
  return clamp_unit(h / std::log(static_cast<double>(k)));
}

double margin_uncertainty(const ProbVector& p) {
  validate_prob_vector(p);
  if (p.size() < 2) {
    fail(ErrorKind::undefined_measure, "margin needs at least two classes");
  }
  double top = -1.0, second = -1.0;
  for (double q : p.probs) {
    if (q > top) {
      second = top;
      top = q;
    } else if (q > second) {
      second = q;
    }
  }
  return clamp_unit(1.0 - (top - second));
}

double least_confidence(const ProbVector& p) {
  validate_prob_vector(p);
  const std::size_t k = p.size();
  if (k < 2) {
    fail(ErrorKind::undefined_measure, "least confidence needs at least two classes");
  }
  if (all_equal(p.probs)) return 1.0;
  double top = 0.0;
  for (double q : p.probs) top = std::max(top, q);
  const double kd = static_cast<double>(k);
  return clamp_unit((1.0 - top) * kd / (kd - 1.0));
}

double uncertainty_score(UncertaintyKind kind, const ProbVector& p) {
  switch (kind) {
    case UncertaintyKind::entropy: return entropy_uncertainty(p);
    case UncertaintyKind::margin: return margin_uncertainty(p);
    case UncertaintyKind::least_confidence: return least_confidence(p);
  }
  fail(ErrorKind::bad_input, "unknown uncertainty kind");
}

double hybrid_score(double uncertainty, double density, double beta) {
  if (!std::isfinite(uncertainty) || uncertainty < 0.0 || uncertainty > 1.0) {
    fail(ErrorKind::bad_input, "uncertainty outside [0,1]");
  }
  if (!std::isfinite(beta) || beta < 0.0) {
    fail(ErrorKind::invalid_config, "beta must be finite and nonnegative");
  }
  const double d = std::max(density, 0.0);
  // pow(0,0) == 1, so beta == 0 leaves the uncertainty untouched even for
  // nonpositive density.
  return uncertainty * std::pow(d, beta);
}

std::vector<std::int64_t> select_batch(std::span<const ScoredInstance> scored, int k) {
  if (k < 1) fail(ErrorKind::invalid_config, "batch size must be at least 1");
  std::vector<std::size_t> order(scored.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scored[a].hybrid != scored[b].hybrid) return scored[a].hybrid > scored[b].hybrid;
    return scored[a].id < scored[b].id;
  });
  const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k), scored.size());
  std::vector<std::int64_t> ids;
  ids.reserve(take);
  for (std::size_t i = 0; i < take; ++i) ids.push_back(scored[order[i]].id);
  return ids;
}

namespace {

double l2_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

PoolDensity::PoolDensity(std::vector<std::span<const double>> pool, int sample_cap)
    : pool_(std::move(pool)), sample_cap_(sample_cap) {
  if (sample_cap_ < 1) {
    fail(ErrorKind::invalid_config, "density sample cap must be at least 1");
  }
  norms_.reserve(pool_.size());
  for (const auto& v : pool_) norms_.push_back(l2_norm(v));
}

double PoolDensity::score(std::span<const double> candidate, std::size_t exclude_pos,
                          std::uint64_t rng_seed) const {
  std::size_t n = pool_.size();
  if (exclude_pos != npos) {
    if (exclude_pos >= n) fail(ErrorKind::bad_input, "exclude position out of range");
    n -= 1;
  }
  if (n == 0) {
    fail(ErrorKind::undefined_density, "density undefined against an empty pool");
  }
  const double cand_norm = l2_norm(candidate);

  // Logical index j skips the excluded slot.
  auto physical = [&](std::size_t j) {
    return (exclude_pos == npos || j < exclude_pos) ? j : j + 1;
  };

  const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(sample_cap_), n);
  Rng rng(rng_seed);
  auto picks = sample_without_replacement(n, take, rng);

  double sum = 0.0;
  for (std::size_t j : picks) {
    const std::size_t i = physical(j);
    const double denom = cand_norm * norms_[i];
    if (denom > 0.0) sum += dot(candidate, pool_[i]) / denom;
  }
  double mean = sum / static_cast<double>(take);
  return std::min(1.0, std::max(-1.0, mean));
}

double density(std::span<const double> candidate,
               const std::vector<std::span<const double>>& pool, int sample_cap,
               std::uint64_t rng_seed) {
  for (const auto& v : pool) {
    if (v.size() != candidate.size()) {
      fail(ErrorKind::shape_mismatch, "density pool member dimension mismatch");
    }
  }
  PoolDensity scorer(pool, sample_cap);
  return scorer.score(candidate, PoolDensity::npos, rng_seed);
}

}  // namespace albudget
