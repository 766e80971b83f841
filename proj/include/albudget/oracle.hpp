#pragma once

#include <cstdint>

#include "albudget/budget.hpp"
#include "albudget/dataset.hpp"
#include "albudget/rng.hpp"

namespace albudget {

struct OracleConfig {
  double noise_rate = 0.0;  // probability of returning a wrong class
  std::uint64_t rng_seed = 0;
};

// Ground-truth label source. Each query charges 1 to the ledger; with
// noise_rate > 0 the true label is replaced by a uniformly random different
// class. Identical (seed, query sequence) yields identical labels.
class Oracle {
 public:
  Oracle(const Dataset& data, OracleConfig config);

  // Throws budget_exhausted before revealing anything if the ledger has no
  // allowance left.
  int query(std::int64_t instance_id, BudgetLedger& ledger);

  const OracleConfig& config() const { return config_; }

 private:
  const Dataset* data_;
  OracleConfig config_;
  Rng rng_;
};

}  // namespace albudget
