#include "albudget/oracle.hpp"

#include <cmath>

#include "albudget/error.hpp"

namespace albudget {

Oracle::Oracle(const Dataset& data, OracleConfig config)
    : data_(&data), config_(config), rng_(config.rng_seed) {
  if (!std::isfinite(config_.noise_rate) || config_.noise_rate < 0.0 ||
      config_.noise_rate > 1.0) {
    fail(ErrorKind::invalid_config, "noise rate must lie in [0,1]");
  }
}

int Oracle::query(std::int64_t instance_id, BudgetLedger& ledger) {
  if (remaining_allowance(ledger) < 1) {
    fail(ErrorKind::budget_exhausted, "no query allowance left");
  }
  const Instance& inst = data_->train_by_id(instance_id);
  charge_queries(ledger, 1);

  // One uniform draw per query keeps the stream aligned across noise rates.
  const double u = rng_.next_unit();
  if (u >= config_.noise_rate) return inst.label;

  const int k = data_->class_count;
  if (k < 2) return inst.label;  // no different class exists
  const auto r = static_cast<int>(rng_.next_index(static_cast<std::uint64_t>(k - 1)));
  return r >= inst.label ? r + 1 : r;
}

}  // namespace albudget
