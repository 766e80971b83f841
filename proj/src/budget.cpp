#include "albudget/budget.hpp"

#include <algorithm>
#include <cmath>

#include "albudget/error.hpp"

namespace albudget {

void validate_ledger(const BudgetLedger& ledger) {
  if (ledger.oracle_budget < 0) {
    fail(ErrorKind::invalid_config, "oracle budget must be nonnegative");
  }
  if (ledger.oracle_spent < 0 || ledger.oracle_spent > ledger.oracle_budget) {
    fail(ErrorKind::integrity, "ledger spent outside [0, budget]");
  }
  if (ledger.per_round_query_cap < 1) {
    fail(ErrorKind::invalid_config, "per-round query cap must be at least 1");
  }
  if (ledger.pseudo_cap_per_round < 0) {
    fail(ErrorKind::invalid_config, "pseudo cap must be nonnegative");
  }
  if (!std::isfinite(ledger.confidence_threshold) ||
      ledger.confidence_threshold <= 0.0 || ledger.confidence_threshold > 1.0) {
    fail(ErrorKind::invalid_config, "confidence threshold must lie in (0,1]");
  }
  if (ledger.pseudo_assigned_total < 0) {
    fail(ErrorKind::integrity, "negative pseudo-label count");
  }
}

std::vector<PseudoAssignment> assign_pseudo_labels(
    const std::map<std::int64_t, ProbVector>& probs, double tau, int cap) {
  if (!std::isfinite(tau) || tau <= 0.0 || tau > 1.0) {
    fail(ErrorKind::invalid_config, "confidence threshold must lie in (0,1]");
  }
  if (cap < 0) fail(ErrorKind::invalid_config, "pseudo cap must be nonnegative");

  std::vector<PseudoAssignment> picked;
  for (const auto& [id, p] : probs) {
    validate_prob_vector(p);
    const int label = argmax_class(p);
    const double confidence = p.probs[static_cast<std::size_t>(label)];
    if (confidence >= tau) picked.push_back({id, label, confidence});
  }
  std::sort(picked.begin(), picked.end(),
            [](const PseudoAssignment& a, const PseudoAssignment& b) {
              if (a.confidence != b.confidence) return a.confidence > b.confidence;
              return a.instance_id < b.instance_id;
            });
  if (picked.size() > static_cast<std::size_t>(cap)) {
    picked.resize(static_cast<std::size_t>(cap));
  }
  return picked;
}

void charge_queries(BudgetLedger& ledger, int n) {
  if (n < 0) fail(ErrorKind::bad_input, "query charge must be nonnegative");
  if (ledger.oracle_spent + n > ledger.oracle_budget) {
    fail(ErrorKind::budget_exhausted,
         "charge of " + std::to_string(n) + " would exceed budget " +
             std::to_string(ledger.oracle_budget) + " (spent " +
             std::to_string(ledger.oracle_spent) + ")");
  }
  ledger.oracle_spent += n;
}

int remaining_allowance(const BudgetLedger& ledger) {
  return std::min(ledger.oracle_budget - ledger.oracle_spent,
                  ledger.per_round_query_cap);
}

}  // namespace albudget
