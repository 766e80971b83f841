#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "albudget/classifier.hpp"

namespace albudget {

// Cost ledger for a run. Oracle queries cost 1 against oracle_budget;
// pseudo-labels cost nothing and are capped separately per round.
struct BudgetLedger {
  int oracle_budget = 1000;
  int oracle_spent = 0;
  int per_round_query_cap = 20;
  int pseudo_cap_per_round = 100;
  double confidence_threshold = 0.95;
  int pseudo_assigned_total = 0;
};

void validate_ledger(const BudgetLedger& ledger);

struct PseudoAssignment {
  std::int64_t instance_id = 0;
  int label = 0;          // argmax class, ties to the lowest index
  double confidence = 0.0;  // max predicted probability, >= threshold
};

// Instances whose top probability clears tau, sorted by confidence
// descending (ties by id ascending), truncated to cap. Costs nothing.
std::vector<PseudoAssignment> assign_pseudo_labels(
    const std::map<std::int64_t, ProbVector>& probs, double tau, int cap);

// Adds n to oracle_spent. Atomic: throws budget_exhausted and leaves the
// ledger untouched when the charge would exceed the budget.
void charge_queries(BudgetLedger& ledger, int n);

// min(budget - spent, per-round cap); what the current round may still query.
int remaining_allowance(const BudgetLedger& ledger);

}  // namespace albudget
