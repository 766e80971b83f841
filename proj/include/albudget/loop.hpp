#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "albudget/budget.hpp"
#include "albudget/classifier.hpp"
#include "albudget/dataset.hpp"
#include "albudget/oracle.hpp"
#include "albudget/pools.hpp"
#include "albudget/strategies.hpp"

namespace albudget {

struct RunConfig {
  StrategyConfig strategy;
  TrainConfig train;  // shuffle_seed is overwritten per round
  int seed_count = 100;
  int oracle_budget = 1000;
  double confidence_threshold = 0.95;
  int pseudo_cap_per_round = -1;  // negative resolves to 5 * batch_k
  bool pseudo_enabled = true;
  bool random_selection = false;  // passive baseline: uniform queries, no scoring
  double oracle_noise = 0.0;
  int rounds_limit = 0;  // 0 means unbounded; budget or pool exhaustion stops the run
  std::uint64_t rng_seed = 1;
};

int resolved_pseudo_cap(const RunConfig& config);
void validate_run_config(const RunConfig& config);

// Named presets for comparisons: "random" (passive, no pseudo),
// "uncertainty" (beta 0, no pseudo), "hybrid" (density-weighted, no pseudo),
// "hybrid_budget" (density-weighted plus pseudo-labels).
RunConfig strategy_variant(const RunConfig& base, const std::string& name);
const std::vector<std::string>& strategy_variant_names();

struct RoundRecord {
  int round = 0;
  double test_accuracy = 0.0;
  double train_loss = 0.0;  // weighted mean nll over this round's training batch
  int oracle_spent = 0;     // cumulative, after this round's queries
  int pseudo_count = 0;
  std::optional<double> pseudo_accuracy;  // vs hidden truth; absent without pseudo-labels
  std::int64_t wall_time_ms = 0;  // serialized as 0 so identical runs emit identical bytes

  bool operator==(const RoundRecord&) const = default;
};

struct RunSummary {
  int rounds = 0;
  int oracle_spent = 0;
  int labeled_count = 0;
  int pseudo_count = 0;
  double final_test_accuracy = 0.0;

  bool operator==(const RunSummary&) const = default;
};

struct RunReport {
  std::string dataset_digest;
  std::vector<RoundRecord> rounds;
  RunSummary summary;

  bool operator==(const RunReport&) const = default;
};

// Observation points for snapshotting and audit dumps; null members are
// skipped. on_round_end fires after state.round has advanced, so a snapshot
// taken there resumes at the next round.
struct RunHooks {
  std::function<void(int round, const std::vector<ScoredInstance>&)> on_scores;
  std::function<void(int round, const std::vector<std::int64_t>& ids,
                     const std::vector<int>& labels)>
      on_queries;
  std::function<void(int round, const std::vector<PseudoAssignment>&)> on_pseudo;
  std::function<void(const PoolState&, const BudgetLedger&, const SoftmaxHead&,
                     const RoundRecord&)>
      on_round_end;
};

// Uniform sample without replacement from the unlabeled pool, in draw order.
std::vector<std::int64_t> random_baseline_strategy(const PoolState& state, int k,
                                                   std::uint64_t rng_seed);

// One cycle: fit on labeled plus pseudo, score the pool, query up to the
// remaining allowance, rebuild pseudo-labels with the fresh head, evaluate.
// A zero allowance skips the query step; the round still trains and reports.
RoundRecord run_round(const Dataset& data, const RunConfig& config, PoolState& state,
                      SoftmaxHead& head, BudgetLedger& ledger, Oracle& oracle,
                      const RunHooks& hooks = {});

struct RunOutcome {
  RunReport report;
  SoftmaxHead head;  // final head, refit on everything the budget bought
  PoolState state;
  BudgetLedger ledger;
};

// Full experiment: seeded pools, zero head, rounds until the budget, the
// pool, or the round limit runs out. Deterministic under config.rng_seed.
RunOutcome run_experiment_full(const Dataset& data, const RunConfig& config,
                               const RunHooks& hooks = {});
RunReport run_experiment(const Dataset& data, const RunConfig& config,
                         const RunHooks& hooks = {});

struct NamedConfig {
  std::string name;
  RunConfig config;
};

struct CurvePoint {
  int round = 0;
  double mean_accuracy = 0.0;
  double sd_accuracy = 0.0;  // population standard deviation across seeds
  double mean_oracle_spent = 0.0;
};

struct ComparisonReport {
  std::string dataset_digest;
  std::vector<std::string> variant_names;
  std::vector<std::uint64_t> seeds;
  std::vector<std::vector<RunReport>> runs;        // [variant][seed]
  std::vector<std::vector<CurvePoint>> curves;     // [variant][round]
  std::vector<double> mean_final_accuracy;         // [variant]
  std::vector<double> sd_final_accuracy;           // [variant]
  std::vector<std::vector<double>> paired_final_diff;  // [variant][seed], vs variant 0
};

// Cross product of variants and seeds. With parallel=true runs fan out to a
// worker pool; results are joined in (variant, seed) order so the report is
// identical either way.
ComparisonReport compare_strategies(const Dataset& data,
                                    const std::vector<NamedConfig>& variants,
                                    const std::vector<std::uint64_t>& seeds,
                                    bool parallel = false);

}  // namespace albudget
