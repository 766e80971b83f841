#include "albudget/loop.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <thread>
#include <utility>

#include "albudget/error.hpp"
#include "albudget/rng.hpp"

namespace albudget {

int resolved_pseudo_cap(const RunConfig& config) {
  if (config.pseudo_cap_per_round >= 0) return config.pseudo_cap_per_round;
  return 5 * config.strategy.batch_k;
}

void validate_run_config(const RunConfig& config) {
  const StrategyConfig& s = config.strategy;
  if (s.batch_k < 1) fail(ErrorKind::invalid_config, "batch size must be at least 1");
  if (!std::isfinite(s.beta) || s.beta < 0.0) {
    fail(ErrorKind::invalid_config, "beta must be finite and nonnegative");
  }
  if (s.density_sample < 1) {
    fail(ErrorKind::invalid_config, "density sample cap must be at least 1");
  }
  if (config.seed_count < 1) {
    fail(ErrorKind::invalid_config, "seed count must be at least 1");
  }
  if (config.oracle_budget < 0) {
    fail(ErrorKind::invalid_config, "budget must be nonnegative");
  }
  if (!std::isfinite(config.confidence_threshold) ||
      config.confidence_threshold <= 0.0 || config.confidence_threshold > 1.0) {
    fail(ErrorKind::invalid_config, "confidence threshold must lie in (0,1]");
  }
  if (!std::isfinite(config.oracle_noise) || config.oracle_noise < 0.0 ||
      config.oracle_noise > 1.0) {
    fail(ErrorKind::invalid_config, "noise rate must lie in [0,1]");
  }
  if (config.rounds_limit < 0) {
    fail(ErrorKind::invalid_config, "rounds limit must be nonnegative");
  }
  const TrainConfig& t = config.train;
  if (t.epochs < 1) fail(ErrorKind::invalid_config, "epochs must be at least 1");
  if (t.batch_size < 1) fail(ErrorKind::invalid_config, "train batch size must be at least 1");
  if (!std::isfinite(t.learning_rate) || t.learning_rate <= 0.0) {
    fail(ErrorKind::invalid_config, "learning rate must be positive");
  }
  if (!std::isfinite(t.pseudo_weight) || t.pseudo_weight < 0.0) {
    fail(ErrorKind::invalid_config, "pseudo weight must be finite and nonnegative");
  }
}

const std::vector<std::string>& strategy_variant_names() {
  static const std::vector<std::string> names{"random", "uncertainty", "hybrid",
                                              "hybrid_budget"};
  return names;
}

RunConfig strategy_variant(const RunConfig& base, const std::string& name) {
  RunConfig v = base;
  v.random_selection = false;
  if (name == "random") {
    v.random_selection = true;
    v.pseudo_enabled = false;
  } else if (name == "uncertainty") {
    v.strategy.beta = 0.0;
    v.pseudo_enabled = false;
  } else if (name == "hybrid") {
    v.pseudo_enabled = false;
  } else if (name == "hybrid_budget") {
    v.pseudo_enabled = true;
  } else {
    fail(ErrorKind::invalid_config, "unknown strategy variant: " + name);
  }
  return v;
}

std::vector<std::int64_t> random_baseline_strategy(const PoolState& state, int k,
                                                   std::uint64_t rng_seed) {
  if (k < 1) fail(ErrorKind::invalid_config, "batch size must be at least 1");
  if (state.unlabeled.empty()) {
    fail(ErrorKind::pool_exhausted, "unlabeled pool is empty");
  }
  const auto ids = state.unlabeled_ids();
  Rng rng(rng_seed);
  const auto take = std::min<std::size_t>(static_cast<std::size_t>(k), ids.size());
  const auto picks = sample_without_replacement(ids.size(), take, rng);
  std::vector<std::int64_t> out;
  out.reserve(picks.size());
  for (std::size_t i : picks) out.push_back(ids[i]);
  return out;
}

namespace {

std::vector<TrainExample> training_batch(const Dataset& data, const PoolState& state,
                                         double pseudo_weight) {
  std::vector<TrainExample> batch;
  batch.reserve(state.labeled.size() + state.pseudo.size());
  for (const auto& [id, rec] : state.labeled) {
    batch.push_back({data.train_by_id(id).view(), rec.label, 1.0});
  }
  for (const auto& [id, rec] : state.pseudo) {
    batch.push_back({data.train_by_id(id).view(), rec.label, pseudo_weight});
  }
  return batch;
}

std::vector<ScoredInstance> score_pool(const Dataset& data, const RunConfig& config,
                                       const PoolState& state, const SoftmaxHead& head,
                                       int round) {
  const auto ids = state.unlabeled_ids();
  const bool use_density = config.strategy.beta > 0.0 && ids.size() > 1;

  std::vector<std::span<const double>> pool;
  std::optional<PoolDensity> scorer;
  if (use_density) {
    pool.reserve(ids.size());
    for (std::int64_t id : ids) pool.push_back(data.train_by_id(id).view());
    scorer.emplace(std::move(pool), config.strategy.density_sample);
  }
  const std::uint64_t round_seed =
      mix_seed(config.rng_seed, seed_tag::density, static_cast<std::uint64_t>(round));

  std::vector<ScoredInstance> scored(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const Instance& inst = data.train_by_id(ids[i]);
    const ProbVector p = predict_proba(head, inst.view());
    const double u = uncertainty_score(config.strategy.uncertainty, p);
    // A sole survivor has no pool to compare against; its selection is
    // forced anyway, so its density reads 0.
    double d = 0.0;
    if (use_density) {
      d = scorer->score(inst.view(), i,
                        mix_seed(round_seed, static_cast<std::uint64_t>(ids[i])));
    }
    scored[i] = {ids[i], u, d, hybrid_score(u, d, config.strategy.beta)};
  }
  return scored;
}

TrainConfig round_train_config(const RunConfig& config, int round) {
  TrainConfig tc = config.train;
  tc.shuffle_seed =
      mix_seed(config.rng_seed, seed_tag::train, static_cast<std::uint64_t>(round));
  return tc;
}

}  // namespace

RoundRecord run_round(const Dataset& data, const RunConfig& config, PoolState& state,
                      SoftmaxHead& head, BudgetLedger& ledger, Oracle& oracle,
                      const RunHooks& hooks) {
  if (state.unlabeled.empty()) {
    fail(ErrorKind::pool_exhausted, "unlabeled pool is empty");
  }
  const int round = state.round;

  // Fit on everything labeled so far, pseudo overlay included.
  const auto batch = training_batch(data, state, config.train.pseudo_weight);
  head = sgd_fit(head, batch, round_train_config(config, round));
  const double train_loss = nll_loss(head, batch);

  // Pick this round's queries; a zero allowance skips the query step.
  const int want = std::min(config.strategy.batch_k, remaining_allowance(ledger));
  std::vector<std::int64_t> picks;
  if (config.random_selection) {
    if (want >= 1) {
      picks = random_baseline_strategy(
          state, want,
          mix_seed(config.rng_seed, seed_tag::random_query,
                   static_cast<std::uint64_t>(round)));
    }
  } else {
    const auto scored = score_pool(data, config, state, head, round);
    if (hooks.on_scores) hooks.on_scores(round, scored);
    if (want >= 1) picks = select_batch(scored, want);
  }

  if (!picks.empty()) {
    std::vector<int> labels;
    std::vector<std::pair<std::int64_t, int>> assignments;
    labels.reserve(picks.size());
    assignments.reserve(picks.size());
    for (std::int64_t id : picks) {
      const int label = oracle.query(id, ledger);
      labels.push_back(label);
      assignments.emplace_back(id, label);
    }
    commit_oracle_labels(state, assignments, round);
    if (hooks.on_queries) hooks.on_queries(round, picks, labels);
  }

  // Rebuild the pseudo set from the head trained this round.
  int pseudo_count = 0;
  std::optional<double> pseudo_accuracy;
  if (config.pseudo_enabled && !state.unlabeled.empty()) {
    std::map<std::int64_t, ProbVector> probs;
    for (std::int64_t id : state.unlabeled) {
      probs.emplace(id, predict_proba(head, data.train_by_id(id).view()));
    }
    const auto assigned = assign_pseudo_labels(probs, ledger.confidence_threshold,
                                               ledger.pseudo_cap_per_round);
    std::vector<LabelRecord> records;
    records.reserve(assigned.size());
    int correct = 0;
    for (const PseudoAssignment& a : assigned) {
      records.push_back({a.instance_id, a.label, LabelSource::pseudo, round, a.confidence});
      if (a.label == data.train_by_id(a.instance_id).label) ++correct;
    }
    rebuild_pseudo_set(state, records);
    ledger.pseudo_assigned_total += static_cast<int>(assigned.size());
    pseudo_count = static_cast<int>(assigned.size());
    if (pseudo_count > 0) {
      pseudo_accuracy = static_cast<double>(correct) / pseudo_count;
    }
    if (hooks.on_pseudo) hooks.on_pseudo(round, assigned);
  } else {
    rebuild_pseudo_set(state, {});
  }

  const Metrics metrics = evaluate(head, data.test);
  const RoundRecord record{round,        metrics.accuracy, train_loss,
                           ledger.oracle_spent, pseudo_count, pseudo_accuracy,
                           0};

  state.round = round + 1;
  if (hooks.on_round_end) hooks.on_round_end(state, ledger, head, record);
  return record;
}

RunOutcome run_experiment_full(const Dataset& data, const RunConfig& config,
                               const RunHooks& hooks) {
  validate_run_config(config);
  if (data.test.empty()) fail(ErrorKind::bad_input, "dataset has no test split");

  PoolState state =
      init_pools(data, config.seed_count, mix_seed(config.rng_seed, seed_tag::pools));
  SoftmaxHead head = SoftmaxHead::zeros(data.class_count, data.feature_dim);
  BudgetLedger ledger{config.oracle_budget,          0,
                      config.strategy.batch_k,       resolved_pseudo_cap(config),
                      config.confidence_threshold,   0};
  validate_ledger(ledger);
  Oracle oracle(data, {config.oracle_noise, mix_seed(config.rng_seed, seed_tag::oracle)});

  RunReport report;
  report.dataset_digest = data.digest;
  int spent_at_last_fit = 0;
  while (!state.unlabeled.empty()) {
    spent_at_last_fit = ledger.oracle_spent;
    report.rounds.push_back(run_round(data, config, state, head, ledger, oracle, hooks));
    if (config.rounds_limit > 0 &&
        static_cast<int>(report.rounds.size()) >= config.rounds_limit) {
      break;
    }
    if (ledger.oracle_spent >= ledger.oracle_budget) break;
  }

  // Labels bought in the final round were never trained on; refit so the
  // summary reflects every purchase. Also covers the zero-round edge where
  // seeding consumed the whole pool.
  double final_accuracy;
  if (report.rounds.empty() || ledger.oracle_spent > spent_at_last_fit) {
    const auto batch = training_batch(data, state, config.train.pseudo_weight);
    head = sgd_fit(head, batch,
                   round_train_config(config, static_cast<int>(report.rounds.size())));
    final_accuracy = evaluate(head, data.test).accuracy;
  } else {
    final_accuracy = report.rounds.back().test_accuracy;
  }

  report.summary = {static_cast<int>(report.rounds.size()), ledger.oracle_spent,
                    static_cast<int>(state.labeled.size()),
                    static_cast<int>(state.pseudo.size()), final_accuracy};
  return {std::move(report), std::move(head), std::move(state), ledger};
}

RunReport run_experiment(const Dataset& data, const RunConfig& config,
                         const RunHooks& hooks) {
  return run_experiment_full(data, config, hooks).report;
}

namespace {

double mean_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double population_sd(const std::vector<double>& xs, double mean) {
  double s = 0.0;
  for (double x : xs) s += (x - mean) * (x - mean);
  return std::sqrt(s / static_cast<double>(xs.size()));
}

}  // namespace

ComparisonReport compare_strategies(const Dataset& data,
                                    const std::vector<NamedConfig>& variants,
                                    const std::vector<std::uint64_t>& seeds,
                                    bool parallel) {
  if (variants.size() < 2) {
    fail(ErrorKind::invalid_config, "comparison needs at least two variants");
  }
  if (seeds.empty()) {
    fail(ErrorKind::invalid_config, "comparison needs at least one seed");
  }
  for (std::size_t i = 0; i < variants.size(); ++i) {
    for (std::size_t j = i + 1; j < variants.size(); ++j) {
      if (variants[i].name == variants[j].name) {
        fail(ErrorKind::invalid_config, "duplicate variant name: " + variants[i].name);
      }
    }
    validate_run_config(variants[i].config);
  }

  const std::size_t total = variants.size() * seeds.size();
  std::vector<RunReport> flat(total);
  auto job = [&](std::size_t idx) {
    const std::size_t vi = idx / seeds.size();
    const std::size_t si = idx % seeds.size();
    RunConfig config = variants[vi].config;
    config.rng_seed = seeds[si];
    flat[idx] = run_experiment(data, config);
  };

  if (parallel && total > 1) {
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t workers = std::min<std::size_t>(hw, total);
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      threads.emplace_back([&] {
        while (true) {
          const std::size_t idx = next.fetch_add(1);
          if (idx >= total) return;
          try {
            job(idx);
          } catch (...) {
            const std::lock_guard<std::mutex> lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
          }
        }
      });
    }
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
  } else {
    for (std::size_t idx = 0; idx < total; ++idx) job(idx);
  }

  ComparisonReport report;
  report.dataset_digest = data.digest;
  report.seeds = seeds;
  report.runs.resize(variants.size());
  for (std::size_t vi = 0; vi < variants.size(); ++vi) {
    report.variant_names.push_back(variants[vi].name);
    for (std::size_t si = 0; si < seeds.size(); ++si) {
      RunReport& run = flat[vi * seeds.size() + si];
      if (run.dataset_digest != data.digest) {
        fail(ErrorKind::integrity, "dataset digest mismatch across comparison runs");
      }
      report.runs[vi].push_back(std::move(run));
    }
  }

  report.curves.resize(variants.size());
  for (std::size_t vi = 0; vi < variants.size(); ++vi) {
    std::size_t max_rounds = 0;
    for (const RunReport& run : report.runs[vi]) {
      max_rounds = std::max(max_rounds, run.rounds.size());
    }
    for (std::size_t r = 0; r < max_rounds; ++r) {
      std::vector<double> accs;
      std::vector<double> spents;
      for (const RunReport& run : report.runs[vi]) {
        if (r < run.rounds.size()) {
          accs.push_back(run.rounds[r].test_accuracy);
          spents.push_back(static_cast<double>(run.rounds[r].oracle_spent));
        }
      }
      const double mean_acc = mean_of(accs);
      report.curves[vi].push_back({static_cast<int>(r), mean_acc,
                                   population_sd(accs, mean_acc), mean_of(spents)});
    }
  }

  for (std::size_t vi = 0; vi < variants.size(); ++vi) {
    std::vector<double> finals;
    finals.reserve(seeds.size());
    for (const RunReport& run : report.runs[vi]) {
      finals.push_back(run.summary.final_test_accuracy);
    }
    const double mean_final = mean_of(finals);
    report.mean_final_accuracy.push_back(mean_final);
    report.sd_final_accuracy.push_back(population_sd(finals, mean_final));
    std::vector<double> diffs;
    diffs.reserve(seeds.size());
    for (std::size_t si = 0; si < seeds.size(); ++si) {
      diffs.push_back(finals[si] - report.runs[0][si].summary.final_test_accuracy);
    }
    report.paired_final_diff.push_back(std::move(diffs));
  }
  return report;
}

}  // namespace albudget
