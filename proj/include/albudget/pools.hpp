#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include "albudget/dataset.hpp"

namespace albudget {

enum class LabelSource { seed, oracle, pseudo };

const char* label_source_name(LabelSource source);
LabelSource label_source_from_name(const std::string& name);

struct LabelRecord {
  std::int64_t instance_id = 0;
  int label = 0;
  LabelSource source = LabelSource::seed;
  int round = 0;
  double confidence = 1.0;
};

// Partition of the training split. `labeled` holds seed/oracle records and is
// disjoint from `unlabeled`; `pseudo` is an overlay on `unlabeled` so
// pseudo-labeled instances stay eligible for oracle queries. Ordered
// containers keep iteration deterministic.
struct PoolState {
  std::map<std::int64_t, LabelRecord> labeled;
  std::map<std::int64_t, LabelRecord> pseudo;
  std::set<std::int64_t> unlabeled;
  int round = 0;

  std::vector<std::int64_t> unlabeled_ids() const {
    return {unlabeled.begin(), unlabeled.end()};
  }
};

// Stratified seed draw: one uniform pick per class first (requires
// seed_count >= class_count), remainder uniform without replacement.
PoolState init_pools(const Dataset& dataset, int seed_count, std::uint64_t rng_seed);

// Moves ids from unlabeled (clearing any pseudo overlay) into labeled with
// source=oracle. Validates the whole batch before mutating anything.
void commit_oracle_labels(PoolState& state,
                          const std::vector<std::pair<std::int64_t, int>>& assignments,
                          int round);

// Replaces the pseudo set wholesale; unlabeled is untouched.
void rebuild_pseudo_set(PoolState& state, const std::vector<LabelRecord>& assignments);

// Asserts the partition invariants against the dataset's training split.
void check_pool_invariants(const PoolState& state, const Dataset& dataset);

}  // namespace albudget
