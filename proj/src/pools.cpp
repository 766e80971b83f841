#include "albudget/pools.hpp"

#include <algorithm>
#include <string>

#include "albudget/error.hpp"
#include "albudget/rng.hpp"

namespace albudget {

const char* label_source_name(LabelSource source) {
  switch (source) {
    case LabelSource::seed: return "seed";
    case LabelSource::oracle: return "oracle";
    case LabelSource::pseudo: return "pseudo";
  }
  return "?";
}

LabelSource label_source_from_name(const std::string& name) {
  if (name == "seed") return LabelSource::seed;
  if (name == "oracle") return LabelSource::oracle;
  if (name == "pseudo") return LabelSource::pseudo;
  fail(ErrorKind::format, "unknown label source '" + name + "'");
}

PoolState init_pools(const Dataset& dataset, int seed_count, std::uint64_t rng_seed) {
  const std::int64_t n = static_cast<std::int64_t>(dataset.train.size());
  if (seed_count <= 0) {
    fail(ErrorKind::invalid_config, "seed_count must be positive");
  }
  if (seed_count > n) {
    fail(ErrorKind::invalid_config, "seed_count " + std::to_string(seed_count) +
                                        " exceeds pool size " + std::to_string(n));
  }
  if (seed_count < dataset.class_count) {
    fail(ErrorKind::stratification_infeasible,
         "seed_count " + std::to_string(seed_count) + " < class count " +
             std::to_string(dataset.class_count));
  }

  // Training-split members per class, in storage order.
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(dataset.class_count));
  for (std::size_t i = 0; i < dataset.train.size(); ++i) {
    by_class[static_cast<std::size_t>(dataset.train[i].label)].push_back(i);
  }
  for (int c = 0; c < dataset.class_count; ++c) {
    if (by_class[static_cast<std::size_t>(c)].empty()) {
      fail(ErrorKind::invalid_config,
           "class " + std::to_string(c) + " has no training instances");
    }
  }

  Rng rng(rng_seed);
  std::vector<bool> taken(dataset.train.size(), false);
  std::vector<std::size_t> chosen;
  chosen.reserve(static_cast<std::size_t>(seed_count));

  for (int c = 0; c < dataset.class_count; ++c) {
    const auto& members = by_class[static_cast<std::size_t>(c)];
    const std::size_t pick = members[rng.next_index(members.size())];
    taken[pick] = true;
    chosen.push_back(pick);
  }

  std::vector<std::size_t> rest;
  rest.reserve(dataset.train.size() - chosen.size());
  for (std::size_t i = 0; i < dataset.train.size(); ++i) {
    if (!taken[i]) rest.push_back(i);
  }
  const std::size_t extra = static_cast<std::size_t>(seed_count) - chosen.size();
  for (std::size_t pos : sample_without_replacement(rest.size(), extra, rng)) {
    chosen.push_back(rest[pos]);
  }

  PoolState state;
  state.round = 0;
  for (const Instance& inst : dataset.train) state.unlabeled.insert(inst.id);
  for (std::size_t i : chosen) {
    const Instance& inst = dataset.train[i];
    state.unlabeled.erase(inst.id);
    state.labeled[inst.id] =
        LabelRecord{inst.id, inst.label, LabelSource::seed, 0, 1.0};
  }
  return state;
}

void commit_oracle_labels(PoolState& state,
                          const std::vector<std::pair<std::int64_t, int>>& assignments,
                          int round) {
  // Validate the full batch first so failures leave the state untouched.
  std::set<std::int64_t> batch_ids;
  for (const auto& [id, label] : assignments) {
    (void)label;
    if (state.labeled.count(id) || batch_ids.count(id)) {
      fail(ErrorKind::double_label, "instance " + std::to_string(id) + " already labeled");
    }
    if (!state.unlabeled.count(id)) {
      fail(ErrorKind::not_found, "instance " + std::to_string(id) + " not in unlabeled pool");
    }
    batch_ids.insert(id);
  }

  for (const auto& [id, label] : assignments) {
    state.unlabeled.erase(id);
    state.pseudo.erase(id);
    state.labeled[id] = LabelRecord{id, label, LabelSource::oracle, round, 1.0};
  }
}

void rebuild_pseudo_set(PoolState& state, const std::vector<LabelRecord>& assignments) {
  std::set<std::int64_t> batch_ids;
  for (const LabelRecord& record : assignments) {
    if (record.source != LabelSource::pseudo) {
      fail(ErrorKind::bad_input,
           "pseudo rebuild got source=" + std::string(label_source_name(record.source)));
    }
    if (state.labeled.count(record.instance_id)) {
      fail(ErrorKind::conflict,
           "instance " + std::to_string(record.instance_id) + " already oracle-labeled");
    }
    if (!state.unlabeled.count(record.instance_id)) {
      fail(ErrorKind::not_found,
           "instance " + std::to_string(record.instance_id) + " not in unlabeled pool");
    }
    if (!batch_ids.insert(record.instance_id).second) {
      fail(ErrorKind::bad_input,
           "instance " + std::to_string(record.instance_id) + " appears twice");
    }
  }

  state.pseudo.clear();
  for (const LabelRecord& record : assignments) {
    state.pseudo[record.instance_id] = record;
  }
}

void check_pool_invariants(const PoolState& state, const Dataset& dataset) {
  for (const auto& [id, record] : state.labeled) {
    if (record.instance_id != id) fail(ErrorKind::integrity, "labeled key/record mismatch");
    if (record.source == LabelSource::pseudo) {
      fail(ErrorKind::integrity, "pseudo record in labeled set");
    }
    if (record.confidence != 1.0) {
      fail(ErrorKind::integrity, "seed/oracle record with confidence != 1");
    }
    if (state.unlabeled.count(id)) {
      fail(ErrorKind::integrity, "id " + std::to_string(id) + " both labeled and unlabeled");
    }
  }
  for (const auto& [id, record] : state.pseudo) {
    if (record.source != LabelSource::pseudo) {
      fail(ErrorKind::integrity, "non-pseudo record in pseudo set");
    }
    if (!state.unlabeled.count(id)) {
      fail(ErrorKind::integrity,
           "pseudo id " + std::to_string(id) + " missing from unlabeled pool");
    }
  }
  if (state.labeled.size() + state.unlabeled.size() != dataset.train.size()) {
    fail(ErrorKind::integrity, "labeled + unlabeled != training split");
  }
  for (const Instance& inst : dataset.train) {
    if (!state.labeled.count(inst.id) && !state.unlabeled.count(inst.id)) {
      fail(ErrorKind::integrity, "train id " + std::to_string(inst.id) + " unaccounted for");
    }
  }
}

}  // namespace albudget
