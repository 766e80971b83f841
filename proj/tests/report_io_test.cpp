#include "doctest.h"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "albudget/dataset.hpp"
#include "albudget/error.hpp"
#include "albudget/loop.hpp"
#include "albudget/report_io.hpp"

using namespace albudget;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::format;
}

RunReport fixture_report() {
  RunReport report;
  report.dataset_digest = "00ff00ff00ff00ff";
  for (int r = 0; r < 5; ++r) {
    RoundRecord record;
    record.round = r;
    record.test_accuracy = 0.5 + 0.0625 * r;  // dyadic, prints exactly
    record.train_loss = 1.0 / (r + 1);
    record.oracle_spent = 20 * (r + 1);
    record.pseudo_count = r == 0 ? 0 : 3 * r;
    if (r > 0) record.pseudo_accuracy = 1.0 - 0.01 * r;
    report.rounds.push_back(record);
  }
  report.summary = {5, 100, 108, 12, report.rounds.back().test_accuracy};
  return report;
}

int count_lines(const std::string& text) {
  int lines = 0;
  for (char c : text) lines += c == '\n';
  return lines;
}

std::string first_line(const std::string& text) {
  return text.substr(0, text.find('\n'));
}

}  // namespace

TEST_CASE("report JSON round-trips exactly") {
  const RunReport report = fixture_report();
  const std::string path = temp_path("albudget_report.json");
  write_report(report, path, ReportFormat::json);
  const RunReport loaded = read_report_json(path);
  CHECK(loaded == report);
  // Absent and present pseudo_accuracy both survive.
  CHECK(!loaded.rounds[0].pseudo_accuracy.has_value());
  REQUIRE(loaded.rounds[4].pseudo_accuracy.has_value());
  CHECK(*loaded.rounds[4].pseudo_accuracy == *report.rounds[4].pseudo_accuracy);
  std::filesystem::remove(path);
}

TEST_CASE("an empty report still round-trips") {
  RunReport report;
  report.dataset_digest = "0123456789abcdef";
  const std::string path = temp_path("albudget_empty.json");
  write_report(report, path, ReportFormat::json);
  CHECK(read_report_json(path) == report);
  CHECK(serialize_report_csv(report) ==
        "round,test_accuracy,train_loss,oracle_spent,pseudo_count,pseudo_accuracy,"
        "wall_time_ms\n");
  std::filesystem::remove(path);
}

TEST_CASE("report CSV has the fixed column layout") {
  const RunReport report = fixture_report();
  const std::string csv = serialize_report_csv(report);
  CHECK(first_line(csv) ==
        "round,test_accuracy,train_loss,oracle_spent,pseudo_count,pseudo_accuracy,"
        "wall_time_ms");
  CHECK(count_lines(csv) == 6);

  // Round 0 has no pseudo accuracy: its cell is empty.
  std::istringstream lines(csv);
  std::string header, row0, row1;
  std::getline(lines, header);
  std::getline(lines, row0);
  std::getline(lines, row1);
  CHECK(row0 == "0,0.5,1,20,0,,0");
  CHECK(row1 == "1,0.5625,0.5,40,3,0.99,0");
}

TEST_CASE("report JSON rejects malformed documents") {
  const std::string path = temp_path("albudget_badreport.json");

  SUBCASE("not JSON at all") {
    write_text_file(path, "not json {{{");
    CHECK(kind_of([&] { read_report_json(path); }) == ErrorKind::format);
  }
  SUBCASE("wrong format_version") {
    write_text_file(path, R"({"format_version": 99, "dataset_digest": "x", "rounds": []})");
    CHECK(kind_of([&] { read_report_json(path); }) == ErrorKind::format);
  }
  SUBCASE("missing field") {
    write_text_file(path, R"({"format_version": 1, "rounds": []})");
    CHECK(kind_of([&] { read_report_json(path); }) == ErrorKind::format);
  }
  SUBCASE("missing file") {
    std::filesystem::remove(path);
    CHECK(kind_of([&] { read_report_json(path); }) == ErrorKind::io);
  }
  std::filesystem::remove(path);
}

TEST_CASE("double fields survive the JSON round-trip bit-exactly") {
  RunReport report;
  report.dataset_digest = "feedfacefeedface";
  RoundRecord record;
  record.round = 0;
  record.test_accuracy = 1.0 / 3.0;
  record.train_loss = 0.1 + 0.2;  // 0.30000000000000004
  record.oracle_spent = 1;
  record.pseudo_accuracy = 2.0 / 7.0;
  report.rounds.push_back(record);
  report.summary.final_test_accuracy = 1.0 / 3.0;

  const std::string path = temp_path("albudget_doubles.json");
  write_report(report, path, ReportFormat::json);
  const RunReport loaded = read_report_json(path);
  CHECK(loaded.rounds[0].test_accuracy == 1.0 / 3.0);
  CHECK(loaded.rounds[0].train_loss == 0.1 + 0.2);
  CHECK(*loaded.rounds[0].pseudo_accuracy == 2.0 / 7.0);
  std::filesystem::remove(path);
}

TEST_CASE("head checkpoints round-trip bitwise") {
  SoftmaxHead head = SoftmaxHead::zeros(3, 4);
  double v = 0.1;
  for (double& w : head.weights) {
    w = v;
    v = v * -1.7 + 0.01;
  }
  head.bias = {1.0 / 3.0, -2.5e-7, 0.0};

  const std::string path = temp_path("albudget_head.json");
  write_head_checkpoint(head, path);
  const SoftmaxHead loaded = read_head_checkpoint(path);
  CHECK(loaded.class_count == 3);
  CHECK(loaded.feature_dim == 4);
  CHECK(loaded.weights == head.weights);
  CHECK(loaded.bias == head.bias);
  std::filesystem::remove(path);
}

TEST_CASE("corrupt head checkpoints are format errors") {
  const std::string path = temp_path("albudget_badhead.json");
  // Weight count disagrees with the declared shape.
  write_text_file(path,
                  R"({"format_version":1,"class_count":2,"feature_dim":2,)"
                  R"("weights":[1.0,2.0,3.0],"bias":[0.0,0.0]})");
  CHECK(kind_of([&] { read_head_checkpoint(path); }) == ErrorKind::format);
  std::filesystem::remove(path);
}

TEST_CASE("state snapshots resume a run exactly") {
  SyntheticSpec spec;
  spec.class_count = 3;
  spec.feature_dim = 5;
  spec.per_class = 20;
  spec.rng_seed = 12;
  const Dataset data = generate_synthetic(spec);

  RunConfig config;
  config.seed_count = 6;
  config.oracle_budget = 20;
  config.strategy.batch_k = 10;
  config.train.epochs = 4;
  config.pseudo_enabled = true;
  config.confidence_threshold = 0.8;
  const RunOutcome outcome = run_experiment_full(data, config);

  const std::string path = temp_path("albudget_state.json");
  write_state_snapshot(outcome.state, outcome.ledger, data.digest, path);
  const RestoredState restored = restore_state_snapshot(path, data);

  CHECK(restored.state.round == outcome.state.round);
  CHECK(restored.state.unlabeled == outcome.state.unlabeled);
  REQUIRE(restored.state.labeled.size() == outcome.state.labeled.size());
  for (const auto& [id, rec] : outcome.state.labeled) {
    const LabelRecord& got = restored.state.labeled.at(id);
    CHECK(got.label == rec.label);
    CHECK(got.source == rec.source);
    CHECK(got.round == rec.round);
    CHECK(got.confidence == rec.confidence);
  }
  REQUIRE(restored.state.pseudo.size() == outcome.state.pseudo.size());
  for (const auto& [id, rec] : outcome.state.pseudo) {
    const LabelRecord& got = restored.state.pseudo.at(id);
    CHECK(got.label == rec.label);
    CHECK(got.confidence == rec.confidence);
  }
  CHECK(restored.ledger.oracle_budget == outcome.ledger.oracle_budget);
  CHECK(restored.ledger.oracle_spent == outcome.ledger.oracle_spent);
  CHECK(restored.ledger.pseudo_assigned_total == outcome.ledger.pseudo_assigned_total);
  check_pool_invariants(restored.state, data);
  std::filesystem::remove(path);
}

TEST_CASE("snapshots refuse to restore against a different dataset") {
  SyntheticSpec spec;
  spec.class_count = 2;
  spec.feature_dim = 3;
  spec.per_class = 10;
  spec.rng_seed = 1;
  const Dataset data = generate_synthetic(spec);
  spec.rng_seed = 2;
  const Dataset other = generate_synthetic(spec);

  const PoolState state = init_pools(data, 4, 1);
  BudgetLedger ledger;
  const std::string path = temp_path("albudget_state2.json");
  write_state_snapshot(state, ledger, data.digest, path);

  CHECK(kind_of([&] { restore_state_snapshot(path, other); }) == ErrorKind::integrity);
  const RestoredState ok = restore_state_snapshot(path, data);
  CHECK(ok.state.labeled.size() == 4);
  std::filesystem::remove(path);
}

TEST_CASE("score dumps have one row per instance") {
  std::vector<ScoredInstance> scored = {
      {7, 0.5, 0.25, 0.125},
      {9, 1.0, -0.5, 0.0},
  };
  const std::string csv = serialize_scores_csv(scored);
  CHECK(csv ==
        "id,uncertainty,density,hybrid\n"
        "7,0.5,0.25,0.125\n"
        "9,1,-0.5,0\n");
  CHECK(serialize_scores_csv({}) == "id,uncertainty,density,hybrid\n");
}

TEST_CASE("pseudo audit rows serialize in order") {
  std::vector<PseudoAuditRow> rows = {
      {3, 1, 0.97, 0},
      {5, 0, 0.96, 2},
  };
  CHECK(serialize_pseudo_audit_csv(rows) ==
        "id,label,confidence,round\n"
        "3,1,0.97,0\n"
        "5,0,0.96,2\n");
}

TEST_CASE("comparison serializations have the documented shapes") {
  SyntheticSpec spec;
  spec.class_count = 3;
  spec.feature_dim = 4;
  spec.per_class = 20;
  spec.rng_seed = 44;
  const Dataset data = generate_synthetic(spec);

  RunConfig base;
  base.seed_count = 6;
  base.oracle_budget = 20;
  base.strategy.batch_k = 10;
  base.train.epochs = 3;
  std::vector<NamedConfig> variants = {
      {"random", strategy_variant(base, "random")},
      {"uncertainty", strategy_variant(base, "uncertainty")},
  };
  const ComparisonReport report = compare_strategies(data, variants, {1, 2});

  const std::string curve = serialize_curve_csv(report, 0);
  CHECK(first_line(curve) == "round,mean_test_accuracy,sd_test_accuracy,mean_oracle_spent");
  CHECK(count_lines(curve) == 1 + static_cast<int>(report.curves[0].size()));

  const std::string summary = serialize_comparison_summary_csv(report);
  CHECK(first_line(summary) ==
        "variant,round,mean_test_accuracy,sd_test_accuracy,mean_oracle_spent");
  CHECK(count_lines(summary) ==
        1 + static_cast<int>(report.curves[0].size() + report.curves[1].size()));

  const std::string paired = serialize_paired_csv(report);
  CHECK(first_line(paired) == "variant,seed,final_test_accuracy,diff_vs_first");
  CHECK(count_lines(paired) == 1 + 2 * 2);
}

TEST_CASE("text file helpers report io failures with the path") {
  CHECK(kind_of([] { read_text_file("/nonexistent/albudget.txt"); }) == ErrorKind::io);
  CHECK(kind_of([] { write_text_file("/nonexistent/dir/albudget.txt", "x"); }) ==
        ErrorKind::io);
  try {
    read_text_file("/nonexistent/albudget.txt");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("/nonexistent/albudget.txt") != std::string::npos);
  }
}
