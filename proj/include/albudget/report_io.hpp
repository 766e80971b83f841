#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "albudget/budget.hpp"
#include "albudget/classifier.hpp"
#include "albudget/loop.hpp"
#include "albudget/pools.hpp"
#include "albudget/strategies.hpp"

namespace albudget {

// Whole-file helpers; failures carry the path in the message.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

enum class ReportFormat { json, csv };

// CSV columns, fixed:
//   round,test_accuracy,train_loss,oracle_spent,pseudo_count,pseudo_accuracy,wall_time_ms
// pseudo_accuracy is an empty cell when absent. JSON mirrors RunReport with a
// format_version field; doubles round-trip exactly in both formats.
std::string serialize_report_json(const RunReport& report);
std::string serialize_report_csv(const RunReport& report);
void write_report(const RunReport& report, const std::string& path, ReportFormat format);
RunReport read_report_json(const std::string& path);

// Trained-head checkpoint: class_count, feature_dim, row-major weights, bias.
std::string serialize_head(const SoftmaxHead& head);
void write_head_checkpoint(const SoftmaxHead& head, const std::string& path);
SoftmaxHead read_head_checkpoint(const std::string& path);

// Resume snapshot: pools plus ledger, bound to a dataset digest. Restoring
// against a dataset with a different digest is an integrity error.
std::string serialize_state_snapshot(const PoolState& state, const BudgetLedger& ledger,
                                     const std::string& dataset_digest);
void write_state_snapshot(const PoolState& state, const BudgetLedger& ledger,
                          const std::string& dataset_digest, const std::string& path);

struct RestoredState {
  PoolState state;
  BudgetLedger ledger;
};
RestoredState restore_state_snapshot(const std::string& path, const Dataset& dataset);

// Per-round score dump: id,uncertainty,density,hybrid.
std::string serialize_scores_csv(const std::vector<ScoredInstance>& scored);

// Pseudo-label audit: id,label,confidence,round.
struct PseudoAuditRow {
  std::int64_t id = 0;
  int label = 0;
  double confidence = 0.0;
  int round = 0;
};
std::string serialize_pseudo_audit_csv(const std::vector<PseudoAuditRow>& rows);

// Comparison outputs: one accuracy curve per variant, an all-variant summary
// (mean and sd per round), and per-seed final-accuracy differences against
// the first variant.
std::string serialize_curve_csv(const ComparisonReport& report, std::size_t variant);
std::string serialize_comparison_summary_csv(const ComparisonReport& report);
std::string serialize_paired_csv(const ComparisonReport& report);

}  // namespace albudget
