#include "albudget/report_io.hpp"

#include <fstream>
#include <sstream>

#include "albudget/error.hpp"
#include "json.hpp"

namespace albudget {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr int kFormatVersion = 1;

ordered_json parse_json_text(const std::string& text, const std::string& context) {
  ordered_json j = ordered_json::parse(text, nullptr, false);
  if (j.is_discarded()) {
    fail(ErrorKind::format, context + ": not valid JSON");
  }
  return j;
}

void check_version(const ordered_json& j, const std::string& context) {
  if (!j.is_object() || !j.contains("format_version") ||
      !j["format_version"].is_number_integer()) {
    fail(ErrorKind::format, context + ": missing format_version");
  }
  const int version = j["format_version"].get<int>();
  if (version != kFormatVersion) {
    fail(ErrorKind::format,
         context + ": unsupported format_version " + std::to_string(version));
  }
}

// .at() access with json exceptions rewritten as format errors.
template <typename T>
T get_field(const ordered_json& j, const char* key, const std::string& context) {
  try {
    return j.at(key).get<T>();
  } catch (const ordered_json::exception& e) {
    fail(ErrorKind::format, context + ": field '" + key + "': " + e.what());
  }
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open " + path + " for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) fail(ErrorKind::io, "read failure on " + path);
  return buffer.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot open " + path + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.flush();
  if (!out) fail(ErrorKind::io, "write failure on " + path);
}

std::string serialize_report_json(const RunReport& report) {
  ordered_json j;
  j["format_version"] = kFormatVersion;
  j["dataset_digest"] = report.dataset_digest;
  j["summary"] = {{"rounds", report.summary.rounds},
                  {"oracle_spent", report.summary.oracle_spent},
                  {"labeled_count", report.summary.labeled_count},
                  {"pseudo_count", report.summary.pseudo_count},
                  {"final_test_accuracy", report.summary.final_test_accuracy}};
  j["rounds"] = ordered_json::array();
  for (const RoundRecord& r : report.rounds) {
    ordered_json row;
    row["round"] = r.round;
    row["test_accuracy"] = r.test_accuracy;
    row["train_loss"] = r.train_loss;
    row["oracle_spent"] = r.oracle_spent;
    row["pseudo_count"] = r.pseudo_count;
    if (r.pseudo_accuracy.has_value()) {
      row["pseudo_accuracy"] = *r.pseudo_accuracy;
    } else {
      row["pseudo_accuracy"] = nullptr;
    }
    row["wall_time_ms"] = r.wall_time_ms;
    j["rounds"].push_back(std::move(row));
  }
  return j.dump(2) + "\n";
}

std::string serialize_report_csv(const RunReport& report) {
  std::string out =
      "round,test_accuracy,train_loss,oracle_spent,pseudo_count,pseudo_accuracy,"
      "wall_time_ms\n";
  for (const RoundRecord& r : report.rounds) {
    out += std::to_string(r.round);
    out += ',';
    out += format_double(r.test_accuracy);
    out += ',';
    out += format_double(r.train_loss);
    out += ',';
    out += std::to_string(r.oracle_spent);
    out += ',';
    out += std::to_string(r.pseudo_count);
    out += ',';
    if (r.pseudo_accuracy.has_value()) out += format_double(*r.pseudo_accuracy);
    out += ',';
    out += std::to_string(r.wall_time_ms);
    out += '\n';
  }
  return out;
}

void write_report(const RunReport& report, const std::string& path, ReportFormat format) {
  write_text_file(path, format == ReportFormat::json ? serialize_report_json(report)
                                                     : serialize_report_csv(report));
}

RunReport read_report_json(const std::string& path) {
  const std::string context = "report " + path;
  const ordered_json j = parse_json_text(read_text_file(path), context);
  check_version(j, context);

  RunReport report;
  report.dataset_digest = get_field<std::string>(j, "dataset_digest", context);
  if (!j.contains("summary") || !j.contains("rounds") || !j["rounds"].is_array()) {
    fail(ErrorKind::format, context + ": missing summary or rounds");
  }
  const ordered_json& s = j["summary"];
  report.summary.rounds = get_field<int>(s, "rounds", context);
  report.summary.oracle_spent = get_field<int>(s, "oracle_spent", context);
  report.summary.labeled_count = get_field<int>(s, "labeled_count", context);
  report.summary.pseudo_count = get_field<int>(s, "pseudo_count", context);
  report.summary.final_test_accuracy =
      get_field<double>(s, "final_test_accuracy", context);

  for (const ordered_json& row : j["rounds"]) {
    RoundRecord r;
    r.round = get_field<int>(row, "round", context);
    r.test_accuracy = get_field<double>(row, "test_accuracy", context);
    r.train_loss = get_field<double>(row, "train_loss", context);
    r.oracle_spent = get_field<int>(row, "oracle_spent", context);
    r.pseudo_count = get_field<int>(row, "pseudo_count", context);
    if (!row.contains("pseudo_accuracy")) {
      fail(ErrorKind::format, context + ": field 'pseudo_accuracy' missing");
    }
    if (!row["pseudo_accuracy"].is_null()) {
      r.pseudo_accuracy = row["pseudo_accuracy"].get<double>();
    }
    r.wall_time_ms = get_field<std::int64_t>(row, "wall_time_ms", context);
    report.rounds.push_back(std::move(r));
  }
  return report;
}

std::string serialize_head(const SoftmaxHead& head) {
  ordered_json j;
  j["format_version"] = kFormatVersion;
  j["class_count"] = head.class_count;
  j["feature_dim"] = head.feature_dim;
  j["weights"] = head.weights;
  j["bias"] = head.bias;
  return j.dump(2) + "\n";
}

void write_head_checkpoint(const SoftmaxHead& head, const std::string& path) {
  write_text_file(path, serialize_head(head));
}

SoftmaxHead read_head_checkpoint(const std::string& path) {
  const std::string context = "checkpoint " + path;
  const ordered_json j = parse_json_text(read_text_file(path), context);
  check_version(j, context);

  SoftmaxHead head;
  head.class_count = get_field<int>(j, "class_count", context);
  head.feature_dim = get_field<int>(j, "feature_dim", context);
  head.weights = get_field<std::vector<double>>(j, "weights", context);
  head.bias = get_field<std::vector<double>>(j, "bias", context);
  if (head.class_count < 1 || head.feature_dim < 1 ||
      head.weights.size() != static_cast<std::size_t>(head.class_count) *
                                 static_cast<std::size_t>(head.feature_dim) ||
      head.bias.size() != static_cast<std::size_t>(head.class_count)) {
    fail(ErrorKind::format, context + ": inconsistent head shape");
  }
  return head;
}

namespace {

ordered_json record_to_json(const LabelRecord& rec) {
  ordered_json j;
  j["id"] = rec.instance_id;
  j["label"] = rec.label;
  j["source"] = label_source_name(rec.source);
  j["round"] = rec.round;
  j["confidence"] = rec.confidence;
  return j;
}

LabelRecord record_from_json(const ordered_json& j, const std::string& context) {
  LabelRecord rec;
  rec.instance_id = get_field<std::int64_t>(j, "id", context);
  rec.label = get_field<int>(j, "label", context);
  rec.source = label_source_from_name(get_field<std::string>(j, "source", context));
  rec.round = get_field<int>(j, "round", context);
  rec.confidence = get_field<double>(j, "confidence", context);
  return rec;
}

}  // namespace

std::string serialize_state_snapshot(const PoolState& state, const BudgetLedger& ledger,
                                     const std::string& dataset_digest) {
  ordered_json j;
  j["format_version"] = kFormatVersion;
  j["dataset_digest"] = dataset_digest;
  j["round"] = state.round;
  j["ledger"] = {{"oracle_budget", ledger.oracle_budget},
                 {"oracle_spent", ledger.oracle_spent},
                 {"per_round_query_cap", ledger.per_round_query_cap},
                 {"pseudo_cap_per_round", ledger.pseudo_cap_per_round},
                 {"confidence_threshold", ledger.confidence_threshold},
                 {"pseudo_assigned_total", ledger.pseudo_assigned_total}};
  j["labeled"] = ordered_json::array();
  for (const auto& [id, rec] : state.labeled) j["labeled"].push_back(record_to_json(rec));
  j["pseudo"] = ordered_json::array();
  for (const auto& [id, rec] : state.pseudo) j["pseudo"].push_back(record_to_json(rec));
  j["unlabeled"] = ordered_json::array();
  for (std::int64_t id : state.unlabeled) j["unlabeled"].push_back(id);
  return j.dump(2) + "\n";
}

void write_state_snapshot(const PoolState& state, const BudgetLedger& ledger,
                          const std::string& dataset_digest, const std::string& path) {
  write_text_file(path, serialize_state_snapshot(state, ledger, dataset_digest));
}

RestoredState restore_state_snapshot(const std::string& path, const Dataset& dataset) {
  const std::string context = "snapshot " + path;
  const ordered_json j = parse_json_text(read_text_file(path), context);
  check_version(j, context);

  const auto digest = get_field<std::string>(j, "dataset_digest", context);
  if (digest != dataset.digest) {
    fail(ErrorKind::integrity, context + ": dataset digest mismatch (snapshot " +
                                   digest + ", dataset " + dataset.digest + ")");
  }

  RestoredState restored;
  restored.state.round = get_field<int>(j, "round", context);
  if (!j.contains("ledger") || !j.contains("labeled") || !j.contains("pseudo") ||
      !j.contains("unlabeled")) {
    fail(ErrorKind::format, context + ": missing sections");
  }
  const ordered_json& lj = j["ledger"];
  restored.ledger.oracle_budget = get_field<int>(lj, "oracle_budget", context);
  restored.ledger.oracle_spent = get_field<int>(lj, "oracle_spent", context);
  restored.ledger.per_round_query_cap = get_field<int>(lj, "per_round_query_cap", context);
  restored.ledger.pseudo_cap_per_round =
      get_field<int>(lj, "pseudo_cap_per_round", context);
  restored.ledger.confidence_threshold =
      get_field<double>(lj, "confidence_threshold", context);
  restored.ledger.pseudo_assigned_total =
      get_field<int>(lj, "pseudo_assigned_total", context);
  validate_ledger(restored.ledger);

  for (const ordered_json& row : j["labeled"]) {
    const LabelRecord rec = record_from_json(row, context);
    restored.state.labeled.emplace(rec.instance_id, rec);
  }
  for (const ordered_json& row : j["pseudo"]) {
    const LabelRecord rec = record_from_json(row, context);
    restored.state.pseudo.emplace(rec.instance_id, rec);
  }
  for (const ordered_json& id : j["unlabeled"]) {
    restored.state.unlabeled.insert(id.get<std::int64_t>());
  }
  check_pool_invariants(restored.state, dataset);
  return restored;
}

std::string serialize_scores_csv(const std::vector<ScoredInstance>& scored) {
  std::string out = "id,uncertainty,density,hybrid\n";
  for (const ScoredInstance& s : scored) {
    out += std::to_string(s.id);
    out += ',';
    out += format_double(s.uncertainty);
    out += ',';
    out += format_double(s.density);
    out += ',';
    out += format_double(s.hybrid);
    out += '\n';
  }
  return out;
}

std::string serialize_pseudo_audit_csv(const std::vector<PseudoAuditRow>& rows) {
  std::string out = "id,label,confidence,round\n";
  for (const PseudoAuditRow& r : rows) {
    out += std::to_string(r.id);
    out += ',';
    out += std::to_string(r.label);
    out += ',';
    out += format_double(r.confidence);
    out += ',';
    out += std::to_string(r.round);
    out += '\n';
  }
  return out;
}

std::string serialize_curve_csv(const ComparisonReport& report, std::size_t variant) {
  if (variant >= report.curves.size()) {
    fail(ErrorKind::bad_input, "variant index out of range");
  }
  std::string out = "round,mean_test_accuracy,sd_test_accuracy,mean_oracle_spent\n";
  for (const CurvePoint& p : report.curves[variant]) {
    out += std::to_string(p.round);
    out += ',';
    out += format_double(p.mean_accuracy);
    out += ',';
    out += format_double(p.sd_accuracy);
    out += ',';
    out += format_double(p.mean_oracle_spent);
    out += '\n';
  }
  return out;
}

std::string serialize_comparison_summary_csv(const ComparisonReport& report) {
  std::string out =
      "variant,round,mean_test_accuracy,sd_test_accuracy,mean_oracle_spent\n";
  for (std::size_t vi = 0; vi < report.variant_names.size(); ++vi) {
    for (const CurvePoint& p : report.curves[vi]) {
      out += report.variant_names[vi];
      out += ',';
      out += std::to_string(p.round);
      out += ',';
      out += format_double(p.mean_accuracy);
      out += ',';
      out += format_double(p.sd_accuracy);
      out += ',';
      out += format_double(p.mean_oracle_spent);
      out += '\n';
    }
  }
  return out;
}

std::string serialize_paired_csv(const ComparisonReport& report) {
  std::string out = "variant,seed,final_test_accuracy,diff_vs_first\n";
  for (std::size_t vi = 0; vi < report.variant_names.size(); ++vi) {
    for (std::size_t si = 0; si < report.seeds.size(); ++si) {
      out += report.variant_names[vi];
      out += ',';
      out += std::to_string(report.seeds[si]);
      out += ',';
      out += format_double(report.runs[vi][si].summary.final_test_accuracy);
      out += ',';
      out += format_double(report.paired_final_diff[vi][si]);
      out += '\n';
    }
  }
  return out;
}

}  // namespace albudget
