#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "albudget/dataset.hpp"
#include "albudget/error.hpp"
#include "albudget/loop.hpp"
#include "albudget/report_io.hpp"
#include "albudget/strategies.hpp"

namespace ab = albudget;
namespace fs = std::filesystem;

namespace {

// Effective configuration after precedence: flags > config file > defaults.
// `provenance` remembers where each value came from for the startup echo.
struct Options {
  std::string config_path;
  std::string out_dir = "out";
  bool quiet = false;

  std::string data_csv;  // when set, overrides the synthetic source
  ab::SyntheticSpec synthetic;
  ab::RunConfig run;
  bool dump_scores = false;

  std::vector<std::string> strategies;
  std::vector<std::uint64_t> seeds{1};
  bool parallel = false;

  std::map<std::string, std::string> provenance;

  void mark(const std::string& key, const char* source) { provenance[key] = source; }
  std::string source_of(const std::string& key) const {
    const auto it = provenance.find(key);
    return it == provenance.end() ? "default" : it->second;
  }
};

using json = nlohmann::json;

template <typename T>
T config_value(const json& j, const std::string& key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    ab::fail(ab::ErrorKind::invalid_config, "config key '" + key + "': " + e.what());
  }
}

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (const auto& item : obj.items()) {
    if (allowed.find(item.key()) == allowed.end()) {
      ab::fail(ab::ErrorKind::invalid_config,
               "unknown config key '" + item.key() + "' in " + where);
    }
  }
}

void apply_dataset_section(Options& opt, const json& dj) {
  if (!dj.is_object()) {
    ab::fail(ab::ErrorKind::invalid_config, "config: dataset must be an object");
  }
  reject_unknown_keys(dj, {"csv", "synthetic"}, "dataset");
  if (dj.contains("csv") == dj.contains("synthetic")) {
    ab::fail(ab::ErrorKind::invalid_config,
             "config: dataset needs exactly one of csv or synthetic");
  }
  if (dj.contains("csv")) {
    opt.data_csv = config_value<std::string>(dj, "csv");
  } else {
    const json& sj = dj.at("synthetic");
    if (!sj.is_object()) {
      ab::fail(ab::ErrorKind::invalid_config, "config: dataset.synthetic must be an object");
    }
    reject_unknown_keys(sj, {"classes", "dim", "per_class", "separation", "sigma", "seed"},
                        "dataset.synthetic");
    if (sj.contains("classes")) opt.synthetic.class_count = config_value<int>(sj, "classes");
    if (sj.contains("dim")) opt.synthetic.feature_dim = config_value<int>(sj, "dim");
    if (sj.contains("per_class")) opt.synthetic.per_class = config_value<int>(sj, "per_class");
    if (sj.contains("separation")) {
      opt.synthetic.separation = config_value<double>(sj, "separation");
    }
    if (sj.contains("sigma")) opt.synthetic.noise_sigma = config_value<double>(sj, "sigma");
    if (sj.contains("seed")) opt.synthetic.rng_seed = config_value<std::uint64_t>(sj, "seed");
  }
  opt.mark("dataset", "file");
}

void apply_config_file(Options& opt) {
  std::string text;
  try {
    text = ab::read_text_file(opt.config_path);
  } catch (const ab::Error& e) {
    ab::fail(ab::ErrorKind::invalid_config, e.what());
  }
  const json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    ab::fail(ab::ErrorKind::invalid_config,
             "config file " + opt.config_path + " is not a JSON object");
  }
  reject_unknown_keys(
      j,
      {"dataset", "out_dir", "seed", "seed_count", "budget", "batch_k", "tau", "beta",
       "uncertainty", "density_sample", "pseudo", "pseudo_cap", "pseudo_weight", "noise",
       "rounds_limit", "epochs", "batch_size", "lr"},
      "config");

  if (j.contains("dataset")) apply_dataset_section(opt, j.at("dataset"));

  auto set_if = [&](const char* key, auto& dst) {
    using T = std::remove_reference_t<decltype(dst)>;
    if (j.contains(key)) {
      dst = config_value<T>(j, key);
      opt.mark(key, "file");
    }
  };
  set_if("out_dir", opt.out_dir);
  set_if("seed", opt.run.rng_seed);
  set_if("seed_count", opt.run.seed_count);
  set_if("budget", opt.run.oracle_budget);
  set_if("batch_k", opt.run.strategy.batch_k);
  set_if("tau", opt.run.confidence_threshold);
  set_if("beta", opt.run.strategy.beta);
  set_if("density_sample", opt.run.strategy.density_sample);
  set_if("pseudo", opt.run.pseudo_enabled);
  set_if("pseudo_cap", opt.run.pseudo_cap_per_round);
  set_if("pseudo_weight", opt.run.train.pseudo_weight);
  set_if("noise", opt.run.oracle_noise);
  set_if("rounds_limit", opt.run.rounds_limit);
  set_if("epochs", opt.run.train.epochs);
  set_if("batch_size", opt.run.train.batch_size);
  set_if("lr", opt.run.train.learning_rate);
  if (j.contains("uncertainty")) {
    opt.run.strategy.uncertainty =
        ab::uncertainty_kind_from_name(config_value<std::string>(j, "uncertainty"));
    opt.mark("uncertainty", "file");
  }
}

std::string dataset_description(const Options& opt) {
  if (!opt.data_csv.empty()) return "csv:" + opt.data_csv;
  const ab::SyntheticSpec& s = opt.synthetic;
  return "synthetic(classes=" + std::to_string(s.class_count) +
         ",dim=" + std::to_string(s.feature_dim) +
         ",per_class=" + std::to_string(s.per_class) +
         ",separation=" + ab::format_double(s.separation) +
         ",sigma=" + ab::format_double(s.noise_sigma) +
         ",seed=" + std::to_string(s.rng_seed) + ")";
}

void echo_config(const Options& opt, bool include_run) {
  if (opt.quiet) return;
  auto line = [&](const std::string& key, const std::string& value) {
    std::cout << "config " << key << "=" << value << " (" << opt.source_of(key) << ")\n";
  };
  line("dataset", dataset_description(opt));
  line("out_dir", opt.out_dir);
  if (!include_run) return;
  line("seed", std::to_string(opt.run.rng_seed));
  line("seed_count", std::to_string(opt.run.seed_count));
  line("budget", std::to_string(opt.run.oracle_budget));
  line("batch_k", std::to_string(opt.run.strategy.batch_k));
  line("tau", ab::format_double(opt.run.confidence_threshold));
  line("beta", ab::format_double(opt.run.strategy.beta));
  line("uncertainty", ab::uncertainty_kind_name(opt.run.strategy.uncertainty));
  line("density_sample", std::to_string(opt.run.strategy.density_sample));
  line("pseudo", opt.run.pseudo_enabled ? "true" : "false");
  line("pseudo_cap", std::to_string(ab::resolved_pseudo_cap(opt.run)));
  line("pseudo_weight", ab::format_double(opt.run.train.pseudo_weight));
  line("noise", ab::format_double(opt.run.oracle_noise));
  line("rounds_limit", std::to_string(opt.run.rounds_limit));
  line("epochs", std::to_string(opt.run.train.epochs));
  line("batch_size", std::to_string(opt.run.train.batch_size));
  line("lr", ab::format_double(opt.run.train.learning_rate));
}

ab::Dataset load_dataset(const Options& opt) {
  if (!opt.data_csv.empty()) return ab::load_embedding_csv(opt.data_csv);
  return ab::generate_synthetic(opt.synthetic);
}

int cmd_gen_data(const Options& opt) {
  const ab::Dataset data = ab::generate_synthetic(opt.synthetic);
  fs::create_directories(opt.out_dir);
  const std::string csv_path = opt.out_dir + "/dataset.csv";
  ab::write_embedding_csv(data, csv_path);
  ab::write_text_file(opt.out_dir + "/dataset.digest", data.digest + "\n");
  std::cout << data.digest << "\n";
  if (!opt.quiet) {
    std::cout << "wrote " << csv_path << " (" << data.total_size() << " instances, "
              << data.train.size() << " train / " << data.test.size() << " test)\n";
  }
  return 0;
}

int cmd_run(const Options& opt) {
  echo_config(opt, true);
  const ab::Dataset data = load_dataset(opt);
  fs::create_directories(opt.out_dir);

  std::vector<ab::PseudoAuditRow> audit;
  ab::RunHooks hooks;
  hooks.on_pseudo = [&](int round, const std::vector<ab::PseudoAssignment>& assigned) {
    for (const ab::PseudoAssignment& a : assigned) {
      audit.push_back({a.instance_id, a.label, a.confidence, round});
    }
  };
  hooks.on_round_end = [&](const ab::PoolState& state, const ab::BudgetLedger& ledger,
                           const ab::SoftmaxHead&, const ab::RoundRecord& record) {
    ab::write_state_snapshot(state, ledger, data.digest, opt.out_dir + "/state.json");
    if (!opt.quiet) {
      std::cout << "round " << record.round
                << ": accuracy=" << ab::format_double(record.test_accuracy)
                << " spent=" << record.oracle_spent << " pseudo=" << record.pseudo_count
                << "\n";
    }
  };
  if (opt.dump_scores) {
    hooks.on_scores = [&](int round, const std::vector<ab::ScoredInstance>& scored) {
      ab::write_text_file(opt.out_dir + "/scores_" + std::to_string(round) + ".csv",
                          ab::serialize_scores_csv(scored));
    };
  }

  const auto started = std::chrono::steady_clock::now();
  const ab::RunOutcome outcome = ab::run_experiment_full(data, opt.run, hooks);
  const auto elapsed_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                              std::chrono::steady_clock::now() - started)
                              .count();

  ab::write_report(outcome.report, opt.out_dir + "/report.json", ab::ReportFormat::json);
  ab::write_report(outcome.report, opt.out_dir + "/report.csv", ab::ReportFormat::csv);
  ab::write_head_checkpoint(outcome.head, opt.out_dir + "/head.json");
  ab::write_text_file(opt.out_dir + "/pseudo_audit.csv",
                      ab::serialize_pseudo_audit_csv(audit));

  std::cout << "final_accuracy="
            << ab::format_double(outcome.report.summary.final_test_accuracy)
            << " oracle_spent=" << outcome.report.summary.oracle_spent << "\n";
  if (!opt.quiet) {
    // Elapsed time goes to the console only; report files stay time-free so
    // identical runs emit identical bytes.
    std::cout << "elapsed_ms=" << elapsed_ms << "\n";
  }
  return 0;
}

int cmd_compare(const Options& opt) {
  if (opt.strategies.size() < 2) {
    ab::fail(ab::ErrorKind::invalid_config, "compare needs at least two strategies");
  }
  echo_config(opt, true);
  if (!opt.quiet) {
    std::cout << "config strategies=";
    for (std::size_t i = 0; i < opt.strategies.size(); ++i) {
      std::cout << (i ? "," : "") << opt.strategies[i];
    }
    std::cout << " seeds=";
    for (std::size_t i = 0; i < opt.seeds.size(); ++i) {
      std::cout << (i ? "," : "") << opt.seeds[i];
    }
    std::cout << " parallel=" << (opt.parallel ? "true" : "false") << "\n";
  }
  const ab::Dataset data = load_dataset(opt);
  fs::create_directories(opt.out_dir);

  std::vector<ab::NamedConfig> variants;
  variants.reserve(opt.strategies.size());
  for (const std::string& name : opt.strategies) {
    variants.push_back({name, ab::strategy_variant(opt.run, name)});
  }
  const ab::ComparisonReport report =
      ab::compare_strategies(data, variants, opt.seeds, opt.parallel);

  for (std::size_t vi = 0; vi < report.variant_names.size(); ++vi) {
    ab::write_text_file(opt.out_dir + "/curve_" + report.variant_names[vi] + ".csv",
                        ab::serialize_curve_csv(report, vi));
  }
  ab::write_text_file(opt.out_dir + "/summary.csv",
                      ab::serialize_comparison_summary_csv(report));
  ab::write_text_file(opt.out_dir + "/paired.csv", ab::serialize_paired_csv(report));

  for (std::size_t vi = 0; vi < report.variant_names.size(); ++vi) {
    std::cout << "variant=" << report.variant_names[vi]
              << " mean_final_accuracy=" << ab::format_double(report.mean_final_accuracy[vi])
              << " sd=" << ab::format_double(report.sd_final_accuracy[vi]) << "\n";
  }
  return 0;
}

int cmd_report(const std::string& input, const std::string& out_path) {
  const ab::RunReport report = ab::read_report_json(input);
  const std::string csv = ab::serialize_report_csv(report);
  if (out_path.empty()) {
    std::cout << csv;
  } else {
    ab::write_text_file(out_path, csv);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pool-based active learner with a confidence-budgeted annotator"};
  app.require_subcommand(1);
  app.fallthrough();

  const ab::RunConfig run_defaults{};
  const ab::SyntheticSpec syn_defaults{};

  std::string flag_config;
  std::string flag_out_dir = "out";
  std::uint64_t flag_seed = run_defaults.rng_seed;
  bool flag_quiet = false;
  auto* opt_config = app.add_option("--config", flag_config, "JSON config file");
  auto* opt_out_dir =
      app.add_option("--out-dir", flag_out_dir, "Output directory")->capture_default_str();
  auto* opt_seed =
      app.add_option("--seed", flag_seed, "Master RNG seed")->capture_default_str();
  app.add_flag("--quiet", flag_quiet, "Suppress config echo and per-round progress");

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic embedding CSV");
  int flag_classes = syn_defaults.class_count;
  int flag_dim = syn_defaults.feature_dim;
  int flag_per_class = syn_defaults.per_class;
  double flag_separation = syn_defaults.separation;
  double flag_sigma = syn_defaults.noise_sigma;
  auto* opt_classes =
      gen->add_option("--classes", flag_classes, "Class count")->capture_default_str();
  auto* opt_dim =
      gen->add_option("--dim", flag_dim, "Feature dimension")->capture_default_str();
  auto* opt_per_class = gen->add_option("--per-class", flag_per_class, "Instances per class")
                            ->capture_default_str();
  auto* opt_separation =
      gen->add_option("--separation", flag_separation, "Minimum distance between class means")
          ->capture_default_str();
  auto* opt_sigma = gen->add_option("--sigma", flag_sigma, "Within-class standard deviation")
                        ->capture_default_str();

  // Experiment flags, shared by run and compare.
  std::string flag_uncertainty = ab::uncertainty_kind_name(run_defaults.strategy.uncertainty);
  double flag_beta = run_defaults.strategy.beta;
  double flag_tau = run_defaults.confidence_threshold;
  int flag_budget = run_defaults.oracle_budget;
  int flag_batch_k = run_defaults.strategy.batch_k;
  bool flag_no_pseudo = false;
  double flag_noise = run_defaults.oracle_noise;
  int flag_epochs = run_defaults.train.epochs;
  int flag_batch_size = run_defaults.train.batch_size;
  double flag_lr = run_defaults.train.learning_rate;
  int flag_seed_count = run_defaults.seed_count;
  int flag_pseudo_cap = run_defaults.pseudo_cap_per_round;
  double flag_pseudo_weight = run_defaults.train.pseudo_weight;
  int flag_rounds_limit = run_defaults.rounds_limit;
  int flag_density_sample = run_defaults.strategy.density_sample;
  std::string flag_data;
  bool flag_dump_scores = false;

  struct ExperimentFlags {
    CLI::Option* uncertainty;
    CLI::Option* beta;
    CLI::Option* tau;
    CLI::Option* budget;
    CLI::Option* batch_k;
    CLI::Option* no_pseudo;
    CLI::Option* noise;
    CLI::Option* epochs;
    CLI::Option* batch_size;
    CLI::Option* lr;
    CLI::Option* seed_count;
    CLI::Option* pseudo_cap;
    CLI::Option* pseudo_weight;
    CLI::Option* rounds_limit;
    CLI::Option* density_sample;
    CLI::Option* data;
  };
  auto add_experiment_flags = [&](CLI::App* cmd) {
    ExperimentFlags f{};
    f.uncertainty = cmd->add_option("--uncertainty", flag_uncertainty,
                                    "Uncertainty measure: entropy, margin, or lc")
                        ->check(CLI::IsMember({"entropy", "margin", "lc"}))
                        ->capture_default_str();
    f.beta = cmd->add_option("--beta", flag_beta, "Density exponent; 0 disables density")
                 ->capture_default_str();
    f.tau = cmd->add_option("--tau", flag_tau, "Pseudo-label confidence threshold")
                ->capture_default_str();
    f.budget =
        cmd->add_option("--budget", flag_budget, "Oracle query budget")->capture_default_str();
    f.batch_k = cmd->add_option("--batch-k", flag_batch_k, "Oracle queries per round")
                    ->capture_default_str();
    f.no_pseudo = cmd->add_flag("--no-pseudo", flag_no_pseudo, "Disable pseudo-labeling");
    f.noise = cmd->add_option("--noise", flag_noise, "Oracle label-flip probability")
                  ->capture_default_str();
    f.epochs =
        cmd->add_option("--epochs", flag_epochs, "Training epochs per round")
            ->capture_default_str();
    f.batch_size = cmd->add_option("--batch-size", flag_batch_size, "SGD mini-batch size")
                       ->capture_default_str();
    f.lr = cmd->add_option("--lr", flag_lr, "SGD learning rate")->capture_default_str();
    f.seed_count = cmd->add_option("--seed-count", flag_seed_count, "Initial labeled seed size")
                       ->capture_default_str();
    f.pseudo_cap = cmd->add_option("--pseudo-cap", flag_pseudo_cap,
                                   "Pseudo-labels per round; negative means 5x batch-k")
                       ->capture_default_str();
    f.pseudo_weight =
        cmd->add_option("--pseudo-weight", flag_pseudo_weight,
                        "Training weight of pseudo-labeled examples")
            ->capture_default_str();
    f.rounds_limit = cmd->add_option("--rounds-limit", flag_rounds_limit,
                                     "Maximum rounds; 0 means unbounded")
                         ->capture_default_str();
    f.density_sample = cmd->add_option("--density-sample", flag_density_sample,
                                       "Pool subsample size per density evaluation")
                           ->capture_default_str();
    f.data = cmd->add_option("--data", flag_data, "Embedding CSV to use instead of synthetic data");
    return f;
  };

  auto* run = app.add_subcommand("run", "Run one active-learning experiment");
  const ExperimentFlags run_flags = add_experiment_flags(run);
  run->add_flag("--dump-scores", flag_dump_scores, "Write per-round score CSVs");

  auto* compare =
      app.add_subcommand("compare", "Run several strategies across seeds and aggregate");
  const ExperimentFlags compare_flags = add_experiment_flags(compare);
  std::vector<std::string> flag_strategies;
  std::vector<std::uint64_t> flag_seeds{1};
  bool flag_parallel = false;
  compare
      ->add_option("--strategies", flag_strategies,
                   "Variants to compare: random, uncertainty, hybrid, hybrid_budget")
      ->required()
      ->delimiter(',');
  compare->add_option("--seeds", flag_seeds, "Seeds for the cross product")
      ->delimiter(',')
      ->capture_default_str();
  compare->add_flag("--parallel", flag_parallel, "Fan runs out to a worker pool");

  auto* report_cmd = app.add_subcommand("report", "Re-emit a JSON report as CSV");
  std::string flag_report_in;
  std::string flag_report_out;
  report_cmd->add_option("input", flag_report_in, "Report JSON path")->required();
  report_cmd->add_option("--out", flag_report_out, "CSV output path; stdout when omitted");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    Options options;
    if (opt_config->count() > 0) {
      options.config_path = flag_config;
      apply_config_file(options);
    }
    auto take = [&](const CLI::Option* flag, auto& dst, const auto& value, const char* key) {
      if (flag != nullptr && flag->count() > 0) {
        dst = value;
        options.mark(key, "flag");
      }
    };
    take(opt_out_dir, options.out_dir, flag_out_dir, "out_dir");
    options.quiet = flag_quiet;

    if (gen->parsed()) {
      take(opt_seed, options.synthetic.rng_seed, flag_seed, "dataset");
      take(opt_classes, options.synthetic.class_count, flag_classes, "dataset");
      take(opt_dim, options.synthetic.feature_dim, flag_dim, "dataset");
      take(opt_per_class, options.synthetic.per_class, flag_per_class, "dataset");
      take(opt_separation, options.synthetic.separation, flag_separation, "dataset");
      take(opt_sigma, options.synthetic.noise_sigma, flag_sigma, "dataset");
      return cmd_gen_data(options);
    }

    const ExperimentFlags* f = run->parsed() ? &run_flags : &compare_flags;
    if (run->parsed() || compare->parsed()) {
      take(opt_seed, options.run.rng_seed, flag_seed, "seed");
      take(f->data, options.data_csv, flag_data, "dataset");
      take(f->budget, options.run.oracle_budget, flag_budget, "budget");
      take(f->batch_k, options.run.strategy.batch_k, flag_batch_k, "batch_k");
      take(f->tau, options.run.confidence_threshold, flag_tau, "tau");
      take(f->beta, options.run.strategy.beta, flag_beta, "beta");
      take(f->noise, options.run.oracle_noise, flag_noise, "noise");
      take(f->epochs, options.run.train.epochs, flag_epochs, "epochs");
      take(f->batch_size, options.run.train.batch_size, flag_batch_size, "batch_size");
      take(f->lr, options.run.train.learning_rate, flag_lr, "lr");
      take(f->seed_count, options.run.seed_count, flag_seed_count, "seed_count");
      take(f->pseudo_cap, options.run.pseudo_cap_per_round, flag_pseudo_cap, "pseudo_cap");
      take(f->pseudo_weight, options.run.train.pseudo_weight, flag_pseudo_weight,
           "pseudo_weight");
      take(f->rounds_limit, options.run.rounds_limit, flag_rounds_limit, "rounds_limit");
      take(f->density_sample, options.run.strategy.density_sample, flag_density_sample,
           "density_sample");
      if (f->uncertainty->count() > 0) {
        options.run.strategy.uncertainty = ab::uncertainty_kind_from_name(flag_uncertainty);
        options.mark("uncertainty", "flag");
      }
      if (f->no_pseudo->count() > 0) {
        options.run.pseudo_enabled = false;
        options.mark("pseudo", "flag");
      }
    }

    if (run->parsed()) {
      options.dump_scores = flag_dump_scores;
      return cmd_run(options);
    }
    if (compare->parsed()) {
      options.strategies = flag_strategies;
      options.seeds = flag_seeds;
      options.parallel = flag_parallel;
      return cmd_compare(options);
    }
    return cmd_report(flag_report_in, flag_report_out);
  } catch (const ab::Error& e) {
    std::cerr << "error (" << ab::error_kind_name(e.kind()) << "): " << e.what() << "\n";
    return e.kind() == ab::ErrorKind::invalid_config ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
