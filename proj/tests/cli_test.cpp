#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct CmdResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr merged
};

// Runs the installed binary through the shell; ALBUDGET_CLI_PATH is injected
// by the build so the test follows the binary wherever cmake puts it.
CmdResult run_cli(const std::string& args) {
  const std::string command = std::string(ALBUDGET_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string output;
  char buffer[4096];
  while (std::fgets(buffer, sizeof buffer, pipe) != nullptr) output += buffer;
  const int status = pclose(pipe);
  CmdResult result;
  result.output = output;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::string fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("albudget_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir.string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void spit(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  REQUIRE(out.good());
  out << body;
}

int count_lines(const std::string& text) {
  int lines = 0;
  for (char c : text) lines += c == '\n';
  return lines;
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

// Small experiment config so CLI runs finish in milliseconds.
std::string write_small_config(const std::string& dir, int budget = 20) {
  const std::string path = dir + "/config.json";
  spit(path,
       "{\n"
       "  \"dataset\": {\"synthetic\": {\"classes\": 3, \"dim\": 4, \"per_class\": 20, "
       "\"seed\": 9}},\n"
       "  \"budget\": " + std::to_string(budget) + ",\n"
       "  \"batch_k\": 10,\n"
       "  \"seed_count\": 6,\n"
       "  \"epochs\": 3\n"
       "}\n");
  return path;
}

}  // namespace

TEST_CASE("help exits cleanly, missing subcommand does not") {
  CHECK(run_cli("--help").exit_code == 0);
  CHECK(run_cli("").exit_code == 2);
  CHECK(run_cli("frobnicate").exit_code == 2);
  CHECK(run_cli("run --no-such-flag").exit_code == 2);
}

TEST_CASE("gen-data writes a loadable deterministic dataset") {
  const std::string dir_a = fresh_dir("gen_a");
  const auto a = run_cli("gen-data --classes 3 --dim 4 --per-class 10 --seed 5 --out-dir " +
                         dir_a + " --quiet");
  CHECK(a.exit_code == 0);

  // First stdout line is the 16-hex-digit digest.
  const std::string digest = a.output.substr(0, a.output.find('\n'));
  CHECK(digest.size() == 16);
  CHECK(digest.find_first_not_of("0123456789abcdef") == std::string::npos);
  CHECK(slurp(dir_a + "/dataset.digest") == digest + "\n");

  // 3 classes x 10 per class plus one header line.
  const std::string csv = slurp(dir_a + "/dataset.csv");
  CHECK(count_lines(csv) == 31);
  CHECK(csv.rfind("dim=4,classes=3\n", 0) == 0);

  const std::string dir_b = fresh_dir("gen_b");
  const auto b = run_cli("gen-data --classes 3 --dim 4 --per-class 10 --seed 5 --out-dir " +
                         dir_b + " --quiet");
  CHECK(b.exit_code == 0);
  CHECK(slurp(dir_b + "/dataset.csv") == csv);

  const std::string dir_c = fresh_dir("gen_c");
  const auto c = run_cli("gen-data --classes 3 --dim 4 --per-class 10 --seed 6 --out-dir " +
                         dir_c + " --quiet");
  CHECK(c.exit_code == 0);
  CHECK(slurp(dir_c + "/dataset.csv") != csv);
}

TEST_CASE("gen-data defaults produce the full-size pool") {
  const std::string dir = fresh_dir("gen_default");
  const auto result = run_cli("gen-data --out-dir " + dir);
  CHECK(result.exit_code == 0);
  CHECK(contains(result.output, "6000 instances"));
  CHECK(contains(result.output, "4800 train / 1200 test"));
  CHECK(count_lines(slurp(dir + "/dataset.csv")) == 6001);
}

TEST_CASE("gen-data rejects invalid shapes with exit 2") {
  CHECK(run_cli("gen-data --classes 1 --out-dir " + fresh_dir("gen_bad1")).exit_code == 2);
  CHECK(run_cli("gen-data --sigma -1 --out-dir " + fresh_dir("gen_bad2")).exit_code == 2);
}

TEST_CASE("run produces the full artifact set") {
  const std::string dir = fresh_dir("run_basic");
  const std::string config = write_small_config(dir);
  const auto result = run_cli("run --config " + config + " --out-dir " + dir + " --seed 7");
  CHECK(result.exit_code == 0);

  CHECK(contains(result.output, "final_accuracy="));
  CHECK(contains(result.output, "oracle_spent=20"));
  CHECK(contains(result.output, "config budget=20 (file)"));
  CHECK(contains(result.output, "config seed=7 (flag)"));
  CHECK(contains(result.output, "config tau=0.95 (default)"));
  CHECK(contains(result.output, "elapsed_ms="));

  for (const char* artifact : {"report.json", "report.csv", "head.json", "state.json",
                               "pseudo_audit.csv"}) {
    CHECK(fs::exists(dir + "/" + artifact));
  }
  CHECK(contains(slurp(dir + "/report.csv"),
                 "round,test_accuracy,train_loss,oracle_spent"));
  CHECK(contains(slurp(dir + "/pseudo_audit.csv"), "id,label,confidence,round"));
}

TEST_CASE("quiet mode silences everything but the result line") {
  const std::string dir = fresh_dir("run_quiet");
  const std::string config = write_small_config(dir);
  const auto result =
      run_cli("run --config " + config + " --out-dir " + dir + " --quiet");
  CHECK(result.exit_code == 0);
  CHECK(!contains(result.output, "config "));
  CHECK(!contains(result.output, "elapsed_ms"));
  CHECK(!contains(result.output, "round 0"));
  CHECK(contains(result.output, "final_accuracy="));
}

TEST_CASE("identical run invocations are byte-identical") {
  const std::string dir_a = fresh_dir("run_det_a");
  const std::string dir_b = fresh_dir("run_det_b");
  const std::string config = write_small_config(dir_a);
  const auto a =
      run_cli("run --config " + config + " --out-dir " + dir_a + " --seed 7 --quiet");
  const auto b =
      run_cli("run --config " + config + " --out-dir " + dir_b + " --seed 7 --quiet");
  CHECK(a.exit_code == 0);
  CHECK(b.exit_code == 0);
  CHECK(a.output == b.output);
  for (const char* artifact : {"report.json", "report.csv", "head.json", "state.json",
                               "pseudo_audit.csv"}) {
    CHECK(slurp(dir_a + "/" + artifact) == slurp(dir_b + "/" + artifact));
  }

  const std::string dir_c = fresh_dir("run_det_c");
  const auto c =
      run_cli("run --config " + config + " --out-dir " + dir_c + " --seed 8 --quiet");
  CHECK(c.exit_code == 0);
  CHECK(slurp(dir_c + "/report.json") != slurp(dir_a + "/report.json"));
}

TEST_CASE("a zero budget run reports the baseline only") {
  const std::string dir = fresh_dir("run_zero");
  const std::string config = write_small_config(dir, 0);
  const auto result =
      run_cli("run --config " + config + " --out-dir " + dir + " --quiet");
  CHECK(result.exit_code == 0);
  CHECK(contains(result.output, "oracle_spent=0"));
  CHECK(count_lines(slurp(dir + "/report.csv")) == 2);
}

TEST_CASE("flags override config file values") {
  const std::string dir = fresh_dir("run_override");
  const std::string config = write_small_config(dir, 20);
  const auto result =
      run_cli("run --config " + config + " --out-dir " + dir + " --budget 10");
  CHECK(result.exit_code == 0);
  CHECK(contains(result.output, "config budget=10 (flag)"));
  CHECK(contains(result.output, "oracle_spent=10"));
}

TEST_CASE("dump-scores writes one table per round") {
  const std::string dir = fresh_dir("run_scores");
  const std::string config = write_small_config(dir);
  const auto result = run_cli("run --config " + config + " --out-dir " + dir +
                              " --dump-scores --quiet");
  CHECK(result.exit_code == 0);
  // Budget 20 at batch 10 is two rounds.
  CHECK(fs::exists(dir + "/scores_0.csv"));
  CHECK(fs::exists(dir + "/scores_1.csv"));
  CHECK(contains(slurp(dir + "/scores_0.csv"), "id,uncertainty,density,hybrid"));
}

TEST_CASE("bad flag values exit 2 before any work") {
  const std::string dir = fresh_dir("run_badflags");
  const std::string config = write_small_config(dir);
  CHECK(run_cli("run --config " + config + " --uncertainty gini").exit_code == 2);
  CHECK(run_cli("run --config " + config + " --lr 0").exit_code == 2);
  CHECK(run_cli("run --config " + config + " --seed-count 0").exit_code == 2);
  CHECK(run_cli("run --config " + config + " --noise 2").exit_code == 2);
  CHECK(run_cli("run --config " + config + " --batch-k 0").exit_code == 2);
}

TEST_CASE("config file problems exit 2") {
  const std::string dir = fresh_dir("config_bad");

  const std::string unknown = dir + "/unknown.json";
  spit(unknown, R"({"budgett": 10})");
  CHECK(run_cli("run --config " + unknown).exit_code == 2);

  const std::string malformed = dir + "/malformed.json";
  spit(malformed, "{not json");
  CHECK(run_cli("run --config " + malformed).exit_code == 2);

  CHECK(run_cli("run --config " + dir + "/missing.json").exit_code == 2);

  const std::string both = dir + "/both.json";
  spit(both, R"({"dataset": {"csv": "x.csv", "synthetic": {"classes": 3}}})");
  CHECK(run_cli("run --config " + both).exit_code == 2);

  const std::string bad_type = dir + "/badtype.json";
  spit(bad_type, R"({"budget": "lots"})");
  CHECK(run_cli("run --config " + bad_type).exit_code == 2);
}

TEST_CASE("io failures exit 1") {
  const std::string dir = fresh_dir("run_io");
  const std::string config = write_small_config(dir);
  CHECK(run_cli("run --config " + config + " --data /nonexistent/pool.csv --out-dir " +
                dir)
            .exit_code == 1);
  CHECK(run_cli("report /nonexistent/report.json").exit_code == 1);
}

TEST_CASE("compare emits per-variant curves and aggregates") {
  const std::string dir = fresh_dir("compare_basic");
  const std::string config = write_small_config(dir);
  const auto result = run_cli("compare --config " + config + " --out-dir " + dir +
                              " --strategies random,uncertainty --seeds 1,2");
  CHECK(result.exit_code == 0);
  CHECK(contains(result.output, "variant=random mean_final_accuracy="));
  CHECK(contains(result.output, "variant=uncertainty mean_final_accuracy="));

  for (const char* artifact :
       {"curve_random.csv", "curve_uncertainty.csv", "summary.csv", "paired.csv"}) {
    CHECK(fs::exists(dir + "/" + artifact));
  }
  CHECK(contains(slurp(dir + "/summary.csv"), "variant,round,mean_test_accuracy"));
  // Two variants x two seeds plus the header.
  CHECK(count_lines(slurp(dir + "/paired.csv")) == 5);
}

TEST_CASE("compare validates its strategy list") {
  const std::string dir = fresh_dir("compare_bad");
  const std::string config = write_small_config(dir);
  CHECK(run_cli("compare --config " + config + " --strategies random").exit_code == 2);
  CHECK(run_cli("compare --config " + config + " --strategies random,random").exit_code ==
        2);
  CHECK(run_cli("compare --config " + config + " --strategies random,qbc").exit_code == 2);
  CHECK(run_cli("compare --config " + config).exit_code == 2);  // --strategies required
}

TEST_CASE("parallel comparison output matches sequential byte for byte") {
  const std::string dir_seq = fresh_dir("compare_seq");
  const std::string dir_par = fresh_dir("compare_par");
  const std::string config = write_small_config(dir_seq);
  const std::string args = " --strategies random,hybrid_budget --seeds 1,2";
  CHECK(run_cli("compare --config " + config + " --out-dir " + dir_seq + args + " --quiet")
            .exit_code == 0);
  CHECK(run_cli("compare --config " + config + " --out-dir " + dir_par + args +
                " --parallel --quiet")
            .exit_code == 0);
  for (const char* artifact :
       {"curve_random.csv", "curve_hybrid_budget.csv", "summary.csv", "paired.csv"}) {
    CHECK(slurp(dir_seq + "/" + artifact) == slurp(dir_par + "/" + artifact));
  }
}

TEST_CASE("report re-derives the CSV from the JSON") {
  const std::string dir = fresh_dir("report_cmd");
  const std::string config = write_small_config(dir);
  CHECK(run_cli("run --config " + config + " --out-dir " + dir + " --quiet").exit_code ==
        0);

  const std::string out_csv = dir + "/rederived.csv";
  CHECK(run_cli("report " + dir + "/report.json --out " + out_csv).exit_code == 0);
  CHECK(slurp(out_csv) == slurp(dir + "/report.csv"));

  // Without --out the CSV goes to stdout.
  const auto to_stdout = run_cli("report " + dir + "/report.json");
  CHECK(to_stdout.exit_code == 0);
  CHECK(to_stdout.output == slurp(dir + "/report.csv"));
}

TEST_CASE("an unwritable out-dir exits 1") {
  const std::string dir = fresh_dir("gen_unwritable");
  const std::string config = write_small_config(dir);
  CHECK(run_cli("gen-data --classes 2 --dim 2 --per-class 5 --out-dir /proc/albudget_x")
            .exit_code == 1);
  CHECK(run_cli("run --config " + config + " --out-dir /proc/albudget_x").exit_code == 1);
}
