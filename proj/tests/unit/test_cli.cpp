#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "support.hpp"

namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code;
  std::string out;
};

CliResult run_cli(const std::string& args, const std::string& tag) {
  const auto dir = fs::path(lrl::test::temp_dir("cli_run_" + tag));
  const auto out = dir / "stdout.txt";
  const std::string cmd = std::string(LRL_CLI_PATH) + " " + args + " > " + out.string() + " 2> " +
                          (dir / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  std::ifstream in(out);
  std::ostringstream ss;
  ss << in.rdbuf();
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

std::string fixture(const std::string& name) { return lrl::test::data_path("fixtures/" + name); }

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("diagnose prints a profile") {
    const auto out = lrl::test::temp_dir("cli_diag");
    const auto r = run_cli("diagnose --dataset " + fixture("pseudo_topics.jsonl") +
                               " --language xpl_Latn --backend mock:keyword --output-dir " + out,
                           "diag");
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    for (const char* key : {"ip", "tbr", "tp", "n", "meta"}) CHECK(j.contains(key));
    CHECK(j.at("meta").contains("config_hash"));
    CHECK(j.at("meta").at("ip_orientation") == "nll_english/nll_target");
    CHECK(fs::exists(fs::path(out) / "profile.json"));
  }

  TEST_CASE("configuration problems exit with 2") {
    CHECK(run_cli("eval --dataset /nonexistent/data.jsonl --language-name X --backend mock:oracle", "c1").code == 2);
    CHECK(run_cli("eval --dataset " + fixture("pseudo_topics.jsonl") +
                      " --language-name X --variant sentence_alignment -k 6 --backend mock:oracle",
                  "c2")
              .code == 2);
    CHECK(run_cli("eval --bogus-flag", "c3").code == 2);
  }

  TEST_CASE("unreachable backend exits with 3") {
    const auto out = lrl::test::temp_dir("cli_unreach");
    const auto r = run_cli("eval --dataset " + fixture("pseudo_reading.jsonl") +
                               " --task multichoice --language-name X --backend http --backend-url "
                               "http://127.0.0.1:9 --model m --retry-scale 0 --output-dir " + out,
                           "unreach");
    CHECK(r.code == 3);
  }

  TEST_CASE("eval then compare") {
    const auto out = lrl::test::temp_dir("cli_cmp");
    const std::string common = "eval --dataset " + fixture("pseudo_topics.jsonl") + " --language-name Pseudolang " +
                               "--output-dir " + out;
    REQUIRE(run_cli(common + " --backend mock:oracle", "e1").code == 0);
    REQUIRE(run_cli(common + " --backend mock:keyword --variant fewshot_plain -k 2", "e2").code == 0);
    const auto a = (fs::path(out) / "records_baseline_zero.jsonl").string();
    const auto b = (fs::path(out) / "records_fewshot_plain-k2.jsonl").string();
    REQUIRE(fs::exists(a));
    REQUIRE(fs::exists(b));
    const auto r = run_cli("compare " + a + " " + b, "cmp");
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j.at("shared") == 204);
    CHECK(j.at("table").at("a_wrong_b_correct") == 0);
    CHECK(j.at("p_value").get<double>() <= 1.0);
    const auto alias = run_cli("report --compare " + a + " " + b, "alias");
    CHECK(alias.code == 0);
    CHECK(nlohmann::json::parse(alias.out).at("statistic") == j.at("statistic"));
  }

  TEST_CASE("recommend reads a profile") {
    const auto dir = fs::path(lrl::test::temp_dir("cli_rec"));
    std::ofstream(dir / "p.json") << R"({"language":"nqo_Nkoo","ip":0.16,"tbr":0.995,"tp":0.1,"baseline_accuracy":0.137})";
    const auto r = run_cli("recommend --profile " + (dir / "p.json").string(), "rec");
    REQUIRE(r.code == 0);
    CHECK(nlohmann::json::parse(r.out).at("category") == "extremely_under_represented");
    std::ofstream(dir / "q.json") << R"({"language":"nqo_Nkoo","ip":0.16,"tbr":0.995,"tp":0.1})";
    CHECK(run_cli("recommend --profile " + (dir / "q.json").string(), "rec2").code == 2);
  }
}
