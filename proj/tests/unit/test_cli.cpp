#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sbm/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = sbm::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string write_file(const std::string& name, const std::string& text) {
  fs::create_directories("cli_test");
  const fs::path path = fs::path("cli_test") / name;
  std::ofstream(path) << text;
  return path.string();
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("analyze on the isolated-cluster model") {
  const std::string cfg = write_file("ex1.json", R"({"pi": [0.1, 0.9], "M": [[5.0, 0.0], [0.0, 0.5555555555555556]]})");
  const Run r = run({"analyze", "--config", cfg});
  REQUIRE(r.code == sbm::cli::kOk);
  const json report = json::parse(r.out);
  CHECK(report["spectrum"]["lambda2_modulus"].get<double>() == doctest::Approx(1.0));
  CHECK(report["spectrum"]["ks_gap"].get<double>() == doctest::Approx(0.5));
  CHECK(report.contains("note"));
  CHECK(report["regime"].get<std::string>() == "CONTIGUOUS_NONRECONSTRUCTABLE");
}

TEST_CASE("analyze exits 0 in every regime") {
  for (const char* text : {R"({"two_cluster": {"p": 0.5, "a": 1.6, "d": 4}})",
                           R"({"two_cluster": {"p": 0.1, "a": 9.5, "d": 1}})",
                           R"({"pi": [0.5, 0.5], "M": [[2, 2], [2, 2]]})"}) {
    CHECK(run({"analyze", "--config", write_file("regime.json", text)}).code == sbm::cli::kOk);
  }
}

TEST_CASE("config errors name the field") {
  const Run no_pi = run({"analyze", "--config", write_file("nopi.json", R"({"M": [[1, 1], [1, 1]]})")});
  CHECK(no_pi.code == sbm::cli::kFailure);
  CHECK(no_pi.err.find("ConfigError") != std::string::npos);
  CHECK(no_pi.err.find("'pi'") != std::string::npos);
  const Run syntax = run({"analyze", "--config", write_file("broken.json", "{\n\"pi\": [0.5,\n")});
  CHECK(syntax.code == sbm::cli::kFailure);
  CHECK(syntax.err.find("line") != std::string::npos);
  const Run unequal = run({"analyze", "--config", write_file("uneq.json", R"({"pi": [0.5, 0.5], "M": [[1, 2], [2, 4]]})")});
  CHECK(unequal.code == sbm::cli::kFailure);
  CHECK(unequal.err.find("UnequalDegree") != std::string::npos);
}

TEST_CASE("qcurve CSV") {
  const Run r = run({"qcurve", "--pmin", "0.05", "--pmax", "0.5", "--steps", "32"});
  REQUIRE(r.code == sbm::cli::kOk);
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "p,threshold");
  std::string last;
  int rows = 0;
  while (std::getline(lines, line)) {
    last = line;
    ++rows;
  }
  CHECK(rows == 32);
  double p = 0;
  double t = 0;
  REQUIRE(std::sscanf(last.c_str(), "%lf,%lf", &p, &t) == 2);
  CHECK(p == doctest::Approx(0.5));
  CHECK(std::abs(t - 1.0) <= 0.02);
}

TEST_CASE("randomized subcommands need a seed") {
  const Run r = run({"sample", "--er", "--d", "2", "--n", "100"});
  CHECK(r.code != sbm::cli::kOk);
  CHECK(r.err.find("seed") != std::string::npos);
}

TEST_CASE("sample writes artifacts and replays identically") {
  fs::remove_all("cli_test/run");
  const std::string cfg = write_file("tc.json", R"({"two_cluster": {"p": 0.3, "a": 2, "d": 3}})");
  const Run first = run({"sample", "--config", cfg, "--n", "300", "--seed", "5", "--out", "cli_test/run/a"});
  REQUIRE(first.code == sbm::cli::kOk);
  CHECK(fs::exists("cli_test/run/a/graph.txt"));
  CHECK(fs::exists("cli_test/run/a/manifest.json"));
  const json manifest = json::parse(slurp("cli_test/run/a/manifest.json"));
  CHECK(manifest["seed"].get<std::uint64_t>() == 5);
  const Run again = run({"sample", "--config", cfg, "--n", "300", "--seed", "5", "--out", "cli_test/run/b"});
  CHECK(slurp("cli_test/run/a/graph.txt") == slurp("cli_test/run/b/graph.txt"));
  const Run replay = run({"replay", "--manifest", "cli_test/run/a/manifest.json", "--out", "cli_test/run/c"});
  CHECK(replay.code == sbm::cli::kOk);
  CHECK(slurp("cli_test/run/a/graph.txt") == slurp("cli_test/run/c/graph.txt"));
}

TEST_CASE("replay detects a tampered output digest") {
  fs::remove_all("cli_test/tamper");
  const Run first = run({"sample", "--er", "--d", "2", "--n", "100", "--seed", "3", "--out", "cli_test/tamper/a"});
  REQUIRE(first.code == sbm::cli::kOk);
  json manifest = json::parse(slurp("cli_test/tamper/a/manifest.json"));
  for (auto& [name, digest] : manifest["outputs"].items()) digest = "0000000000000000";
  std::ofstream("cli_test/tamper/a/manifest.json") << manifest.dump(2);
  const Run replay = run({"replay", "--manifest", "cli_test/tamper/a/manifest.json", "--out", "cli_test/tamper/b"});
  CHECK(replay.code == sbm::cli::kReplayMismatch);
}

TEST_CASE("cycles, moment, reconstruct and oracle run end to end") {
  const std::string cfg = write_file("tc2.json", R"({"two_cluster": {"p": 0.5, "a": 1.8, "d": 3}})");
  fs::remove_all("cli_test/g");
  REQUIRE(run({"sample", "--config", cfg, "--n", "500", "--seed", "1", "--out", "cli_test/g"}).code == sbm::cli::kOk);
  const Run cyc = run({"cycles", "--config", cfg, "--graph", "cli_test/g/graph.txt", "--K", "6"});
  REQUIRE(cyc.code == sbm::cli::kOk);
  CHECK(json::parse(cyc.out)["test"].contains("decision"));

  const std::string small = write_file("small.json", R"({"two_cluster": {"p": 0.5, "a": 1.4, "d": 2}})");
  const Run mom = run({"moment", "--config", small, "--n", "200", "--samples", "50", "--seed", "2", "--exact-tiny", "4"});
  REQUIRE(mom.code == sbm::cli::kOk);
  const json mj = json::parse(mom.out);
  CHECK(mj.contains("closed_form"));
  CHECK(mj.contains("empirical"));
  CHECK(run({"moment", "--config", small, "--n", "200"}).code != sbm::cli::kOk);

  const std::string rc = write_file("rc.json", R"({"two_cluster": {"p": 0.125, "a": 6, "d": 2}})");
  fs::remove_all("cli_test/rg");
  REQUIRE(run({"sample", "--config", rc, "--n", "16", "--seed", "4", "--out", "cli_test/rg"}).code == sbm::cli::kOk);
  const Run rec = run({"reconstruct", "--graph", "cli_test/rg/graph.txt", "--p", "0.125", "--a", "6", "--d", "2"});
  REQUIRE(rec.code == sbm::cli::kOk);
  CHECK(json::parse(rec.out)["partitions_checked"].get<long long>() == 120);

  const std::string skew = write_file("skew.json", R"({"two_cluster": {"p": 0.3, "a": 2, "d": 1.5}})");
  const Run tv = run({"oracle", "tv", "--config", skew, "--n", "4", "--pins-a", "0", "--pins-b", "1"});
  REQUIRE(tv.code == sbm::cli::kOk);
  CHECK(json::parse(tv.out)["tv"].get<double>() > 0.0);
  const Run post = run({"oracle", "posterior", "--config", small, "--n", "4", "--u", "0", "--pinned", "1", "--labels", "0"});
  CHECK(post.code == sbm::cli::kOk);
}

TEST_CASE("usage errors") {
  CHECK(run({}).code == sbm::cli::kUsage);
  CHECK(run({"bogus"}).code == sbm::cli::kUsage);
}
