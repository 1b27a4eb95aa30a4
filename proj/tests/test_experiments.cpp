#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rcmlab/experiments.hpp"
#include "rcmlab/rng.hpp"

using namespace rcm;

namespace {

std::filesystem::path temp_dir(const std::string& tag) {
  const auto dir = std::filesystem::temp_directory_path() / ("rcmlab_test_" + tag);
  std::filesystem::remove_all(dir);
  return dir;
}

std::vector<std::string> rows_without_wall(const std::filesystem::path& csv) {
  std::ifstream is(csv);
  REQUIRE(is.good());
  std::vector<std::string> rows;
  std::string line;
  while (std::getline(is, line)) {
    const auto cut = line.rfind(',');
    rows.push_back(line.substr(0, cut));
  }
  return rows;
}

}  // namespace

TEST_CASE("config validation and hashing") {
  ExperimentConfig cfg;
  cfg.experiment = "spectrum";
  cfg.n_grid = {4};
  cfg.out = "x";
  CHECK_NOTHROW(cfg.validate());

  SUBCASE("limit-law requires gamma > 0") {
    cfg.experiment = "limit-law";
    cfg.law_kind = "polynomial";
    cfg.gamma = -0.5;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  }
  SUBCASE("grid values must be >= 2") {
    cfg.n_grid = {1};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  }
  SUBCASE("hash ignores threads and out but tracks physics") {
    ExperimentConfig a = cfg, b = cfg;
    b.threads = 7;
    b.out = "elsewhere";
    CHECK(a.hash_hex() == b.hash_hex());
    b.gamma = 0.11;
    CHECK(a.hash_hex() != b.hash_hex());
  }
  SUBCASE("json round trip") {
    cfg.epsilon1 = 0.25;
    const ExperimentConfig back = ExperimentConfig::from_json(cfg.to_json());
    CHECK(back.experiment == cfg.experiment);
    CHECK(back.n_grid == cfg.n_grid);
    CHECK(back.epsilon1 == cfg.epsilon1);
    CHECK_THROWS_AS(ExperimentConfig::from_json("{"), ConfigError);
  }
  SUBCASE("epsilon recipes") {
    cfg.gamma = 0.1;
    CHECK(cfg.effective_epsilon1() == doctest::Approx(0.5));
    CHECK(cfg.effective_epsilon() == doctest::Approx(7.0 * 0.5 / (8.0 * 2.5)));
    cfg.gamma = 0.2;
    CHECK(cfg.effective_epsilon1() == doctest::Approx(0.49));
  }
}

TEST_CASE("spectrum run reproduces the homogeneous eigenvalue") {
  ExperimentConfig cfg;
  cfg.experiment = "spectrum";
  cfg.law_kind = "constant";
  cfg.const_c = 1.0;
  cfg.n_grid = {3};
  cfg.seeds = 1;
  cfg.out = temp_dir("spectrum").string();
  const SweepResult result = run(cfg);
  REQUIRE(result.records.size() == 1);
  CHECK(result.records[0].status == "ok");
  CHECK(result.records[0].lambda1 == doctest::Approx(0.30448).epsilon(1e-4));
  CHECK(result.records[0].min_pi == doctest::Approx(4.0));

  std::ifstream is(result.out_dir / "runs.csv");
  std::string header;
  std::getline(is, header);
  CHECK(header == kRunsCsvHeader);
  CHECK(std::filesystem::exists(result.out_dir / "summary.json"));
  CHECK(std::filesystem::exists(result.out_dir / "plotdata" / "psi_seed1_n3.csv"));
}

TEST_CASE("summary statistics recompute from the CSV") {
  ExperimentConfig cfg;
  cfg.experiment = "scaling";
  cfg.gamma = 0.3;
  cfg.n_grid = {4, 6, 8};
  cfg.seeds = 12;
  cfg.threads = 2;
  cfg.out = temp_dir("summary").string();
  const SweepResult result = run(cfg);

  // independent re-read of runs.csv
  std::ifstream is(result.out_dir / "runs.csv");
  std::string line;
  std::getline(is, line);
  std::map<int, std::vector<double>> lam;
  while (std::getline(is, line)) {
    std::stringstream ss(line);
    std::string tok;
    std::vector<std::string> parts;
    while (std::getline(ss, tok, ',')) parts.push_back(tok);
    REQUIRE(parts.size() == 12);
    if (parts[3] == "ok") lam[std::stoi(parts[2])].push_back(std::stod(parts[4]));
  }
  const nlohmann::json summary = nlohmann::json::parse(result.summary_json);
  for (const auto& row : summary["per_n"]) {
    const int n = row["n"].get<int>();
    REQUIRE(lam.count(n));
    CHECK(std::abs(row["median_lambda1"].get<double>() - median(lam[n])) <= 1e-12);
  }
  CHECK(summary.contains("slope"));
}

TEST_CASE("scaling_slope") {
  SUBCASE("exact power law has zero-width CI") {
    std::vector<RunRecord> records;
    for (int n : {8, 16, 32}) {
      for (int s = 0; s < 10; ++s) {
        RunRecord r;
        r.n = n;
        r.status = "ok";
        r.lambda1 = std::pow(static_cast<double>(n), -2.0);
        records.push_back(r);
      }
    }
    const SlopeFit fit = scaling_slope(records);
    CHECK(fit.slope == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(fit.ci_lo == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(fit.ci_hi == doctest::Approx(-2.0).epsilon(1e-12));
  }
  SUBCASE("noisy power law stays near the truth") {
    std::vector<RunRecord> records;
    std::uint64_t counter = 0;
    for (int n : {8, 12, 16, 24, 32}) {
      for (int s = 0; s < 40; ++s) {
        RunRecord r;
        r.n = n;
        r.status = "ok";
        r.lambda1 = 3.0 * std::pow(static_cast<double>(n), -5.0) *
                    (0.9 + 0.2 * uniform01(8888, counter++));
        records.push_back(r);
      }
    }
    const SlopeFit fit = scaling_slope(records);
    CHECK(fit.slope >= -5.3);
    CHECK(fit.slope <= -4.7);
    CHECK(fit.ci_lo <= fit.slope);
    CHECK(fit.ci_hi >= fit.slope);
  }
  SUBCASE("grid preconditions") {
    std::vector<RunRecord> records;
    for (int s = 0; s < 10; ++s) {
      RunRecord r;
      r.n = 8;
      r.status = "ok";
      r.lambda1 = 0.1;
      records.push_back(r);
    }
    CHECK_THROWS_AS(scaling_slope(records), DomainError);
  }
}

TEST_CASE("rerunning a sweep is deterministic across thread counts") {
  ExperimentConfig cfg;
  cfg.experiment = "localization";
  cfg.gamma = 0.15;
  cfg.n_grid = {6, 8};
  cfg.seeds = 6;
  cfg.threads = 1;
  cfg.out = temp_dir("det1").string();
  const SweepResult a = run(cfg);
  cfg.threads = 2;
  cfg.out = temp_dir("det2").string();
  const SweepResult b = run(cfg);
  const auto rows_a = rows_without_wall(a.out_dir / "runs.csv");
  const auto rows_b = rows_without_wall(b.out_dir / "runs.csv");
  CHECK(rows_a == rows_b);
  CHECK(a.summary_json == b.summary_json);
}

TEST_CASE("localization sweep carries the audit columns") {
  ExperimentConfig cfg;
  cfg.experiment = "localization";
  cfg.gamma = 0.15;
  cfg.n_grid = {8};
  cfg.seeds = 4;
  cfg.out = temp_dir("loc").string();
  const SweepResult result = run(cfg);
  for (const RunRecord& r : result.records) {
    CHECK(r.status == "ok");
    CHECK(std::isfinite(r.mass_Dn));
    CHECK(std::isfinite(r.trap_count));
    CHECK(r.quotient_stat >= 0.0);
    CHECK(r.lambda1 <= r.min_pi * (1.0 + 1e-10));
  }
  std::ifstream audit(result.out_dir / "plotdata" / "localization_audit.csv");
  std::string header;
  std::getline(audit, header);
  CHECK(header == "seed,n,argmax_at_zn,pw_checked,pw_violations,pw_max_excess");
  int rows = 0;
  for (std::string line; std::getline(audit, line);) ++rows;
  CHECK(rows == 4);
}

TEST_CASE("traps and percolation sweeps run without eigen solves") {
  ExperimentConfig cfg;
  cfg.experiment = "traps";
  cfg.gamma = 0.2;
  cfg.n_grid = {8};
  cfg.seeds = 3;
  cfg.out = temp_dir("traps").string();
  const SweepResult t = run(cfg);
  CHECK(t.records.size() == 3);
  for (const auto& r : t.records) CHECK(std::isnan(r.lambda1));

  ExperimentConfig pc;
  pc.experiment = "percolation";
  pc.law_kind = "polynomial";
  pc.gamma = 1.0;
  pc.p = 0.9;
  pc.n_grid = {16};
  pc.seeds = 3;
  pc.out = temp_dir("perc").string();
  const SweepResult presult = run(pc);
  CHECK(presult.records.size() == 3);
  std::ifstream audit(presult.out_dir / "plotdata" / "percolation_audit.csv");
  std::string header;
  std::getline(audit, header);
  CHECK(header == "seed,n,status,density,holes,map_built,map_max_l1,dist_bound");
}

TEST_CASE("malformed configs fail before any sampling") {
  ExperimentConfig cfg;
  cfg.experiment = "limit-law";
  cfg.gamma = -1.0;
  cfg.n_grid = {8};
  cfg.out = temp_dir("bad").string();
  CHECK_THROWS_AS(run(cfg), ConfigError);
  CHECK_FALSE(std::filesystem::exists(std::filesystem::path(cfg.out) / "runs.csv"));
}
