#include <doctest.h>

#include <cmath>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qgsf/bench.hpp"

using namespace qgsf;

namespace {

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(field);
  return out;
}

// A fast grid on the two-node preset.
ExperimentConfig small_config() {
  return parse_experiment_config(R"({
    "algorithm": ["gqsf1", "gqsf2"],
    "q_grid": [0.5, "gaussian"],
    "beta_grid": [0.05, 0.1],
    "M": 200, "L": 5, "replications": 3, "base_seed": 11
  })");
}

std::string csv_of(const std::vector<CellResult>& r) {
  std::ostringstream out;
  emit_csv(r, out);
  return out.str();
}

}  // namespace

TEST_CASE("config defaults and aliases") {
  const ExperimentConfig c = parse_experiment_config(R"({"q_grid": [0.8], "beta_grid": [0.005]})");
  CHECK(c.gamma == 0.75);
  CHECK(c.M == 10000);
  CHECK(c.L == 100);
  CHECK(c.replications == 20);
  CHECK(c.algorithms == std::vector<Algorithm>{Algorithm::GqSF2});
  CHECK_FALSE(c.common_random_numbers);
  CHECK(c.system.network.total_dim() == 4);

  const ExperimentConfig a = parse_experiment_config(
      R"({"algorithm": "gqsf1", "q_grid": ["gaussian", "cauchy", -10], "beta_grid": [0.005]})");
  REQUIRE(a.q_grid.size() == 3);
  CHECK(a.q_grid[0].value == 1.0);
  CHECK(a.q_grid[0].alias == "gaussian");
  CHECK(a.q_grid[1].value == doctest::Approx(1.4));  // 1 + 2/(4+1)
  CHECK(a.q_grid[1].alias == "cauchy");
  CHECK(a.q_grid[2].alias.empty());
  CHECK(cauchy_q(20) == doctest::Approx(1.0 + 2.0 / 21.0));

  const ExperimentConfig big = parse_experiment_config(
      R"({"system": "20d", "q_grid": ["cauchy"], "beta_grid": [0.005]})");
  CHECK(big.system.network.total_dim() == 20);
  CHECK(big.q_grid[0].value == doctest::Approx(1.0 + 2.0 / 21.0));

  CHECK(parse_algorithm("Gq-SF2") == Algorithm::GqSF2);
  CHECK(to_string(Algorithm::GqSF1) == "gqsf1");
}

TEST_CASE("inline system with box and start point") {
  const ExperimentConfig c = parse_experiment_config(R"({
    "q_grid": [0.8], "beta_grid": [0.01],
    "system": {"lambda": [0.3], "p_leave": [0.5], "R": [5], "dims": [3], "theta_target": [0.2, 0.2, 0.2]},
    "box": {"lower": [0, 0, 0], "upper": [1, 1, 1]},
    "theta0": [0.9, 0.9, 0.9]
  })");
  CHECK(c.system.network.node_count() == 1);
  CHECK(c.system.box.upper() == std::vector<double>(3, 1.0));
  CHECK(c.system.theta0 == std::vector<double>(3, 0.9));

  const ExperimentConfig d = parse_experiment_config(R"({
    "q_grid": [0.8], "beta_grid": [0.01], "box": [0.0, 1.0]
  })");
  CHECK(d.system.box.lower() == std::vector<double>(4, 0.0));
}

TEST_CASE("config errors") {
  const char* bad[] = {
      R"({"q_grid": [0.8], "beta_grid": [0.005], "bogus": 1})",
      R"({"q_grid": [0.8], "beta_grid": [0.005], "gamma": 1.0})",
      R"({"q_grid": [0.8], "beta_grid": [0.005], "gamma": 0.5})",
      R"({"q_grid": [1.5], "beta_grid": [0.005]})",
      R"({"q_grid": [0.8], "beta_grid": [0.0]})",
      R"({"q_grid": [0.8], "beta_grid": [0.005], "algorithm": "spsa"})",
      R"({"q_grid": ["laplace"], "beta_grid": [0.005]})",
      R"({"q_grid": [0.8], "beta_grid": [0.005], "system": "three_node"})",
      R"({"q_grid": [0.8], "beta_grid": [0.005], "replications": 0})",
      R"({"q_grid": [0.8], "beta_grid": [0.005], "M": -3})",
      R"({"q_grid": [0.8], "beta_grid": [0.005], "theta0": [0.7, 0.3, 0.3, 0.3]})",
      R"({"q_grid": [0.8], "beta_grid": [0.005],
          "system": {"lambda": [0.3], "p_leave": [0.5], "R": [5], "dims": [1], "theta_target": [0.2]}})",
      R"({"beta_grid": [0.005]})",
      R"({"q_grid": [0.8], "beta_grid": [0.005])",
      R"([1, 2])",
  };
  for (const char* text : bad) {
    CAPTURE(text);
    CHECK_THROWS_AS(parse_experiment_config(text), ConfigError);
  }
  CHECK_THROWS_AS(load_experiment_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("replication streams are distinct across cells and replications") {
  std::set<std::uint64_t> ids;
  for (std::size_t cell = 0; cell < 30; ++cell)
    for (std::uint64_t r = 0; r < 20; ++r) {
      const RngStream s = replication_stream(5, cell, r);
      CHECK(s.seed() == 5);
      CHECK(s.stream_id() == derive_stream_id({5, cell, r}));
      ids.insert(s.stream_id());
    }
  CHECK(ids.size() == 600);
  CHECK(replication_stream(6, 0, 0).stream_id() != replication_stream(5, 0, 0).stream_id());
}

TEST_CASE("aggregation matches a recomputation from the replications") {
  const ExperimentConfig cfg = small_config();
  const auto results = run_experiment(cfg);
  REQUIRE(results.size() == cfg.cell_count());
  REQUIRE(results.size() == 8);

  // Grid order: algorithm, then q, then beta.
  CHECK(results[0].algorithm == Algorithm::GqSF1);
  CHECK(results[0].q.value == 0.5);
  CHECK(results[1].beta == 0.1);
  CHECK(results[2].q.alias == "gaussian");
  CHECK(results[4].algorithm == Algorithm::GqSF2);

  RunOptions opts;
  opts.target = cfg.system.network.theta_target;
  for (std::size_t cell = 0; cell < results.size(); ++cell) {
    const CellResult& c = results[cell];
    CHECK(c.failures == 0);
    REQUIRE(c.distances.size() == 3);
    double sum = 0.0;
    for (std::uint64_t r = 0; r < 3; ++r) {
      const RunResult run = run_replication(cfg, c.algorithm, c.q.value, c.beta,
                                            replication_stream(11, cell, r), opts);
      CHECK(c.distances[r] == *run.distance);
      sum += c.distances[r];
    }
    const double mean = sum / 3.0;
    double ss = 0.0;
    for (double d : c.distances) ss += (d - mean) * (d - mean);
    CHECK(c.mean_distance == doctest::Approx(mean).epsilon(1e-15));
    CHECK(c.std_distance == doctest::Approx(std::sqrt(ss / 2.0)).epsilon(1e-12));
  }
}

TEST_CASE("single replication has zero spread") {
  ExperimentConfig cfg = small_config();
  cfg.replications = 1;
  cfg.algorithms = {Algorithm::GqSF2};
  cfg.q_grid = {{0.8, ""}};
  cfg.beta_grid = {0.05};
  const auto r = run_experiment(cfg);
  REQUIRE(r.size() == 1);
  CHECK(r[0].std_distance == 0.0);
  CHECK(r[0].mean_distance == r[0].distances.at(0));
}

TEST_CASE("worker count does not change results") {
  ExperimentConfig cfg = small_config();
  const std::string serial = csv_of(run_experiment(cfg));
  cfg.workers = 3;
  const auto parallel = run_experiment(cfg);
  CHECK(csv_of(parallel) == serial);
  cfg.workers = 1;
  CHECK(csv_of(run_experiment(cfg)) == serial);
}

TEST_CASE("CSV layout and round trip") {
  std::ostringstream empty;
  emit_csv({}, empty);
  CHECK(empty.str() == "algorithm,q,beta,gamma,M,L,replications,mean_distance,std_distance,failures,seconds\n");

  ExperimentConfig cfg = small_config();
  const auto results = run_experiment(cfg);
  const auto lines = lines_of(csv_of(results));
  REQUIRE(lines.size() == results.size() + 1);
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto f = split(lines[i + 1], ',');
    REQUIRE(f.size() == 11);
    const CellResult& c = results[i];
    CHECK(f[0] == to_string(c.algorithm));
    CHECK(std::stod(f[1]) == c.q.value);
    CHECK(std::stod(f[2]) == c.beta);
    CHECK(std::stod(f[3]) == c.gamma);
    CHECK(std::stoull(f[4]) == c.M);
    CHECK(std::stoull(f[5]) == c.L);
    CHECK(std::stoull(f[6]) == c.replications);
    CHECK(std::stod(f[7]) == doctest::Approx(c.mean_distance).epsilon(5e-6));
    CHECK(std::stod(f[8]) == doctest::Approx(c.std_distance).epsilon(5e-6));
    CHECK(std::stoull(f[9]) == c.failures);
    CHECK(f[10] == "0");
  }

  CellResult one{Algorithm::GqSF2, {0.8, ""}, 0.005, 0.75, 10000, 100, 20, {0.1}, 0, 0.000123456789,
                 0.5, 2.25};
  std::ostringstream single;
  emit_csv({one}, single, CsvOptions{true});
  const auto two = lines_of(single.str());
  REQUIRE(two.size() == 2);
  CHECK(two[1] == "gqsf2,0.8,0.005,0.75,10000,100,20,0.000123457,0.5,0,2.25");
}

TEST_CASE("identical configs give byte-identical CSV") {
  const std::string a = csv_of(run_experiment(small_config()));
  const std::string b = csv_of(run_experiment(small_config()));
  CHECK(a == b);
  ExperimentConfig other = small_config();
  other.base_seed = 12;
  CHECK(csv_of(run_experiment(other)) != a);
}

TEST_CASE("table layout") {
  std::vector<CellResult> cells;
  for (QValue q : {QValue{0.8, ""}, QValue{1.0, "gaussian"}, QValue{1.4, "cauchy"}})
    for (double beta : {0.005, 0.01}) {
      CellResult c{Algorithm::GqSF1, q, beta, 0.75, 10000, 100, 20, {0.00124}, 0, 0.00124, 0.00353, 0};
      cells.push_back(c);
    }
  cells[3].failures = 2;                // Gaussian row, second column
  cells[5].distances.clear();           // Cauchy row, everything failed
  cells[5].failures = 20;

  std::ostringstream out;
  emit_table(cells, out);
  const auto lines = lines_of(out.str());
  REQUIRE(lines.size() >= 5);
  CHECK(lines[0] == "Gq-SF1 (gamma=0.75)");
  CHECK(lines[1].rfind("q \\ beta", 0) == 0);
  CHECK(lines[1].find("0.005") != std::string::npos);
  CHECK(lines[1].find("0.01") != std::string::npos);
  CHECK(lines[2].rfind("0.8", 0) == 0);
  CHECK(lines[3].rfind("Gaussian", 0) == 0);
  CHECK(lines[4].rfind("Cauchy", 0) == 0);

  const std::regex cell(R"(\d\.\d{5}±\d\.\d{5}\*?)");
  for (int row = 2; row <= 3; ++row) {
    const std::string& l = lines[static_cast<std::size_t>(row)];
    const auto n = std::distance(std::sregex_iterator(l.begin(), l.end(), cell), std::sregex_iterator());
    CHECK(n == 2);
  }
  CHECK(lines[2].find("0.00124±0.00353") != std::string::npos);
  CHECK(lines[3].find("0.00124±0.00353*") != std::string::npos);
  CHECK(lines[4].find("diverged") != std::string::npos);

  // A 2x2 grid: a title, a header and two rows.
  std::vector<CellResult> square(cells.begin(), cells.begin() + 4);
  std::ostringstream sq;
  emit_table(square, sq);
  const auto sl = lines_of(sq.str());
  CHECK(sl.size() == 5);  // trailing blank line included
  CHECK(sl[4].empty());
}

TEST_CASE("moment verification grid") {
  RngStream s(3, 3);
  const auto grid = moment_verification_grid(0.5, 2, 20000, s);
  REQUIRE_FALSE(grid.empty());
  for (const MomentCheck& m : grid) {
    CHECK(m.spec.powers.size() == 2);
    if (m.exists) CHECK(std::abs(m.mc_mean - m.analytic) < 5.0 * m.mc_std_error + 1e-12);
  }
}
