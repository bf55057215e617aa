#include <cmath>
#include <doctest.h>
#include <sstream>

#include "morl/errors.hpp"
#include "morl/runner.hpp"

using morl::ConfigError;
using morl::ExperimentConfig;

namespace {

ExperimentConfig tiny_sweep_config() {
  auto c = morl::parse_config(R"({
    "task": "schaffer",
    "method": "dime",
    "tradeoffs": {"type": "linspace", "lo": 0.1, "hi": 0.9, "count": 3},
    "iterations": 5,
    "seeds": [1],
    "improvement": {"sample_count": 10},
    "projection": {"max_steps": 50}
  })");
  return c;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) out.push_back(line);
  return out;
}

int count_commas(const std::string& s) {
  int n = 0;
  for (char c : s)
    if (c == ',') ++n;
  return n;
}

}  // namespace

TEST_CASE("config parsing round-trips losslessly") {
  const std::string text = R"({
    "task": "fonseca-fleming",
    "method": "ls",
    "iterations": 42,
    "seeds": [5, 6],
    "workers": 2,
    "init": {"mean": 0.25, "std": 0.5},
    "reward_scales": [1.0, 10.0]
  })";
  const auto once = morl::config_to_json(morl::parse_config(text));
  const auto twice = morl::config_to_json(morl::parse_config(once));
  CHECK(once == twice);
}

TEST_CASE("defaults survive the canonical form") {
  const auto c = morl::parse_config(R"({"task": "chain", "method": "mompo"})");
  CHECK(c.iterations == 200);
  CHECK(c.seeds == std::vector<std::uint64_t>{1, 2, 3});
  CHECK(c.mompo_epsilon_scale == doctest::Approx(0.2));
  CHECK_FALSE(c.init.mean.has_value());
  const auto back = morl::parse_config(morl::config_to_json(c));
  CHECK(morl::config_to_json(back) == morl::config_to_json(c));
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(morl::parse_config("not json"), ConfigError);
  CHECK_THROWS_AS(morl::parse_config(R"({"task": "schaffer"})"), ConfigError);
  CHECK_THROWS_AS(
      morl::parse_config(R"({"task": "nope", "method": "dime"})"), ConfigError);
  CHECK_THROWS_AS(
      morl::parse_config(R"({"task": "schaffer", "method": "dime", "bogus": 1})"),
      ConfigError);
  CHECK_THROWS_AS(morl::parse_config(
                      R"({"task": "schaffer", "method": "dime",
                          "offline": {"objective": 0, "bogus": 1}})"),
                  ConfigError);
  CHECK_THROWS_AS(morl::parse_config(
                      R"({"task": "schaffer", "method": "dime",
                          "projection": {"beta_mu": 1.0}})"),
                  ConfigError);
  CHECK_THROWS_AS(morl::parse_config_file("/nonexistent/config.json"),
                  ConfigError);
}

TEST_CASE("config hash ignores the worker count but not the experiment") {
  auto a = tiny_sweep_config();
  auto b = a;
  b.workers = 8;
  CHECK(morl::config_hash(a) == morl::config_hash(b));
  auto c = a;
  c.iterations = 6;
  CHECK(morl::config_hash(a) != morl::config_hash(c));
}

TEST_CASE("trade-off grids") {
  morl::TradeoffSpec lin;
  lin.lo = 0.0;
  lin.hi = 1.0;
  lin.count = 5;
  const auto grid = lin.grid();
  REQUIRE(grid.size() == 5);
  CHECK(grid.front().alpha() == doctest::Approx(0.0));
  CHECK(grid.back().alpha() == doctest::Approx(1.0));

  morl::TradeoffSpec list;
  list.kind = morl::TradeoffSpec::Kind::List;
  list.values = {{0.2, 0.8}, {0.9, 0.1}};
  const auto fixed = list.grid();
  REQUIRE(fixed.size() == 2);
  CHECK(fixed[0].alpha() == doctest::Approx(0.2));
  CHECK(fixed[1].alpha() == doctest::Approx(0.9));
}

TEST_CASE("sweep output schema and determinism") {
  auto config = tiny_sweep_config();
  const auto out = morl::run_sweep(config);

  REQUIRE(out.rows.size() == 3);  // 3 trade-offs x 1 seed
  for (const auto& row : out.rows) {
    CHECK(row.method == "dime");
    CHECK(std::isfinite(row.obj1));
    CHECK(std::isfinite(row.obj2));
    CHECK(row.iterations == 5);
  }

  const auto lines = lines_of(out.front_csv);
  REQUIRE(lines.size() == 2 + out.rows.size());
  CHECK(lines[0].rfind("# config=", 0) == 0);
  CHECK(lines[1] == "method,alpha_1,alpha_2,obj_1,obj_2,iterations,seed");
  for (std::size_t i = 2; i < lines.size(); ++i)
    CHECK(count_commas(lines[i]) == 6);

  SUBCASE("identical reruns produce identical bytes") {
    const auto again = morl::run_sweep(config);
    CHECK(again.front_csv == out.front_csv);
    CHECK(again.summary_json == out.summary_json);
  }

  SUBCASE("worker count does not change the bytes") {
    auto parallel = config;
    parallel.workers = 3;
    CHECK(morl::run_sweep(parallel).front_csv == out.front_csv);
  }
}

TEST_CASE("front metrics recompute from the written csv") {
  const auto out = morl::run_sweep(tiny_sweep_config());
  const auto metrics = morl::eval_front_csv(
      out.front_csv, morl::TaskId::Schaffer,
      morl::default_coverage_threshold(morl::TaskId::Schaffer));
  CHECK(metrics.hypervolume == doctest::Approx(out.hypervolume).epsilon(1e-12));
  CHECK(metrics.nondominated_count >= 1);
  REQUIRE(out.coverage.has_value());
  REQUIRE(metrics.coverage.has_value());
  CHECK(*metrics.coverage == doctest::Approx(*out.coverage).epsilon(1e-12));
}

TEST_CASE("plot data includes methods and the analytic front") {
  const auto out = morl::run_sweep(tiny_sweep_config());
  const auto plot = morl::plot_data_csv(out.front_csv, morl::TaskId::Schaffer);
  const auto lines = lines_of(plot);
  REQUIRE(!lines.empty());
  CHECK(lines[0] == "series,obj_1,obj_2");
  int dime_rows = 0, front_rows = 0;
  for (const auto& line : lines) {
    if (line.rfind("dime,", 0) == 0) ++dime_rows;
    if (line.rfind("true-front,", 0) == 0) ++front_rows;
  }
  CHECK(dime_rows == 3);
  CHECK(front_rows == 100);
}

TEST_CASE("conditioned run emits conditioned rows") {
  auto config = tiny_sweep_config();
  config.method = morl::MethodId::DimeMulti;
  config.conditioned_blocks = 3;
  const auto out = morl::run_conditioned(config);
  REQUIRE(out.rows.size() == 3);
  for (const auto& row : out.rows) {
    CHECK(row.conditioned);
    CHECK(std::isfinite(row.obj1));
  }
  const auto lines = lines_of(out.front_csv);
  CHECK(lines[1] == "method,alpha_1,alpha_2,obj_1,obj_2,iterations,seed,conditioned");
  const auto again = morl::run_conditioned(config);
  CHECK(again.front_csv == out.front_csv);
}

TEST_CASE("offline runs are deterministic and finite") {
  auto config = morl::parse_config(R"({
    "task": "schaffer",
    "method": "offline-dime-bc",
    "tradeoffs": {"type": "list", "values": [[0.2, 0.8], [0.8, 0.2]]},
    "seeds": [1],
    "offline": {"steps": 40, "dataset": {"size": 32,
      "behavior": [{"weight": 1.0, "mean": 2.0, "std": 0.1}]}}
  })");
  const auto out = morl::run_offline(config);
  REQUIRE(out.rows.size() == 2);
  for (const auto& row : out.rows) {
    CHECK(std::isfinite(row.obj1));
    CHECK(std::isfinite(row.obj2));
  }
  CHECK(morl::run_offline(config).front_csv == out.front_csv);

  SUBCASE("cloning collapses the grid to a single run") {
    auto bc = config;
    bc.method = morl::MethodId::OfflineBc;
    const auto bc_out = morl::run_offline(bc);
    CHECK(bc_out.rows.size() == 1);
    // cloning a dataset centered at 2 lands near the second objective optimum
    CHECK(bc_out.rows[0].obj2 > -0.5);
  }
}

TEST_CASE("kickstart curve schema and determinism") {
  auto config = morl::parse_config(R"({
    "task": "schaffer",
    "method": "kickstart-ls",
    "iterations": 5,
    "seeds": [1, 2],
    "improvement": {"sample_count": 10},
    "projection": {"max_steps": 50},
    "kickstart": {"alpha": 0.5, "prior_mean": 2.0, "prior_std": 0.3}
  })");
  const auto out = morl::run_kickstart(config);
  REQUIRE(out.rows.size() == 10);  // 5 iterations x 2 seeds
  for (const auto& row : out.rows) {
    CHECK(row.alpha == doctest::Approx(0.5));
    CHECK(std::isfinite(row.expected_q));
    CHECK(row.kl_to_prior >= 0.0);
  }
  const auto lines = lines_of(out.curve_csv);
  CHECK(lines[0].rfind("# config=", 0) == 0);
  CHECK(lines[1] == "iteration,alpha,expected_q,kl_to_prior,seed");
  CHECK(morl::run_kickstart(config).curve_csv == out.curve_csv);
}
