#include <algorithm>
#include <cmath>
#include <doctest.h>

#include "morl/errors.hpp"
#include "morl/improvement.hpp"
#include "morl/rng.hpp"

using morl::GaussianPolicy;
using morl::ImprovementConfig;
using morl::ObjectiveSamples;
using morl::RngStream;
using morl::TradeOff;

namespace {

// Independent oracle for the temperature: two-stage dense grid minimization of
// the dual over log eta, reimplementing the dual from its definition.
double oracle_dual(const std::vector<std::vector<double>>& q, double eps,
                   double eta) {
  double outer = 0.0;
  for (const auto& row : q) {
    double inner = 0.0;
    for (double v : row) inner += std::exp(v / eta) / row.size();
    outer += std::log(inner) / q.size();
  }
  return eta * (eps + outer);
}

double oracle_eta(const std::vector<std::vector<double>>& q, double eps) {
  double best_t = 0.0, best_v = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 4000; ++i) {
    const double t = -6.0 * std::log(10.0) +
                     12.0 * std::log(10.0) * static_cast<double>(i) / 4000.0;
    const double v = oracle_dual(q, eps, std::exp(t));
    if (v < best_v) {
      best_v = v;
      best_t = t;
    }
  }
  const double width = 12.0 * std::log(10.0) / 4000.0;
  double lo = best_t - width, hi = best_t + width;
  for (int pass = 0; pass < 3; ++pass) {
    double fine_t = lo, fine_v = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 2000; ++i) {
      const double t = lo + (hi - lo) * static_cast<double>(i) / 2000.0;
      const double v = oracle_dual(q, eps, std::exp(t));
      if (v < fine_v) {
        fine_v = v;
        fine_t = t;
      }
    }
    const double w = (hi - lo) / 2000.0;
    lo = fine_t - w;
    hi = fine_t + w;
    best_t = fine_t;
  }
  return std::exp(best_t);
}

std::vector<std::vector<std::vector<double>>> dummy_actions(std::size_t states,
                                                            std::size_t n) {
  return std::vector<std::vector<std::vector<double>>>(
      states, std::vector<std::vector<double>>(n, {0.0}));
}

double row_entropy(const std::vector<double>& w) {
  double h = 0.0;
  for (double v : w)
    if (v > 0.0) h -= v * std::log(v);
  return h;
}

const ImprovementConfig kDefault;

}  // namespace

TEST_CASE("constant Q returns the conservative bound with zero KL") {
  const std::vector<std::vector<double>> q{{2.5, 2.5, 2.5}, {2.5, 2.5, 2.5}};
  const auto res = morl::solve_temperature(q, 0.1, 1e-6, 1e6, 1e-8);
  CHECK(res.eta == doctest::Approx(1e6));
  CHECK(res.achieved_kl == doctest::Approx(0.0));
  const auto w = morl::softmax_weights(q, res.eta);
  for (const auto& row : w)
    for (double v : row) CHECK(v == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("two-sample fixture hits the requested KL") {
  const std::vector<std::vector<double>> q{{1.0, 0.0}};
  const double eps = 0.3466;
  const auto res = morl::solve_temperature(q, eps, 1e-6, 1e6, 1e-8);
  CHECK(res.achieved_kl == doctest::Approx(eps).epsilon(0.05));
  CHECK(res.eta == doctest::Approx(oracle_eta(q, eps)).epsilon(1e-3));
}

TEST_CASE("huge epsilon concentrates on the argmax sample") {
  const std::vector<std::vector<double>> q{{0.3, -0.4, 1.2, 0.9}};
  const auto res = morl::solve_temperature(q, 1e3, 1e-6, 1e6, 1e-8);
  const auto w = morl::softmax_weights(q, res.eta);
  CHECK(*std::max_element(w[0].begin(), w[0].end()) >= 0.99);
  CHECK(w[0][2] == *std::max_element(w[0].begin(), w[0].end()));
}

TEST_CASE("weight rows are normalized and nonnegative in every mode") {
  RngStream rng(17, "rows");
  ObjectiveSamples samples;
  samples.q.assign(2, std::vector<std::vector<double>>(3));
  for (int k = 0; k < 2; ++k)
    for (int s = 0; s < 3; ++s) {
      samples.q[k][s].resize(10);
      for (auto& v : samples.q[k][s]) v = rng.uniform(-2.0, 2.0);
    }
  const auto actions = dummy_actions(3, 10);
  const auto iterate = GaussianPolicy::bandit({0.0}, {0.0});
  const auto check_rows = [](const morl::ExpertResult& r) {
    for (const auto& mat : r.experts.weights)
      for (const auto& row : mat) {
        double sum = 0.0;
        for (double v : row) {
          CHECK(v >= 0.0);
          sum += v;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));
      }
  };
  check_rows(morl::expert_weights_dime(actions, samples, kDefault, iterate));
  check_rows(morl::expert_weights_ls(actions, samples, kDefault,
                                     TradeOff::scalar(0.3), iterate));
  check_rows(morl::expert_weights_mompo(actions, samples, kDefault, {0.05, 0.2},
                                        iterate));
}

TEST_CASE("identical objectives give identical expert matrices") {
  ObjectiveSamples samples;
  samples.q = {{{0.5, -0.1, 0.9}}, {{0.5, -0.1, 0.9}}};
  const auto res =
      morl::expert_weights_dime(dummy_actions(1, 3), samples, kDefault,
                                GaussianPolicy::bandit({0.0}, {0.0}));
  CHECK(res.experts.weights[0] == res.experts.weights[1]);
}

TEST_CASE("scaling an objective leaves its expert weights invariant") {
  RngStream rng(23, "scale");
  ObjectiveSamples base, scaled;
  base.q.assign(1, std::vector<std::vector<double>>(2));
  for (auto& row : base.q[0]) {
    row.resize(12);
    for (auto& v : row) v = rng.uniform(-1.0, 1.0);
  }
  scaled = base;
  for (auto& row : scaled.q[0])
    for (auto& v : row) v *= 10.0;
  const auto iterate = GaussianPolicy::bandit({0.0}, {0.0});
  const auto a = morl::expert_weights_dime(dummy_actions(2, 12), base, kDefault,
                                           iterate);
  const auto b = morl::expert_weights_dime(dummy_actions(2, 12), scaled,
                                           kDefault, iterate);
  for (std::size_t s = 0; s < 2; ++s)
    for (std::size_t j = 0; j < 12; ++j)
      CHECK(a.experts.weights[0][s][j] ==
            doctest::Approx(b.experts.weights[0][s][j]).epsilon(1e-6));
  // the temperature absorbs the scale
  CHECK(b.duals.eta[0] == doctest::Approx(10.0 * a.duals.eta[0]).epsilon(1e-3));
}

TEST_CASE("LS at an extreme trade-off equals the single-objective expert") {
  ObjectiveSamples samples;
  samples.q = {{{0.5, -0.1, 0.9, 0.2}}, {{-5.0, 3.0, 0.0, 1.0}}};
  const auto iterate = GaussianPolicy::bandit({0.0}, {0.0});
  const auto ls = morl::expert_weights_ls(dummy_actions(1, 4), samples, kDefault,
                                          TradeOff::scalar(1.0), iterate);
  const auto dime =
      morl::expert_weights_dime(dummy_actions(1, 4), samples, kDefault, iterate);
  for (std::size_t j = 0; j < 4; ++j)
    CHECK(ls.experts.weights[0][0][j] ==
          doctest::Approx(dime.experts.weights[0][0][j]).epsilon(1e-9));
}

TEST_CASE("LS cancellation gives uniform weights") {
  ObjectiveSamples samples;
  samples.q = {{{1.0, -0.5, 0.25}}, {{-1.0, 0.5, -0.25}}};
  const auto res = morl::expert_weights_ls(dummy_actions(1, 3), samples, kDefault,
                                           TradeOff::scalar(0.5),
                                           GaussianPolicy::bandit({0.0}, {0.0}));
  for (double v : res.experts.weights[0][0]) CHECK(v == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("LS scale-sensitivity witness: argmax weight flips") {
  // Q_1 = [1, 0], Q_2 = [0, 0.2]: scalarized argmax moves when Q_2 is scaled
  ObjectiveSamples base;
  base.q = {{{1.0, 0.0}}, {{0.0, 0.2}}};
  ObjectiveSamples scaled = base;
  for (auto& v : scaled.q[1][0]) v *= 10.0;
  const auto iterate = GaussianPolicy::bandit({0.0}, {0.0});
  const auto t = TradeOff::scalar(0.5);
  const auto wa =
      morl::expert_weights_ls(dummy_actions(1, 2), base, kDefault, t, iterate)
          .experts.weights[0][0];
  const auto wb =
      morl::expert_weights_ls(dummy_actions(1, 2), scaled, kDefault, t, iterate)
          .experts.weights[0][0];
  // grid-oracle level statement: the scalarized argmax flips from sample 0 to 1
  CHECK(0.5 * 1.0 + 0.5 * 0.0 > 0.5 * 0.0 + 0.5 * 0.2);
  CHECK(0.5 * 1.0 + 0.5 * 0.0 < 0.5 * 0.0 + 0.5 * 2.0);
  CHECK(wa[0] > wa[1]);
  CHECK(wb[0] < wb[1]);
}

TEST_CASE("MOMPO with equal bounds matches DiME") {
  ObjectiveSamples samples;
  samples.q = {{{0.5, -0.1, 0.9}}, {{-5.0, 3.0, 0.0}}};
  const auto iterate = GaussianPolicy::bandit({0.0}, {0.0});
  const auto mompo = morl::expert_weights_mompo(dummy_actions(1, 3), samples,
                                                kDefault, {0.1, 0.1}, iterate);
  const auto dime =
      morl::expert_weights_dime(dummy_actions(1, 3), samples, kDefault, iterate);
  for (int k = 0; k < 2; ++k)
    for (std::size_t j = 0; j < 3; ++j)
      CHECK(mompo.experts.weights[k][0][j] ==
            doctest::Approx(dime.experts.weights[k][0][j]).epsilon(1e-9));
}

TEST_CASE("MOMPO zero bound forces uniform weights") {
  ObjectiveSamples samples;
  samples.q = {{{0.5, -0.1, 0.9}}, {{-5.0, 3.0, 0.0}}};
  const auto res = morl::expert_weights_mompo(dummy_actions(1, 3), samples,
                                              kDefault, {0.0, 0.1},
                                              GaussianPolicy::bandit({0.0}, {0.0}));
  for (double v : res.experts.weights[0][0]) CHECK(v == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("larger bound concentrates weights more") {
  ObjectiveSamples samples;
  samples.q = {{{0.5, -0.1, 0.9, 0.3}}, {{0.5, -0.1, 0.9, 0.3}}};
  const auto res = morl::expert_weights_mompo(dummy_actions(1, 4), samples,
                                              kDefault, {0.05, 0.8},
                                              GaussianPolicy::bandit({0.0}, {0.0}));
  CHECK(row_entropy(res.experts.weights[1][0]) <
        row_entropy(res.experts.weights[0][0]));
}

TEST_CASE("dual optimality on random matrices") {
  RngStream rng(31, "dual");
  for (int trial = 0; trial < 30; ++trial) {
    const int states = 1 + static_cast<int>(rng.next_u64() % 3);
    const int n = 5 + static_cast<int>(rng.next_u64() % 20);
    std::vector<std::vector<double>> q(states, std::vector<double>(n));
    const double scale = std::exp(rng.uniform(-2.0, 3.0));
    for (auto& row : q)
      for (auto& v : row) v = scale * rng.normal();
    const double eps = rng.uniform(0.02, 0.8);
    const auto res = morl::solve_temperature(q, eps, 1e-6, 1e6, 1e-8);
    CHECK(res.achieved_kl == doctest::Approx(eps).epsilon(0.05));
    CHECK(res.eta == doctest::Approx(oracle_eta(q, eps)).epsilon(1e-3));
  }
}

TEST_CASE("temperature solve input validation") {
  CHECK_THROWS_AS(morl::solve_temperature({}, 0.1, 1e-6, 1e6, 1e-8),
                  morl::ContractViolation);
  CHECK_THROWS_AS(morl::solve_temperature({{1.0}}, 0.1, 1e-6, 1e6, 1e-8),
                  morl::ContractViolation);
  CHECK_THROWS_AS(morl::solve_temperature({{1.0, 2.0}}, 0.0, 1e-6, 1e6, 1e-8),
                  morl::ContractViolation);
}

TEST_CASE("empirical KL of uniform weights is zero") {
  CHECK(morl::empirical_kl({{0.25, 0.25, 0.25, 0.25}}) == doctest::Approx(0.0));
}
