#include <cmath>
#include <doctest.h>

#include "morl/behavioral.hpp"
#include "morl/errors.hpp"
#include "morl/rng.hpp"
#include "morl/testbeds.hpp"

using morl::ContractViolation;
using morl::GaussianPolicy;
using morl::KickstartConfig;
using morl::ObjectiveEvaluator;
using morl::RngStream;
using morl::TransitionBatch;

namespace {

TransitionBatch bandit_batch(const std::vector<double>& actions) {
  TransitionBatch batch;
  for (double a : actions) {
    morl::Transition t;
    t.state = 0;
    t.action = {a};
    const auto r = morl::bandit_reward(morl::BanditTask::schaffer(), a);
    t.rewards = {r[0], r[1]};
    batch.transitions.push_back(std::move(t));
  }
  return batch;
}

// hand-rolled behavioral-cloning loss, the reduction target of several losses
double bc_loss(const TransitionBatch& batch, const GaussianPolicy& theta) {
  double acc = 0.0;
  for (const auto& t : batch.transitions)
    acc += theta.log_density(std::nullopt, t.action);
  return -acc / batch.size();
}

GaussianPolicy perturbed(const GaussianPolicy& base, int mean_index,
                         int ls_index, double h) {
  GaussianPolicy p = base;
  if (mean_index >= 0) p.mean_params()[mean_index] += h;
  if (ls_index >= 0) p.log_std_params()[ls_index] += h;
  return p;
}

const auto kQ0 = ObjectiveEvaluator::bandit(morl::BanditTask::schaffer(), 0);

}  // namespace

TEST_CASE("combined-exponent kickstart weights at the extremes") {
  const std::vector<std::vector<double>> q{{1.0, 0.5, -0.2}};
  const std::vector<std::vector<double>> lr{{-0.3, 0.8, 0.1}};

  SUBCASE("alpha = 0 ignores the prior") {
    const auto w = morl::kickstart_weights_ls(q, lr, 0.0, 0.7);
    double z = 0.0;
    for (double v : q[0]) z += std::exp(v / 0.7);
    for (std::size_t j = 0; j < 3; ++j)
      CHECK(w[0][j] == doctest::Approx(std::exp(q[0][j] / 0.7) / z).epsilon(1e-12));
  }

  SUBCASE("alpha = 1 ignores the task values") {
    const auto w = morl::kickstart_weights_ls(q, lr, 1.0, 0.7);
    double z = 0.0;
    for (double v : lr[0]) z += std::exp(v / 0.7);
    for (std::size_t j = 0; j < 3; ++j)
      CHECK(w[0][j] == doctest::Approx(std::exp(lr[0][j] / 0.7) / z).epsilon(1e-12));
  }

  SUBCASE("constant inputs give uniform rows") {
    const auto w = morl::kickstart_weights_ls({{2.0, 2.0, 2.0}}, {{1.0, 1.0, 1.0}},
                                              0.4, 1.0);
    for (double v : w[0]) CHECK(v == doctest::Approx(1.0 / 3.0));
  }

  SUBCASE("rows sum to one") {
    const auto w = morl::kickstart_weights_ls(q, lr, 0.37, 0.9);
    double sum = 0.0;
    for (double v : w[0]) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("mixture kickstart weights") {
  const std::vector<std::vector<double>> q{{1.0, 0.5, -0.2}};
  const std::vector<std::vector<double>> lr{{-0.3, 0.8, 0.1}};

  SUBCASE("agrees with the combined form at the extremes") {
    for (double alpha : {0.0, 1.0}) {
      const auto mix = morl::kickstart_weights_dime(q, lr, alpha, 0.7, 0.7);
      const auto comb = morl::kickstart_weights_ls(q, lr, alpha, 0.7);
      for (std::size_t j = 0; j < 3; ++j)
        CHECK(mix[0][j] == doctest::Approx(comb[0][j]).epsilon(1e-10));
    }
  }

  SUBCASE("interior alpha is the arithmetic mixture of the two experts") {
    const auto task_only = morl::kickstart_weights_dime(q, lr, 0.0, 0.7, 1.3);
    const auto prior_only = morl::kickstart_weights_dime(q, lr, 1.0, 0.7, 1.3);
    const auto mix = morl::kickstart_weights_dime(q, lr, 0.5, 0.7, 1.3);
    double sum = 0.0;
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(mix[0][j] == doctest::Approx(0.5 * task_only[0][j] +
                                         0.5 * prior_only[0][j])
                             .epsilon(1e-12));
      sum += mix[0][j];
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("kickstart weight validation") {
  CHECK_THROWS_AS(morl::kickstart_weights_ls({{1.0}}, {{1.0}}, -0.1, 1.0),
                  ContractViolation);
  CHECK_THROWS_AS(morl::kickstart_weights_ls({{1.0}}, {{1.0}}, 0.5, 0.0),
                  ContractViolation);
  CHECK_THROWS_AS(morl::kickstart_weights_ls({{1.0}}, {{1.0, 2.0}}, 0.5, 1.0),
                  ContractViolation);
  CHECK_THROWS_AS(morl::kickstart_weights_dime({{1.0}}, {{1.0}}, 0.5, 1.0, 0.0),
                  ContractViolation);
}

TEST_CASE("advantage-weighted loss reduces to cloning when advantages vanish") {
  const auto batch = bandit_batch({0.2, -0.5, 1.3, 0.9});
  const auto theta = GaussianPolicy::bandit({0.1}, {-0.2});
  // v equal to Q at each action would need per-sample values; use a zero
  // objective instead so A = 0 - 0 everywhere
  const auto zero = ObjectiveEvaluator::scaled(kQ0, 0.0);
  const auto res = morl::offline_loss_ls_crr(batch, zero, {0.0}, 1.0, theta);
  CHECK(res.loss == doctest::Approx(bc_loss(batch, theta)).epsilon(1e-12));
  CHECK(res.clip_count == 0);
}

TEST_CASE("huge beta flattens the advantage weighting to cloning") {
  const auto batch = bandit_batch({0.2, -0.5, 1.3, 0.9});
  const auto theta = GaussianPolicy::bandit({0.1}, {-0.2});
  const auto res = morl::offline_loss_ls_crr(batch, kQ0, {-1.0}, 1e9, theta);
  CHECK(res.loss == doctest::Approx(bc_loss(batch, theta)).epsilon(1e-6));
}

TEST_CASE("advantage-weighted loss hand fixture") {
  // Q_1 = -a^2, V = -1: A(0) = 1, A(sqrt 2) = -1; beta = 1 gives weights e, 1/e
  const double root2 = std::sqrt(2.0);
  const auto batch = bandit_batch({0.0, root2});
  const auto theta = GaussianPolicy::bandit({0.5}, {0.1});
  const auto res = morl::offline_loss_ls_crr(batch, kQ0, {-1.0}, 1.0, theta);
  const double expected = -(std::exp(1.0) * theta.log_density(std::nullopt, {0.0}) +
                            std::exp(-1.0) * theta.log_density(std::nullopt, {root2})) /
                          2.0;
  CHECK(res.loss == doctest::Approx(expected).epsilon(1e-12));
  CHECK_THROWS_AS(morl::offline_loss_ls_crr(batch, kQ0, {-1.0}, 0.0, theta),
                  ContractViolation);
}

TEST_CASE("exponent clipping is counted") {
  const auto batch = bandit_batch({0.0});
  const auto theta = GaussianPolicy::bandit({0.0}, {0.0});
  // A = 0 - (-1000) = 1000, exponent 10000 >> clip
  const auto res = morl::offline_loss_ls_crr(batch, kQ0, {-1000.0}, 0.1, theta);
  CHECK(res.clip_count == 1);
  CHECK(std::isfinite(res.loss));
}

TEST_CASE("two-term offline loss at alpha = 1 is exactly cloning") {
  const auto batch = bandit_batch({0.2, -0.5, 1.3});
  const auto theta = GaussianPolicy::bandit({0.4}, {0.0});
  const auto iterate = GaussianPolicy::bandit({0.0}, {0.0});
  RngStream rng(91, "dime1");
  const auto res =
      morl::offline_loss_dime(batch, iterate, kQ0, 1.0, 1.0, 30, theta, rng);
  CHECK(res.loss == doctest::Approx(bc_loss(batch, theta)).epsilon(1e-14));
  // and no dependence on the sampler stream
  RngStream rng2(17, "other");
  const auto res2 =
      morl::offline_loss_dime(batch, iterate, kQ0, 1.0, 1.0, 30, theta, rng2);
  CHECK(res.loss == res2.loss);
}

TEST_CASE("two-term offline loss at alpha = 0 ignores the batch actions") {
  const auto theta = GaussianPolicy::bandit({0.4}, {0.0});
  const auto iterate = GaussianPolicy::bandit({0.0}, {0.0});
  RngStream a(92, "dime0");
  RngStream b(92, "dime0");
  const auto r1 = morl::offline_loss_dime(bandit_batch({0.2, -0.5}), iterate, kQ0,
                                          0.0, 1.0, 30, theta, a);
  const auto r2 = morl::offline_loss_dime(bandit_batch({3.0, -2.0}), iterate, kQ0,
                                          0.0, 1.0, 30, theta, b);
  CHECK(r1.loss == r2.loss);
}

TEST_CASE("advantage-weighted cloning variant reductions") {
  const auto batch = bandit_batch({0.2, -0.5, 1.3});
  const auto theta = GaussianPolicy::bandit({0.4}, {0.0});
  const auto iterate = GaussianPolicy::bandit({0.0}, {0.0});

  SUBCASE("zero advantages reduce it to the two-term loss") {
    const auto zero = ObjectiveEvaluator::scaled(kQ0, 0.0);
    RngStream a(93, "awbc");
    RngStream b(93, "awbc");
    const auto awbc =
        morl::offline_loss_awbc(batch, zero, {0.0}, 0.5, 1.0, iterate, 30, theta, a);
    const auto dime =
        morl::offline_loss_dime(batch, iterate, zero, 0.5, 1.0, 30, theta, b);
    CHECK(awbc.loss == doctest::Approx(dime.loss).epsilon(1e-12));
  }

  SUBCASE("alpha = 0 removes the batch term entirely") {
    RngStream a(94, "awbc0");
    RngStream b(94, "awbc0");
    const auto awbc = morl::offline_loss_awbc(batch, kQ0, {-1.0}, 0.0, 1.0,
                                              iterate, 30, theta, a);
    const auto dime =
        morl::offline_loss_dime(batch, iterate, kQ0, 0.0, 1.0, 30, theta, b);
    CHECK(awbc.loss == doctest::Approx(dime.loss).epsilon(1e-12));
  }
}

TEST_CASE("offline loss gradients match central finite differences") {
  RngStream rng(95, "fd");
  const double h = 1e-6;
  for (int trial = 0; trial < 50; ++trial) {
    const auto batch = bandit_batch({rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0),
                                     rng.uniform(-2.0, 2.0)});
    const auto theta = GaussianPolicy::bandit({rng.uniform(-1.0, 1.0)},
                                              {rng.uniform(-0.5, 0.5)});
    const auto iterate = GaussianPolicy::bandit({rng.uniform(-1.0, 1.0)},
                                                {rng.uniform(-0.3, 0.3)});
    const double alpha = rng.uniform(0.1, 0.9);
    const double beta = rng.uniform(0.3, 3.0);
    RngStream sampler = rng.child("sampler-" + std::to_string(trial));

    const auto check_grads = [&](auto&& loss_fn) {
      const auto res = loss_fn(theta);
      const double fd_mean = (loss_fn(perturbed(theta, 0, -1, h)).loss -
                              loss_fn(perturbed(theta, 0, -1, -h)).loss) /
                             (2 * h);
      const double fd_ls = (loss_fn(perturbed(theta, -1, 0, h)).loss -
                            loss_fn(perturbed(theta, -1, 0, -h)).loss) /
                           (2 * h);
      const double sm = std::max(1.0, std::abs(fd_mean));
      const double sl = std::max(1.0, std::abs(fd_ls));
      CHECK(std::abs(res.d_mean[0] - fd_mean) / sm < 1e-4);
      CHECK(std::abs(res.d_log_std[0] - fd_ls) / sl < 1e-4);
    };

    check_grads([&](const GaussianPolicy& p) {
      return morl::offline_loss_ls_crr(batch, kQ0, {-1.0}, beta, p);
    });
    check_grads([&](const GaussianPolicy& p) {
      RngStream replay = sampler;  // identical samples for every evaluation
      return morl::offline_loss_dime(batch, iterate, kQ0, alpha, 1.0, 20, p,
                                     replay);
    });
    check_grads([&](const GaussianPolicy& p) {
      RngStream replay = sampler;
      return morl::offline_loss_awbc(batch, kQ0, {-1.0}, alpha, 1.0, iterate, 20,
                                     p, replay);
    });
  }
}

TEST_CASE("learned trade-off update") {
  KickstartConfig config;
  config.learned = true;
  config.x = 0.3;
  config.threshold_c = -1.0;
  config.step_size = 0.5;

  SUBCASE("return above threshold decreases alpha") {
    const auto next = morl::update_learned_tradeoff(config, 2.0);
    CHECK(next.x < config.x);
    CHECK(next.effective_alpha() < config.effective_alpha());
  }

  SUBCASE("return below threshold increases alpha") {
    const auto next = morl::update_learned_tradeoff(config, -3.0);
    CHECK(next.x > config.x);
  }

  SUBCASE("the threshold itself is a fixed point") {
    const auto next = morl::update_learned_tradeoff(config, -1.0);
    CHECK(next.x == config.x);
  }

  SUBCASE("alpha stays inside (0, 1) under persistent errors") {
    auto c = config;
    for (int i = 0; i < 100; ++i) c = morl::update_learned_tradeoff(c, 10.0);
    CHECK(c.effective_alpha() > 0.0);
    CHECK(c.effective_alpha() < 1.0);
    for (int i = 0; i < 100; ++i) c = morl::update_learned_tradeoff(c, -12.0);
    CHECK(c.effective_alpha() > 0.0);
    CHECK(c.effective_alpha() < 1.0);
  }

  SUBCASE("fixed mode rejects updates") {
    KickstartConfig fixed;
    CHECK_THROWS_AS(morl::update_learned_tradeoff(fixed, 0.0), ContractViolation);
  }
}
