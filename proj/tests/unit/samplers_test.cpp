// Copyright 2026 The LKTD Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>
#include <cstring>

#include "lktd/error.hpp"
#include "lktd/samplers.hpp"
#include "test_util.hpp"

namespace lktd {
namespace {

TEST(Schedule, ConstantAndPolynomial) {
  SamplerConfig c;
  c.eps0 = 0.01;
  EXPECT_EQ(lr_schedule(c, 1), 0.01);
  EXPECT_EQ(lr_schedule(c, 12345), 0.01);
  c.decay = Decay::kPolynomial;
  c.decay_power = 0.5;
  EXPECT_DOUBLE_EQ(lr_schedule(c, 4), 0.005);
  EXPECT_EQ(lr_schedule(c, 1), 0.01);
  EXPECT_THROW(lr_schedule(c, 0), UsageError);
}

TEST(Config, ValidationPerEngine) {
  SamplerConfig c;
  EXPECT_NO_THROW(c.validate(Engine::kLktd));
  c.alpha = 1.0;
  EXPECT_THROW(c.validate(Engine::kLktd), ConfigError);
  EXPECT_NO_THROW(c.validate(Engine::kSgld));
  c = SamplerConfig{};
  c.inner_steps = 0;
  EXPECT_THROW(c.validate(Engine::kSgld), ConfigError);
  c = SamplerConfig{};
  c.momentum_damping = 0.0;
  EXPECT_THROW(c.validate(Engine::kSghmc), ConfigError);
  c = SamplerConfig{};
  c.adam.beta1 = 1.0;
  EXPECT_THROW(c.validate(Engine::kAdamDqn), ConfigError);
  EXPECT_EQ(parse_engine(to_string(Engine::kKova)), Engine::kKova);
  EXPECT_THROW(parse_engine("ekf"), ConfigError);
}

struct LinearSetup {
  Eigen::MatrixXd design;
  Eigen::VectorXd y;
  SamplerConfig config;
};

LinearSetup small_linear(std::uint64_t seed) {
  Rng rng(seed);
  LinearSetup s;
  s.design = testing::normal_matrix(rng, 3, 2);
  s.y = testing::normal_vector(rng, 3);
  s.config.eps0 = 1e-3;
  s.config.pseudo_pop = 30.0;
  s.config.alpha = 0.9;
  s.config.sigma2 = 0.5;
  s.config.inner_steps = 2;
  s.config.prior = MixturePrior{0.5, 0.3, 2.0};
  return s;
}

// The LKTD inner loop with explicit (p + n)-dimensional matrices: B = eps I, H = (0, I),
// R = 2 (1 - alpha) sigma^2 I, forecast noise N(0, (n/N) B), analysis
// perturbation N(0, (n/N) R). Noise is drawn per block in the documented
// order (theta, xi, v).
Eigen::VectorXd dense_lktd_theta(const LinearSetup& s, Eigen::VectorXd theta,
                                 int calls, Rng& rng) {
  const auto& c = s.config;
  const int p = static_cast<int>(theta.size());
  const int n = static_cast<int>(s.y.size());
  const int d = p + n;
  const double ratio = n / c.pseudo_pop;
  const double eps = c.eps0;
  const Eigen::MatrixXd b = eps * Eigen::MatrixXd::Identity(d, d);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, d);
  h.rightCols(n).setIdentity();
  const Eigen::MatrixXd r =
      2.0 * (1.0 - c.alpha) * c.sigma2 * Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd k = b * h.transpose() * (h * b * h.transpose() + r).inverse();
  const Eigen::LLT<Eigen::MatrixXd> fchol(ratio * b);
  const Eigen::LLT<Eigen::MatrixXd> rchol(ratio * r);
  const double split = c.alpha * c.sigma2;

  for (int call = 0; call < calls; ++call) {
    Eigen::VectorXd phi(d);
    phi << theta, s.y;
    for (int it = 0; it < c.inner_steps; ++it) {
      const Eigen::VectorXd th = phi.head(p);
      const Eigen::VectorXd xi = phi.tail(n);
      const Eigen::VectorXd resid = xi - s.design * th;
      Eigen::VectorXd grad(d);
      grad.head(p) = log_prior_grad(c.prior, th) +
                     (1.0 / ratio) * s.design.transpose() * resid / split;
      grad.tail(n) = -resid / split;
      Eigen::VectorXd z(d), zt(p), zx(n), zv(n);
      fill_normal(rng, zt, 1.0);
      fill_normal(rng, zx, 1.0);
      z << zt, zx;
      fill_normal(rng, zv, 1.0);
      const Eigen::VectorXd forecast =
          phi + 0.5 * eps * ratio * grad + fchol.matrixL() * z;
      const Eigen::VectorXd v = rchol.matrixL() * zv;
      phi = forecast + k * (s.y - h * forecast - v);
    }
    theta = phi.head(p);
  }
  return theta;
}

TEST(Lktd, ReplaysDenseAlgorithm) {
  const LinearSetup s = small_linear(41);
  LinearMeasurement model(s.design, s.y);
  SamplerState state = SamplerState::create(Engine::kLktd, Eigen::Vector2d(0.3, -0.7), s.config);
  Rng rng(77), oracle_rng(77);
  Eigen::VectorXd want = state.theta;
  for (int step = 0; step < 10; ++step) {
    lktd_step(state, model, s.config, rng);
    want = dense_lktd_theta(s, want, 1, oracle_rng);
    ASSERT_LT((state.theta - want).cwiseAbs().maxCoeff(), 1e-12) << "step " << step;
  }
  EXPECT_EQ(state.step, 10 * s.config.inner_steps);
}

TEST(Lktd, ThetaFixedWhenDriftAndNoiseVanish) {
  // The theta forecast noise has standard deviation sqrt(eps n / N); with a
  // vanishing step size and the residual at zero theta stays put to
  // rounding while xi still moves.
  LinearSetup s = small_linear(42);
  s.config.eps0 = 1e-300;
  s.config.prior = MixturePrior::gaussian(1e150);
  const Eigen::Vector2d theta(0.3, -0.7);
  LinearMeasurement model(s.design, s.design * theta);
  SamplerState state = SamplerState::create(Engine::kLktd, theta, s.config);
  Rng rng(3);
  lktd_step(state, model, s.config, rng);
  EXPECT_EQ(state.theta, theta);
}

TEST(Lktd, AugmentedReturnsFinalXi) {
  const LinearSetup s = small_linear(43);
  LinearMeasurement model(s.design, s.y);
  SamplerState a = SamplerState::create(Engine::kLktd, Eigen::Vector2d(0.1, 0.2), s.config);
  SamplerState b = a;
  Rng ra(5), rb(5);
  const AugmentedState phi = lktd_step_augmented(a, model, s.config, ra);
  lktd_step(b, model, s.config, rb);
  EXPECT_EQ(phi.theta, b.theta);
  EXPECT_EQ(phi.xi.size(), 3);
}

TEST(Lktd, DivergenceRaisesNumericError) {
  LinearSetup s = small_linear(44);
  s.config.eps0 = 1e300;
  LinearMeasurement model(s.design, s.y);
  SamplerState state = SamplerState::create(Engine::kLktd, Eigen::Vector2d(1.0, 1.0), s.config);
  Rng rng(1);
  EXPECT_THROW(
      for (int i = 0; i < 5; ++i) lktd_step(state, model, s.config, rng),
      NumericError);
}

TEST(Prototype, ReplaysDenseStep) {
  SamplerConfig c;
  c.eps0 = 0.02;
  c.sigma2 = 0.3;
  c.pseudo_pop = 6.0;
  const int d = 4, n = 2;
  Rng init(6);
  const Eigen::VectorXd phi = testing::normal_vector(init, d);
  const Eigen::VectorXd obs = testing::normal_vector(init, n);
  Eigen::MatrixXd prec = testing::normal_matrix(init, d, d);
  prec = prec * prec.transpose() + Eigen::MatrixXd::Identity(d, d);
  const LogDensityGradient grad = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return -prec * x;
  };

  Rng rng(19), oracle(19);
  const Eigen::VectorXd got = prototype_step(phi, grad, obs, c, rng);

  const double ratio = n / c.pseudo_pop;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, d);
  h.rightCols(n).setIdentity();
  const Eigen::MatrixXd b = c.eps0 * Eigen::MatrixXd::Identity(d, d);
  const Eigen::MatrixXd r = 2.0 * c.sigma2 * Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd k = b * h.transpose() * (h * b * h.transpose() + r).inverse();
  Eigen::VectorXd z(d), zv(n);
  fill_normal(oracle, z, 1.0);
  fill_normal(oracle, zv, 1.0);
  const Eigen::VectorXd forecast =
      phi + 0.5 * c.eps0 * ratio * grad(phi) + std::sqrt(ratio * c.eps0) * z;
  const Eigen::VectorXd want =
      forecast + k * (obs - h * forecast - std::sqrt(ratio * 2.0 * c.sigma2) * zv);
  EXPECT_LT((got - want).cwiseAbs().maxCoeff(), 1e-13);
  // Unobserved coordinates only see the forecast.
  EXPECT_EQ(got.head(d - n), forecast.head(d - n));
}

TEST(Sgld, ZeroStepSizeKeepsTheta) {
  LinearSetup s = small_linear(45);
  s.config.eps0 = 1e-300;
  LinearMeasurement model(s.design, s.y);
  const Eigen::Vector2d theta(0.5, 0.5);
  SamplerState state = SamplerState::create(Engine::kSgld, theta, s.config);
  Rng rng(2);
  sgld_step(state, model, s.config, rng);
  EXPECT_EQ(state.theta, theta);
}

TEST(Sghmc, FullDampingEqualsSgld) {
  LinearSetup s = small_linear(46);
  s.config.momentum_damping = 1.0;
  s.config.inner_steps = 4;
  LinearMeasurement model(s.design, s.y);
  SamplerState a = SamplerState::create(Engine::kSgld, Eigen::Vector2d(0.2, 0.1), s.config);
  SamplerState b = SamplerState::create(Engine::kSghmc, a.theta, s.config);
  Rng ra(8), rb(8);
  for (int i = 0; i < 10; ++i) {
    sgld_step(a, model, s.config, ra);
    sghmc_step(b, model, s.config, rb);
    ASSERT_LT((a.theta - b.theta).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(Sghmc, MomentumResetsPerBatch) {
  LinearSetup s = small_linear(47);
  s.config.momentum_damping = 0.1;
  LinearMeasurement model(s.design, s.y);
  SamplerState a = SamplerState::create(Engine::kSghmc, Eigen::Vector2d(0.2, 0.1), s.config);
  SamplerState b = a;
  b.momentum = Eigen::Vector2d(100.0, -100.0);
  Rng ra(9), rb(9);
  sghmc_step(a, model, s.config, ra);
  sghmc_step(b, model, s.config, rb);
  EXPECT_EQ(a.theta, b.theta);
}

// Conjugate 1-d chain: short version of the acceptance check.
TEST(Sgld, ConjugateMeanAndTempering) {
  const double a = 1.0, sigma2 = 1.0, y = 0.8;
  Eigen::MatrixXd design = Eigen::MatrixXd::Constant(1, 1, a);
  LinearMeasurement model(design, Eigen::VectorXd::Constant(1, y));
  double variances[2];
  int idx = 0;
  for (double pop : {1.0, 2.0}) {
    SamplerConfig c;
    c.eps0 = 1e-2;
    c.pseudo_pop = pop;
    c.sigma2 = sigma2;
    c.inner_steps = 1;
    c.prior = MixturePrior::gaussian(1.0);
    SamplerState st = SamplerState::create(Engine::kSgld, Eigen::VectorXd::Zero(1), c);
    Rng rng(100 + idx);
    double sum = 0.0, sum2 = 0.0;
    const int burn = 2000, draws = 200000;
    for (int i = 0; i < burn + draws; ++i) {
      sgld_step(st, model, c, rng);
      if (i >= burn) {
        sum += st.theta[0];
        sum2 += st.theta[0] * st.theta[0];
      }
    }
    const double mean = sum / draws;
    const double var = sum2 / draws - mean * mean;
    const double post_var = 1.0 / (1.0 + pop);
    const double post_mean = post_var * pop * y;
    EXPECT_NEAR(mean, post_mean, 0.03);
    EXPECT_NEAR(var / post_var, 1.0, 0.1);
    variances[idx++] = var;
  }
  EXPECT_LT(variances[1], variances[0]);
}

TEST(Kova, ScalarKalmanFilter) {
  SamplerConfig c;
  c.kova = KovaConfig{0.0, 1.0, 1.0, 1.0};
  LinearMeasurement model(Eigen::MatrixXd::Ones(1, 1), Eigen::VectorXd::Ones(1));
  SamplerState st = SamplerState::create(Engine::kKova, Eigen::VectorXd::Zero(1), c);
  kova_step(st, model, c);
  EXPECT_DOUBLE_EQ(st.theta[0], 0.5);
  EXPECT_DOUBLE_EQ(st.covariance(0, 0), 0.5);
}

TEST(Kova, ZeroRateOnlyInflates) {
  SamplerConfig c;
  c.kova = KovaConfig{1e-3, -1.0, 0.0, 2.0};
  Rng rng(12);
  LinearMeasurement model(testing::normal_matrix(rng, 3, 5), testing::normal_vector(rng, 3));
  const Eigen::VectorXd theta = testing::normal_vector(rng, 5);
  SamplerState st = SamplerState::create(Engine::kKova, theta, c);
  kova_step(st, model, c);
  EXPECT_EQ(st.theta, theta);
  EXPECT_TRUE(st.covariance.isApprox((2.0 + 1e-3) * Eigen::MatrixXd::Identity(5, 5), 0.0));
}

// Textbook EKF: P- = P + W, S = J^T P- J + G, K = P- J S^-1,
// mu += rate K (y - h), P = P- - rate K S K^T.
void dense_ekf(Eigen::VectorXd& mu, Eigen::MatrixXd& cov, const Eigen::MatrixXd& jac,
               const Eigen::VectorXd& innovation, double w, double g, double rate) {
  const Eigen::Index n = jac.cols();
  const Eigen::MatrixXd pred = cov + w * Eigen::MatrixXd::Identity(cov.rows(), cov.cols());
  const Eigen::MatrixXd s = jac.transpose() * pred * jac + g * Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd k = pred * jac * s.inverse();
  mu += rate * k * innovation;
  cov = pred - rate * k * s * k.transpose();
}

TEST(Kova, MatchesDenseEkfLinear) {
  Rng rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    SamplerConfig c;
    c.sigma2 = 0.3;
    c.kova = KovaConfig{1e-2, -1.0, 0.7, 1.0};
    const Eigen::MatrixXd a = testing::normal_matrix(rng, 3, 5);
    LinearMeasurement model(a, testing::normal_vector(rng, 3));
    SamplerState st = SamplerState::create(Engine::kKova, testing::normal_vector(rng, 5), c);
    Eigen::MatrixXd l = testing::normal_matrix(rng, 5, 5);
    st.covariance = l * l.transpose() + 0.5 * Eigen::MatrixXd::Identity(5, 5);
    Eigen::VectorXd mu = st.theta;
    Eigen::MatrixXd cov = st.covariance;
    for (int step = 0; step < 3; ++step) {
      dense_ekf(mu, cov, a.transpose(), model.target() - a * mu, 1e-2, 0.3, 0.7);
      kova_step(st, model, c);
      ASSERT_LT((st.theta - mu).cwiseAbs().maxCoeff(), 1e-10);
      ASSERT_LT((st.covariance - cov).cwiseAbs().maxCoeff(), 1e-10);
    }
  }
}

TEST(Kova, MatchesDenseEkfNetwork) {
  Rng rng(14);
  const MlpSpec spec{{2, 3, 2}};
  std::vector<Transition> ts(3);
  for (auto& t : ts) {
    t.state = testing::normal_vector(rng, 2);
    t.next_state = testing::normal_vector(rng, 2);
    t.action = static_cast<int>(rng() % 2);
    t.reward = 0.5;
  }
  const TransitionBatch batch = TransitionBatch::from(ts);
  const ParamVector target_net = testing::normal_vector(rng, spec.param_count());
  BellmanMeasurement model(MeasurementMode::kTdTarget, spec, batch, 0.9, &target_net,
                           Bootstrap::kMax);
  SamplerConfig c;
  c.kova = KovaConfig{1e-3, 0.5, 1.0, 1.0};
  SamplerState st =
      SamplerState::create(Engine::kKova, testing::normal_vector(rng, spec.param_count()), c);
  Eigen::VectorXd mu = st.theta;
  Eigen::MatrixXd cov = st.covariance;
  // Jacobian columns from unit cotangents on each selected output.
  Eigen::MatrixXd jac(spec.param_count(), 3);
  for (int j = 0; j < 3; ++j) {
    Eigen::MatrixXd cot = Eigen::MatrixXd::Zero(2, 1);
    cot(ts[j].action, 0) = 1.0;
    jac.col(j) = mlp_vjp(spec, mu, batch.states.col(j), cot);
  }
  const Eigen::MatrixXd q = testing::reference_forward(spec.layer_sizes, mu, batch.states);
  Eigen::VectorXd h(3);
  for (int j = 0; j < 3; ++j) h[j] = q(ts[j].action, j);
  dense_ekf(mu, cov, jac, model.target() - h, 1e-3, 0.5, 1.0);
  kova_step(st, model, c);
  EXPECT_LT((st.theta - mu).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((st.covariance - cov).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_EQ(st.covariance, st.covariance.transpose());
}

TEST(Kova, RefusesHugeNetworks) {
  SamplerConfig c;
  EXPECT_THROW(SamplerState::create(Engine::kKova, ParamVector::Zero(kKovaMaxParams + 1), c),
               ConfigError);
}

// h = 0 and a fixed vjp: the loss gradient is the constant -g / n.
class ConstantGradient final : public MeasurementModel {
 public:
  explicit ConstantGradient(Eigen::VectorXd g) : g_(std::move(g)) {}
  Eigen::Index param_dim() const override { return g_.size(); }
  Eigen::Index size() const override { return 1; }
  const Eigen::VectorXd& target() const override { return target_; }
  const Eigen::VectorXd& evaluate(const ParamVector&) override { return h_; }
  ParamVector vjp(const Eigen::VectorXd& cot) const override { return cot[0] * g_; }
  Eigen::MatrixXd jacobian() const override { return g_; }

 private:
  Eigen::VectorXd g_;
  Eigen::VectorXd target_ = Eigen::VectorXd::Ones(1);
  Eigen::VectorXd h_ = Eigen::VectorXd::Zero(1);
};

TEST(Adam, ZeroGradientDecaysMoments) {
  SamplerConfig c;
  ConstantGradient model(Eigen::VectorXd::Zero(2));
  SamplerState st = SamplerState::create(Engine::kAdamDqn, Eigen::Vector2d(1.0, 2.0), c);
  st.adam_m = Eigen::Vector2d(0.5, -0.5);
  st.adam_v = Eigen::Vector2d(0.25, 0.25);
  const Eigen::VectorXd theta = st.theta;
  // With m != 0 the first step still moves; check the decay of the moments
  // and that theta is unchanged when the moments are zero.
  adam_dqn_step(st, model, c);
  EXPECT_DOUBLE_EQ(st.adam_m[0], 0.9 * 0.5);
  EXPECT_DOUBLE_EQ(st.adam_v[1], 0.999 * 0.25);
  SamplerState fresh = SamplerState::create(Engine::kAdamDqn, theta, c);
  adam_dqn_step(fresh, model, c);
  EXPECT_EQ(fresh.theta, theta);
}

TEST(Adam, ConstantGradientStepTendsToLr) {
  SamplerConfig c;
  c.adam.lr = 1e-3;
  ConstantGradient model(Eigen::Vector2d(3.0, -0.01));
  SamplerState st = SamplerState::create(Engine::kAdamDqn, Eigen::Vector2d::Zero(), c);
  Eigen::VectorXd prev = st.theta;
  Eigen::VectorXd step;
  for (int i = 0; i < 5000; ++i) {
    adam_dqn_step(st, model, c);
    step = st.theta - prev;
    prev = st.theta;
  }
  // loss gradient is -g, so theta moves along +g.
  EXPECT_NEAR(step[0], 1e-3, 1e-9);
  EXPECT_NEAR(step[1], -1e-3, 1e-6);
}

TEST(Adam, ReplaysMomentRecurrence) {
  Rng rng(15);
  const Eigen::MatrixXd a = testing::normal_matrix(rng, 4, 3);
  const Eigen::VectorXd y = testing::normal_vector(rng, 4);
  LinearMeasurement model(a, y);
  SamplerConfig c;
  c.adam = AdamConfig{0.01, 0.8, 0.99, 1e-6};
  SamplerState st = SamplerState::create(Engine::kAdamDqn, testing::normal_vector(rng, 3), c);
  Eigen::ArrayXd theta = st.theta.array();
  Eigen::ArrayXd m = Eigen::ArrayXd::Zero(3), v = Eigen::ArrayXd::Zero(3);
  for (int t = 1; t <= 10; ++t) {
    const Eigen::ArrayXd g =
        (-(a.transpose() * (y - a * theta.matrix())) / 4.0).array();
    m = 0.8 * m + 0.2 * g;
    v = 0.99 * v + 0.01 * g * g;
    const Eigen::ArrayXd mhat = m / (1.0 - std::pow(0.8, t));
    const Eigen::ArrayXd vhat = v / (1.0 - std::pow(0.99, t));
    theta -= 0.01 * mhat / (vhat.sqrt() + 1e-6);
    adam_dqn_step(st, model, c);
    ASSERT_LT((st.theta.array() - theta).abs().maxCoeff(), 1e-14) << t;
  }
}

TEST(Engines, DispatchIsDeterministic) {
  const LinearSetup s = small_linear(48);
  for (Engine e : {Engine::kLktd, Engine::kSgld, Engine::kSghmc, Engine::kKova,
                   Engine::kAdamDqn}) {
    LinearMeasurement model(s.design, s.y);
    SamplerState a = SamplerState::create(e, Eigen::Vector2d(0.1, -0.1), s.config);
    SamplerState b = a;
    Rng ra(31), rb(31);
    for (int i = 0; i < 5; ++i) {
      sampler_step(a, model, s.config, ra);
      sampler_step(b, model, s.config, rb);
    }
    EXPECT_EQ(a.theta, b.theta) << to_string(e);
    EXPECT_NE(a.theta, Eigen::Vector2d(0.1, -0.1)) << to_string(e);
  }
}

}  // namespace
}  // namespace lktd
