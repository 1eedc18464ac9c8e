#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "sald/error.hpp"
#include "sald/loss.hpp"

using namespace sald;

namespace {

std::vector<double> random_unit(std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(d);
  double n = 0.0;
  for (double& x : v) {
    x = g(rng);
    n += x * x;
  }
  for (double& x : v) x /= std::sqrt(n);
  return v;
}

// Hidden units biased far into the linear branch of softplus, so
// f(x) = 0.6 x + 0.8 y - 0.1 exactly: the signed distance to a line.
ImplicitNet affine_net() {
  ImplicitNet net = build_decoder(2, 0, 2, 2, 100.0);
  auto w0 = net.weights(0);
  w0[0] = 1.0;
  w0[3] = 1.0;
  net.bias(0)[0] = 10.0;
  net.bias(0)[1] = 10.0;
  net.weights(1)[0] = 0.6;
  net.weights(1)[1] = 0.8;
  net.bias(1)[0] = -0.1 - 0.6 * 10.0 - 0.8 * 10.0;
  return net;
}

double affine_f(const Vec3& p) { return 0.6 * p[0] + 0.8 * p[1] - 0.1; }

ImplicitNet perturbed(int dim, int latent, std::uint64_t seed) {
  ImplicitNet net = geometric_init(build_decoder(dim, latent, 6, 3), 0.4, seed);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 0.1);
  for (double& p : net.params()) p += g(rng);
  return net;
}

SampleBatch random_batch(int dim, std::mt19937_64& rng) {
  SampleBatch b;
  b.dim = dim;
  std::uniform_real_distribution<double> u(-0.8, 0.8), uh(0.0, 0.5);
  auto pt = [&] {
    Vec3 p{0, 0, 0};
    for (int a = 0; a < dim; ++a) p[a] = u(rng);
    return p;
  };
  for (int i = 0; i < 5; ++i) b.values.push_back({pt(), uh(rng)});
  for (int i = 0; i < 4; ++i) {
    const auto n = random_unit(static_cast<std::size_t>(dim), rng);
    Vec3 nv{0, 0, 0};
    std::copy(n.begin(), n.end(), nv.begin());
    b.grads.push_back({pt(), nv});
  }
  return b;
}

double rel_error(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0, r = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d += (a[i] - b[i]) * (a[i] - b[i]);
    r += b[i] * b[i];
  }
  return std::sqrt(d) / std::max(std::sqrt(r), 1e-8);
}

}  // namespace

TEST(Tau, ScalarExamples) {
  EXPECT_EQ(tau_scalar(-3, 3), 0.0);
  EXPECT_EQ(tau_scalar(2, 5), 3.0);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-5, 5), ub(0, 5);
  for (int i = 0; i < 10000; ++i) {
    const double a = u(rng), b = ub(rng);
    EXPECT_NEAR(tau_scalar(a, b), std::min(std::abs(a - b), std::abs(a + b)), 1e-15);
  }
}

TEST(Tau, VectorExamples) {
  const std::vector<double> a{1, 0}, b{0, 1}, c{-1, 0};
  EXPECT_EQ(tau_vector(a, a), 0.0);
  EXPECT_EQ(tau_vector(a, c), 0.0);
  EXPECT_NEAR(tau_vector(a, b), std::sqrt(2.0), 1e-15);
  EXPECT_EQ(tau_sin(a, a), 0.0);
  EXPECT_NEAR(tau_sin(a, b), 1.0, 1e-15);
  EXPECT_NEAR(tau_closed_form(a, b), std::sqrt(2.0), 1e-15);
  EXPECT_EQ(tau_closed_form(a, a), 0.0);
  EXPECT_THROW(tau_sin(std::vector<double>{2, 0}, b), Error);
}

TEST(Tau, UnitVectorSweep) {
  std::mt19937_64 rng(2);
  for (std::size_t d : {2, 3, 8}) {
    for (int i = 0; i < 100000; ++i) {
      const auto a = random_unit(d, rng), b = random_unit(d, rng);
      const double tv = tau_vector(a, b);
      ASSERT_GE(tv, tau_sin(a, b) - 1e-12);
      ASSERT_NEAR(tv, tau_closed_form(a, b), 1e-9);
    }
  }
}

TEST(SalLoss, ZeroWhenMatchingEitherSign) {
  const ImplicitNet net = affine_net();
  SampleBatch b;
  b.dim = 2;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 50; ++i) {
    const Vec3 p{u(rng), u(rng), 0};
    b.values.push_back({p, std::abs(affine_f(p))});
  }
  EXPECT_LE(sal_loss(net, {}, b).value_term, 1e-13);
  EXPECT_LE(sal_loss(negated(net), {}, b).value_term, 1e-13);
}

TEST(SalLoss, HandBatch) {
  const ImplicitNet net = affine_net();
  SampleBatch b;
  b.dim = 2;
  b.values = {{{0, 0, 0}, 0.5}, {{1, 0, 0}, 0.0}, {{0, 1, 0}, 1.0}};
  // f = -0.1, 0.5, 0.7
  const double expected = (0.4 + 0.5 + 0.3) / 3.0;
  EXPECT_NEAR(sal_loss(net, {}, b).value_term, expected, 1e-13);
  b.values.clear();
  EXPECT_THROW(sal_loss(net, {}, b), Error);
}

TEST(SaldLoss, LambdaZeroEqualsSal) {
  std::mt19937_64 rng(4);
  const ImplicitNet net = perturbed(2, 0, 5);
  const SampleBatch b = random_batch(2, rng);
  const LossValue s = sald_loss(net, {}, b, 0.0);
  EXPECT_EQ(s.total, sal_loss(net, {}, b).total);
  EXPECT_GT(s.grad_term, 0.0);
}

TEST(SaldLoss, ExactDistanceHasNoGradientTerm) {
  const ImplicitNet net = affine_net();
  SampleBatch b;
  b.dim = 2;
  b.values.push_back({{0, 0, 0}, 0.1});
  const Vec3 n{0.6, 0.8, 0};
  for (int i = 0; i < 20; ++i) {
    const double t = -1.0 + 0.1 * i;
    const Vec3 p = Vec3{0.06, 0.08, 0} + t * Vec3{-0.8, 0.6, 0};
    b.grads.push_back({p, i % 2 ? n : -n});
  }
  EXPECT_LE(sald_loss(net, {}, b, 0.1).grad_term, 1e-6);
}

TEST(SaldLoss, SignAgnosticAndDecomposition) {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 10; ++t) {
    const ImplicitNet net = perturbed(2, 0, 10 + t);
    const SampleBatch b = random_batch(2, rng);
    const LossValue a = sald_loss(net, {}, b, 0.1);
    const LossValue c = sald_loss(negated(net), {}, b, 0.1);
    EXPECT_EQ(a.total, c.total);
    EXPECT_GE(a.value_term, 0.0);
    EXPECT_GE(a.grad_term, 0.0);
    EXPECT_EQ(a.total, a.value_term + 0.1 * a.grad_term + a.reg_term);
  }
}

TEST(LossGradients, MatchFiniteDifferences) {
  std::mt19937_64 rng(7);
  const double h = 1e-6;
  int config = 0;
  for (double lambda : {0.0, 0.1, 1.0}) {
    for (int t = 0; t < 7; ++t, ++config) {
      const int dim = t % 3 == 2 ? 3 : 2;
      const int latent = t % 2;
      ImplicitNet net = perturbed(dim, latent, 100 + config);
      std::vector<double> z(static_cast<std::size_t>(latent), 0.2);
      const SampleBatch b = random_batch(dim, rng);
      const LossEvaluation ev = loss_gradients(net, z, b, lambda);
      EXPECT_NEAR(ev.loss.total, sald_loss(net, z, b, lambda).total, 1e-13);
      std::vector<double> analytic = ev.grads.params;
      analytic.insert(analytic.end(), ev.grads.latent.begin(), ev.grads.latent.end());
      std::vector<double> fd;
      for (std::size_t i = 0; i < net.num_params(); ++i) {
        const double keep = net.params()[i];
        net.params()[i] = keep + h;
        const double fp = sald_loss(net, z, b, lambda).total;
        net.params()[i] = keep - h;
        const double fm = sald_loss(net, z, b, lambda).total;
        net.params()[i] = keep;
        fd.push_back((fp - fm) / (2 * h));
      }
      for (std::size_t i = 0; i < z.size(); ++i) {
        auto zp = z, zm = z;
        zp[i] += h;
        zm[i] -= h;
        fd.push_back((sald_loss(net, zp, b, lambda).total - sald_loss(net, zm, b, lambda).total) / (2 * h));
      }
      EXPECT_LE(rel_error(analytic, fd), 1e-4) << "lambda " << lambda << " trial " << t;
    }
  }
}

TEST(LossGradients, LambdaZeroIgnoresGradientSamples) {
  std::mt19937_64 rng(8);
  const ImplicitNet net = perturbed(2, 0, 9);
  SampleBatch b = random_batch(2, rng);
  const LossEvaluation with = loss_gradients(net, {}, b, 0.0);
  b.grads.clear();
  const LossEvaluation without = loss_gradients(net, {}, b, 0.0);
  EXPECT_EQ(with.grads.params, without.grads.params);
}

TEST(LossGradients, ZeroAtExactInterpolant) {
  const ImplicitNet net = affine_net();
  SampleBatch b;
  b.dim = 2;
  const Vec3 p{0.3, 0.2, 0};
  b.values.push_back({p, std::abs(forward(net, std::vector<double>{p[0], p[1]}))});
  b.grads.push_back({p, {0.6, 0.8, 0}});
  const LossEvaluation ev = loss_gradients(net, {}, b, 0.1);
  for (double g : ev.grads.params) EXPECT_NEAR(g, 0.0, 1e-12);
}

TEST(LatentReg, Examples) {
  EXPECT_EQ(latent_reg_ad(std::vector<double>{0, 0}), 0.0);
  EXPECT_NEAR(latent_reg_ad(std::vector<double>{1, 1, 1, 1}), 0.004, 1e-15);
  const std::vector<double> z{0.3, -1.2, 2.0};
  const auto g = latent_reg_ad_gradient(z);
  for (std::size_t i = 0; i < z.size(); ++i) {
    auto zp = z, zm = z;
    zp[i] += 1e-6;
    zm[i] -= 1e-6;
    EXPECT_NEAR(g[i], (latent_reg_ad(zp) - latent_reg_ad(zm)) / 2e-6, 1e-9);
    EXPECT_NEAR(g[i], 0.002 * z[i], 1e-15);
  }
}

TEST(CurveOracle, StraightLine) {
  const CurveFamily line = CurveFamily::sine(0.0, 2.0);
  const CurveIntegral sal = curve_restricted_sal(line);
  EXPECT_NEAR(sal.first_half, 0.5, 1e-12);
  EXPECT_NEAR(sal.second_half, 0.5, 1e-12);
  const CurveIntegral ex = curve_restricted_sald_excess(line);
  EXPECT_NEAR(ex.first_half, 1.0, 1e-9);
  EXPECT_NEAR(ex.total(), 2.0, 1e-9);
}

TEST(CurveOracle, SineFamilyMinimisedAtZero) {
  double prev_sal = curve_restricted_sal(CurveFamily::sine(0.0)).total();
  double prev_sald = prev_sal + curve_restricted_sald_excess(CurveFamily::sine(0.0)).total();
  for (double a : {0.05, 0.1, 0.2, 0.3, 0.4, 0.5}) {
    for (double s : {1.0, -1.0}) {
      const CurveFamily c = CurveFamily::sine(s * a);
      const double sal = curve_restricted_sal(c).total();
      const double excess = curve_restricted_sald_excess(c).total();
      EXPECT_GT(sal, prev_sal);
      EXPECT_GT(sal + excess, prev_sald);
      EXPECT_GE(curve_restricted_sald_excess(c).first_half, 1.0 - 1e-6);
      EXPECT_GE(curve_restricted_sald_excess(c).second_half, 1.0 - 1e-6);
      EXPECT_GE(curve_restricted_sald_excess(c, DerivativeSimilarity::MinNorm).total(), 0.0);
    }
    prev_sal = curve_restricted_sal(CurveFamily::sine(a)).total();
    prev_sald = prev_sal + curve_restricted_sald_excess(CurveFamily::sine(a)).total();
  }
}

TEST(CurveOracle, QuadratureConverges) {
  const double a = curve_restricted_sal(CurveFamily::sine(0.2, 2.0, 4096)).total();
  const double b = curve_restricted_sal(CurveFamily::sine(0.2, 2.0, 8192)).total();
  EXPECT_LE(std::abs(a - b), 1e-8);
  const double c = curve_restricted_sald_excess(CurveFamily::sine(0.2, 2.0, 4096)).total();
  const double d = curve_restricted_sald_excess(CurveFamily::sine(0.2, 2.0, 8192)).total();
  EXPECT_LE(std::abs(c - d), 1e-8);
}

TEST(CurveOracle, RejectsNonFiniteCurves) {
  CurveFamily c = CurveFamily::sine(0.0);
  c.t = [](double s) { return s > 0.5 ? NAN : 0.0; };
  EXPECT_THROW(curve_restricted_sal(c), Error);
}
