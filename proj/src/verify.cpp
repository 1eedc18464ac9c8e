#include "sald/verify.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "sald/net.hpp"
#include "sald/random.hpp"

namespace sald {
namespace {

CheckResult make_result(std::string name, double observed, double threshold, std::string what) {
  CheckResult r;
  r.name = std::move(name);
  r.margin = threshold - observed;
  r.passed = r.margin >= 0.0;
  std::ostringstream d;
  d << std::setprecision(3) << what << " " << observed << " (limit " << threshold << ")";
  r.detail = d.str();
  return r;
}

std::vector<double> random_unit(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(dim);
  double n2 = 0.0;
  do {
    n2 = 0.0;
    for (double& x : v) {
      x = g(rng);
      n2 += x * x;
    }
  } while (n2 < 1e-20);
  const double inv = 1.0 / std::sqrt(n2);
  for (double& x : v) x *= inv;
  return v;
}

// Geometric initialisation followed by a random perturbation of every
// parameter, so zeroed skip columns and the output layer are exercised too.
ImplicitNet random_net(int dim, int latent, int hidden, int depth, std::mt19937_64& rng) {
  ImplicitNet net = geometric_init(build_decoder(dim, latent, hidden, depth), 0.4, rng());
  std::normal_distribution<double> g(0.0, 0.1);
  for (double& p : net.params()) p += g(rng);
  return net;
}

Vec3 random_point(int dim, double radius, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-radius, radius);
  Vec3 p{0.0, 0.0, 0.0};
  for (int a = 0; a < dim; ++a) p[a] = u(rng);
  return p;
}

double rel_error(std::span<const double> a, std::span<const double> b) {
  double diff = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    ref += b[i] * b[i];
  }
  return std::sqrt(diff) / std::max(std::sqrt(ref), 1e-8);
}

}  // namespace

bool VerifyReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

CheckResult check_unit_vector_bound(const VerifyOptions& options) {
  auto rng = make_rng(options.seed, 0x6c656d);
  double worst = -1.0;  // largest violation of min(|a-b|,|a+b|) >= |sin|
  for (std::size_t dim : {2, 3, 8}) {
    for (std::size_t i = 0; i < options.unit_pairs; ++i) {
      const auto a = random_unit(dim, rng);
      const auto b = random_unit(dim, rng);
      worst = std::max(worst, tau_sin(a, b) - tau_vector(a, b));
    }
  }
  return make_result("unit-vector bound min(|a-b|,|a+b|) >= |sin|", worst, 1e-12, "worst excess of |sin|");
}

CheckResult check_unit_vector_closed_form(const VerifyOptions& options) {
  auto rng = make_rng(options.seed, 0x636c6f);
  double worst = 0.0;
  for (std::size_t dim : {2, 3, 8}) {
    for (std::size_t i = 0; i < options.unit_pairs; ++i) {
      const auto a = random_unit(dim, rng);
      const auto b = random_unit(dim, rng);
      worst = std::max(worst, std::abs(tau_vector(a, b) - tau_closed_form(a, b)));
    }
  }
  return make_result("unit-vector closed form sqrt(2)(1-|<a,b>|)^(1/2)", worst, 1e-9, "max deviation");
}

std::vector<CheckResult> check_curve_family(const VerifyOptions&) {
  constexpr double span = 2.0;
  const std::vector<double> amps{0.0, 0.05, 0.1, 0.2, 0.4};
  std::vector<CheckResult> out;

  // SAL strictly increasing in |A|, for both signs.
  double min_step = 1e300;
  for (double sign : {1.0, -1.0}) {
    double prev = curve_restricted_sal(CurveFamily::sine(0.0, span)).total();
    for (std::size_t i = 1; i < amps.size(); ++i) {
      const double v = curve_restricted_sal(CurveFamily::sine(sign * amps[i], span)).total();
      min_step = std::min(min_step, v - prev);
      prev = v;
    }
  }
  CheckResult mono = make_result("curve SAL increasing in |A|", -min_step, 0.0, "negated smallest increase");
  mono.passed = min_step > 0.0;
  out.push_back(mono);

  double worst_excess = 1e300;
  for (double a : amps) {
    for (double sign : {1.0, -1.0}) {
      const CurveIntegral e = curve_restricted_sald_excess(CurveFamily::sine(sign * a, span));
      worst_excess = std::min({worst_excess, e.first_half - span / 2.0, e.second_half - span / 2.0});
    }
  }
  out.push_back(make_result("curve SALD half-span excess >= span/2", -worst_excess, 1e-6, "largest shortfall"));

  const CurveIntegral e0 = curve_restricted_sald_excess(CurveFamily::sine(0.0, span));
  out.push_back(make_result("curve SALD excess = span/2 on the line",
                            std::max(std::abs(e0.first_half - span / 2.0), std::abs(e0.second_half - span / 2.0)), 1e-6,
                            "deviation"));

  const double half = curve_restricted_sal(CurveFamily::sine(0.0, span)).first_half;
  out.push_back(make_result("curve SAL half-span = span^2/8 on the line", std::abs(half - span * span / 8.0), 1e-8,
                            "deviation"));
  return out;
}

CheckResult check_spatial_gradient(int dim, const VerifyOptions& options) {
  auto rng = make_rng(options.seed, 0x737067 + static_cast<std::uint64_t>(dim));
  constexpr double h = 1e-6;
  double worst = 0.0;
  for (std::size_t c = 0; c < options.gradient_cases; ++c) {
    const ImplicitNet net = random_net(dim, 0, 16, 4, rng);
    const Vec3 p = random_point(dim, 0.8, rng);
    std::vector<double> x(p.begin(), p.begin() + dim);
    const std::vector<double> g = spatial_gradient(net, x);
    std::vector<double> fd(static_cast<std::size_t>(dim));
    for (int a = 0; a < dim; ++a) {
      std::vector<double> xp = x, xm = x;
      xp[a] += h;
      xm[a] -= h;
      fd[a] = (forward(net, xp) - forward(net, xm)) / (2.0 * h);
    }
    worst = std::max(worst, rel_error(g, fd));
  }
  return make_result("spatial gradient vs central differences (" + std::to_string(dim) + "D)", worst, 1e-5,
                     "max relative error");
}

CheckResult check_loss_gradient(double lambda, const VerifyOptions& options) {
  auto rng = make_rng(options.seed, 0x6c6f73);
  constexpr double h = 1e-6;
  double worst = 0.0;
  for (int trial = 0; trial < 3; ++trial) {
    const int dim = trial == 2 ? 3 : 2;
    const int latent = trial == 1 ? 2 : 0;
    ImplicitNet net = random_net(dim, latent, 6, 3, rng);
    std::vector<double> z(static_cast<std::size_t>(latent));
    std::normal_distribution<double> g(0.0, 0.3);
    for (double& v : z) v = g(rng);

    SampleBatch batch;
    batch.dim = dim;
    std::uniform_real_distribution<double> uh(0.0, 0.5);
    for (int i = 0; i < 5; ++i) batch.values.push_back({random_point(dim, 0.8, rng), uh(rng)});
    for (int i = 0; i < 4; ++i) {
      std::vector<double> n = random_unit(static_cast<std::size_t>(dim), rng);
      Vec3 nv{0.0, 0.0, 0.0};
      std::copy(n.begin(), n.end(), nv.begin());
      batch.grads.push_back({random_point(dim, 0.8, rng), nv});
    }

    const LossEvaluation ev = loss_gradients(net, z, batch, lambda);
    auto total = [&](const ImplicitNet& n, std::span<const double> zz) {
      const LossValue v = sald_loss(n, zz, batch, lambda);
      return v.value_term + lambda * v.grad_term;
    };
    std::vector<double> analytic = ev.grads.params;
    analytic.insert(analytic.end(), ev.grads.latent.begin(), ev.grads.latent.end());
    std::vector<double> fd;
    for (std::size_t i = 0; i < net.num_params(); ++i) {
      const double keep = net.params()[i];
      net.params()[i] = keep + h;
      const double fp = total(net, z);
      net.params()[i] = keep - h;
      const double fm = total(net, z);
      net.params()[i] = keep;
      fd.push_back((fp - fm) / (2.0 * h));
    }
    for (std::size_t i = 0; i < z.size(); ++i) {
      std::vector<double> zp = z, zm = z;
      zp[i] += h;
      zm[i] -= h;
      fd.push_back((total(net, zp) - total(net, zm)) / (2.0 * h));
    }
    worst = std::max(worst, rel_error(analytic, fd));
  }
  std::ostringstream name;
  name << "loss parameter gradient vs central differences (lambda=" << lambda << ")";
  return make_result(name.str(), worst, 1e-4, "max relative error");
}

CheckResult check_sign_symmetry(const VerifyOptions& options) {
  auto rng = make_rng(options.seed, 0x73796d);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const ImplicitNet net = random_net(2, 0, 12, 4, rng);
    const ImplicitNet neg = negated(net);
    SampleBatch batch;
    batch.dim = 2;
    std::uniform_real_distribution<double> uh(0.0, 0.5);
    for (int i = 0; i < 64; ++i) batch.values.push_back({random_point(2, 0.8, rng), uh(rng)});
    const double a = sal_loss(net, {}, batch, options.tau).value_term;
    const double b = sal_loss(neg, {}, batch, options.tau).value_term;
    worst = std::max(worst, std::abs(a - b));
  }
  CheckResult r = make_result("loss unchanged under f -> -f", worst, 0.0, "max difference");
  r.passed = worst == 0.0;
  return r;
}

VerifyReport run_verification(const VerifyOptions& options) {
  VerifyReport report;
  report.checks.push_back(check_unit_vector_bound(options));
  report.checks.push_back(check_unit_vector_closed_form(options));
  for (CheckResult& c : check_curve_family(options)) report.checks.push_back(std::move(c));
  report.checks.push_back(check_spatial_gradient(2, options));
  report.checks.push_back(check_spatial_gradient(3, options));
  for (double lambda : {0.0, 0.1, 1.0}) report.checks.push_back(check_loss_gradient(lambda, options));
  report.checks.push_back(check_sign_symmetry(options));
  return report;
}

void print_report(const VerifyReport& report, std::ostream& out) {
  for (const CheckResult& c : report.checks) {
    out << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << ", margin " << std::setprecision(3)
        << c.margin << '\n';
  }
  out << (report.all_passed() ? "all checks passed" : "verification FAILED") << '\n';
}

}  // namespace sald
