#include "sald/loss.hpp"

#include <algorithm>
#include <cmath>

#include "sald/error.hpp"

namespace sald {
namespace {

void check_same_size(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error("dimension mismatch between vectors");
}

void check_unit(std::span<const double> v) {
  double n2 = 0.0;
  for (double x : v) n2 += x * x;
  if (std::abs(std::sqrt(n2) - 1.0) > 1e-9) throw Error("expected a unit vector");
}

}  // namespace

double tau_vector(std::span<const double> a, std::span<const double> b) {
  check_same_size(a, b);
  double minus2 = 0.0, plus2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    minus2 += (a[i] - b[i]) * (a[i] - b[i]);
    plus2 += (a[i] + b[i]) * (a[i] + b[i]);
  }
  return std::sqrt(std::min(minus2, plus2));
}

double tau_sin(std::span<const double> a, std::span<const double> b) {
  check_same_size(a, b);
  check_unit(a);
  check_unit(b);
  if (a.size() == 2) return std::abs(a[0] * b[1] - a[1] * b[0]);
  double ab = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) ab += a[i] * b[i];
  double r2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double r = a[i] - ab * b[i];
    r2 += r * r;
  }
  return std::sqrt(r2);
}

double tau_closed_form(std::span<const double> a, std::span<const double> b) {
  check_same_size(a, b);
  double ab = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) ab += a[i] * b[i];
  return std::sqrt(2.0) * std::sqrt(std::max(0.0, 1.0 - std::abs(ab)));
}

LossValue sal_loss(const ImplicitNet& net, std::span<const double> z, const SampleBatch& batch,
                   const ScalarSimilarity& tau) {
  if (batch.values.empty()) throw Error("empty batch");
  if (batch.dim != net.arch().spatial_dim) throw Error("dimension mismatch between batch and network");
  std::vector<Vec3> pts(batch.values.size());
  std::transform(batch.values.begin(), batch.values.end(), pts.begin(), [](const ValueSample& v) { return v.point; });
  std::vector<double> f(pts.size());
  forward_batch(net, pts, z, f);
  double sum = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) sum += tau(f[i], batch.values[i].h);
  LossValue out;
  out.value_term = sum / static_cast<double>(f.size());
  out.total = out.value_term;
  return out;
}

LossValue sald_loss(const ImplicitNet& net, std::span<const double> z, const SampleBatch& batch, double lambda) {
  if (!(lambda >= 0.0)) throw Error("lambda must be nonnegative");
  LossValue out = sal_loss(net, z, batch);
  if (!batch.grads.empty()) {
    const std::size_t d = static_cast<std::size_t>(batch.dim);
    std::vector<Vec3> pts(batch.grads.size());
    std::transform(batch.grads.begin(), batch.grads.end(), pts.begin(), [](const GradSample& g) { return g.point; });
    std::vector<double> f(pts.size());
    std::vector<Vec3> g(pts.size());
    gradient_batch(net, pts, z, f, g);
    double sum = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      sum += tau_vector(std::span<const double>(g[i].data(), d),
                        std::span<const double>(batch.grads[i].normal.data(), d));
    }
    out.grad_term = sum / static_cast<double>(g.size());
  }
  out.total = out.value_term + lambda * out.grad_term;
  return out;
}

double latent_reg_ad(std::span<const double> z) {
  double s = 0.0;
  for (double v : z) s += v * v;
  return kLatentRegWeight * s;
}

std::vector<double> latent_reg_ad_gradient(std::span<const double> z) {
  std::vector<double> g(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) g[i] = 2.0 * kLatentRegWeight * z[i];
  return g;
}

}  // namespace sald
