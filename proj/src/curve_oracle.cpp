#include <algorithm>
#include <cmath>
#include <numbers>

#include "sald/error.hpp"
#include "sald/loss.hpp"

namespace sald {
namespace {

using Fn = std::function<double(double)>;

double simpson(const Fn& f, double a, double b, std::size_t intervals) {
  if (intervals % 2 == 1) ++intervals;
  intervals = std::max<std::size_t>(intervals, 2);
  const double h = (b - a) / static_cast<double>(intervals);
  double odd = 0.0, even = 0.0;
  for (std::size_t i = 1; i < intervals; ++i) {
    const double v = f(a + h * static_cast<double>(i));
    (i % 2 == 1 ? odd : even) += v;
  }
  return h / 3.0 * (f(a) + 4.0 * odd + 2.0 * even + f(b));
}

// Simpson over [a, b], split at sign changes of `kink` detected on the
// `resolution` grid, so |kink|-type integrands are smooth on every piece.
double simpson_split(const Fn& f, const Fn& kink, double a, double b, std::size_t resolution) {
  std::vector<double> cuts{a};
  const double h = (b - a) / static_cast<double>(resolution);
  double prev = kink(a);
  for (std::size_t i = 1; i <= resolution; ++i) {
    const double x = i == resolution ? b : a + h * static_cast<double>(i);
    const double cur = kink(x);
    if ((prev < 0.0 && cur > 0.0) || (prev > 0.0 && cur < 0.0)) {
      double lo = x - h, hi = x;
      double flo = prev;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = kink(mid);
        if ((fm < 0.0) == (flo < 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      cuts.push_back(0.5 * (lo + hi));
    }
    if (cur != 0.0) prev = cur;
  }
  cuts.push_back(b);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double len = cuts[i + 1] - cuts[i];
    if (len <= 0.0) continue;
    const auto n = static_cast<std::size_t>(std::ceil(static_cast<double>(resolution) * len / (b - a)));
    total += simpson(f, cuts[i], cuts[i + 1], std::max<std::size_t>(n, 2));
  }
  return total;
}

void validate(const CurveFamily& c) {
  if (!c.t || !c.t_dot) throw Error("curve family needs t and t_dot");
  if (!(c.span > 0.0)) throw Error("curve span must be positive");
  if (c.resolution < 2) throw Error("quadrature resolution must be at least 2");
  const double t0 = c.t(0.0), t1 = c.t(c.span);
  if (!std::isfinite(t0) || !std::isfinite(t1)) throw Error("non-finite t");
  if (std::abs(t0) > 1e-12 || std::abs(t1) > 1e-12) throw Error("curve must satisfy t(0) = t(span) = 0");
}

Fn checked(const Fn& f) {
  return [f](double s) {
    const double v = f(s);
    if (!std::isfinite(v)) throw Error("non-finite t");
    return v;
  };
}

}  // namespace

CurveFamily CurveFamily::sine(double amplitude, double span, std::size_t resolution) {
  CurveFamily c;
  c.span = span;
  c.resolution = resolution;
  const double w = std::numbers::pi / span;
  c.t = [amplitude, w](double s) {
    const double v = amplitude * std::sin(w * s);
    // sin(pi) is not exactly zero in floating point
    return std::abs(v) < 1e-15 * std::max(1.0, std::abs(amplitude)) ? 0.0 : v;
  };
  c.t_dot = [amplitude, w](double s) { return amplitude * w * std::cos(w * s); };
  return c;
}

CurveIntegral curve_restricted_sal(const CurveFamily& curve) {
  validate(curve);
  const Fn t = checked(curve.t);
  const Fn td = checked(curve.t_dot);
  const double l = curve.span;
  auto integrand = [&](double anchor) {
    return [&, anchor](double s) {
      const double ts = t(s), tds = td(s);
      return std::hypot(s - anchor, ts) * std::sqrt(1.0 + tds * tds);
    };
  };
  CurveIntegral out;
  out.first_half = simpson(integrand(0.0), 0.0, 0.5 * l, curve.resolution);
  out.second_half = simpson(integrand(l), 0.5 * l, l, curve.resolution);
  return out;
}

CurveIntegral curve_restricted_sald_excess(const CurveFamily& curve, DerivativeSimilarity similarity) {
  validate(curve);
  const Fn t = checked(curve.t);
  const Fn td = checked(curve.t_dot);
  const double l = curve.span;

  // a = curve normal (-t', 1)/|.|, b = grad h = (s - anchor, t)/r.
  auto pieces = [&](double anchor) -> std::pair<Fn, Fn> {
    if (similarity == DerivativeSimilarity::SinAngle) {
      // |sin angle(a, b)| |u'| = |d/ds r| = |(s - anchor) + t t'| / r
      Fn kink = [&, anchor](double s) { return (s - anchor) + t(s) * td(s); };
      Fn f = [&, anchor, kink](double s) {
        const double r = std::hypot(s - anchor, t(s));
        const double tds = td(s);
        if (r == 0.0) return std::sqrt(1.0 + tds * tds);
        return std::abs(kink(s)) / r;
      };
      return {f, kink};
    }
    // <a, b> sqrt(1 + t'^2) r = t - t' (s - anchor)
    Fn kink = [&, anchor](double s) { return t(s) - td(s) * (s - anchor); };
    Fn f = [&, anchor, kink](double s) {
      const double r = std::hypot(s - anchor, t(s));
      const double tds = td(s);
      const double speed = std::sqrt(1.0 + tds * tds);
      // At the endpoints grad h is taken along the tangent, orthogonal to a.
      const double cosine = r == 0.0 ? 0.0 : kink(s) / (speed * r);
      return std::sqrt(2.0) * std::sqrt(std::max(0.0, 1.0 - std::abs(cosine))) * speed;
    };
    return {f, kink};
  };
  CurveIntegral out;
  auto [f0, k0] = pieces(0.0);
  auto [f1, k1] = pieces(l);
  out.first_half = simpson_split(f0, k0, 0.0, 0.5 * l, curve.resolution);
  out.second_half = simpson_split(f1, k1, 0.5 * l, l, curve.resolution);
  return out;
}

}  // namespace sald
