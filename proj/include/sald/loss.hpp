#pragma once

// Sign-agnostic similarities, the SAL / SALD losses, the auto-decoder latent
// regulariser, and curve-restricted loss integrals for two-point geometry.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "sald/geometry.hpp"
#include "sald/loss_value.hpp"
#include "sald/net.hpp"

namespace sald {

/// ||a| - b|, equal to min(|a - b|, |a + b|) for b >= 0.
inline double tau_scalar(double a, double b) {
  const double v = (a < 0.0 ? -a : a) - b;
  return v < 0.0 ? -v : v;
}

/// d/da ||a| - b| (zero on the kinks).
inline double tau_scalar_derivative(double a, double b) {
  const double abs_a = a < 0.0 ? -a : a;
  const double outer = (abs_a > b) - (abs_a < b);
  const double inner = (a > 0.0) - (a < 0.0);
  return outer * inner;
}

/// min(|a - b|, |a + b|)
double tau_vector(std::span<const double> a, std::span<const double> b);

/// |sin angle(a, b)| for unit vectors; throws on non-unit input.
double tau_sin(std::span<const double> a, std::span<const double> b);

/// sqrt(2) * (1 - |<a, b>|)^(1/2), the closed form of tau_vector on unit vectors.
double tau_closed_form(std::span<const double> a, std::span<const double> b);

using ScalarSimilarity = std::function<double(double, double)>;

/// Mean tau(f(x), h) over batch.values; grad_term is zero.
LossValue sal_loss(const ImplicitNet& net, std::span<const double> z, const SampleBatch& batch,
                   const ScalarSimilarity& tau = tau_scalar);

/// value_term as in sal_loss plus grad_term = mean tau_vector(grad f, n) over batch.grads.
LossValue sald_loss(const ImplicitNet& net, std::span<const double> z, const SampleBatch& batch, double lambda);

constexpr double kLatentRegWeight = 0.001;

/// 0.001 * |z|^2
double latent_reg_ad(std::span<const double> z);
/// 0.002 * z
std::vector<double> latent_reg_ad_gradient(std::span<const double> z);

// --- curve-restricted losses ---------------------------------------------------
//
// X = {(0,0), (span,0)}, and a zero level set u(s) = (s, t(s)) with
// t(0) = t(span) = 0. Integrals are over each half of the span, where the
// unsigned distance is measured to the nearer endpoint.

struct CurveFamily {
  double span = 2.0;
  std::function<double(double)> t;
  std::function<double(double)> t_dot;
  std::size_t resolution = 4096;

  /// t(s) = amplitude * sin(pi s / span)
  static CurveFamily sine(double amplitude, double span = 2.0, std::size_t resolution = 4096);
};

struct CurveIntegral {
  double first_half = 0.0;   // s in [0, span/2]
  double second_half = 0.0;  // s in [span/2, span]
  double total() const { return first_half + second_half; }
};

/// integral of sqrt(s^2 + t^2) sqrt(1 + t'^2) ds per half (composite Simpson).
CurveIntegral curve_restricted_sal(const CurveFamily& curve);

enum class DerivativeSimilarity {
  SinAngle,  // |sin angle(grad f, grad h)|, the surrogate the minimality argument uses
  MinNorm,   // min(|a - b|, |a + b|) with unit a, b
};

/// (loss_SALD - loss_SAL) / lambda per half: the derivative similarity between
/// the curve normal and grad h, integrated against arc length. For SinAngle
/// this is the integral of |d/ds |(s, t)||. Kinks are split out before
/// integrating.
CurveIntegral curve_restricted_sald_excess(const CurveFamily& curve,
                                           DerivativeSimilarity similarity = DerivativeSimilarity::SinAngle);

}  // namespace sald
