#pragma once

// Numerical Laplace inversion: fixed Talbot contour (the answer) with a
// Gaver-Stehfest sum as an independent disagreement detector.

#include <array>
#include <cmath>
#include <complex>
#include <numbers>

#include "tempered/errors.hpp"

namespace tempered {

inline constexpr int kTalbotNodes = 32;
inline constexpr int kStehfestTerms = 16;

struct Inversion {
  double value;
  /// |talbot - stehfest|
  double error_estimate;
};

/// Fixed-Talbot inversion of F at t (Abate-Valko contour, M nodes).
/// F must accept std::complex<double> and be analytic for Re lambda > 0.
template <class F>
double talbot_invert(F&& transform, double t, int nodes = kTalbotNodes) {
  if (!(t > 0.0)) throw DomainError("talbot_invert: t must be > 0");
  using cd = std::complex<double>;
  const double r = 2.0 * nodes / (5.0 * t);
  double sum = 0.5 * std::real(transform(cd(r, 0.0))) * std::exp(r * t);
  for (int k = 1; k < nodes; ++k) {
    const double theta = k * std::numbers::pi / nodes;
    const double cot = std::cos(theta) / std::sin(theta);
    const cd s(r * theta * cot, r * theta);
    const double sigma = theta + (theta * cot - 1.0) * cot;
    sum += std::real(std::exp(t * s) * transform(s) * cd(1.0, sigma));
  }
  return r / nodes * sum;
}

namespace detail {

inline const std::array<long double, kStehfestTerms>& stehfest_weights() {
  static const auto weights = [] {
    std::array<long double, kStehfestTerms> v{};
    constexpr int n = kStehfestTerms;
    constexpr int half = n / 2;
    auto fact = [](int m) {
      long double f = 1.0L;
      for (int i = 2; i <= m; ++i) f *= i;
      return f;
    };
    for (int k = 1; k <= n; ++k) {
      long double acc = 0.0L;
      for (int j = (k + 1) / 2; j <= std::min(k, half); ++j) {
        acc += std::pow(static_cast<long double>(j), half) * fact(2 * j) /
               (fact(half - j) * fact(j) * fact(j - 1) * fact(k - j) * fact(2 * j - k));
      }
      v[k - 1] = ((k + half) % 2 == 0 ? 1.0L : -1.0L) * acc;
    }
    return v;
  }();
  return weights;
}

}  // namespace detail

/// Gaver-Stehfest inversion; F is only evaluated on the positive real axis.
template <class F>
double stehfest_invert(F&& transform, double t) {
  if (!(t > 0.0)) throw DomainError("stehfest_invert: t must be > 0");
  const auto& v = detail::stehfest_weights();
  const long double ln2_t = std::numbers::ln2_v<long double> / t;
  long double sum = 0.0L;
  for (int k = 1; k <= kStehfestTerms; ++k) {
    const double lambda = static_cast<double>(k * ln2_t);
    sum += v[k - 1] * static_cast<long double>(std::real(transform(std::complex<double>(lambda, 0.0))));
  }
  return static_cast<double>(ln2_t * sum);
}

/// Talbot value with |talbot - stehfest| as its error estimate.
///
/// Throws InversionUnstable when the two disagree by more than
/// `rel_tol * max(|talbot|, abs_floor)`.
template <class F>
Inversion laplace_invert(F&& transform, double t, double rel_tol = 1e-4, double abs_floor = 1.0) {
  const double talbot = talbot_invert(transform, t);
  const double stehfest = stehfest_invert(transform, t);
  const double diff = std::abs(talbot - stehfest);
  if (!std::isfinite(talbot) || diff > rel_tol * std::max(std::abs(talbot), abs_floor)) {
    throw InversionUnstable(t, talbot, stehfest);
  }
  return {talbot, diff};
}

}  // namespace tempered
