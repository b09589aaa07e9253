#pragma once

// Tempered 1/2-stable Bernstein symbol, its Levy tail, and the handful of
// special functions the closed-form solutions reduce to.

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include "tempered/errors.hpp"

namespace tempered {

inline constexpr double kSqrtPi = 1.7724538509055160273;

/// Scaled complementary error function e^{x^2} erfc(x).
///
/// Direct product for moderate arguments, Lentz continued fraction beyond
/// x = 5 where e^{x^2} would start to cost accuracy (and later overflow).
inline double erfcx(double x) {
  if (std::isnan(x)) return x;
  if (x < 0.0) {
    // erfc(-y) = 2 - erfc(y)
    if (x < -26.0) return std::numeric_limits<double>::infinity();
    return 2.0 * std::exp(x * x) - erfcx(-x);
  }
  if (x < 5.0) return std::exp(x * x) * std::erfc(x);

  // f = x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))
  constexpr double tiny = 1e-300;
  double f = x;
  double c = x;
  double d = 0.0;
  for (int n = 1; n < 500; ++n) {
    const double a = 0.5 * n;
    d = x + a * d;
    if (d == 0.0) d = tiny;
    c = x + a / c;
    if (c == 0.0) c = tiny;
    d = 1.0 / d;
    const double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return 1.0 / (kSqrtPi * f);
}

/// A special-function value with a bound on its absolute error.
struct SpecialValue {
  double value;
  double abs_error_bound;
};

/// E_{1/2}(x) = e^{x^2} erfc(-x) on the negative half-axis.
inline SpecialValue mittag_leffler_half(double x) {
  if (!(x <= 0.0)) throw DomainError("mittag_leffler_half: x must be <= 0");
  const double y = -x;
  const double v = erfcx(y);
  constexpr double eps = std::numeric_limits<double>::epsilon();
  // exp(y^2) amplifies the rounding of y^2; the fraction branch is ~ulp-exact.
  const double rel = y < 5.0 ? (4.0 + 2.0 * y * y) * eps : 8.0 * eps;
  return {v, v * rel};
}

/// Heat kernel for the generator d^2/dx^2 (variance 2t).
inline double gauss_kernel(double t, double z) {
  if (!(t > 0.0)) throw DomainError("gauss_kernel: t must be > 0");
  return std::exp(-z * z / (4.0 * t)) / std::sqrt(4.0 * std::numbers::pi * t);
}

/// Bernstein symbol Phi(lambda) = sqrt(lambda + eta) - sqrt(eta) of the
/// tempered 1/2-stable subordinator. Only the tempered family is
/// instantiated; like every symbol used here it has an infinite Levy measure.
struct TemperedSymbol {
  double eta = 0.0;

  constexpr TemperedSymbol() = default;
  explicit TemperedSymbol(double eta_) : eta(eta_) {
    if (!(eta >= 0.0) || !std::isfinite(eta)) {
      throw DomainError("TemperedSymbol: eta must be finite and >= 0");
    }
  }

  /// eta = (mu / 2)^2.
  static TemperedSymbol from_drift(double mu) { return TemperedSymbol(0.25 * mu * mu); }

  double sqrt_eta() const { return std::sqrt(eta); }
  /// Drift magnitude encoded by the tempering, 2 sqrt(eta).
  double mu() const { return 2.0 * sqrt_eta(); }

  /// Evaluated as lambda / (sqrt(lambda + eta) + sqrt(eta)); stable for
  /// lambda << eta and usable on the complex half-plane Re lambda > -eta.
  template <class T>
  T operator()(T lambda) const {
    const T root = std::sqrt(lambda + T(eta));
    const T denom = root + T(sqrt_eta());
    if (denom == T(0)) return T(0);
    return lambda / denom;
  }

  /// Phi'(0) = 1 / (2 sqrt(eta)), the mean of H_1; infinite for eta = 0.
  double mean_rate() const {
    return eta > 0.0 ? 0.5 / sqrt_eta() : std::numeric_limits<double>::infinity();
  }
};

inline double phi(const TemperedSymbol& sym, double lambda) {
  if (!(lambda >= 0.0)) throw DomainError("phi: lambda must be >= 0");
  return sym(lambda);
}

/// Tail of the Levy measure Pi((s, inf)) for Pi(ds) = e^{-eta s} s^{-3/2} ds / (2 sqrt(pi)).
inline double levy_tail(const TemperedSymbol& sym, double s) {
  if (!(s > 0.0)) throw DomainError("levy_tail: s must be > 0");
  const double base = std::exp(-sym.eta * s) / std::sqrt(std::numbers::pi * s);
  if (sym.eta == 0.0) return base;
  return base - sym.sqrt_eta() * std::erfc(std::sqrt(sym.eta * s));
}

namespace detail {

// Lower incomplete gamma gamma(3/2, x), series for small x to avoid the
// cancellation in (sqrt(pi)/2) erf(sqrt x) - sqrt(x) e^{-x}.
inline double lower_gamma_three_halves(double x) {
  if (x <= 0.0) return 0.0;
  if (x < 1.0) {
    double term = 1.0;
    double sum = 0.0;
    for (int n = 0; n < 60; ++n) {
      const double contrib = term / (n + 1.5);
      sum += contrib;
      if (std::abs(contrib) < 1e-18 * std::abs(sum)) break;
      term *= -x / (n + 1);
    }
    return std::pow(x, 1.5) * sum;
  }
  const double r = std::sqrt(x);
  return 0.5 * kSqrtPi * std::erf(r) - r * std::exp(-x);
}

}  // namespace detail

/// Integral of the Levy tail over (0, tau).
inline double tail_moment0(const TemperedSymbol& sym, double tau) {
  if (tau <= 0.0) return 0.0;
  const double root_tau = std::sqrt(tau);
  if (sym.eta == 0.0) return 2.0 * root_tau / kSqrtPi;
  const double se = sym.sqrt_eta();
  const double q = se * root_tau;
  // erf(q)/(2 sqrt eta) -> sqrt(tau/pi) as eta -> 0 without cancellation.
  const double lead = q < 1e-4 ? root_tau / kSqrtPi * (1.0 - q * q / 3.0) : std::erf(q) / (2.0 * se);
  return lead - se * tau * std::erfc(q) + root_tau * std::exp(-sym.eta * tau) / kSqrtPi;
}

/// Integral of s * tail(s) over (0, tau).
inline double tail_moment1(const TemperedSymbol& sym, double tau) {
  if (tau <= 0.0) return 0.0;
  const double t32 = tau * std::sqrt(tau);
  if (sym.eta == 0.0) return 2.0 * t32 / (3.0 * kSqrtPi);
  const double se = sym.sqrt_eta();
  const double x = sym.eta * tau;
  const double g32 = detail::lower_gamma_three_halves(x) / (sym.eta * se);
  return g32 / (4.0 * kSqrtPi) + t32 * std::exp(-x) / (2.0 * kSqrtPi) -
         0.5 * se * tau * tau * std::erfc(std::sqrt(x));
}

}  // namespace tempered
