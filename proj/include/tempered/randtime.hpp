#pragma once

// Random times: the tempered 1/2-stable subordinator H, its inverse
// L_t = inf{s : H_s > t}, and the truncation L_t ^ T_mu.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "tempered/errors.hpp"
#include "tempered/quadrature.hpp"
#include "tempered/rng.hpp"
#include "tempered/symbols.hpp"

namespace tempered {

inline constexpr double kDefaultStep = 1e-3;
inline constexpr std::uint64_t kDefaultMaxSteps = 200'000'000;

enum class PathKind { subordinator, inverse };

/// Non-decreasing sampled path. For a subordinator the grid is operational
/// time s and values are H_s; for an inverse the grid is t and values L_t.
struct MonotonePath {
  std::vector<double> grid;
  std::vector<double> values;
  PathKind kind = PathKind::inverse;

  bool is_monotone() const {
    for (std::size_t i = 1; i < values.size(); ++i) {
      if (values[i] < values[i - 1]) return false;
    }
    return true;
  }
};

/// One draw of H_{t+dt} - H_t.
///
/// eta > 0: inverse Gaussian with mean dt / (2 sqrt eta) and shape dt^2 / 2
/// (Michael-Schucany-Haas transform). eta = 0: Levy variate dt^2 / (2 N^2).
inline double sample_increment(const TemperedSymbol& sym, double dt, RngStream& rng) {
  if (!(dt > 0.0)) throw DomainError("sample_increment: dt must be > 0");
  const double n = rng.normal();
  const double shape = 0.5 * dt * dt;
  if (sym.eta == 0.0) return shape / (n * n);

  const double mean = dt * sym.mean_rate();
  const double y = n * n;
  const double my = mean * y;
  const double x = mean + mean * my / (2.0 * shape) -
                   mean / (2.0 * shape) * std::sqrt(4.0 * mean * shape * y + my * my);
  if (rng.uniform() * (mean + x) <= mean) return x;
  return mean * mean / x;
}

/// H on the operational grid {0, step, ..., n_steps * step}.
inline MonotonePath sample_subordinator_path(const TemperedSymbol& sym, double step,
                                             std::size_t n_steps, RngStream& rng) {
  if (!(step > 0.0)) throw DomainError("sample_subordinator_path: step must be > 0");
  MonotonePath path;
  path.kind = PathKind::subordinator;
  path.grid.reserve(n_steps + 1);
  path.values.reserve(n_steps + 1);
  double h = 0.0;
  path.grid.push_back(0.0);
  path.values.push_back(0.0);
  for (std::size_t k = 1; k <= n_steps; ++k) {
    h += sample_increment(sym, step, rng);
    path.grid.push_back(static_cast<double>(k) * step);
    path.values.push_back(h);
  }
  return path;
}

/// L on an increasing time grid by first passage of a simulated H.
///
/// L_t is the operational time of the first step whose H value exceeds t
/// (no interpolation inside the overshooting step), so the bias is O(step).
inline MonotonePath sample_inverse_path(const TemperedSymbol& sym, std::span<const double> t_grid,
                                        double step, RngStream& rng,
                                        std::uint64_t max_steps = kDefaultMaxSteps) {
  if (!(step > 0.0)) throw DomainError("sample_inverse_path: step must be > 0");
  if (t_grid.empty()) throw DomainError("sample_inverse_path: empty time grid");
  MonotonePath path;
  path.kind = PathKind::inverse;
  path.grid.assign(t_grid.begin(), t_grid.end());
  path.values.reserve(t_grid.size());

  double h = 0.0;
  std::uint64_t k = 0;
  double prev_t = -std::numeric_limits<double>::infinity();
  for (double t : t_grid) {
    if (!(t > prev_t)) throw DomainError("sample_inverse_path: time grid must increase");
    prev_t = t;
    if (t <= 0.0) {
      path.values.push_back(0.0);
      continue;
    }
    while (h <= t) {
      if (++k > max_steps) {
        throw ResourceError("sample_inverse_path: subordinator needs more than " +
                            std::to_string(max_steps) + " steps");
      }
      h += sample_increment(sym, step, rng);
    }
    path.values.push_back(static_cast<double>(k) * step);
  }
  return path;
}

/// L_t at a single time.
inline double sample_inverse(const TemperedSymbol& sym, double t, double step, RngStream& rng,
                             std::uint64_t max_steps = kDefaultMaxSteps) {
  const double grid[1] = {t};
  return sample_inverse_path(sym, grid, step, rng, max_steps).values.front();
}

/// L_t ^ T_mu with T_mu ~ Exp(mu) independent of the path; mu = 0 means T = inf.
inline double sample_truncated_inverse(const TemperedSymbol& sym, double mu, double t, double step,
                                       RngStream& rng,
                                       std::uint64_t max_steps = kDefaultMaxSteps) {
  if (!(mu >= 0.0)) throw DomainError("sample_truncated_inverse: mu must be >= 0");
  const double l = sample_inverse(sym, t, step, rng, max_steps);
  return std::min(l, rng.exponential(mu));
}

/// Density h(s, x) of H_s at x.
inline double subordinator_density(const TemperedSymbol& sym, double s, double x) {
  if (!(s > 0.0) || !(x > 0.0)) throw DomainError("subordinator_density: s, x must be > 0");
  const double log_h = std::log(s / (2.0 * kSqrtPi)) - 1.5 * std::log(x) + sym.sqrt_eta() * s -
                       sym.eta * x - s * s / (4.0 * x);
  return std::exp(log_h);
}

/// P(H_s <= y), the inverse-Gaussian (eta > 0) or Levy (eta = 0) CDF.
inline double subordinator_cdf(const TemperedSymbol& sym, double s, double y) {
  if (!(s > 0.0)) throw DomainError("subordinator_cdf: s must be > 0");
  if (y <= 0.0) return 0.0;
  const double ry = std::sqrt(y);
  const double se = sym.sqrt_eta();
  const double a = (s - 2.0 * se * y) / (2.0 * ry);
  const double b = (s + 2.0 * se * y) / (2.0 * ry);
  // e^{2 s sqrt(eta)} erfc(b) = e^{-a^2} erfcx(b)
  return 0.5 * std::erfc(a) + 0.5 * std::exp(-a * a) * erfcx(b);
}

/// P(L_t > x) = P(H_x < t).
inline double inverse_survival(const TemperedSymbol& sym, double t, double x) {
  if (!(t > 0.0)) throw DomainError("inverse_survival: t must be > 0");
  if (x <= 0.0) return 1.0;
  return subordinator_cdf(sym, x, t);
}

/// Density l(t, x) of L_t at x, i.e. -d/dx P(H_x < t).
inline double inverse_density(const TemperedSymbol& sym, double t, double x) {
  if (!(t > 0.0) || !(x > 0.0)) throw DomainError("inverse_density: t, x must be > 0");
  const double rt = std::sqrt(t);
  const double se = sym.sqrt_eta();
  const double a = (x - 2.0 * se * t) / (2.0 * rt);
  if (sym.eta == 0.0) return 2.0 * gauss_kernel(t, x);
  const double b = (x + 2.0 * se * t) / (2.0 * rt);
  return std::exp(-a * a) * (1.0 / (kSqrtPi * rt) - se * erfcx(b));
}

/// E[L_t] by quadrature of the survival function.
inline double inverse_mean(const TemperedSymbol& sym, double t, double tol = 1e-12) {
  if (t <= 0.0) return 0.0;
  return quad::half_line([&](double x) { return inverse_survival(sym, t, x); }, 0.0, tol).value;
}

namespace detail {

// Upper limit for z-integrals against the law of L_t; beyond it the
// density is below e^{-100} of its scale.
inline double inverse_cutoff(const TemperedSymbol& sym, double t) {
  return 2.0 * sym.sqrt_eta() * t + 20.0 * std::sqrt(t);
}

// int_0^inf e^{-lambda t} l(t, z) dt, the lambda-potential density of L at z.
inline double potential_density(const TemperedSymbol& sym, double lambda, double z, double tol) {
  return quad::half_line(
             [&](double t) { return t > 0.0 ? std::exp(-lambda * t) * inverse_density(sym, t, z) : 0.0; },
             0.0, tol)
      .value;
}

// int_x^inf f(z - x) * potential_density(z) dz.
template <class F>
double potential_against(const TemperedSymbol& sym, double lambda, double x, F&& f, double tol) {
  return quad::half_line(
             [&](double z) { return z > 0.0 ? f(z - x) * potential_density(sym, lambda, z, tol * 0.1) : 0.0; },
             x, tol)
      .value;
}

inline void check_potential_args(const char* who, double theta, double x, double lambda) {
  if (!(theta > 0.0) || !(lambda > 0.0) || !(x >= 0.0)) {
    throw DomainError(std::string(who) + ": need theta > 0, lambda > 0, x >= 0");
  }
}

}  // namespace detail

/// int_0^inf e^{-lambda t} E[(1 - e^{-theta (L_t - x)}) / theta ; L_t >= x] dt.
///
/// Evaluated from the density of L_t alone: the time transform of l(t, z)
/// at each z, then the z integral (both by quadrature).
inline double potential_lt1(const TemperedSymbol& sym, double theta, double x, double lambda,
                            double tol = 1e-9) {
  detail::check_potential_args("potential_lt1", theta, x, lambda);
  return detail::potential_against(
      sym, lambda, x, [&](double w) { return -std::expm1(-theta * w) / theta; }, tol);
}

/// int_0^inf e^{-lambda t} E[e^{-theta (L_t - x)} ; L_t >= x] dt, as above.
inline double potential_lt2(const TemperedSymbol& sym, double theta, double x, double lambda,
                            double tol = 1e-9) {
  detail::check_potential_args("potential_lt2", theta, x, lambda);
  return detail::potential_against(
      sym, lambda, x, [&](double w) { return std::exp(-theta * w); }, tol);
}

/// Closed forms the two potentials must reproduce.
inline double potential_lt1_closed(const TemperedSymbol& sym, double theta, double x,
                                   double lambda) {
  const double p = sym(lambda);
  return std::exp(-x * p) / (lambda * (theta + p));
}

inline double potential_lt2_closed(const TemperedSymbol& sym, double theta, double x,
                                   double lambda) {
  const double p = sym(lambda);
  return p * std::exp(-x * p) / (lambda * (theta + p));
}

}  // namespace tempered
