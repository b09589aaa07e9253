#pragma once

// Drifted Brownian motion with generator mu d/dx + d^2/dx^2 (variance rate 2),
// its running maximum, the bang-bang SDE and its local time at zero.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "tempered/errors.hpp"
#include "tempered/rng.hpp"

namespace tempered {

inline constexpr double kVarianceRate = 2.0;
inline constexpr double kDefaultDt = 1e-4;

/// Sample path on the uniform grid {0, dt, ..., n dt}.
struct DiffusionPath {
  double dt = 0.0;
  double drift = 0.0;
  std::vector<double> values;

  std::size_t steps() const { return values.empty() ? 0 : values.size() - 1; }
  double time(std::size_t k) const { return static_cast<double>(k) * dt; }
};

/// Semimartingale local time at zero; gamma[0] = 0.
struct LocalTime {
  std::vector<double> raw;
  /// Running maximum of raw (monotone envelope).
  std::vector<double> clipped;
};

namespace detail {

inline std::size_t step_count(double t_end, double dt, const char* who) {
  if (!(dt > 0.0)) throw DomainError(std::string(who) + ": dt must be > 0");
  if (!(t_end >= dt)) throw DomainError(std::string(who) + ": t_end must be >= dt");
  return static_cast<std::size_t>(std::llround(t_end / dt));
}

inline double sgn(double y) { return (y > 0.0) - (y < 0.0); }

/// Maximum of a variance-rate-2 Brownian bridge from a to b over time dt.
inline double bridge_max(double a, double b, double dt, RngStream& rng) {
  const double d = b - a;
  return 0.5 * (a + b + std::sqrt(d * d - 2.0 * kVarianceRate * dt * std::log(rng.uniform_pos())));
}

}  // namespace detail

/// X_t = x0 + mu t + sqrt(2) B_t with exact Gaussian increments.
inline DiffusionPath simulate_bm(double mu, double x0, double t_end, double dt, RngStream& rng) {
  const std::size_t n = detail::step_count(t_end, dt, "simulate_bm");
  DiffusionPath path{dt, mu, {}};
  path.values.reserve(n + 1);
  const double sd = std::sqrt(kVarianceRate * dt);
  double x = x0;
  path.values.push_back(x);
  for (std::size_t k = 0; k < n; ++k) {
    x += mu * dt + sd * rng.normal();
    path.values.push_back(x);
  }
  return path;
}

/// Running maximum at every grid point. With bridge correction each step's
/// maximum is drawn from the exact Brownian-bridge law given its endpoints.
inline std::vector<double> running_max(const DiffusionPath& path, bool bridge_corrected,
                                       RngStream& rng) {
  std::vector<double> out;
  if (path.values.empty()) return out;
  out.reserve(path.values.size());
  double m = path.values.front();
  out.push_back(m);
  for (std::size_t k = 1; k < path.values.size(); ++k) {
    const double a = path.values[k - 1];
    const double b = path.values[k];
    const double step_max = bridge_corrected ? detail::bridge_max(a, b, path.dt, rng) : b;
    m = std::max(m, step_max);
    out.push_back(m);
  }
  return out;
}

/// max_{s <= t} X_s without storing the path.
///
/// With the bridge correction the result is exact in law for any dt. A step's
/// bridge maximum is only drawn when it can beat the running maximum with
/// probability above e^{-40}.
inline double sample_bm_max(double mu, double x0, double t, double dt, RngStream& rng,
                            bool bridge_corrected = true) {
  const std::size_t n = detail::step_count(t, dt, "sample_bm_max");
  const double sd = std::sqrt(kVarianceRate * dt);
  constexpr double kSkip = 40.0;
  double x = x0;
  double m = x0;
  for (std::size_t k = 0; k < n; ++k) {
    const double next = x + mu * dt + sd * rng.normal();
    if (bridge_corrected) {
      // P(bridge max > m) = exp(-(m - x)(m - next) / dt) for rate 2.
      const double gap = (m - x) * (m - next);
      if (next >= m || gap < kSkip * dt) m = std::max(m, detail::bridge_max(x, next, dt, rng));
    } else {
      m = std::max(m, next);
    }
    x = next;
  }
  return m;
}

/// Running maximum read off at each time of an increasing grid (one path).
inline std::vector<double> sample_bm_max_path(double mu, double x0, const std::vector<double>& t_grid,
                                              double dt, RngStream& rng) {
  if (!(dt > 0.0)) throw DomainError("sample_bm_max_path: dt must be > 0");
  const double sd = std::sqrt(kVarianceRate * dt);
  std::vector<double> out;
  out.reserve(t_grid.size());
  double x = x0;
  double m = x0;
  std::size_t k = 0;
  for (double t : t_grid) {
    const auto target = static_cast<std::size_t>(std::llround(std::max(t, 0.0) / dt));
    for (; k < target; ++k) {
      const double next = x + mu * dt + sd * rng.normal();
      if (next >= m || (m - x) * (m - next) < 40.0 * dt) {
        m = std::max(m, detail::bridge_max(x, next, dt, rng));
      }
      x = next;
    }
    out.push_back(m);
  }
  return out;
}

/// Sign-dependent drift coefficient of the bang-bang SDE for Y^{+mu} / Y^{-mu}.
enum class DriftSign { plus, minus };

/// Reflected-drift coefficient theta in dY = -theta sgn(Y) dt + sqrt(2) dB.
/// |Y| is then a reflecting Brownian motion with drift -theta, so Y^{+mu}
/// (theta = mu) pairs with max X^{mu} and Y^{-mu} (theta = -mu) with max X^{-mu}.
inline double bang_bang_theta(DriftSign sign, double mu) {
  return sign == DriftSign::plus ? mu : -mu;
}

struct BangBangPath {
  DiffusionPath path;
  LocalTime local_time;
};

/// Euler-Maruyama for dY = -theta sgn(Y) dt + sqrt(2) dB from y0, with the
/// discrete Tanaka local time
///   gamma_n = |Y_n| - |Y_0| - sum_{k<n} sgn(Y_k)(Y_{k+1} - Y_k).
inline BangBangPath simulate_sign_drift(double theta, double y0, double t_end, double dt,
                                        RngStream& rng) {
  const std::size_t n = detail::step_count(t_end, dt, "simulate_bang_bang");
  BangBangPath out;
  out.path = DiffusionPath{dt, -theta, {}};
  auto& ys = out.path.values;
  auto& raw = out.local_time.raw;
  auto& clipped = out.local_time.clipped;
  ys.reserve(n + 1);
  raw.reserve(n + 1);
  clipped.reserve(n + 1);
  const double sd = std::sqrt(kVarianceRate * dt);
  double y = y0;
  double martingale = 0.0;
  double envelope = 0.0;
  ys.push_back(y);
  raw.push_back(0.0);
  clipped.push_back(0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double s = detail::sgn(y);
    const double next = y - theta * s * dt + sd * rng.normal();
    martingale += s * (next - y);
    y = next;
    const double gamma = std::abs(y) - std::abs(y0) - martingale;
    envelope = std::max(envelope, gamma);
    ys.push_back(y);
    raw.push_back(gamma);
    clipped.push_back(envelope);
  }
  return out;
}

/// Y^{+mu} or Y^{-mu} started at 0, with its local time at zero.
inline BangBangPath simulate_bang_bang(DriftSign sign, double mu, double t_end, double dt,
                                       RngStream& rng) {
  if (!(mu >= 0.0)) throw DomainError("simulate_bang_bang: mu must be >= 0");
  return simulate_sign_drift(bang_bang_theta(sign, mu), 0.0, t_end, dt, rng);
}

struct BangBangEndpoint {
  double y;
  double local_time;
};

/// (Y_t, gamma_t) of the bang-bang SDE without storing the path.
inline BangBangEndpoint sample_sign_drift_endpoint(double theta, double y0, double t, double dt,
                                                   RngStream& rng) {
  const std::size_t n = detail::step_count(t, dt, "simulate_bang_bang");
  const double sd = std::sqrt(kVarianceRate * dt);
  const double drift = theta * dt;
  double y = y0;
  double martingale = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double s = detail::sgn(y);
    const double next = y - drift * s + sd * rng.normal();
    martingale += s * (next - y);
    y = next;
  }
  // Tanaka increments are non-negative, so the raw value is already monotone.
  return {y, std::abs(y) - std::abs(y0) - martingale};
}

/// Killing time of the elastic process: the first grid time with
/// gamma_t >= E, E ~ Exp(c); +inf if the path survives the horizon.
inline double elastic_kill(const LocalTime& gamma, double dt, double c, RngStream& rng) {
  if (!(c > 0.0)) throw DomainError("elastic_kill: c must be > 0");
  const double threshold = rng.exponential(c);
  const auto& g = gamma.clipped.empty() ? gamma.raw : gamma.clipped;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (g[k] >= threshold) return static_cast<double>(k) * dt;
  }
  return std::numeric_limits<double>::infinity();
}

}  // namespace tempered
