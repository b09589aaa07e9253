#pragma once

// Elastic drifted Brownian motion on [0, inf): transition kernels, the
// solution u(t, x) = E_x[M_t] by three independent routes, the tempered
// relaxation equation, the tempered Caputo operator and boundary residuals.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "tempered/diffusion.hpp"
#include "tempered/errors.hpp"
#include "tempered/laplace.hpp"
#include "tempered/parallel.hpp"
#include "tempered/quadrature.hpp"
#include "tempered/randtime.hpp"
#include "tempered/rng.hpp"
#include "tempered/symbols.hpp"

namespace tempered {

inline constexpr std::uint64_t kDefaultSeed = 20240917;

/// Drift mu (signed: the generator is mu d/dx + d^2/dx^2) and base elastic
/// coefficient c0. c0 = +inf selects the Dirichlet limit.
struct ElasticConfig {
  double mu = 0.0;
  double c0 = 0.0;

  ElasticConfig() = default;
  ElasticConfig(double mu_, double c0_) : mu(mu_), c0(c0_) {
    if (!std::isfinite(mu)) throw DomainError("ElasticConfig: mu must be finite");
    if (!(c0 >= 0.0)) throw DomainError("ElasticConfig: c0 must be >= 0");
  }

  double drift() const { return std::abs(mu); }
  /// c0 - |mu|/2, the coefficient seen by drift +|mu|.
  double c_plus() const { return c0 - 0.5 * drift(); }
  /// c0 + |mu|/2, the coefficient seen by drift -|mu|.
  double c_minus() const { return c0 + 0.5 * drift(); }
  /// Robin coefficient of this configuration: u_x(t, 0) = c_eff u(t, 0).
  double c_eff() const { return c0 - 0.5 * mu; }
  double eta() const { return 0.25 * mu * mu; }
  TemperedSymbol symbol() const { return TemperedSymbol(eta()); }
  bool positive_drift() const { return mu > 0.0; }
  bool dirichlet() const { return std::isinf(c0); }
};

// ---------------------------------------------------------------------------
// Transition kernels

namespace detail {

// Upper limit beyond which g(t, w + s) < e^{-750} g(t, 0).
inline double kernel_cutoff(double t, double s) {
  return std::max(0.0, std::sqrt(3000.0 * t) - s) + 1.0;
}

inline double p0_unchecked(double t, double x, double y, double c0, double tol) {
  const double s = x + y;
  const auto tail = quad::gauss_kronrod(
      [&](double w) { return std::exp(-c0 * w) * (w + s) / t * gauss_kernel(t, w + s); }, 0.0,
      kernel_cutoff(t, s), tol);
  return gauss_kernel(t, x - y) - gauss_kernel(t, s) + tail.value;
}

inline double p0_alt_unchecked(double t, double x, double y, double c0, double tol) {
  const double s = x + y;
  double mix = 0.0;
  if (c0 > 0.0) {
    mix = quad::gauss_kronrod([&](double w) { return std::exp(-c0 * w) * gauss_kernel(t, w + s); },
                              0.0, kernel_cutoff(t, s), tol)
              .value;
  }
  return gauss_kernel(t, x - y) + gauss_kernel(t, s) - 2.0 * c0 * mix;
}

inline void check_kernel_args(const char* who, double t, double x, double y, double c0) {
  if (!(t > 0.0) || !(x >= 0.0) || !(y >= 0.0) || !(c0 >= 0.0) || std::isinf(c0)) {
    throw DomainError(std::string(who) + ": need t > 0, x >= 0, y >= 0, finite c0 >= 0");
  }
}

}  // namespace detail

/// Elastic heat kernel p0(t, x, y), representation with (w + x + y)/t weight.
inline double density_p0(double t, double x, double y, double c0, double tol = 1e-10) {
  detail::check_kernel_args("density_p0", t, x, y, c0);
  return detail::p0_unchecked(t, x, y, c0, tol);
}

/// Same kernel from the Neumann kernel minus an exponential mixture.
inline double density_p0_alt(double t, double x, double y, double c0, double tol = 1e-10) {
  detail::check_kernel_args("density_p0_alt", t, x, y, c0);
  return detail::p0_alt_unchecked(t, x, y, c0, tol);
}

/// Drifted kernel p = e^{-eta t - (mu/2)(x - y)} p0.
inline double density_p(double t, double x, double y, const ElasticConfig& cfg,
                        double tol = 1e-10) {
  detail::check_kernel_args("density_p", t, x, y, cfg.c0);
  return std::exp(-cfg.eta() * t - 0.5 * cfg.mu * (x - y)) *
         detail::p0_unchecked(t, x, y, cfg.c0, tol);
}

/// Fourth-order central difference of f at x0. Both kernels and the
/// transform route are analytic across x = 0, so x0 - 2h < 0 is allowed.
template <class F>
double central_derivative(F&& f, double x0, double h) {
  return (f(x0 - 2.0 * h) - 8.0 * f(x0 - h) + 8.0 * f(x0 + h) - f(x0 + 2.0 * h)) / (12.0 * h);
}

/// d/dx p(t, 0, y) - c_eff p(t, 0, y).
inline double kernel_robin_residual(double t, double y, const ElasticConfig& cfg,
                                    double h = 1e-2) {
  detail::check_kernel_args("kernel_robin_residual", t, 0.0, y, cfg.c0);
  auto p = [&](double x) {
    return std::exp(-cfg.eta() * t - 0.5 * cfg.mu * (x - y)) *
           detail::p0_unchecked(t, x, y, cfg.c0, 1e-13);
  };
  return central_derivative(p, 0.0, h) - cfg.c_eff() * p(0.0);
}

// ---------------------------------------------------------------------------
// u(t, x) = E_x[M_t]

enum class Method { mc, quadrature, laplace };

/// Random time whose law drives the Monte Carlo route.
enum class McSource {
  /// Z = L_t ^ T_mu (drift +mu) or L_t (drift -mu) from the subordinator.
  inverse,
  /// Z = running maximum of the oppositely drifted Brownian motion.
  maximum
};

inline const char* method_name(Method m) {
  switch (m) {
    case Method::mc: return "mc";
    case Method::quadrature: return "quadrature";
    case Method::laplace: return "laplace";
  }
  return "?";
}

struct Budget {
  std::size_t n = 100'000;
  double step = kDefaultStep;
  double dt = kDefaultDt;
  std::uint64_t seed = kDefaultSeed;
  unsigned threads = 1;
  McSource source = McSource::inverse;
};

struct UValue {
  double value;
  double error;
};

/// u on a (t, x) grid, row-major in t.
struct SolutionField {
  std::vector<double> t_grid;
  std::vector<double> x_grid;
  std::vector<double> values;
  std::vector<double> errors;
  Method method = Method::laplace;
  /// Set when c0 = inf and the Dirichlet limit branch was taken.
  bool dirichlet_limit = false;

  double& at(std::size_t i, std::size_t j) { return values[i * x_grid.size() + j]; }
  double at(std::size_t i, std::size_t j) const { return values[i * x_grid.size() + j]; }
  double error_at(std::size_t i, std::size_t j) const { return errors[i * x_grid.size() + j]; }
};

namespace detail {

// Laplace transform in t of u; analytic in x, so x < 0 is accepted here.
template <class T>
T u_transform(const ElasticConfig& cfg, T lambda, double x) {
  const T root = std::sqrt(lambda + T(cfg.eta()));
  const T k = root + T(0.5 * cfg.mu);
  if (cfg.dirichlet()) return (T(1) - std::exp(-x * k)) / lambda;
  return T(1) / lambda - T(cfg.c_eff()) * std::exp(-x * k) / (lambda * (T(cfg.c0) + root));
}

inline UValue u_laplace(const ElasticConfig& cfg, double t, double x) {
  if (t <= 0.0) return {1.0, 0.0};
  const auto inv = laplace_invert(
      [&](std::complex<double> l) { return u_transform(cfg, l, x); }, t);
  return {inv.value, inv.error_estimate};
}

// P(Z > z) with Z = L_t ^ T_mu (drift > 0) or L_t.
inline double z_survival(const ElasticConfig& cfg, const TemperedSymbol& sym, double t, double z) {
  const double s = inverse_survival(sym, t, z);
  return cfg.positive_drift() ? std::exp(-cfg.drift() * z) * s : s;
}

// Density of Z at z > 0.
inline double z_density(const ElasticConfig& cfg, const TemperedSymbol& sym, double t, double z) {
  if (!(z > 0.0)) return 0.0;
  const double l = inverse_density(sym, t, z);
  if (!cfg.positive_drift()) return l;
  return std::exp(-cfg.drift() * z) * (l + cfg.drift() * inverse_survival(sym, t, z));
}

inline UValue u_quadrature(const ElasticConfig& cfg, double t, double x, double tol) {
  if (t <= 0.0) return {1.0, 0.0};
  const TemperedSymbol sym = cfg.symbol();
  if (cfg.dirichlet()) return {1.0 - z_survival(cfg, sym, t, x), 0.0};
  const double c = cfg.c_eff();
  if (c == 0.0) return {1.0, 0.0};
  const double hi = std::max(x, 0.0) + inverse_cutoff(sym, t);
  // 1 - E[(1 - e^{-c (Z - x)}) 1(Z > x)]
  const auto r = quad::gauss_kronrod(
      [&](double z) { return -std::expm1(-c * (z - x)) * z_density(cfg, sym, t, z); }, x, hi, tol);
  return {1.0 - r.value, r.error};
}

}  // namespace detail

/// Closed-form transform of u in t at real lambda > 0.
inline double solve_u_laplace_domain(const ElasticConfig& cfg, double lambda, double x) {
  if (!(lambda > 0.0)) throw DomainError("solve_u_laplace_domain: lambda must be > 0");
  if (!(x >= 0.0)) throw DomainError("solve_u_laplace_domain: x must be >= 0");
  return detail::u_transform(cfg, lambda, x);
}

/// u(t, x) = P(Z < x + T_c), T_c ~ Exp(c_eff). Only meaningful for c_eff > 0.
inline double solve_u_probability(const ElasticConfig& cfg, double t, double x,
                                  double tol = 1e-10) {
  const double c = cfg.c_eff();
  if (!(c > 0.0) || cfg.dirichlet()) {
    throw DomainError("solve_u_probability: requires a finite elastic coefficient c_eff > 0");
  }
  if (t <= 0.0) return 1.0;
  const TemperedSymbol sym = cfg.symbol();
  const double hi = x + detail::inverse_cutoff(sym, t);
  const auto r = quad::gauss_kronrod(
      [&](double z) { return c * std::exp(-c * (z - x)) * detail::z_survival(cfg, sym, t, z); }, x,
      hi, tol);
  return 1.0 - r.value;
}

namespace detail {

inline void check_grids(std::span<const double> t_grid, std::span<const double> x_grid) {
  if (t_grid.empty() || x_grid.empty()) throw DomainError("solve_u: empty grid");
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!(t_grid[i] >= 0.0) || (i > 0 && !(t_grid[i] > t_grid[i - 1]))) {
      throw DomainError("solve_u: t grid must be non-negative and increasing");
    }
  }
  for (double x : x_grid) {
    if (!(x >= 0.0)) throw DomainError("solve_u: x must be >= 0");
  }
}

inline void u_monte_carlo(const ElasticConfig& cfg, SolutionField& f, const Budget& b) {
  if (b.n < 2) throw DomainError("solve_u: Monte Carlo needs n >= 2");
  const std::size_t nt = f.t_grid.size();
  const std::size_t nx = f.x_grid.size();
  const TemperedSymbol sym = cfg.symbol();
  const double c = cfg.c_eff();
  const double mu = cfg.drift();

  // Z at every grid time for one path.
  auto z_path = [&](std::size_t path) {
    RngStream rng(b.seed, path);
    std::vector<double> z;
    if (b.source == McSource::inverse) {
      z = sample_inverse_path(sym, f.t_grid, b.step, rng).values;
      if (cfg.positive_drift()) {
        const double cap = rng.exponential(mu);
        for (double& v : z) v = std::min(v, cap);
      }
    } else {
      // Drift +mu pairs with max X^{-mu}, drift -mu with max X^{+mu}.
      z = sample_bm_max_path(-cfg.mu, 0.0, f.t_grid, b.dt, rng);
    }
    return z;
  };

  auto g = [&](double z, double x) {
    if (!(z > x)) return 0.0;
    if (cfg.dirichlet()) return 1.0;
    return -std::expm1(-c * (z - x));
  };

  auto per_path = parallel_map<std::vector<double>>(b.n, b.threads, [&](std::size_t p) {
    const auto z = z_path(p);
    std::vector<double> row(nt * nx);
    for (std::size_t i = 0; i < nt; ++i) {
      for (std::size_t j = 0; j < nx; ++j) row[i * nx + j] = g(z[i], f.x_grid[j]);
    }
    return row;
  });

  // Welford in path order, independent of the thread count.
  std::vector<double> mean(nt * nx, 0.0), m2(nt * nx, 0.0);
  for (std::size_t p = 0; p < b.n; ++p) {
    const double k = static_cast<double>(p + 1);
    for (std::size_t q = 0; q < nt * nx; ++q) {
      const double d = per_path[p][q] - mean[q];
      mean[q] += d / k;
      m2[q] += d * (per_path[p][q] - mean[q]);
    }
  }
  const double n = static_cast<double>(b.n);
  for (std::size_t q = 0; q < nt * nx; ++q) {
    f.values[q] = 1.0 - mean[q];
    f.errors[q] = std::sqrt(m2[q] / (n - 1.0) / n);
  }
}

}  // namespace detail

/// u(t, x) on a grid by the chosen route. `errors` holds |Talbot - Stehfest|
/// (laplace), the quadrature error estimate, or the Monte Carlo standard error.
inline SolutionField solve_u(const ElasticConfig& cfg, std::span<const double> t_grid,
                             std::span<const double> x_grid, Method method,
                             const Budget& budget = {}) {
  detail::check_grids(t_grid, x_grid);
  SolutionField f;
  f.t_grid.assign(t_grid.begin(), t_grid.end());
  f.x_grid.assign(x_grid.begin(), x_grid.end());
  f.values.assign(t_grid.size() * x_grid.size(), 0.0);
  f.errors.assign(f.values.size(), 0.0);
  f.method = method;
  f.dirichlet_limit = cfg.dirichlet();

  if (method == Method::mc) {
    detail::u_monte_carlo(cfg, f, budget);
    return f;
  }
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    for (std::size_t j = 0; j < x_grid.size(); ++j) {
      const UValue v = method == Method::laplace ? detail::u_laplace(cfg, t_grid[i], x_grid[j])
                                                 : detail::u_quadrature(cfg, t_grid[i], x_grid[j], 1e-10);
      f.at(i, j) = v.value;
      f.errors[i * x_grid.size() + j] = v.error;
    }
  }
  return f;
}

/// Single-point convenience wrapper.
inline UValue solve_u_at(const ElasticConfig& cfg, double t, double x, Method method,
                         const Budget& budget = {}) {
  const double tg[1] = {t};
  const double xg[1] = {x};
  const auto f = solve_u(cfg, tg, xg, method, budget);
  return {f.values[0], f.errors[0]};
}

/// Limit c0 -> inf: u = P(Z <= x) with Z as in the Monte Carlo route.
inline double dirichlet_limit(const ElasticConfig& cfg, double t, double x) {
  if (t <= 0.0) return 1.0;
  return 1.0 - detail::z_survival(cfg, cfg.symbol(), t, x);
}

/// v'' + mu v' - lambda v + 1 for v = transform of u in t, by finite differences.
inline double direct_ode_residual(const ElasticConfig& cfg, double lambda, double x,
                                  double h = 1e-2) {
  if (!(lambda > 0.0)) throw DomainError("direct_ode_residual: lambda must be > 0");
  auto v = [&](double y) { return detail::u_transform(cfg, lambda, y); };
  const double v0 = v(x);
  const double d1 = central_derivative(v, x, h);
  const double d2 = (-v(x - 2 * h) + 16 * v(x - h) - 30 * v0 + 16 * v(x + h) - v(x + 2 * h)) /
                    (12.0 * h * h);
  return d2 + cfg.mu * d1 - lambda * v0 + 1.0;
}

// ---------------------------------------------------------------------------
// Relaxation equation D r + a r = b, r(0) = c

struct RelaxationValue {
  double value;
  /// a = 0: the limit c + b E[L_t] was used.
  bool limit_branch = false;
};

/// r(t) = c + (b/a - c) E[1 - e^{-a L_t}].
inline RelaxationValue relaxation(double a, double b, int c, const TemperedSymbol& sym, double t,
                                  double tol = 1e-11) {
  if (!(a >= 0.0) || !(b >= 0.0)) throw DomainError("relaxation: a, b must be >= 0");
  if (c != 0 && c != 1) throw DomainError("relaxation: c must be 0 or 1");
  if (!(t >= 0.0)) throw DomainError("relaxation: t must be >= 0");
  if (t == 0.0) return {static_cast<double>(c), a == 0.0 && b > 0.0};
  if (a == 0.0) {
    if (b == 0.0) return {static_cast<double>(c), false};
    return {c + b * inverse_mean(sym, t), true};
  }
  const double hi = detail::inverse_cutoff(sym, t);
  const double e = quad::gauss_kronrod(
                       [&](double z) { return -std::expm1(-a * z) * inverse_density(sym, t, z); },
                       0.0, hi, tol)
                       .value;
  return {c + (b / a - c) * e, false};
}

/// Branch iv (c = 0, b > a): the time at which r first reaches 1.
inline double relaxation_crossing_time(double a, double b, const TemperedSymbol& sym,
                                       double rel_tol = 1e-10) {
  if (!(b > a) || !(a > 0.0)) throw DomainError("relaxation_crossing_time: need b > a > 0");
  auto r = [&](double t) { return relaxation(a, b, 0, sym, t).value; };
  double lo = 0.0;
  double hi = 1.0;
  while (r(hi) < 1.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12) throw ResourceError("relaxation_crossing_time: no crossing below t = 1e12");
  }
  while (hi - lo > rel_tol * hi) {
    const double mid = 0.5 * (lo + hi);
    (r(mid) < 1.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Tempered Caputo derivative on a uniform grid

struct CaputoSeries {
  double step = 0.0;
  std::vector<double> values;
  /// The tempering scale 1/eta is not resolved by the grid.
  bool coarse_grid = false;
};

/// D psi(t_n) = int_0^{t_n} psi'(s) tail(t_n - s) ds for psi sampled at
/// t_k = k step (psi[0] = psi(0)).
///
/// psi' on [t_j, t_{j+1}] is the derivative of the quadratic through
/// t_{j-1}, t_j, t_{j+1} (t_0, t_1, t_2 on the first interval); it integrates
/// exactly to psi_{j+1} - psi_j. Moments of the tail are in closed form.
inline CaputoSeries tempered_caputo(std::span<const double> psi, double step,
                                    const TemperedSymbol& sym) {
  if (!(step > 0.0)) throw DomainError("tempered_caputo: step must be > 0");
  if (psi.size() < 3) throw DomainError("tempered_caputo: need at least 3 samples");
  const std::size_t n = psi.size();
  CaputoSeries out;
  out.step = step;
  out.values.assign(n, 0.0);
  out.coarse_grid = sym.eta * step > 0.1;

  std::vector<double> d0(n), d1(n);
  double prev0 = 0.0, prev1 = 0.0;
  for (std::size_t m = 1; m < n; ++m) {
    const double tau = static_cast<double>(m) * step;
    const double i0 = tail_moment0(sym, tau);
    const double i1 = tail_moment1(sym, tau);
    d0[m] = i0 - prev0;
    // int over [tau - step, tau] of (tau - s) tail(s) ds
    d1[m] = tau * d0[m] - (i1 - prev1);
    prev0 = i0;
    prev1 = i1;
  }

  std::vector<double> alpha(n - 1), beta(n - 1);
  const double h2 = step * step;
  alpha[0] = (-3.0 * psi[0] + 4.0 * psi[1] - psi[2]) / (2.0 * step);
  beta[0] = (psi[2] - 2.0 * psi[1] + psi[0]) / h2;
  for (std::size_t j = 1; j + 1 < n; ++j) {
    alpha[j] = (psi[j + 1] - psi[j - 1]) / (2.0 * step);
    beta[j] = (psi[j + 1] - 2.0 * psi[j] + psi[j - 1]) / h2;
  }

  for (std::size_t k = 1; k < n; ++k) {
    double acc = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t m = k - j;
      acc += alpha[j] * d0[m] + beta[j] * d1[m];
    }
    out.values[k] = acc;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Boundary residuals

enum class BoundaryKind { frac_pos, frac_neg, frac_zero, robin };

/// u(t_k, 0) and u_x(t_k, 0) at t_k = k step.
struct BoundaryTrace {
  double step = 0.0;
  std::vector<double> u0;
  /// Needed by the robin residual only; entry 0 is unused.
  std::vector<double> dudx;
};

/// Trace of the transform route on {0, step, ..., n_steps step}.
inline BoundaryTrace boundary_trace(const ElasticConfig& cfg, double step, std::size_t n_steps,
                                    bool with_derivative = false, double h = 1e-2) {
  if (!(step > 0.0)) throw DomainError("boundary_trace: step must be > 0");
  BoundaryTrace tr;
  tr.step = step;
  tr.u0.assign(n_steps + 1, 1.0);
  if (with_derivative) tr.dudx.assign(n_steps + 1, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t k = 1; k <= n_steps; ++k) {
    const double t = static_cast<double>(k) * step;
    tr.u0[k] = detail::u_laplace(cfg, t, 0.0).value;
    if (with_derivative) {
      tr.dudx[k] = central_derivative([&](double x) { return detail::u_laplace(cfg, t, x).value; },
                                      0.0, h);
    }
  }
  return tr;
}

/// Residual of the boundary condition of kind `which` along the trace.
///   frac_pos:  D u + (c0 + mu/2) u - mu   (tempered, drift +mu)
///   frac_neg:  D u + (c0 + mu/2) u        (tempered, drift -mu)
///   frac_zero: D u + c0 u                 (plain Caputo)
///   robin:     u_x - c_eff u
inline std::vector<double> boundary_residual(const ElasticConfig& cfg, const BoundaryTrace& trace,
                                             BoundaryKind which) {
  const auto& u = trace.u0;
  std::vector<double> res(u.size(), 0.0);
  if (which == BoundaryKind::robin) {
    if (trace.dudx.size() != u.size()) {
      throw DomainError("boundary_residual: robin needs the spatial derivative trace");
    }
    res[0] = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t k = 1; k < u.size(); ++k) res[k] = trace.dudx[k] - cfg.c_eff() * u[k];
    return res;
  }
  const double mu = cfg.drift();
  const TemperedSymbol sym =
      which == BoundaryKind::frac_zero ? TemperedSymbol(0.0) : cfg.symbol();
  const auto d = tempered_caputo(u, trace.step, sym);
  for (std::size_t k = 0; k < u.size(); ++k) {
    switch (which) {
      case BoundaryKind::frac_pos: res[k] = d.values[k] + cfg.c_minus() * u[k] - mu; break;
      case BoundaryKind::frac_neg: res[k] = d.values[k] + cfg.c_minus() * u[k]; break;
      default: res[k] = d.values[k] + cfg.c0 * u[k]; break;
    }
  }
  return res;
}

/// max |res[k]| over t_k in [t_lo, t_hi].
inline double sup_norm(const std::vector<double>& res, double step, double t_lo, double t_hi) {
  double m = 0.0;
  for (std::size_t k = 0; k < res.size(); ++k) {
    const double t = static_cast<double>(k) * step;
    if (t >= t_lo - 1e-12 && t <= t_hi + 1e-12) m = std::max(m, std::abs(res[k]));
  }
  return m;
}

}  // namespace tempered
