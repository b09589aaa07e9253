#pragma once

// Pass/fail gates for the equalities in law and the representation
// identities: KS statistics, ECDF tables and per-check reports.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include "tempered/csv.hpp"
#include "tempered/diffusion.hpp"
#include "tempered/errors.hpp"
#include "tempered/fracbvp.hpp"
#include "tempered/parallel.hpp"
#include "tempered/randtime.hpp"
#include "tempered/rng.hpp"
#include "tempered/symbols.hpp"

namespace tempered {

/// c(alpha) for alpha = 0.05 in the asymptotic KS critical value.
inline constexpr double kKsC05 = 1.358;

struct KsResult {
  double distance;
  double threshold;
};

inline double ks_threshold(std::size_t n, std::size_t m, double c_alpha = kKsC05) {
  const double dn = static_cast<double>(n);
  const double dm = static_cast<double>(m);
  return c_alpha * std::sqrt((dn + dm) / (dn * dm));
}

/// Two-sample Kolmogorov-Smirnov distance sup |F_a - F_b|.
inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b,
                              double c_alpha = kKsC05) {
  if (a.empty() || b.empty()) throw DomainError("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  return {d, ks_threshold(a.size(), b.size(), c_alpha)};
}

/// One-sample distance against a continuous reference CDF.
inline KsResult ks_one_sample(std::vector<double> a, const std::function<double(double)>& cdf,
                              double c_alpha = kKsC05) {
  if (a.empty()) throw DomainError("ks_one_sample: empty sample");
  std::sort(a.begin(), a.end());
  const double n = static_cast<double>(a.size());
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double f = cdf(a[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return {d, c_alpha / std::sqrt(n)};
}

/// ECDF of a sample tabulated on a grid next to a reference CDF.
struct EcdfSummary {
  std::vector<double> sorted;
  std::size_t n = 0;
  std::vector<double> grid;
  std::vector<double> ecdf;
  std::vector<double> reference;
  double ks_distance = 0.0;
};

inline double ecdf_at(const std::vector<double>& sorted, double x) {
  const auto it = std::upper_bound(sorted.begin(), sorted.end(), x);
  return static_cast<double>(it - sorted.begin()) / static_cast<double>(sorted.size());
}

/// Grid = `points` sample quantiles of `sample`.
inline EcdfSummary summarize_ecdf(std::vector<double> sample,
                                  const std::function<double(double)>& reference,
                                  std::size_t points = 21) {
  if (sample.empty()) throw DomainError("summarize_ecdf: empty sample");
  EcdfSummary s;
  std::sort(sample.begin(), sample.end());
  s.n = sample.size();
  for (std::size_t k = 0; k < points; ++k) {
    const auto idx = std::min(s.n - 1, k * (s.n - 1) / std::max<std::size_t>(points - 1, 1));
    const double x = sample[idx];
    s.grid.push_back(x);
    s.ecdf.push_back(ecdf_at(sample, x));
    s.reference.push_back(reference(x));
    s.ks_distance = std::max(s.ks_distance, std::abs(s.ecdf.back() - s.reference.back()));
  }
  s.sorted = std::move(sample);
  return s;
}

inline void print_ecdf_table(std::ostream& os, const EcdfSummary& s) {
  os << "  x                     ecdf       reference  diff\n";
  for (std::size_t k = 0; k < s.grid.size(); ++k) {
    os << "  " << std::setw(20) << std::left << csv::format(s.grid[k]) << "  " << std::fixed
       << std::setprecision(6) << s.ecdf[k] << "   " << s.reference[k] << "   " << std::showpos
       << s.ecdf[k] - s.reference[k] << std::noshowpos << std::defaultfloat << std::right << "\n";
  }
}

struct LawCheckReport {
  std::string name;
  /// Samples per side (0 for deterministic identities).
  std::size_t n = 0;
  /// KS distance, or the max deviation for non-distributional checks.
  double ks_distance = 0.0;
  double threshold = 0.0;
  bool pass = false;
  std::uint64_t seed = 0;
  double runtime = 0.0;
  std::string detail;
  /// Filled for sample-based checks so failures can be inspected.
  std::optional<EcdfSummary> table;
};

inline LawCheckReport make_report(std::string name, std::size_t n, double distance,
                                  double threshold, std::uint64_t seed, double runtime,
                                  std::string detail = {}) {
  LawCheckReport r;
  r.name = std::move(name);
  r.n = n;
  r.ks_distance = distance;
  r.threshold = threshold;
  r.pass = std::isfinite(distance) && distance < threshold;
  r.seed = seed;
  r.runtime = runtime;
  r.detail = std::move(detail);
  return r;
}

inline void print_summary(std::ostream& os, const LawCheckReport& r) {
  os << (r.pass ? "PASS " : "FAIL ") << r.name << " n=" << r.n
     << " distance=" << csv::format(r.ks_distance) << " threshold=" << csv::format(r.threshold)
     << " seed=" << r.seed << " runtime=" << std::fixed << std::setprecision(2) << r.runtime
     << "s" << std::defaultfloat;
  if (!r.detail.empty()) os << " (" << r.detail << ")";
  os << "\n";
  if (!r.pass && r.table) print_ecdf_table(os, *r.table);
}

inline void write_reports_csv(std::ostream& os, const std::vector<LawCheckReport>& reports) {
  csv::Writer w(os);
  w.header({"name", "n", "distance", "threshold", "pass", "seed", "runtime_s", "detail"});
  for (const auto& r : reports) {
    w.field(r.name).field(r.n).field(r.ks_distance).field(r.threshold).field(r.pass ? 1 : 0)
        .field(r.seed).field(r.runtime).field(r.detail);
    w.end_row();
  }
}

inline void write_ecdf_csv(std::ostream& os, const EcdfSummary& s) {
  csv::Writer w(os);
  w.header({"x", "ecdf", "reference"});
  for (std::size_t k = 0; k < s.grid.size(); ++k) {
    w.field(s.grid[k]).field(s.ecdf[k]).field(s.reference[k]);
    w.end_row();
  }
}

// ---------------------------------------------------------------------------
// Sample-based checks

struct CheckOptions {
  std::size_t n = 100'000;
  double dt = kDefaultDt;
  double step = kDefaultStep;
  std::uint64_t seed = kDefaultSeed;
  unsigned threads = default_threads();
};

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline void require_n(const CheckOptions& o, const char* who) {
  if (o.n < 10'000) throw DomainError(std::string(who) + ": n must be >= 10^4");
}

// P(L_t ^ T_mu <= x), or P(L_t <= x) when `truncated` is false.
inline double inverse_cdf(const TemperedSymbol& sym, double mu, bool truncated, double t,
                          double x) {
  if (x <= 0.0) return 0.0;
  const double s = inverse_survival(sym, t, x);
  return 1.0 - (truncated ? std::exp(-mu * x) * s : s);
}

// Stream ids: the diffusion side and the subordinator side never share one.
inline std::uint64_t side_stream(std::size_t i, int side) { return 2 * i + side; }

inline LawCheckReport max_vs_inverse(const char* name, double mu, double t, bool negative,
                                     const CheckOptions& o) {
  require_n(o, name);
  if (!(mu >= 0.0) || !(t > 0.0)) throw DomainError(std::string(name) + ": need mu >= 0, t > 0");
  const auto t0 = std::chrono::steady_clock::now();
  const TemperedSymbol sym = TemperedSymbol::from_drift(mu);
  const double drift = negative ? -mu : mu;
  auto maxima = parallel_map<double>(o.n, o.threads, [&](std::size_t i) {
    RngStream rng(o.seed, side_stream(i, 0));
    return sample_bm_max(drift, 0.0, t, o.dt, rng, true);
  });
  auto times = parallel_map<double>(o.n, o.threads, [&](std::size_t i) {
    RngStream rng(o.seed, side_stream(i, 1));
    return negative ? sample_truncated_inverse(sym, mu, t, o.step, rng)
                    : sample_inverse(sym, t, o.step, rng);
  });
  const auto ks = ks_two_sample(maxima, times);
  auto r = make_report(name, o.n, ks.distance, ks.threshold, o.seed, detail::seconds_since(t0),
                       "max vs inverse, mu=" + csv::format(mu) + " t=" + csv::format(t));
  r.table = summarize_ecdf(std::move(maxima),
                           [&](double x) { return inverse_cdf(sym, mu, negative, t, x); });
  return r;
}

}  // namespace detail

/// max_{s<=t} X^mu_s against L_t with eta = mu^2/4.
inline LawCheckReport check_thm_pos_drift(double mu, double t, const CheckOptions& o = {}) {
  return detail::max_vs_inverse("thm-pos", mu, t, false, o);
}

/// max_{s<=t} X^{-mu}_s against L_t ^ T_mu.
inline LawCheckReport check_thm_neg_drift(double mu, double t, const CheckOptions& o = {}) {
  return detail::max_vs_inverse("thm-neg", mu, t, true, o);
}

/// P(max X^{-mu} > beta) against e^{-mu beta} P(L_t > beta), max deviation over betas.
inline LawCheckReport check_neg_drift_tail(double mu, double t, const std::vector<double>& betas,
                                           const CheckOptions& o = {}, double tol = 0.01) {
  detail::require_n(o, "thm-neg-tail");
  const auto t0 = std::chrono::steady_clock::now();
  const TemperedSymbol sym = TemperedSymbol::from_drift(mu);
  // Same streams as the KS check, so both describe one sample.
  auto maxima = parallel_map<double>(o.n, o.threads, [&](std::size_t i) {
    RngStream rng(o.seed, detail::side_stream(i, 0));
    return sample_bm_max(-mu, 0.0, t, o.dt, rng, true);
  });
  std::sort(maxima.begin(), maxima.end());
  double worst = 0.0;
  std::string detail;
  for (double beta : betas) {
    const double emp = 1.0 - ecdf_at(maxima, beta);
    const double exact = std::exp(-mu * beta) * inverse_survival(sym, t, beta);
    worst = std::max(worst, std::abs(emp - exact));
    if (!detail.empty()) detail += "; ";
    detail += "beta=" + csv::format(beta) + " emp=" + csv::format(emp) +
              " exact=" + csv::format(exact);
  }
  return make_report("thm-neg-tail", o.n, worst, tol, o.seed, detail::seconds_since(t0), detail);
}

/// gamma_t of Y^{+mu} against L_t, or of Y^{-mu} against L_t ^ T_mu, using
/// the exact CDF of the random time.
inline LawCheckReport check_local_time(DriftSign sign, double mu, double t,
                                       const CheckOptions& o = {}, double threshold = 0.02) {
  const bool minus = sign == DriftSign::minus;
  const char* name = minus ? "local-time-minus" : "local-time-plus";
  detail::require_n(o, name);
  if (!(mu >= 0.0) || !(t > 0.0)) throw DomainError(std::string(name) + ": need mu >= 0, t > 0");
  const auto t0 = std::chrono::steady_clock::now();
  const TemperedSymbol sym = TemperedSymbol::from_drift(mu);
  const double theta = bang_bang_theta(sign, mu);
  auto gammas = parallel_map<double>(o.n, o.threads, [&](std::size_t i) {
    RngStream rng(o.seed, detail::side_stream(i, minus ? 1 : 0));
    return sample_sign_drift_endpoint(theta, 0.0, t, o.dt, rng).local_time;
  });
  auto cdf = [&](double x) { return detail::inverse_cdf(sym, mu, minus, t, x); };
  const auto ks = ks_one_sample(gammas, cdf);
  auto r = make_report(name, o.n, ks.distance, threshold, o.seed, detail::seconds_since(t0),
                       "local time vs inverse law, mu=" + csv::format(mu) +
                           " t=" + csv::format(t) + " dt=" + csv::format(o.dt));
  r.table = summarize_ecdf(std::move(gammas), cdf);
  return r;
}

/// Killed bang-bang paths against the transform route. |Y| started at x
/// has drift mu, so gamma_t is the boundary local time of the drifted
/// process; both E[1(t < zeta)] (killing at an Exp(c) level of gamma) and
/// E[e^{-c gamma_t}] are compared with u(t, x). The distance is the largest
/// deviation over the grid; the threshold is 4 standard errors plus 5e-3
/// for the Euler bias of the discrete local time.
inline LawCheckReport check_functional_equiv(const ElasticConfig& cfg,
                                             const std::vector<double>& t_grid, double x,
                                             const CheckOptions& o = {}) {
  detail::require_n(o, "functional");
  if (t_grid.empty() || !(x >= 0.0) || cfg.dirichlet()) {
    throw DomainError("functional: need a non-empty t grid, x >= 0 and finite c0");
  }
  const auto t0 = std::chrono::steady_clock::now();
  const double c = cfg.c_eff();
  const bool killing = c > 0.0;
  const double theta = -cfg.mu;
  std::vector<std::size_t> marks;
  for (double t : t_grid) marks.push_back(static_cast<std::size_t>(std::llround(t / o.dt)));
  const std::size_t nt = t_grid.size();

  // Per path: [alive indicator..., e^{-c gamma}...] at every grid time.
  auto rows = parallel_map<std::vector<double>>(o.n, o.threads, [&](std::size_t p) {
    RngStream rng(o.seed, p);
    const double level = killing ? rng.exponential(c) : std::numeric_limits<double>::infinity();
    std::vector<double> row(2 * nt);
    const double sd = std::sqrt(kVarianceRate * o.dt);
    double y = x, mart = 0.0, gamma = 0.0;
    std::size_t k = 0;
    for (std::size_t i = 0; i < nt; ++i) {
      for (; k < marks[i]; ++k) {
        const double s = detail::sgn(y);
        const double next = y - theta * s * o.dt + sd * rng.normal();
        mart += s * (next - y);
        y = next;
      }
      gamma = std::abs(y) - x - mart;
      row[i] = gamma < level ? 1.0 : 0.0;
      row[nt + i] = std::exp(-c * gamma);
    }
    return row;
  });

  const auto exact = solve_u(cfg, t_grid, std::vector<double>{x}, Method::laplace);
  double worst = 0.0, worst_sigma = 0.0;
  std::string detail;
  const double n = static_cast<double>(o.n);
  for (int kind = killing ? 0 : 1; kind < 2; ++kind) {
    for (std::size_t i = 0; i < nt; ++i) {
      double s1 = 0.0, s2 = 0.0;
      for (const auto& row : rows) {
        s1 += row[kind * nt + i];
        s2 += row[kind * nt + i] * row[kind * nt + i];
      }
      const double mean = s1 / n;
      const double se = std::sqrt(std::max(0.0, s2 / n - mean * mean) / (n - 1.0));
      const double dev = std::abs(mean - exact.values[i]);
      worst = std::max(worst, dev);
      worst_sigma = std::max(worst_sigma, se);
      if (!detail.empty()) detail += "; ";
      detail += std::string(kind == 0 ? "kill" : "exp") + " t=" + csv::format(t_grid[i]) +
                " mc=" + csv::format(mean) + " u=" + csv::format(exact.values[i]);
    }
  }
  return make_report("functional mu=" + csv::format(cfg.mu) + " c0=" + csv::format(cfg.c0), o.n,
                     worst, 4.0 * worst_sigma + 5e-3, o.seed, detail::seconds_since(t0), detail);
}

// ---------------------------------------------------------------------------
// Deterministic identities

namespace detail {

template <class F>
LawCheckReport timed_identity(std::string name, double tol, F&& compute) {
  const auto t0 = std::chrono::steady_clock::now();
  std::string detail;
  double err = compute(detail);
  return make_report(std::move(name), 0, err, tol, 0, seconds_since(t0), std::move(detail));
}

// Laplace transform of a series sampled on {0, step, ...}: trapezoid at
// step and 2 step, extrapolated in step^{3/2} (the series behaves like sqrt t
// at the origin).
inline double series_laplace(const std::vector<double>& v, double step, double lambda) {
  auto trap = [&](std::size_t stride) {
    const double h = step * static_cast<double>(stride);
    double acc = 0.0;
    for (std::size_t k = 0; k + stride < v.size(); k += stride) {
      const double ta = static_cast<double>(k) * step;
      const double tb = static_cast<double>(k + stride) * step;
      acc += 0.5 * h * (std::exp(-lambda * ta) * v[k] + std::exp(-lambda * tb) * v[k + stride]);
    }
    return acc;
  };
  const double r = std::pow(2.0, 1.5);
  return (r * trap(1) - trap(2)) / (r - 1.0);
}

}  // namespace detail

/// Closed-form and quadrature identities; every entry's distance is an
/// absolute error against its tolerance.
inline std::vector<LawCheckReport> check_identities() {
  std::vector<LawCheckReport> out;
  using detail::timed_identity;

  out.push_back(timed_identity("p0-representations", 1e-9, [](std::string& d) {
    double worst = 0.0;
    for (double c0 : {0.0, 0.5, 1.0, 3.0}) {
      for (auto [t, x, y] : {std::tuple{1.0, 0.5, 0.7}, std::tuple{0.3, 0.0, 1.2}, std::tuple{2.0, 1.5, 0.1}}) {
        worst = std::max(worst, std::abs(density_p0(t, x, y, c0) - density_p0_alt(t, x, y, c0)));
      }
    }
    d = "density_p0 vs density_p0_alt";
    return worst;
  }));

  out.push_back(timed_identity("robin-kernels", 1e-6, [](std::string& d) {
    const double r0 = kernel_robin_residual(1.0, 1.0, ElasticConfig(0.0, 1.0));
    const double r1 = kernel_robin_residual(1.0, 1.0, ElasticConfig(1.0, 1.0));
    d = "p0 residual=" + csv::format(r0) + " p residual=" + csv::format(r1);
    return std::max(std::abs(r0), std::abs(r1));
  }));

  out.push_back(timed_identity("potentials-lt1-lt2", 1e-6, [](std::string& d) {
    double worst = 0.0;
    const TemperedSymbol sym(0.25);
    for (double x : {0.0, 0.5}) {
      for (double lambda : {0.5, 2.0}) {
        worst = std::max(worst, std::abs(potential_lt1(sym, 1.0, x, lambda) -
                                         potential_lt1_closed(sym, 1.0, x, lambda)));
        worst = std::max(worst, std::abs(potential_lt2(sym, 1.0, x, lambda) -
                                         potential_lt2_closed(sym, 1.0, x, lambda)));
      }
    }
    d = "nested quadrature vs closed forms, eta=0.25 theta=1";
    return worst;
  }));

  out.push_back(timed_identity("levy-tail-transform", 1e-8, [](std::string& d) {
    double worst = 0.0;
    for (double eta : {0.0, 0.25, 1.0}) {
      const TemperedSymbol sym(eta);
      for (double lambda : {0.25, 1.0, 4.0}) {
        const double lhs =
            quad::half_line([&](double s) { return s > 0.0 ? std::exp(-lambda * s) * levy_tail(sym, s) : 0.0; },
                            0.0, 1e-12)
                .value;
        worst = std::max(worst, std::abs(lhs - sym(lambda) / lambda));
      }
    }
    d = "int e^{-lambda s} tail(s) ds vs phi(lambda)/lambda";
    return worst;
  }));

  out.push_back(timed_identity("inverse-density-at-zero", 1e-4, [](std::string& d) {
    double worst = 0.0;
    for (double eta : {0.0, 0.25}) {
      const TemperedSymbol sym(eta);
      for (double t : {0.5, 1.0, 2.0}) {
        worst = std::max(worst, std::abs(inverse_density(sym, t, 1e-9) - levy_tail(sym, t)));
      }
    }
    d = "l(t, 0+) vs tail(t)";
    return worst;
  }));

  out.push_back(timed_identity("tempered-caputo-transform", 1e-5, [](std::string& d) {
    const TemperedSymbol sym(0.25);
    const double step = 2e-3;
    const std::size_t n = 15'000;
    std::vector<double> psi(n + 1);
    for (std::size_t k = 0; k <= n; ++k) psi[k] = std::exp(-static_cast<double>(k) * step);
    const auto dpsi = tempered_caputo(psi, step, sym);
    const double lambda = 1.0;
    const double lhs = detail::series_laplace(dpsi.values, step, lambda);
    const double p = sym(lambda);
    const double rhs = p / (lambda + 1.0) - p / lambda;
    d = "psi=e^{-t} eta=0.25 lambda=1: " + csv::format(lhs) + " vs " + csv::format(rhs);
    return std::abs(lhs - rhs);
  }));

  out.push_back(timed_identity("mean-inverse-stable", 1e-4, [](std::string& d) {
    const double m = inverse_mean(TemperedSymbol(0.0), 1.0);
    d = "E[L_1]=" + csv::format(m) + " vs 2/sqrt(pi)";
    return std::abs(m - 2.0 / kSqrtPi);
  }));

  return out;
}

}  // namespace tempered
