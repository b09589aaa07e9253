#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "tempered/fracbvp.hpp"
#include "tempered/quadrature.hpp"

using namespace tempered;

namespace {

// ---- oracles ---------------------------------------------------------------

// int_0^inf e^{-c w} g(t, w + s) dw in closed form.
double exp_mixture(double t, double s, double c) {
  return 0.5 * std::exp(-s * s / (4 * t)) * erfcx((s + 2 * c * t) / (2 * std::sqrt(t)));
}

double p0_closed(double t, double x, double y, double c0) {
  return gauss_kernel(t, x - y) + gauss_kernel(t, x + y) - 2 * c0 * exp_mixture(t, x + y, c0);
}

const std::vector<double> kT{0.25, 1.0, 4.0};
const std::vector<double> kX{0.0, 0.5, 2.0};

}  // namespace

TEST(Oracles, MixtureClosedForm) {
  const double q = quad::half_line([](double w) { return std::exp(-0.7 * w) * gauss_kernel(1.1, w + 0.3); }, 0.0, 1e-13).value;
  EXPECT_NEAR(exp_mixture(1.1, 0.3, 0.7), q, 1e-13);
}

// ---- kernels ---------------------------------------------------------------

TEST(Kernel, NeumannAtZeroElasticity) {
  for (double x : {0.0, 0.4, 1.5}) {
    EXPECT_NEAR(density_p0(1.0, x, 0.7, 0.0), gauss_kernel(1.0, x - 0.7) + gauss_kernel(1.0, x + 0.7), 1e-12);
  }
}

TEST(Kernel, RepresentationsAgree) {
  EXPECT_NEAR(density_p0(1.0, 0.5, 0.7, 1.0), density_p0_alt(1.0, 0.5, 0.7, 1.0), 1e-9);
  for (double c0 : {0.25, 1.0, 5.0}) {
    for (double t : {0.1, 1.0, 3.0}) {
      EXPECT_NEAR(density_p0(t, 0.3, 1.1, c0), p0_closed(t, 0.3, 1.1, c0), 1e-10);
      EXPECT_NEAR(density_p0_alt(t, 0.3, 1.1, c0), p0_closed(t, 0.3, 1.1, c0), 1e-10);
    }
  }
}

TEST(Kernel, RobinConditions) {
  EXPECT_LT(std::abs(kernel_robin_residual(1.0, 1.0, ElasticConfig(0.0, 1.0))), 1e-6);
  EXPECT_LT(std::abs(kernel_robin_residual(1.0, 1.0, ElasticConfig(1.0, 1.0))), 1e-6);
  EXPECT_LT(std::abs(kernel_robin_residual(0.5, 0.3, ElasticConfig(-1.0, 0.2))), 1e-6);
}

TEST(Kernel, DriftedReducesAtZeroDrift) {
  EXPECT_DOUBLE_EQ(density_p(1.0, 0.2, 0.9, ElasticConfig(0.0, 1.0)), density_p0(1.0, 0.2, 0.9, 1.0));
}

TEST(Kernel, ChapmanKolmogorov) {
  const ElasticConfig cfg(1.0, 1.0);
  const double lhs = quad::gauss_kronrod(
                         [&](double z) { return z > 0 ? density_p(0.5, 1.0, z, cfg) * density_p(0.5, z, 1.0, cfg) : 0.0; },
                         0.0, 40.0, 1e-10)
                         .value;
  EXPECT_NEAR(lhs, density_p(1.0, 1.0, 1.0, cfg), 1e-6);
}

TEST(Kernel, DomainChecks) {
  EXPECT_THROW(density_p0(0.0, 1, 1, 1), DomainError);
  EXPECT_THROW(density_p0(1.0, -1, 1, 1), DomainError);
  EXPECT_THROW(ElasticConfig(1.0, -0.5), DomainError);
}

// ---- config ----------------------------------------------------------------

TEST(Config, DerivedCoefficients) {
  const ElasticConfig a(1.0, 1.0);
  EXPECT_DOUBLE_EQ(a.c_plus(), 0.5);
  EXPECT_DOUBLE_EQ(a.c_minus(), 1.5);
  EXPECT_DOUBLE_EQ(a.c_eff(), 0.5);
  EXPECT_DOUBLE_EQ(a.eta(), 0.25);
  const ElasticConfig b(-1.0, 1.0);
  EXPECT_DOUBLE_EQ(b.c_eff(), 1.5);
  EXPECT_DOUBLE_EQ(b.c_plus(), 0.5);
  EXPECT_LT(ElasticConfig(1.0, 0.25).c_plus(), 0.0);
}

// ---- solution routes ---------------------------------------------------------

TEST(Solve, MittagLefflerBoundaryValue) {
  const ElasticConfig cfg(0.0, 1.0);
  const double ml = std::exp(1.0) * std::erfc(1.0);
  EXPECT_NEAR(solve_u_at(cfg, 1.0, 0.0, Method::laplace).value, ml, 1e-6);
  EXPECT_NEAR(solve_u_at(cfg, 1.0, 0.0, Method::quadrature).value, ml, 1e-8);
  for (double t : {0.3, 2.0, 7.0}) {
    EXPECT_NEAR(solve_u_at(cfg, t, 0.0, Method::laplace).value, mittag_leffler_half(-std::sqrt(t)).value, 1e-6);
  }
}

TEST(Solve, ConservationWhenCoefficientVanishes) {
  const ElasticConfig cfg(1.0, 0.5);
  for (auto m : {Method::laplace, Method::quadrature}) {
    const auto f = solve_u(cfg, kT, kX, m);
    for (double v : f.values) EXPECT_NEAR(v, 1.0, 1e-6);
  }
  Budget b;
  b.n = 2000;
  const auto mc = solve_u(cfg, kT, kX, Method::mc, b);
  for (double v : mc.values) EXPECT_EQ(v, 1.0);
}

TEST(Solve, LongTimeLimit) {
  const ElasticConfig cfg(1.0, 1.0);
  EXPECT_NEAR(solve_u_at(cfg, 100.0, 0.0, Method::laplace).value, 2.0 / 3.0, 0.01);
  EXPECT_NEAR(solve_u_at(cfg, 100.0, 0.0, Method::quadrature).value, 2.0 / 3.0, 0.01);
}

TEST(Solve, QuadratureMatchesLaplaceOnGrid) {
  for (double mu : {1.0, -1.0, 0.0}) {
    for (double c0 : {1.0, 0.25}) {
      const ElasticConfig cfg(mu, c0);
      const auto l = solve_u(cfg, kT, kX, Method::laplace);
      const auto q = solve_u(cfg, kT, kX, Method::quadrature);
      for (std::size_t i = 0; i < l.values.size(); ++i) {
        EXPECT_NEAR(q.values[i], l.values[i], 1e-4) << "mu=" << mu << " c0=" << c0 << " i=" << i;
        EXPECT_LT(l.errors[i], 1e-4);
      }
    }
  }
}

TEST(Solve, MonteCarloMatchesLaplace) {
  for (double mu : {1.0, -1.0, 0.0}) {
    for (auto source : {McSource::inverse, McSource::maximum}) {
      const ElasticConfig cfg(mu, 1.0);
      Budget b;
      b.n = 10'000;
      b.source = source;
      b.dt = 1e-2;  // the bridge-corrected maximum is exact in law at any dt
      b.seed = 77;
      const auto l = solve_u(cfg, kT, kX, Method::laplace);
      const auto m = solve_u(cfg, kT, kX, Method::mc, b);
      for (std::size_t i = 0; i < l.values.size(); ++i) {
        EXPECT_LE(std::abs(m.values[i] - l.values[i]), 3.5 * m.errors[i] + 1e-3)
            << "mu=" << mu << " source=" << static_cast<int>(source) << " i=" << i;
      }
    }
  }
}

TEST(Solve, MonteCarloIndependentOfThreadCount) {
  const ElasticConfig cfg(1.0, 1.0);
  Budget b;
  b.n = 3000;
  b.threads = 1;
  const auto one = solve_u(cfg, kT, kX, Method::mc, b);
  b.threads = 3;
  const auto three = solve_u(cfg, kT, kX, Method::mc, b);
  EXPECT_EQ(one.values, three.values);
}

TEST(Solve, InitialValueAndSubMarkov) {
  const ElasticConfig cfg(1.0, 1.0);
  const std::vector<double> t{0.0, 0.5, 3.0};
  const auto f = solve_u(cfg, t, kX, Method::laplace);
  for (std::size_t j = 0; j < kX.size(); ++j) EXPECT_EQ(f.at(0, j), 1.0);
  for (double v : f.values) {
    EXPECT_GE(v, -1e-9);
    EXPECT_LE(v, 1.0 + 1e-9);
  }
}

TEST(Solve, NegativeCoefficientExceedsOne) {
  const ElasticConfig cfg(1.0, 0.0);
  ASSERT_LT(cfg.c_eff(), 0.0);
  for (double t : {0.1, 1.0, 5.0}) {
    EXPECT_GT(solve_u_at(cfg, t, 0.0, Method::laplace).value, 1.0);
    EXPECT_GT(solve_u_at(cfg, t, 0.0, Method::quadrature).value, 1.0);
  }
}

TEST(Solve, BoundaryTraceMonotone) {
  const ElasticConfig cfg(1.0, 1.0);
  double prev = 1.0 + 1e-12;
  for (double t = 0.05; t < 20.0; t *= 1.3) {
    const double v = solve_u_at(cfg, t, 0.0, Method::laplace).value;
    EXPECT_LT(v, prev);
    prev = v;
  }
}

TEST(Solve, ProbabilityFormGated) {
  const ElasticConfig good(1.0, 1.0);
  EXPECT_NEAR(solve_u_probability(good, 1.0, 0.5), solve_u_at(good, 1.0, 0.5, Method::quadrature).value, 1e-9);
  EXPECT_THROW(solve_u_probability(ElasticConfig(1.0, 0.25), 1.0, 0.0), DomainError);
  EXPECT_THROW(solve_u_probability(ElasticConfig(1.0, 0.5), 1.0, 0.0), DomainError);
}

TEST(Solve, DirichletLimit) {
  for (double mu : {1.0, -1.0}) {
    const ElasticConfig big(mu, 1e3);
    const ElasticConfig inf(mu, std::numeric_limits<double>::infinity());
    for (double t : kT) {
      for (double x : {0.5, 2.0}) {
        const double target = dirichlet_limit(big, t, x);
        EXPECT_NEAR(solve_u_at(big, t, x, Method::laplace).value, target, 2e-3);
        EXPECT_NEAR(solve_u_at(inf, t, x, Method::laplace).value, target, 1e-6);
        EXPECT_NEAR(solve_u_at(inf, t, x, Method::quadrature).value, target, 1e-12);
      }
    }
    const double tg[1] = {1.0}, xg[1] = {0.5};
    EXPECT_TRUE(solve_u(inf, tg, xg, Method::laplace).dirichlet_limit);
    EXPECT_FALSE(solve_u(big, tg, xg, Method::laplace).dirichlet_limit);
  }
}

TEST(Solve, GridValidation) {
  const ElasticConfig cfg(1.0, 1.0);
  const std::vector<double> bad_t{1.0, 0.5}, bad_x{-1.0}, empty;
  EXPECT_THROW(solve_u(cfg, bad_t, kX, Method::laplace), DomainError);
  EXPECT_THROW(solve_u(cfg, kT, bad_x, Method::laplace), DomainError);
  EXPECT_THROW(solve_u(cfg, empty, kX, Method::laplace), DomainError);
}

// ---- transform ----------------------------------------------------------------

TEST(Transform, BoundaryValues) {
  const double lambda = 0.8;
  const double mu = 1.0, c0 = 1.0, eta = 0.25;
  const double r = std::sqrt(lambda + eta);
  EXPECT_NEAR(solve_u_laplace_domain(ElasticConfig(mu, c0), lambda, 0.0),
              (r + std::sqrt(eta)) / (lambda * (c0 + r)), 1e-15);
  const double p = r - std::sqrt(eta);
  EXPECT_NEAR(solve_u_laplace_domain(ElasticConfig(-mu, c0), lambda, 0.0),
              (p / lambda) / (c0 + mu / 2 + p), 1e-15);
  EXPECT_THROW(solve_u_laplace_domain(ElasticConfig(mu, c0), 0.0, 0.0), DomainError);
}

TEST(Transform, QuadratureConsistency) {
  const ElasticConfig cfg(1.0, 1.0);
  const double lt = quad::half_line(
                        [&](double t) {
                          return t > 0 ? std::exp(-t) * solve_u_at(cfg, t, 0.5, Method::quadrature).value : 0.0;
                        },
                        0.0, 1e-8)
                        .value;
  EXPECT_NEAR(lt, solve_u_laplace_domain(cfg, 1.0, 0.5), 1e-5);
}

TEST(Transform, DirectOde) {
  for (double mu : {1.0, -1.0, 0.0}) {
    for (double x : {0.0, 0.5, 2.0}) {
      EXPECT_LT(std::abs(direct_ode_residual(ElasticConfig(mu, 1.0), 0.7, x)), 1e-5);
    }
  }
}

// ---- relaxation -----------------------------------------------------------------

TEST(Relaxation, Branches) {
  const std::vector<double> ts{0.1, 0.5, 1.0, 3.0, 10.0};
  for (double eta : {0.0, 0.25}) {
    const TemperedSymbol sym(eta);
    for (auto [a, b] : {std::pair{1.0, 2.0}, {2.0, 1.0}, {1.0, 1.0}, {1.0, 0.5}}) {
      for (double t : ts) {
        const double r1 = relaxation(a, b, 1, sym, t).value;
        const double r0 = relaxation(a, b, 0, sym, t).value;
        if (b > a) EXPECT_GT(r1, 1.0);
        if (b < a) EXPECT_LT(r1, 1.0);
        if (b == a) EXPECT_NEAR(r1, 1.0, 1e-14);
        if (b <= a) EXPECT_LE(r0, 1.0);
      }
    }
  }
}

TEST(Relaxation, MonotoneTowardsRatio) {
  const TemperedSymbol sym(0.25);
  for (int c : {0, 1}) {
    double prev = c;
    const double target = 2.0;
    for (double t = 0.1; t < 200.0; t *= 1.5) {
      const double r = relaxation(0.5, 1.0, c, sym, t).value;
      EXPECT_GE(r, prev - 1e-12);
      prev = r;
    }
    EXPECT_NEAR(prev, target, 0.02);
  }
}

TEST(Relaxation, MittagLefflerCase) {
  for (double t : {0.5, 1.0, 4.0}) {
    EXPECT_NEAR(relaxation(1.0, 0.0, 1, TemperedSymbol(0.0), t).value,
                mittag_leffler_half(-std::sqrt(t)).value, 1e-9);
  }
}

TEST(Relaxation, BoundaryTraceIsRelaxation) {
  // u(t, 0) for drift +mu solves D u + (c0 + mu/2) u = mu, u(0) = 1.
  const ElasticConfig cfg(1.0, 1.0);
  for (double t : {0.5, 2.0}) {
    EXPECT_NEAR(relaxation(cfg.c_minus(), 1.0, 1, cfg.symbol(), t).value,
                solve_u_at(cfg, t, 0.0, Method::laplace).value, 1e-8);
  }
}

TEST(Relaxation, LimitBranchIsFlagged) {
  const auto r = relaxation(0.0, 2.0, 1, TemperedSymbol(0.0), 1.0);
  EXPECT_TRUE(r.limit_branch);
  EXPECT_NEAR(r.value, 1.0 + 2.0 * 2.0 / kSqrtPi, 1e-9);
  EXPECT_FALSE(relaxation(1.0, 2.0, 1, TemperedSymbol(0.0), 1.0).limit_branch);
  EXPECT_THROW(relaxation(1.0, 1.0, 2, TemperedSymbol(0.0), 1.0), DomainError);
}

TEST(Relaxation, CrossingTime) {
  for (double eta : {0.0, 0.25}) {
    const TemperedSymbol sym(eta);
    const double tb = relaxation_crossing_time(0.1, 1.0, sym);
    EXPECT_NEAR(relaxation(0.1, 1.0, 0, sym, tb).value, 1.0, 1e-8);
    EXPECT_LT(relaxation(0.1, 1.0, 0, sym, 0.9 * tb).value, 1.0);
  }
  EXPECT_THROW(relaxation_crossing_time(1.0, 0.5, TemperedSymbol(0.0)), DomainError);
}

// ---- tempered Caputo -----------------------------------------------------------

TEST(Caputo, AnnihilatesConstants) {
  const std::vector<double> psi(200, 3.5);
  for (double v : tempered_caputo(psi, 0.01, TemperedSymbol(0.25)).values) EXPECT_NEAR(v, 0.0, 1e-14);
}

TEST(Caputo, LinearAtZeroTempering) {
  std::vector<double> psi(1001);
  for (int k = 0; k <= 1000; ++k) psi[k] = k * 1e-3;
  const auto d = tempered_caputo(psi, 1e-3, TemperedSymbol(0.0));
  EXPECT_NEAR(d.values[1000], 2.0 / kSqrtPi, 1e-4);
  EXPECT_NEAR(d.values[250], 2.0 * std::sqrt(0.25 / std::numbers::pi), 1e-10);
}

TEST(Caputo, ExponentialAgainstQuadrature) {
  const TemperedSymbol sym(0.25);
  const double step = 1e-3;
  std::vector<double> psi(2001);
  for (std::size_t k = 0; k < psi.size(); ++k) psi[k] = std::exp(-static_cast<double>(k) * step);
  const auto d = tempered_caputo(psi, step, sym);
  for (double t : {0.5, 2.0}) {
    const double ref = quad::tanh_sinh([&](double s) { return -std::exp(-s) * levy_tail(sym, t - s); }, 0.0, t, 1e-12).value;
    EXPECT_NEAR(d.values[static_cast<std::size_t>(std::llround(t / step))], ref, 1e-6);
  }
}

TEST(Caputo, SecondOrderConvergence) {
  const TemperedSymbol sym(0.25);
  auto err = [&](double step) {
    const std::size_t n = static_cast<std::size_t>(std::llround(1.0 / step));
    std::vector<double> psi(n + 1);
    for (std::size_t k = 0; k <= n; ++k) psi[k] = std::sin(2.0 * k * step);
    const double ref = quad::tanh_sinh([&](double s) { return 2 * std::cos(2 * s) * levy_tail(sym, 1.0 - s); }, 0.0, 1.0, 1e-10).value;
    return std::abs(tempered_caputo(psi, step, sym).values[n] - ref);
  };
  const double e1 = err(1e-2), e2 = err(5e-3);
  EXPECT_GT(e1 / e2, 3.0);
}

TEST(Caputo, Validation) {
  const std::vector<double> two{1.0, 2.0};
  EXPECT_THROW(tempered_caputo(two, 0.1, TemperedSymbol(0.0)), DomainError);
  const std::vector<double> psi(10, 1.0);
  EXPECT_TRUE(tempered_caputo(psi, 1.0, TemperedSymbol(1.0)).coarse_grid);
  EXPECT_FALSE(tempered_caputo(psi, 1e-3, TemperedSymbol(1.0)).coarse_grid);
}

// ---- boundary residuals ---------------------------------------------------------

TEST(Boundary, ReflectionCaseIsExact) {
  const ElasticConfig cfg(1.0, 0.5);
  BoundaryTrace tr;
  tr.step = 0.01;
  tr.u0.assign(500, 1.0);
  for (double r : boundary_residual(cfg, tr, BoundaryKind::frac_pos)) EXPECT_EQ(r, 0.0);
}

TEST(Boundary, FractionalResiduals) {
  const double step = 2e-3;
  const std::size_t n = 5000;
  {
    const ElasticConfig cfg(1.0, 1.0);
    const auto tr = boundary_trace(cfg, step, n, true);
    EXPECT_LT(sup_norm(boundary_residual(cfg, tr, BoundaryKind::frac_pos), step, 0.1, 10.0), 1e-3);
    EXPECT_LT(sup_norm(boundary_residual(cfg, tr, BoundaryKind::robin), step, 0.1, 10.0), 1e-3);
  }
  {
    const ElasticConfig cfg(-1.0, 1.0);
    const auto tr = boundary_trace(cfg, step, n, true);
    EXPECT_LT(sup_norm(boundary_residual(cfg, tr, BoundaryKind::frac_neg), step, 0.1, 10.0), 1e-3);
    EXPECT_LT(sup_norm(boundary_residual(cfg, tr, BoundaryKind::robin), step, 0.1, 10.0), 1e-6);
  }
  {
    // plain Caputo on the Mittag-Leffler trace
    const ElasticConfig cfg(0.0, 1.0);
    BoundaryTrace tr;
    tr.step = step;
    for (std::size_t k = 0; k <= n; ++k) tr.u0.push_back(mittag_leffler_half(-std::sqrt(k * step)).value);
    EXPECT_LT(sup_norm(boundary_residual(cfg, tr, BoundaryKind::frac_zero), step, 0.1, 10.0), 1e-3);
  }
}

TEST(Boundary, RobinNeedsDerivative) {
  const ElasticConfig cfg(1.0, 1.0);
  const auto tr = boundary_trace(cfg, 0.1, 10, false);
  EXPECT_THROW(boundary_residual(cfg, tr, BoundaryKind::robin), DomainError);
}
