#pragma once

// Thin wrappers over Boost.Math adaptive quadrature. Every caller gets the
// error estimate back and a QuadratureError when the target is missed.

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "tempered/errors.hpp"

namespace tempered::quad {

struct Result {
  double value;
  double error;
};

namespace detail {

inline void check(const char* who, double value, double error, double l1, double tol) {
  if (!std::isfinite(value) || error > tol * std::max(1.0, l1)) {
    throw QuadratureError(std::string(who) + " missed tolerance " + tempered::detail::fmt_g(tol), value,
                          error);
  }
}

}  // namespace detail

/// Gauss-Kronrod (31 point) on [a, b]; b may be +inf.
template <class F>
Result gauss_kronrod(F&& f, double a, double b, double tol = 1e-10, unsigned max_depth = 20) {
  double error = 0.0;
  double l1 = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      f, a, b, max_depth, tol, &error, &l1);
  detail::check("gauss_kronrod", value, error, l1, tol * 10.0);
  return {value, error};
}

/// Double-exponential rule on [a, b]; tolerates integrable endpoint
/// singularities such as s^{-1/2}.
template <class F>
Result tanh_sinh(F&& f, double a, double b, double tol = 1e-10) {
  thread_local boost::math::quadrature::tanh_sinh<double> rule(15);
  double error = 0.0;
  double l1 = 0.0;
  const double value = rule.integrate(f, a, b, tol, &error, &l1);
  detail::check("tanh_sinh", value, error, l1, tol * 10.0);
  return {value, error};
}

/// Double-exponential rule on [a, +inf).
template <class F>
Result half_line(F&& f, double a = 0.0, double tol = 1e-10) {
  // Boost 1.74 only defines the non-const overload of integrate().
  thread_local boost::math::quadrature::exp_sinh<double> rule(12);
  double error = 0.0;
  double l1 = 0.0;
  const double value =
      rule.integrate([&](double s) { return f(a + s); }, tol, &error, &l1);
  detail::check("exp_sinh", value, error, l1, tol * 10.0);
  return {value, error};
}

}  // namespace tempered::quad
