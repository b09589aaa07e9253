#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace tempered {

namespace detail {

inline std::string fmt_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace detail

/// Argument outside the documented domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Adaptive quadrature did not reach its tolerance.
class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double estimate, double error)
      : std::runtime_error(what + " (estimate=" + detail::fmt_g(estimate) +
                           ", error=" + detail::fmt_g(error) + ")"),
        estimate_(estimate),
        error_(error) {}

  double estimate() const noexcept { return estimate_; }
  double error() const noexcept { return error_; }

 private:
  double estimate_;
  double error_;
};

/// Talbot and Stehfest inversions disagree beyond tolerance.
class InversionUnstable : public std::runtime_error {
 public:
  InversionUnstable(double t, double talbot, double stehfest)
      : std::runtime_error("laplace inversion unstable at t=" + detail::fmt_g(t) +
                           ": talbot=" + detail::fmt_g(talbot) +
                           " stehfest=" + detail::fmt_g(stehfest)),
        talbot_(talbot),
        stehfest_(stehfest) {}

  double talbot() const noexcept { return talbot_; }
  double stehfest() const noexcept { return stehfest_; }

 private:
  double talbot_;
  double stehfest_;
};

/// A simulation needed more work than its configured cap.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tempered
