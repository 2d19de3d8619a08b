#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>

#include "errors.hpp"
#include "quadrature.hpp"

namespace diamond {

// log Gamma(z) for complex z, up to a multiple of 2*pi*i in the imaginary part.
inline cplx log_gamma(cplx z) {
  constexpr double pi = std::numbers::pi;
  if (z.real() < 0.5) {
    if (z.imag() == 0.0 && z.real() == std::floor(z.real()))
      throw InvalidParameter("log_gamma: pole");
    return std::log(pi) - std::log(std::sin(pi * z)) - log_gamma(1.0 - z);
  }
  cplx shift = 0.0;
  while (z.real() < 20.0) {
    shift += std::log(z);
    z += 1.0;
  }
  static constexpr double c[] = {1.0 / 12,        -1.0 / 360,          1.0 / 1260,
                                 -1.0 / 1680,     1.0 / 1188,          -691.0 / 360360,
                                 1.0 / 156,       -3617.0 / 122400};
  cplx inv = 1.0 / z, inv2 = inv * inv, s = 0.0, p = inv;
  for (double ck : c) {
    s += ck * p;
    p *= inv2;
  }
  return (z - 0.5) * std::log(z) - z + 0.5 * std::log(2.0 * pi) + s - shift;
}

inline constexpr double kSeriesRadius = 10.0;

namespace detail {

using lcplx = std::complex<long double>;

inline bool is_nonpositive_integer(cplx x) {
  return x.imag() == 0.0 && x.real() <= 0.0 && x.real() == std::floor(x.real());
}

struct SeriesResult {
  cplx value;
  double rel_error;
  bool converged;
};

// Direct Taylor series with Kahan-compensated long double summation.
inline SeriesResult kummer_series(cplx a, cplx b, cplx z, int budget = 10000) {
  const lcplx la(a), lb(b), lz(z);
  lcplx sum = 1.0L, comp = 0.0L, term = 1.0L;
  long double peak = 1.0L;
  int small = 0;
  for (int n = 0; n < budget; ++n) {
    term *= (la + (long double)n) / (lb + (long double)n) * lz / (long double)(n + 1);
    lcplx y = term - comp;
    lcplx t = sum + y;
    comp = (t - sum) - y;
    sum = t;
    long double at = std::abs(term);
    peak = std::max(peak, at);
    if (at == 0.0L) {
      small = 3;
    } else if (at <= 1e-22L * std::abs(sum) && (long double)n > std::abs(lz)) {
      ++small;
    } else {
      small = 0;
    }
    if (small >= 3) {
      long double mag = std::abs(sum);
      double rel = mag > 0 ? double(peak * std::numeric_limits<long double>::epsilon() * 4 / mag)
                           : std::numeric_limits<double>::infinity();
      return {cplx(sum), rel, true};
    }
  }
  return {cplx(sum), std::numeric_limits<double>::infinity(), false};
}

// Large-|z| expansion; empty when the truncated series is not accurate enough.
inline std::optional<cplx> kummer_asymptotic(cplx a, cplx b, cplx z, double target = 1e-14) {
  if (is_nonpositive_integer(a) || is_nonpositive_integer(b - a)) return std::nullopt;
  auto sum = [&](cplx p, cplx q, cplx w) -> std::optional<cplx> {
    cplx s = 1.0, t = 1.0;
    double last = 1.0;
    for (int n = 0; n < 400; ++n) {
      t *= (p + double(n)) * (q + double(n)) / (double(n + 1) * w);
      double at = std::abs(t);
      if (at > last && n > 2) return std::nullopt;
      s += t;
      last = at;
      if (at <= target * 0.01 * std::abs(s)) return s;
    }
    return std::nullopt;
  };
  auto s1 = sum(a, a - b + 1.0, -z);
  auto s2 = sum(b - a, 1.0 - a, z);
  if (!s1 || !s2) return std::nullopt;
  const cplx i(0.0, 1.0);
  const double pi = std::numbers::pi;
  cplx phase = z.imag() >= 0.0 ? std::exp(i * pi * a) : std::exp(-i * pi * a);
  cplx lz = std::log(z);
  cplx lgb = log_gamma(b);
  cplx t1 = phase * std::exp(lgb - log_gamma(b - a) - a * lz) * *s1;
  cplx t2 = std::exp(lgb - log_gamma(a) + z + (a - b) * lz) * *s2;
  cplx m = t1 + t2;
  if (!std::isfinite(m.real()) || !std::isfinite(m.imag())) return std::nullopt;
  return m;
}

// Euler integral representation, valid for Re b > Re a > 0, on the logistic chart
// t = 1/(1+e^{-x}).
inline cplx kummer_integral(cplx a, cplx b, cplx z) {
  const cplx ba = b - a;
  auto integrand = [&](double x) {
    double lt = -std::log1p(std::exp(-x));
    double l1 = -std::log1p(std::exp(x));
    double t = std::exp(lt);
    return std::exp(z * t + a * lt + ba * l1);
  };
  const double lo = -60.0 / a.real(), hi = 60.0 / ba.real();
  double peak = 0.0;
  for (int j = 0; j <= 64; ++j) peak = std::max(peak, std::abs(integrand(lo + (hi - lo) * j / 64.0)));
  QuadratureOptions opt;
  opt.rel_tol = 1e-12;
  opt.abs_tol = 1e-13 * peak;
  auto r = integrate_adaptive(integrand, Interval{lo, hi}, opt);
  return std::exp(log_gamma(b) - log_gamma(a) - log_gamma(ba)) * r.value;
}

// Continues (M, M') from z0 to z1 along a straight line with Taylor steps of
// z M'' + (b - z) M' - a M = 0. Steps stay within half the distance to z = 0 and
// within a few local oscillation lengths 1 / (1 + sqrt|a/z|).
inline std::pair<cplx, cplx> kummer_continue(cplx a, cplx b, cplx z0, cplx m0, cplx dm0, cplx z1,
                                             int budget = 400000) {
  const lcplx la(a), lb(b);
  lcplx z(z0), m(m0), dm(dm0);
  const lcplx target(z1);
  int used = 0;
  while (std::abs(target - z) > 0.0L) {
    lcplx h = target - z;
    const long double hmax =
        std::min(0.5L * std::abs(z), 2.0L / (1.0L + std::sqrt(std::abs(la) / std::abs(z))));
    if (std::abs(h) > hmax) h *= hmax / std::abs(h);
    lcplx d0 = m, d1 = dm * h;
    lcplx sm = d0 + d1, sdm = d1;
    const lcplx hz = h / z, hhz = h * hz, bz = lb - z;
    int quiet = 0;
    for (int n = 0;; ++n) {
      if (++used > budget) throw NonConvergence("kummer_m: continuation budget exhausted");
      const long double nn = n;
      lcplx d2 = ((nn + la) * hhz * d0 - (nn + 1) * (nn + bz) * hz * d1) / ((nn + 2) * (nn + 1));
      sm += d2;
      sdm += (nn + 2) * d2;
      const long double mag = std::abs(d2);
      quiet = mag <= 1e-21L * std::max(std::abs(sm), std::abs(sdm)) ? quiet + 1 : 0;
      if (quiet >= 3) break;
      d0 = d1;
      d1 = d2;
    }
    z += h;
    m = sm;
    dm = sdm / h;
  }
  return {cplx(m), cplx(dm)};
}

}  // namespace detail

// Confluent hypergeometric function M(a, b, z) = 1F1(a; b; z).
inline cplx kummer_m(cplx a, cplx b, cplx z) {
  if (detail::is_nonpositive_integer(b))
    throw InvalidParameter("kummer_m: b is a non-positive integer");
  if (!std::isfinite(std::abs(a)) || !std::isfinite(std::abs(b)) || !std::isfinite(std::abs(z)))
    throw InvalidParameter("kummer_m: non-finite argument");
  if (z == 0.0) return 1.0;
  const double az = std::abs(z);
  const bool flip = z.real() < 0.0;
  const cplx ea = flip ? b - a : a;
  const cplx ez = flip ? -z : z;
  auto finish = [&](cplx v) { return flip ? std::exp(z) * v : v; };

  if (az <= kSeriesRadius || detail::is_nonpositive_integer(ea)) {
    auto s = detail::kummer_series(ea, b, ez);
    if (!s.converged) throw NonConvergence("kummer_m: series budget exhausted");
    if (s.rel_error <= 1e-11 || detail::is_nonpositive_integer(ea)) return finish(s.value);
  }
  if (az >= 25.0) {
    if (auto w = detail::kummer_asymptotic(ea, b, ez)) return finish(*w);
  }
  for (double r0 : {kSeriesRadius, 7.0, 5.0, 3.5, 2.5, 1.5, 1.0, 0.5, 0.25, 0.1, 0.04, 0.01}) {
    if (r0 > az) continue;
    const cplx z0 = ez * (r0 / az);
    auto s0 = detail::kummer_series(ea, b, z0);
    auto s1 = detail::kummer_series(ea + 1.0, b + 1.0, z0);
    if (!s0.converged || !s1.converged || s0.rel_error > 1e-13 || s1.rel_error > 1e-13) continue;
    auto [m, dm] = detail::kummer_continue(ea, b, z0, s0.value, ea / b * s1.value, ez);
    return finish(m);
  }
  throw NonConvergence("kummer_m: accuracy target not reached");
}

// r = atanh(exp(-pi*Omega)).
inline double squeezing_parameter(double omega) {
  require(omega > 0.0, "squeezing_parameter: Omega must be positive");
  return std::atanh(std::exp(-std::numbers::pi * omega));
}

// sinh^2 r = 1/(e^{2 pi Omega} - 1), evaluated without cancellation.
inline double planck_occupation(double omega) {
  require(omega > 0.0, "planck_occupation: Omega must be positive");
  return 1.0 / std::expm1(2.0 * std::numbers::pi * omega);
}

}  // namespace diamond
