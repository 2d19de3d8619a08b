#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <type_traits>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace diamond {

using cplx = std::complex<double>;

struct Interval {
  double lo;
  double hi;
};

// Lower cutoff on every k- and omega-integral, in units of a.
inline constexpr double kLowerCutoff = 1e-8;

inline Interval truncate_semiinfinite(double center, double width, double n_sigmas = 8.0,
                                      double cutoff = kLowerCutoff) {
  require(width > 0.0, "truncate_semiinfinite: width must be positive");
  double lo = std::max(cutoff, center - n_sigmas * width);
  double hi = std::max(center + n_sigmas * width, 2.0 * cutoff);
  return {lo, hi};
}

template <class T>
struct QuadratureResult {
  T value{};
  double error_estimate = 0.0;
  std::size_t evaluations = 0;
};

struct QuadratureOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  int max_depth = 50;
  std::size_t max_intervals = 200000;
};

namespace detail {

template <class T>
struct components;

template <>
struct components<double> {
  static constexpr std::size_t size = 1;
  static cplx get(double v, std::size_t) { return v; }
  static double make(const std::array<cplx, 1>& c) { return c[0].real(); }
};

template <>
struct components<cplx> {
  static constexpr std::size_t size = 1;
  static cplx get(cplx v, std::size_t) { return v; }
  static cplx make(const std::array<cplx, 1>& c) { return c[0]; }
};

template <std::size_t N>
struct components<std::array<cplx, N>> {
  static constexpr std::size_t size = N;
  static cplx get(const std::array<cplx, N>& v, std::size_t i) { return v[i]; }
  static std::array<cplx, N> make(const std::array<cplx, N>& c) { return c; }
};

// Gauss-Kronrod 7/15 abscissae and weights.
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <std::size_t N>
struct Panel {
  double lo, hi;
  int depth;
  std::array<cplx, N> value;
  std::array<double, N> error;
  std::array<double, N> floor;
};

template <std::size_t N, class G>
Panel<N> gk15(G& g, double lo, double hi, int depth) {
  const double c = 0.5 * (lo + hi);
  const double h = 0.5 * (hi - lo);
  std::array<std::array<cplx, N>, 15> f;
  f[7] = g(c);
  for (int j = 0; j < 7; ++j) {
    f[j] = g(c - h * kXgk[j]);
    f[14 - j] = g(c + h * kXgk[j]);
  }
  Panel<N> p{lo, hi, depth, {}, {}, {}};
  for (std::size_t i = 0; i < N; ++i) {
    cplx rk = kWgk[7] * f[7][i];
    cplx rg = kWg[3] * f[7][i];
    double resabs = kWgk[7] * std::abs(f[7][i]);
    for (int j = 0; j < 7; ++j) {
      cplx s = f[j][i] + f[14 - j][i];
      rk += kWgk[j] * s;
      resabs += kWgk[j] * (std::abs(f[j][i]) + std::abs(f[14 - j][i]));
      if (j % 2 == 1) rg += kWg[j / 2] * s;
    }
    cplx mean = 0.5 * rk;
    double resasc = kWgk[7] * std::abs(f[7][i] - mean);
    for (int j = 0; j < 7; ++j)
      resasc += kWgk[j] * (std::abs(f[j][i] - mean) + std::abs(f[14 - j][i] - mean));
    resabs *= std::abs(h);
    resasc *= std::abs(h);
    double err = std::abs((rk - rg) * h);
    if (resasc != 0.0 && err != 0.0)
      err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    const double eps = std::numeric_limits<double>::epsilon();
    const double floor = 50.0 * eps * resabs;
    err = std::max(err, floor);
    p.value[i] = rk * h;
    p.error[i] = err;
    p.floor[i] = floor;
  }
  return p;
}

}  // namespace detail

// Globally adaptive Gauss-Kronrod quadrature. The integrand may return
// double, complex or std::array<complex, N>; every component must meet
// max(abs_tol, rel_tol*|I_i|). Error at the rounding floor of each panel does
// not count against the tolerance but is still reported.
template <class F>
auto integrate_adaptive(F&& f, Interval iv, const QuadratureOptions& opt = {}) {
  using R = std::decay_t<std::invoke_result_t<F&, double>>;
  using C = detail::components<R>;
  constexpr std::size_t N = C::size;
  using Vec = std::array<cplx, N>;

  require(iv.lo < iv.hi, "integrate_adaptive: empty interval");
  std::size_t evals = 0;
  auto g = [&](double x) {
    ++evals;
    R r = f(x);
    Vec v;
    for (std::size_t i = 0; i < N; ++i) {
      v[i] = C::get(r, i);
      if (!std::isfinite(v[i].real()) || !std::isfinite(v[i].imag()))
        throw InvalidParameter("integrate_adaptive: non-finite integrand");
    }
    return v;
  };

  std::vector<detail::Panel<N>> panels;
  panels.push_back(detail::gk15<N>(g, iv.lo, iv.hi, 0));

  auto totals = [&](Vec& val, std::array<double, N>& err, std::array<double, N>& flo) {
    std::vector<std::size_t> order(panels.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return panels[a].lo < panels[b].lo; });
    val.fill(0.0);
    err.fill(0.0);
    flo.fill(0.0);
    for (std::size_t k : order)
      for (std::size_t i = 0; i < N; ++i) {
        val[i] += panels[k].value[i];
        err[i] += panels[k].error[i];
        flo[i] += panels[k].floor[i];
      }
  };

  Vec val;
  std::array<double, N> err;
  std::array<double, N> flo;
  std::array<double, N> tol;
  auto update_tol = [&] {
    for (std::size_t i = 0; i < N; ++i)
      tol[i] = std::max(opt.abs_tol, opt.rel_tol * std::abs(val[i]));
  };
  auto converged = [&] {
    for (std::size_t i = 0; i < N; ++i)
      if (!(err[i] - flo[i] <= tol[i])) return false;
    return true;
  };
  auto badness = [&](const detail::Panel<N>& p) {
    double b = 0.0;
    for (std::size_t i = 0; i < N; ++i) b = std::max(b, (p.error[i] - p.floor[i]) / tol[i]);
    return b;
  };

  totals(val, err, flo);
  update_tol();
  const double min_width = (iv.hi - iv.lo) * std::ldexp(1.0, -opt.max_depth);
  std::size_t since_refresh = 0;
  while (!converged()) {
    std::size_t pick = panels.size();
    double worst = -1.0;
    for (std::size_t k = 0; k < panels.size(); ++k) {
      const auto& p = panels[k];
      if (p.depth >= opt.max_depth || (p.hi - p.lo) <= min_width) continue;
      double b = badness(p);
      if (b > worst) {
        worst = b;
        pick = k;
      }
    }
    if (pick == panels.size() || panels.size() >= opt.max_intervals) {
      double bound = 0.0;
      for (double e : err) bound = std::max(bound, e);
      throw ToleranceNotMet("integrate_adaptive: tolerance not met",
                            std::vector<cplx>(val.begin(), val.end()), bound);
    }
    auto p = panels[pick];
    double mid = 0.5 * (p.lo + p.hi);
    auto left = detail::gk15<N>(g, p.lo, mid, p.depth + 1);
    auto right = detail::gk15<N>(g, mid, p.hi, p.depth + 1);
    for (std::size_t i = 0; i < N; ++i) {
      val[i] += left.value[i] + right.value[i] - p.value[i];
      err[i] += left.error[i] + right.error[i] - p.error[i];
      flo[i] += left.floor[i] + right.floor[i] - p.floor[i];
    }
    panels[pick] = left;
    panels.push_back(right);
    if (++since_refresh == 64) {
      totals(val, err, flo);
      since_refresh = 0;
    }
    update_tol();
  }
  totals(val, err, flo);

  QuadratureResult<R> out;
  out.value = C::make(val);
  out.error_estimate = 0.0;
  for (double e : err) out.error_estimate = std::max(out.error_estimate, e);
  out.evaluations = evals;
  return out;
}

template <class F>
auto integrate_adaptive(F&& f, Interval iv, double abs_tol, double rel_tol) {
  QuadratureOptions opt;
  opt.abs_tol = abs_tol;
  opt.rel_tol = rel_tol;
  return integrate_adaptive(std::forward<F>(f), iv, opt);
}

}  // namespace diamond
