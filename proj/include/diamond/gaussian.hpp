#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "errors.hpp"

namespace diamond {

// Two-mode covariance matrix in the basis (X_A, P_A, X_B, P_B); vacuum = identity.
class CovarianceMatrix {
 public:
  CovarianceMatrix() : m_(Eigen::Matrix4d::Identity()) {}
  explicit CovarianceMatrix(const Eigen::Matrix4d& m) : m_(m) {
    require(m.allFinite(), "CovarianceMatrix: non-finite entries");
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    require((m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale, "CovarianceMatrix: not symmetric");
    m_ = 0.5 * (m + m.transpose());
  }
  const Eigen::Matrix4d& matrix() const { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }
  Eigen::Matrix2d block_a() const { return m_.block<2, 2>(0, 0); }
  Eigen::Matrix2d block_b() const { return m_.block<2, 2>(2, 2); }
  Eigen::Matrix2d block_c() const { return m_.block<2, 2>(0, 2); }

 private:
  Eigen::Matrix4d m_;
};

inline Eigen::Matrix4d symplectic_form() {
  Eigen::Matrix4d w = Eigen::Matrix4d::Zero();
  w(0, 1) = w(2, 3) = 1.0;
  w(1, 0) = w(3, 2) = -1.0;
  return w;
}

// Smallest eigenvalue of sigma + i Omega.
inline double physicality_margin(const CovarianceMatrix& s) {
  Eigen::Matrix4cd h = s.matrix().cast<std::complex<double>>();
  h += std::complex<double>(0.0, 1.0) * symplectic_form().cast<std::complex<double>>();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

inline bool is_physical(const CovarianceMatrix& s, double tol = 1e-9) {
  return physicality_margin(s) >= -tol;
}

inline CovarianceMatrix tmsv(double r) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity() * std::cosh(2.0 * r);
  m(0, 2) = m(2, 0) = std::sinh(2.0 * r);
  m(1, 3) = m(3, 1) = -std::sinh(2.0 * r);
  return CovarianceMatrix(m);
}

struct StandardForm {
  double n_a;
  double n_b;
  double c_plus;
  double c_minus;

  CovarianceMatrix matrix() const {
    Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
    m(0, 0) = m(1, 1) = n_a;
    m(2, 2) = m(3, 3) = n_b;
    m(0, 2) = m(2, 0) = c_plus;
    m(1, 3) = m(3, 1) = c_minus;
    return CovarianceMatrix(m);
  }
};

struct LocalInvariants {
  double det_a, det_b, det_c, det_s;
};

inline LocalInvariants local_invariants(const CovarianceMatrix& s) {
  return {s.block_a().determinant(), s.block_b().determinant(), s.block_c().determinant(),
          s.matrix().determinant()};
}

// Local-symplectic normal form; c_plus >= |c_minus| and sign(c_minus) = sign(det C).
// Each local block is mapped to n I by sqrt(n) A^{-1/2} (determinant one, hence
// symplectic), then local rotations diagonalize the correlation block.
inline StandardForm standard_form(const CovarianceMatrix& s) {
  auto normalize = [](const Eigen::Matrix2d& a, double& n) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(a);
    if (!(es.eigenvalues().minCoeff() > 0.0))
      throw NonPhysical("standard_form: local block is not positive definite", es.eigenvalues().minCoeff());
    n = std::sqrt(es.eigenvalues().prod());
    return Eigen::Matrix2d(std::sqrt(n) * es.operatorInverseSqrt());
  };
  double na = 0.0, nb = 0.0;
  const Eigen::Matrix2d sa = normalize(s.block_a(), na);
  const Eigen::Matrix2d sb = normalize(s.block_b(), nb);
  const Eigen::Matrix2d c = sa * s.block_c() * sb.transpose();
  Eigen::JacobiSVD<Eigen::Matrix2d> svd(c);
  const Eigen::Vector2d sv = svd.singularValues();
  const double sign = c.determinant() < 0.0 ? -1.0 : 1.0;
  return {na, nb, sv(0), sign * sv(1)};
}

inline double log_negativity(const CovarianceMatrix& s) {
  const LocalInvariants inv = local_invariants(s);
  const double delta = inv.det_a + inv.det_b - 2.0 * inv.det_c;
  const double nu2 = 0.5 * (delta - std::sqrt(std::max(delta * delta - 4.0 * inv.det_s, 0.0)));
  if (nu2 <= 0.0) return std::numeric_limits<double>::infinity();
  return std::max(0.0, -0.5 * std::log2(nu2));
}

inline double entropy_of_entanglement(double r) {
  require(r >= 0.0, "entropy_of_entanglement: r must be non-negative");
  const double s2 = std::pow(std::sinh(r), 2);
  if (s2 == 0.0) return 0.0;
  return (std::log1p(s2) + s2 * std::log1p(1.0 / s2)) / std::log(2.0);
}

inline double epr_variance_product(const CovarianceMatrix& s) {
  const StandardForm f = standard_form(s);
  const double vx = 0.5 * (f.n_a + f.n_b - 2.0 * f.c_plus);
  const double vp = 0.5 * (f.n_a + f.n_b + 2.0 * f.c_minus);
  return std::sqrt(std::max(vx * vp, 0.0));
}

struct EofOptions {
  int restarts = 20;
  unsigned seed = 20240611u;
  double psd_threshold = -1e-9;
  int max_iterations = 2000;
};

namespace detail {

inline double min_eig2(double p, double q, double s) {
  const double h = 0.5 * (p - s);
  return 0.5 * (p + s) - std::sqrt(h * h + q * q);
}

// Feasibility of sigma' - TMSV(r) for the locally squeezed standard form.
struct EofSlice {
  double xa, xb, xc, pa, pb, pc;

  double margin(double r) const {
    const double c = std::cosh(2.0 * r), s = std::sinh(2.0 * r);
    return std::min(min_eig2(xa - c, xc - s, xb - c), min_eig2(pa - c, pc + s, pb - c));
  }
};

inline EofSlice squeeze_slice(const StandardForm& f, double sa, double sb) {
  return {f.n_a * std::exp(-2.0 * sa), f.n_b * std::exp(-2.0 * sb), f.c_plus * std::exp(-sa - sb),
          f.n_a * std::exp(2.0 * sa),  f.n_b * std::exp(2.0 * sb),  f.c_minus * std::exp(sa + sb)};
}

// Minimal feasible squeezing, or a penalty above 1e3 when no r is feasible.
inline double minimal_squeezing(const EofSlice& sl, double threshold) {
  if (sl.margin(0.0) >= threshold) return 0.0;
  const double top = std::max({sl.xa, sl.xb, sl.pa, sl.pb, 1.0});
  double lo = 0.0, hi = 0.5 * std::log(2.0 * top) + 1.0;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = sl.margin(x1), f2 = sl.margin(x2);
  for (int i = 0; i < 200 && hi - lo > 1e-13; ++i) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = sl.margin(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = sl.margin(x1);
    }
  }
  const double peak_r = 0.5 * (lo + hi);
  const double peak = sl.margin(peak_r);
  if (peak < threshold) return 1e3 - peak;
  double a = 0.0, b = peak_r;
  for (int i = 0; i < 200 && b - a > 1e-14; ++i) {
    const double m = 0.5 * (a + b);
    (sl.margin(m) >= threshold ? b : a) = m;
  }
  return b;
}

template <class F>
std::pair<std::array<double, 2>, double> nelder_mead(F&& f, std::array<double, 2> x0, double step,
                                                     int max_iter) {
  std::array<std::array<double, 2>, 3> x{x0, x0, x0};
  x[1][0] += step;
  x[2][1] += step;
  std::array<double, 3> y{f(x[0]), f(x[1]), f(x[2])};
  for (int it = 0; it < max_iter; ++it) {
    std::array<int, 3> o{0, 1, 2};
    std::sort(o.begin(), o.end(), [&](int a, int b) { return y[a] < y[b]; });
    auto best = x[o[0]], mid = x[o[1]], worst = x[o[2]];
    double fb = y[o[0]], fm = y[o[1]], fw = y[o[2]];
    const double size = std::max(std::hypot(mid[0] - best[0], mid[1] - best[1]),
                                 std::hypot(worst[0] - best[0], worst[1] - best[1]));
    if (fw - fb <= 1e-13 && size <= 1e-9) break;
    std::array<double, 2> c{0.5 * (best[0] + mid[0]), 0.5 * (best[1] + mid[1])};
    auto along = [&](double t) {
      return std::array<double, 2>{c[0] + t * (worst[0] - c[0]), c[1] + t * (worst[1] - c[1])};
    };
    auto xr = along(-1.0);
    double fr = f(xr);
    if (fr < fb) {
      auto xe = along(-2.0);
      double fe = f(xe);
      if (fe < fr) {
        worst = xe;
        fw = fe;
      } else {
        worst = xr;
        fw = fr;
      }
    } else if (fr < fm) {
      worst = xr;
      fw = fr;
    } else {
      auto xc = fr < fw ? along(-0.5) : along(0.5);
      double fc = f(xc);
      if (fc < std::min(fr, fw)) {
        worst = xc;
        fw = fc;
      } else {
        for (auto* p : {&mid, &worst}) {
          (*p)[0] = best[0] + 0.5 * ((*p)[0] - best[0]);
          (*p)[1] = best[1] + 0.5 * ((*p)[1] - best[1]);
        }
        fm = f(mid);
        fw = f(worst);
      }
    }
    x = {best, mid, worst};
    y = {fb, fm, fw};
  }
  int ib = int(std::min_element(y.begin(), y.end()) - y.begin());
  return {x[ib], y[ib]};
}

}  // namespace detail

// Gaussian entanglement of formation, minimized over locally squeezed pure
// two-mode squeezed decompositions of the standard form.
inline double eof(const CovarianceMatrix& s, double tol = 1e-4, const EofOptions& opt = {}) {
  if (log_negativity(s) == 0.0) return 0.0;
  const StandardForm f = standard_form(s);
  auto objective = [&](const std::array<double, 2>& p) {
    return detail::minimal_squeezing(detail::squeeze_slice(f, p[0], p[1]), opt.psd_threshold);
  };
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> nd(0.0, 0.5);
  std::vector<double> found;
  for (int i = 0; i < opt.restarts; ++i) {
    std::array<double, 2> x0{0.0, 0.0};
    if (i > 0) x0 = {nd(rng), nd(rng)};
    auto [x, r] = detail::nelder_mead(objective, x0, 0.25, opt.max_iterations);
    if (r < 1e3) found.push_back(entropy_of_entanglement(r));
  }
  if (found.empty()) throw OptimizationFailed("eof: no feasible decomposition found");
  std::sort(found.begin(), found.end());
  if (found.size() < 2 || found[1] - found[0] > 10.0 * tol)
    throw OptimizationFailed("eof: restarts disagree on the minimum");
  return found[0];
}

}  // namespace diamond
