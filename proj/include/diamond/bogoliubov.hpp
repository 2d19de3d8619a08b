#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <mutex>
#include <numbers>
#include <shared_mutex>
#include <unordered_map>

#include "errors.hpp"
#include "modes.hpp"
#include "numerics.hpp"
#include "quadrature.hpp"

namespace diamond {

// e^{2i kappa} M(1 +- i Omega, 2, -4i kappa). The minus branch is real.
struct KummerPair {
  cplx plus;
  double minus;
};

inline KummerPair kummer_pair_uncached(double Omega, double kappa) {
  const cplx e = std::polar(1.0, 2.0 * kappa);
  const cplx z(0.0, -4.0 * kappa);
  return {e * kummer_m(cplx(1.0, Omega), 2.0, z), (e * kummer_m(cplx(1.0, -Omega), 2.0, z)).real()};
}

class KummerCache {
 public:
  KummerPair get(double Omega, double kappa) {
    const Key key{std::bit_cast<std::uint64_t>(Omega), std::bit_cast<std::uint64_t>(kappa)};
    {
      std::shared_lock lock(mutex_);
      auto it = map_.find(key);
      if (it != map_.end()) return it->second;
    }
    KummerPair v = kummer_pair_uncached(Omega, kappa);
    std::unique_lock lock(mutex_);
    if (map_.size() >= kCapacity) map_.clear();
    map_.emplace(key, v);
    return v;
  }

  static KummerCache& global() {
    static KummerCache cache;
    return cache;
  }

 private:
  struct Key {
    std::uint64_t w, k;
    bool operator==(const Key&) const = default;
  };
  struct Hash {
    std::size_t operator()(const Key& key) const {
      return std::hash<std::uint64_t>()(key.w * 0x9E3779B97F4A7C15ULL ^ key.k);
    }
  };
  static constexpr std::size_t kCapacity = 1u << 20;
  std::shared_mutex mutex_;
  std::unordered_map<Key, KummerPair, Hash> map_;
};

inline KummerPair kummer_pair(double Omega, double kappa) {
  return KummerCache::global().get(Omega, kappa);
}

inline void check_kernel_args(double omega, double k) {
  require(omega > 0.0, "kernel: omega must be positive");
  require(k > 0.0, "kernel: k must be positive");
}

inline cplx alpha0(double omega, double k, const DiamondScale& scale) {
  check_kernel_args(omega, k);
  const double a = scale.a(), W = omega / a, K = k / a;
  return 2.0 / a * std::sqrt(W * K) / std::sinh(std::numbers::pi * W) * kummer_pair(W, K).plus;
}

inline cplx beta0(double omega, double k, const DiamondScale& scale) {
  check_kernel_args(omega, k);
  const double a = scale.a(), W = omega / a, K = k / a;
  return -2.0 / a * std::sqrt(W * K) / std::sinh(std::numbers::pi * W) * kummer_pair(W, K).minus;
}

// sinh r and cosh r with r = atanh(e^{-pi Omega}).
inline std::pair<double, double> squeezing_sinh_cosh(double Omega) {
  const double q = std::exp(-std::numbers::pi * Omega);
  const double s = std::sqrt(-std::expm1(-2.0 * std::numbers::pi * Omega));
  return {q / s, 1.0 / s};
}

inline cplx unruh_a(double k, double omega, const DiamondScale& scale) {
  check_kernel_args(omega, k);
  const double a = scale.a(), W = omega / a, K = k / a;
  return 4.0 * std::sqrt(W * K) / a * squeezing_sinh_cosh(W).first * kummer_pair(W, K).plus;
}

inline cplx unruh_b(double k, double omega, const DiamondScale& scale) {
  check_kernel_args(omega, k);
  const double a = scale.a(), W = omega / a, K = k / a;
  return 4.0 * std::sqrt(W * K) / a * squeezing_sinh_cosh(W).second * kummer_pair(W, K).minus;
}

struct OverlapSet {
  cplx a_fg;
  cplx b_fg;
  double i_c;
  double i_s;
  cplx commutator;
};

struct OverlapOptions {
  double inner_rel_tol = 1e-7;
  double outer_rel_tol = 1e-6;
  double abs_tol = 1e-24;
  double n_sigmas = 10.0;
};

inline void require_diamond(const WavepacketSpec& g) {
  require(g.frame() == Frame::Diamond, "diamond-frame wavepacket required");
}

inline void require_minkowski(const WavepacketSpec& f) {
  require(f.frame() == Frame::Minkowski, "Minkowski-frame wavepacket required");
}

// I_c = int |g|^2 cosh^2 r, I_s = int |g|^2 sinh^2 r.
inline std::pair<double, double> thermal_integrals(const WavepacketSpec& g, const DiamondScale& scale,
                                                   const OverlapOptions& opt = {}) {
  require_diamond(g);
  auto integrand = [&](double w) {
    const double p = std::norm(g.profile(w));
    const double n = planck_occupation(w / scale.a());
    return std::array<cplx, 2>{p * (1.0 + n), p * n};
  };
  auto r = integrate_adaptive(integrand, g.window(opt.n_sigmas), opt.abs_tol, opt.outer_rel_tol);
  return {r.value[0].real(), r.value[1].real()};
}

// A_fg = int dw g* cosh r int dk f conj(A_kw),  B_fg = int dw g sinh r int dk f B_kw.
inline OverlapSet overlaps(const WavepacketSpec& f, const WavepacketSpec& g, const DiamondScale& scale,
                           const OverlapOptions& opt = {}) {
  require_minkowski(f);
  require_diamond(g);
  const double a = scale.a();
  const Interval kwin = f.window(opt.n_sigmas);
  auto outer = [&](double w) {
    const double W = w / a;
    auto inner = [&](double k) {
      const double K = k / a;
      const KummerPair m = kummer_pair(W, K);
      const double pref = 4.0 * std::sqrt(W * K) / a;
      const cplx fk = f.profile(k);
      return std::array<cplx, 2>{fk * pref * std::conj(m.plus), fk * pref * m.minus};
    };
    auto in = integrate_adaptive(inner, kwin, opt.abs_tol, opt.inner_rel_tol).value;
    const auto [sh, ch] = squeezing_sinh_cosh(W);
    const double gw = g.profile(w).real();
    return std::array<cplx, 2>{gw * ch * sh * in[0], gw * sh * ch * in[1]};
  };
  auto r = integrate_adaptive(outer, g.window(opt.n_sigmas), opt.abs_tol, opt.outer_rel_tol).value;
  const auto [ic, is] = thermal_integrals(g, scale, opt);
  return {r[0], r[1], ic, is, r[0]};
}

// [a_f1, a_f2^dagger] = int dk f1*(k) f2(k).
inline cplx detector_commutator(const WavepacketSpec& f1, const WavepacketSpec& f2) {
  require_minkowski(f1);
  require_minkowski(f2);
  require(f1.direction() == f2.direction(), "detector_commutator: detectors must share a direction");
  const Interval w1 = f1.window(), w2 = f2.window();
  const Interval w{std::min(w1.lo, w2.lo), std::max(w1.hi, w2.hi)};
  auto integrand = [&](double k) { return std::conj(f1.profile(k)) * f2.profile(k); };
  return integrate_adaptive(integrand, w, 1e-14, 1e-10).value;
}

}  // namespace diamond
