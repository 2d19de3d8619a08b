#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "bogoliubov.hpp"
#include "errors.hpp"
#include "gaussian.hpp"
#include "modes.hpp"

namespace diamond {

struct MirrorUnitary {
  double theta = std::numbers::pi / 2;
  double phi = 0.0;

  MirrorUnitary() = default;
  MirrorUnitary(double theta_, double phi_) : theta(theta_), phi(phi_) {
    require(std::isfinite(theta) && std::abs(theta) <= std::numbers::pi,
            "MirrorUnitary: theta must lie in [-pi, pi]");
    require(std::isfinite(phi), "MirrorUnitary: phi must be finite");
  }
  double one_minus_cos() const { return 2.0 * std::pow(std::sin(theta / 2.0), 2); }
};

class DetectorChannel {
 public:
  explicit DetectorChannel(WavepacketSpec spec) : spec_(spec) { require_minkowski(spec_); }
  const WavepacketSpec& spec() const { return spec_; }
  Direction side() const { return spec_.direction(); }

 private:
  WavepacketSpec spec_;
};

// n_xy = <a_x^dagger a_y>, m_xy = <a_x a_y> for output channels A and B.
struct MomentSet {
  cplx n_aa = 0.0, n_bb = 0.0, n_ab = 0.0;
  cplx m_aa = 0.0, m_bb = 0.0, m_ab = 0.0;
};

enum class NumberPath { Exact, Fast, Auto };

inline constexpr double kFastPathThreshold = 30.0;

struct CircuitOptions {
  OverlapOptions overlap;
  KleinGordonOptions kg{1e-30, 1e-9, 1e-5};
  NumberPath path = NumberPath::Auto;
  double overlap_gate = 0.05;
};

// Position-space overlaps from the narrowband waveforms on the conformal chart.
// a_fg = <F, G>, b_fg = <F, G*>.
inline OverlapSet fast_overlaps(const WavepacketSpec& f, const WavepacketSpec& g, const DiamondScale& scale,
                                const CircuitOptions& opt = {}) {
  require_minkowski(f);
  require_diamond(g);
  const Waveform F = pull_back_to_conformal(
      minkowski_waveform(f.center_freq(), f.bandwidth(), f.center_pos()), scale);
  const Waveform G = diamond_waveform_conformal(g.center_freq(), g.bandwidth());
  const double L = 6.5 / g.bandwidth();
  const Interval dom{-L, L};
  const cplx c1 = klein_gordon_inner(F, G, dom, opt.kg);
  const cplx c2 = klein_gordon_inner(F, conjugate(G), dom, opt.kg);
  const auto [ic, is] = thermal_integrals(g, scale, opt.overlap);
  return {c1, c2, ic, is, c1};
}

inline NumberPath resolve_path(NumberPath p, const WavepacketSpec& f, const DiamondScale& scale) {
  if (p != NumberPath::Auto) return p;
  return f.center_freq() / scale.a() >= kFastPathThreshold ? NumberPath::Fast : NumberPath::Exact;
}

inline OverlapSet channel_overlaps(const WavepacketSpec& f, const WavepacketSpec& g, const DiamondScale& scale,
                                   const CircuitOptions& opt) {
  return resolve_path(opt.path, f, scale) == NumberPath::Fast ? fast_overlaps(f, g, scale, opt)
                                                             : overlaps(f, g, scale, opt.overlap);
}

inline double particle_number_from(const OverlapSet& o, const MirrorUnitary& u) {
  return 2.0 * u.one_minus_cos() * (std::norm(o.a_fg) * o.i_s + std::norm(o.b_fg) * o.i_c);
}

inline double particle_number(const DetectorChannel& det, const WavepacketSpec& g, const MirrorUnitary& u,
                              const DiamondScale& scale, const CircuitOptions& opt = {}) {
  if (u.one_minus_cos() == 0.0) return 0.0;
  return particle_number_from(overlaps(det.spec(), g, scale, opt.overlap), u);
}

inline double particle_number_fast(const DetectorChannel& det, const WavepacketSpec& g, const MirrorUnitary& u,
                                   const DiamondScale& scale, const CircuitOptions& opt = {}) {
  if (u.one_minus_cos() == 0.0) return 0.0;
  return particle_number_from(fast_overlaps(det.spec(), g, scale, opt), u);
}

inline void fill_same_channel(MomentSet& m, const OverlapSet& a, const OverlapSet& b, const MirrorUnitary& u) {
  const double k = u.one_minus_cos();
  m.n_aa = particle_number_from(a, u);
  m.n_bb = particle_number_from(b, u);
  m.m_aa = -2.0 * k * (1.0 + 2.0 * a.i_s) * a.a_fg * a.b_fg;
  m.m_bb = -2.0 * k * (1.0 + 2.0 * b.i_s) * b.a_fg * b.b_fg;
}

// Channel A left-moving, channel B right-moving.
inline MomentSet lr_moments(const OverlapSet& l, const OverlapSet& r, const MirrorUnitary& u) {
  MomentSet m;
  fill_same_channel(m, l, r, u);
  const cplx el = std::polar(1.0, u.phi);
  m.m_ab = cplx(0.0, -std::sin(u.theta)) * (std::conj(el) * r.a_fg * l.b_fg + el * l.a_fg * r.b_fg);
  return m;
}

// Two detectors on the same side.
inline MomentSet ll_moments(const OverlapSet& p, const OverlapSet& q, const MirrorUnitary& u) {
  MomentSet m;
  fill_same_channel(m, p, q, u);
  const double k = u.one_minus_cos();
  m.n_ab = 2.0 * k * (std::conj(p.a_fg) * q.a_fg * p.i_s + std::conj(p.b_fg) * q.b_fg * p.i_c);
  m.m_ab = -k * (1.0 + 2.0 * p.i_s) * (p.a_fg * q.b_fg + p.b_fg * q.a_fg);
  return m;
}

inline MomentSet output_moments_lr(const DetectorChannel& detL, const DetectorChannel& detR,
                                   const WavepacketSpec& g, const MirrorUnitary& u, const DiamondScale& scale,
                                   const CircuitOptions& opt = {}) {
  require(detL.side() == Direction::Left, "output_moments_lr: first detector must be left-moving");
  require(detR.side() == Direction::Right, "output_moments_lr: second detector must be right-moving");
  if (u.one_minus_cos() == 0.0) return {};
  return lr_moments(channel_overlaps(detL.spec(), g, scale, opt), channel_overlaps(detR.spec(), g, scale, opt),
                    u);
}

inline MomentSet output_moments_ll(const DetectorChannel& detPlus, const DetectorChannel& detMinus,
                                   const WavepacketSpec& g, const MirrorUnitary& u, const DiamondScale& scale,
                                   const CircuitOptions& opt = {}) {
  require(detPlus.side() == detMinus.side(), "output_moments_ll: detectors must share a side");
  const double overlap = std::abs(detector_commutator(detPlus.spec(), detMinus.spec()));
  if (!(overlap < opt.overlap_gate))
    throw DetectorOverlapTooLarge("output_moments_ll: detector commutator above gate", overlap);
  if (u.one_minus_cos() == 0.0) return {};
  return ll_moments(channel_overlaps(detPlus.spec(), g, scale, opt),
                    channel_overlaps(detMinus.spec(), g, scale, opt), u);
}

// Basis (X_A, P_A, X_B, P_B) with X = a + a^dagger, P = -i(a - a^dagger); vacuum = identity.
inline CovarianceMatrix covariance_from_moments(const MomentSet& m, double tol = 1e-6) {
  Eigen::Matrix4d s = Eigen::Matrix4d::Identity();
  auto local = [&](int o, cplx n, cplx mm) {
    s(o, o) += 2.0 * n.real() + 2.0 * mm.real();
    s(o + 1, o + 1) += 2.0 * n.real() - 2.0 * mm.real();
    s(o, o + 1) = s(o + 1, o) = 2.0 * mm.imag();
  };
  local(0, m.n_aa, m.m_aa);
  local(2, m.n_bb, m.m_bb);
  s(0, 2) = s(2, 0) = 2.0 * m.m_ab.real() + 2.0 * m.n_ab.real();
  s(0, 3) = s(3, 0) = 2.0 * m.m_ab.imag() + 2.0 * m.n_ab.imag();
  s(1, 2) = s(2, 1) = 2.0 * m.m_ab.imag() - 2.0 * m.n_ab.imag();
  s(1, 3) = s(3, 1) = -2.0 * m.m_ab.real() + 2.0 * m.n_ab.real();
  CovarianceMatrix cm(s);
  const double lo = physicality_margin(cm);
  if (lo < -tol) throw NonPhysical("covariance_from_moments: matrix violates the uncertainty relation", lo);
  return cm;
}

inline double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, "fit_loglog_slope: need matching samples");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = double(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    require(x[i] > 0.0 && y[i] > 0.0, "fit_loglog_slope: samples must be positive");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// Slope of log(k0 N) against log k0; number(k0) supplies the particle number.
template <class NumberFn>
double energy_decay_exponent(const std::vector<double>& k0_grid, NumberFn&& number) {
  require(k0_grid.size() >= 5, "energy_decay_exponent: need at least five grid points");
  require(std::is_sorted(k0_grid.begin(), k0_grid.end()), "energy_decay_exponent: grid must be sorted");
  std::vector<double> e;
  for (double k0 : k0_grid) e.push_back(k0 * number(k0));
  return fit_loglog_slope(k0_grid, e);
}

inline double energy_decay_exponent(const DetectorChannel& det_template, const WavepacketSpec& g,
                                    const MirrorUnitary& u, const DiamondScale& scale,
                                    const std::vector<double>& k0_grid, const CircuitOptions& opt = {}) {
  return energy_decay_exponent(k0_grid, [&](double k0) {
    DetectorChannel det(det_template.spec().with_center_freq(k0));
    return particle_number_from(channel_overlaps(det.spec(), g, scale, opt), u);
  });
}

}  // namespace diamond
