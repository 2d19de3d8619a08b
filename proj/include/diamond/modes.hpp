#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>

#include "errors.hpp"
#include "numerics.hpp"
#include "quadrature.hpp"

namespace diamond {

class DiamondScale {
 public:
  explicit DiamondScale(double a = 1.0) : a_(a) {
    require(a > 0.0 && std::isfinite(a), "DiamondScale: a must be positive");
  }
  double a() const { return a_; }
  double lifetime() const { return 4.0 / a_; }
  double temperature() const { return a_ / (2.0 * std::numbers::pi); }

 private:
  double a_;
};

struct LightconePoint {
  double V;
  double U;
};

struct DiamondCoords {
  double eta;
  double xi;
  double zeta;
  double rho;
};

inline DiamondCoords diamond_coords_3p1(double t, double x, double y, double z,
                                        const DiamondScale& scale) {
  const double a = scale.a();
  const double r = std::sqrt(x * x + y * y + z * z);
  if (!(std::abs(t) + r < 2.0 / a)) throw OutsideDiamond("diamond_coords_3p1: point outside diamond");
  const double ht = a * t / 2.0, hr = a * r / 2.0;
  const double f = 1.0 - ht * ht + hr * hr - a * x;
  if (f == 0.0) throw OutsideDiamond("diamond_coords_3p1: f vanishes");
  const double d = 1.0 + ht * ht - hr * hr;
  DiamondCoords c;
  c.eta = std::atanh(a * t / d) / a;
  c.xi = std::log(std::sqrt(d * d - a * a * t * t) / f) / a;
  c.zeta = 2.0 * y / f;
  c.rho = 2.0 * z / f;
  return c;
}

inline double worldline_time(double eta, const DiamondScale& scale) {
  return 2.0 / scale.a() * std::tanh(scale.a() * eta / 2.0);
}

// Conformal lightcone coordinate V0 = a^-1 ln((1+aV/2)/(1-aV/2)), clamped at +-50/a.
inline double conformal_coordinate(double V, const DiamondScale& scale) {
  const double a = scale.a();
  const double u = a * V / 2.0;
  if (std::abs(u) >= 1.0) throw OutsideDiamond("conformal_coordinate: |V| >= 2/a");
  return std::clamp(2.0 * std::atanh(u) / a, -50.0 / a, 50.0 / a);
}

inline double lightcone_from_conformal(double x, const DiamondScale& scale) {
  return 2.0 / scale.a() * std::tanh(scale.a() * x / 2.0);
}

inline cplx diamond_mode_interior(double V, double omega, const DiamondScale& scale) {
  require(omega > 0.0, "diamond_mode_interior: omega must be positive");
  const double u = scale.a() * V / 2.0;
  if (std::abs(u) >= 1.0) return 0.0;
  const double phase = -omega * 2.0 * std::atanh(u) / scale.a();
  return std::polar(1.0 / std::sqrt(4.0 * std::numbers::pi * omega), phase);
}

inline cplx diamond_mode_exterior(double V, double omega, const DiamondScale& scale) {
  require(omega > 0.0, "diamond_mode_exterior: omega must be positive");
  const double u = scale.a() * V / 2.0;
  if (std::abs(u) <= 1.0) return 0.0;
  const double phase = omega * 2.0 * std::atanh(1.0 / u) / scale.a();
  return std::polar(1.0 / std::sqrt(4.0 * std::numbers::pi * omega), phase);
}

inline cplx minkowski_mode(double coord, double k) {
  require(k > 0.0, "minkowski_mode: k must be positive");
  return std::polar(1.0 / std::sqrt(4.0 * std::numbers::pi * k), -k * coord);
}

enum class Frame { Diamond, Minkowski };
enum class Direction { Left, Right };

// Gaussian wavepacket sqrt(q) exp(-(q-c)^2/4w^2), normalized on q > 0.
class WavepacketSpec {
 public:
  static WavepacketSpec diamond(double omega0, double delta, Direction dir = Direction::Left) {
    return WavepacketSpec(Frame::Diamond, dir, omega0, delta, 0.0);
  }
  static WavepacketSpec minkowski(double k0, double sigma, double center_pos,
                                  Direction dir = Direction::Left) {
    return WavepacketSpec(Frame::Minkowski, dir, k0, sigma, center_pos);
  }

  Frame frame() const { return frame_; }
  Direction direction() const { return direction_; }
  double center_freq() const { return center_; }
  double bandwidth() const { return width_; }
  double center_pos() const { return pos_; }
  double norm() const { return norm_; }

  WavepacketSpec with_center_pos(double pos) const {
    return WavepacketSpec(frame_, direction_, center_, width_, pos);
  }
  WavepacketSpec with_center_freq(double c) const {
    return WavepacketSpec(frame_, direction_, c, width_, pos_);
  }
  WavepacketSpec with_direction(Direction d) const {
    return WavepacketSpec(frame_, d, center_, width_, pos_);
  }

  cplx profile(double freq) const {
    require(freq >= 0.0, "profile: frequency must be non-negative");
    const double d = freq - center_;
    const double amp = norm_ * std::sqrt(freq) * std::exp(-d * d / (4.0 * width_ * width_));
    if (frame_ == Frame::Diamond) return amp;
    return std::polar(amp, -freq * pos_);
  }

  Interval window(double n_sigmas = 8.0) const {
    return truncate_semiinfinite(center_, width_, n_sigmas);
  }

 private:
  WavepacketSpec(Frame frame, Direction dir, double c, double w, double pos)
      : frame_(frame), direction_(dir), center_(c), width_(w), pos_(frame == Frame::Diamond ? 0.0 : pos) {
    require(c > 0.0 && std::isfinite(c), "WavepacketSpec: center frequency must be positive");
    require(w > 0.0 && std::isfinite(w), "WavepacketSpec: bandwidth must be positive");
    require(std::isfinite(pos), "WavepacketSpec: center position must be finite");
    // Exact value of the integral of q exp(-(q-c)^2/2w^2) over q > 0.
    const double mass = w * w * std::exp(-c * c / (2.0 * w * w)) +
                        c * w * std::sqrt(std::numbers::pi / 2.0) * std::erfc(-c / (std::sqrt(2.0) * w));
    norm_ = 1.0 / std::sqrt(mass);
  }

  Frame frame_;
  Direction direction_;
  double center_;
  double width_;
  double pos_;
  double norm_ = 1.0;
};

inline cplx profile(const WavepacketSpec& spec, double freq) { return spec.profile(freq); }

// Narrowband closed forms of the wavepacket mode functions.
inline cplx gaussian_diamond_waveform_conformal(double x, double omega0, double delta) {
  const double c = std::pow(delta * delta / (2.0 * std::numbers::pi * omega0 * omega0), 0.25);
  return c * std::exp(cplx(-x * x * delta * delta, -x * omega0));
}

inline cplx gaussian_diamond_waveform(double V, double omega0, double delta, const DiamondScale& scale) {
  return gaussian_diamond_waveform_conformal(conformal_coordinate(V, scale), omega0, delta);
}

inline cplx gaussian_minkowski_waveform(double V, double k0, double sigma, double V0) {
  const double d = V - V0;
  const double c = std::pow(sigma * sigma / (2.0 * std::numbers::pi * k0 * k0), 0.25);
  return c * std::exp(cplx(-d * d * sigma * sigma, -d * k0));
}

// A waveform on some chart parameter s together with its s-derivative.
struct Waveform {
  std::function<cplx(double)> value;
  std::function<cplx(double)> derivative;
};

inline Waveform conjugate(const Waveform& w) {
  Waveform out;
  out.value = [v = w.value](double s) { return std::conj(v(s)); };
  if (w.derivative) out.derivative = [d = w.derivative](double s) { return std::conj(d(s)); };
  return out;
}

inline Waveform minkowski_waveform(double k0, double sigma, double V0) {
  Waveform w;
  w.value = [=](double V) { return gaussian_minkowski_waveform(V, k0, sigma, V0); };
  w.derivative = [=](double V) {
    const double d = V - V0;
    return cplx(-2.0 * d * sigma * sigma, -k0) * gaussian_minkowski_waveform(V, k0, sigma, V0);
  };
  return w;
}

// Diamond waveform on the conformal chart x = V0(V).
inline Waveform diamond_waveform_conformal(double omega0, double delta) {
  Waveform w;
  w.value = [=](double x) { return gaussian_diamond_waveform_conformal(x, omega0, delta); };
  w.derivative = [=](double x) {
    return cplx(-2.0 * x * delta * delta, -omega0) * gaussian_diamond_waveform_conformal(x, omega0, delta);
  };
  return w;
}

inline Waveform diamond_waveform(double omega0, double delta, const DiamondScale& scale) {
  Waveform w;
  w.value = [=](double V) { return gaussian_diamond_waveform(V, omega0, delta, scale); };
  w.derivative = [=](double V) {
    const double x = conformal_coordinate(V, scale);
    const double u = scale.a() * V / 2.0;
    return cplx(-2.0 * x * delta * delta, -omega0) *
           gaussian_diamond_waveform_conformal(x, omega0, delta) / (1.0 - u * u);
  };
  return w;
}

// Pulls a waveform given on the lightcone chart V back to the conformal chart.
inline Waveform pull_back_to_conformal(const Waveform& w, const DiamondScale& scale) {
  const double a = scale.a();
  Waveform out;
  out.value = [v = w.value, scale](double x) { return v(lightcone_from_conformal(x, scale)); };
  if (w.derivative)
    out.derivative = [d = w.derivative, scale, a](double x) {
      const double c = std::cosh(a * x / 2.0);
      return d(lightcone_from_conformal(x, scale)) / (c * c);
    };
  return out;
}

struct KleinGordonOptions {
  double abs_tol = 1e-14;
  double rel_tol = 1e-10;
  double fd_step = 1e-5;
};

// <f, g> = i * integral (f* g' - g f*'), positive on positive-frequency modes.
inline cplx klein_gordon_inner(const Waveform& f, const Waveform& g, Interval domain,
                               const KleinGordonOptions& opt = {}) {
  auto deriv = [h = opt.fd_step](const Waveform& w, double s) {
    if (w.derivative) return w.derivative(s);
    return (w.value(s + h) - w.value(s - h)) / (2.0 * h);
  };
  auto integrand = [&](double s) {
    const cplx fs = std::conj(f.value(s));
    const cplx dfs = std::conj(deriv(f, s));
    return cplx(0.0, 1.0) * (fs * deriv(g, s) - g.value(s) * dfs);
  };
  return integrate_adaptive(integrand, domain, opt.abs_tol, opt.rel_tol).value;
}

}  // namespace diamond
