#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>
#include <cmath>
#include <random>

#include <diamond/gaussian.hpp>

using namespace diamond;

namespace {

Eigen::Matrix4d random_symplectic(std::mt19937_64& rng, double spread) {
  std::normal_distribution<double> nd(0.0, spread);
  Eigen::Matrix4d h;
  for (int i = 0; i < 4; ++i)
    for (int j = i; j < 4; ++j) h(i, j) = h(j, i) = nd(rng);
  return (symplectic_form() * h).exp();
}

Eigen::Matrix4d local_symplectic(std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 0.6);
  Eigen::Matrix4d h = Eigen::Matrix4d::Zero();
  for (int o : {0, 2}) {
    h(o, o) = nd(rng);
    h(o + 1, o + 1) = nd(rng);
    h(o, o + 1) = h(o + 1, o) = nd(rng);
  }
  return (symplectic_form() * h).exp();
}

CovarianceMatrix random_state(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> thermal(1.0, 2.0);
  Eigen::Matrix4d d = Eigen::Matrix4d::Zero();
  d(0, 0) = d(1, 1) = thermal(rng);
  d(2, 2) = d(3, 3) = thermal(rng);
  const Eigen::Matrix4d s = random_symplectic(rng, 0.5);
  Eigen::Matrix4d m = s * d * s.transpose();
  return CovarianceMatrix(0.5 * (m + m.transpose()));
}

// Smallest symplectic eigenvalue of the partial transpose, from the spectrum of i Omega sigma~.
double partial_transpose_nu(const CovarianceMatrix& s) {
  Eigen::Matrix4d p = Eigen::Matrix4d::Identity();
  p(3, 3) = -1.0;
  const Eigen::Matrix4d t = p * s.matrix() * p;
  Eigen::EigenSolver<Eigen::Matrix4d> es(symplectic_form() * t);
  double lo = 1e300;
  for (int i = 0; i < 4; ++i) lo = std::min(lo, std::abs(es.eigenvalues()[i].imag()));
  return lo;
}

// Closed-form EoF of a symmetric two-mode Gaussian state.
double symmetric_eof(const CovarianceMatrix& s) {
  const double nu = partial_transpose_nu(s);
  if (nu >= 1.0) return 0.0;
  const double cp = std::pow(1.0 / std::sqrt(nu) + std::sqrt(nu), 2) / 4.0;
  const double cm = std::pow(1.0 / std::sqrt(nu) - std::sqrt(nu), 2) / 4.0;
  return (cp * std::log(cp) - cm * std::log(cm)) / std::log(2.0);
}

}  // namespace

TEST(Covariance, Construction) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m(0, 1) = 0.3;
  EXPECT_THROW(CovarianceMatrix{m}, InvalidParameter);
  m(0, 1) = NAN;
  EXPECT_THROW(CovarianceMatrix{m}, InvalidParameter);
  CovarianceMatrix v;
  EXPECT_TRUE(v.matrix().isIdentity());
  EXPECT_NEAR(physicality_margin(v), 0.0, 1e-14);
  EXPECT_TRUE(is_physical(v));
  EXPECT_FALSE(is_physical(CovarianceMatrix(0.5 * Eigen::Matrix4d::Identity())));
  EXPECT_NEAR(physicality_margin(tmsv(1.3)), 0.0, 1e-12);
}

TEST(Covariance, StandardFormPreservesInvariants) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 30; ++i) {
    const CovarianceMatrix s = random_state(rng);
    const StandardForm f = standard_form(s);
    EXPECT_GE(f.c_plus, std::abs(f.c_minus) - 1e-12);
    const LocalInvariants a = local_invariants(s), b = local_invariants(f.matrix());
    EXPECT_NEAR(a.det_a, b.det_a, 1e-9 * a.det_a);
    EXPECT_NEAR(a.det_b, b.det_b, 1e-9 * a.det_b);
    EXPECT_NEAR(a.det_c, b.det_c, 1e-8 * std::max(1.0, std::abs(a.det_c)));
    EXPECT_NEAR(a.det_s, b.det_s, 1e-8 * a.det_s);
  }
}

TEST(LogNegativity, MatchesPartialTransposeSpectrum) {
  EXPECT_NEAR(log_negativity(tmsv(0.5)), 1.0 / std::log(2.0), 1e-12);
  EXPECT_EQ(log_negativity(CovarianceMatrix()), 0.0);
  std::mt19937_64 rng(5);
  for (int i = 0; i < 50; ++i) {
    const CovarianceMatrix s = random_state(rng);
    EXPECT_NEAR(log_negativity(s), std::max(0.0, -std::log2(partial_transpose_nu(s))), 1e-8);
  }
}

TEST(Entropy, Values) {
  // 50-digit reference values.
  EXPECT_NEAR(entropy_of_entanglement(0.1), 0.08115956484050520542305976, 1e-15);
  EXPECT_NEAR(entropy_of_entanglement(0.5), 0.951389513891278625687998, 1e-14);
  EXPECT_NEAR(entropy_of_entanglement(1.0), 2.33690930054589685121098, 1e-14);
  EXPECT_NEAR(entropy_of_entanglement(2.0), 5.213636533280359938597164, 1e-13);
  EXPECT_NEAR(entropy_of_entanglement(5.0), 13.86964545076980285103095, 1e-12);
  EXPECT_EQ(entropy_of_entanglement(0.0), 0.0);
  EXPECT_GT(entropy_of_entanglement(1e-9), 0.0);
  EXPECT_THROW(entropy_of_entanglement(-0.1), InvalidParameter);
}

TEST(Epr, TwoModeSqueezedVacuum) {
  for (double r : {0.0, 0.3, 1.0}) EXPECT_NEAR(epr_variance_product(tmsv(r)), std::exp(-2.0 * r), 1e-12);
  EXPECT_NEAR(epr_variance_product(CovarianceMatrix()), 1.0, 1e-15);
}

TEST(Eof, PureStates) {
  for (double r : {0.1, 0.5, 1.0, 2.0}) EXPECT_NEAR(eof(tmsv(r)), entropy_of_entanglement(r), 1e-4) << r;
  EXPECT_EQ(eof(CovarianceMatrix()), 0.0);
}

TEST(Eof, SymmetricStatesMatchClosedForm) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> squeeze(0.05, 1.2), noise(0.0, 0.4), asym(0.3, 1.0);
  int entangled = 0;
  for (int i = 0; i < 12; ++i) {
    // Noisy two-mode squeezed vacuum with unequal squeezing in the two quadratures.
    const double r = squeeze(rng), n = noise(rng), k = asym(rng);
    const double c = std::cosh(2.0 * r) + n;
    const CovarianceMatrix s = StandardForm{c, c, std::sinh(2.0 * r), -k * std::sinh(2.0 * r)}.matrix();
    ASSERT_TRUE(is_physical(s));
    const double want = symmetric_eof(s);
    entangled += want > 0.0;
    EXPECT_NEAR(eof(s), want, 1e-4) << r << " " << n << " " << k;
  }
  EXPECT_GT(entangled, 3);
}

TEST(Eof, BenchmarkState) {
  const CovarianceMatrix s = StandardForm{1.41755, 1.41755, 0.841278, -0.841278}.matrix();
  EXPECT_NEAR(eof(s), symmetric_eof(s), 1e-4);
  EXPECT_NEAR(epr_variance_product(s), 1.41755 - 0.841278, 1e-12);
}

TEST(Eof, SupportMatchesNegativity) {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 40; ++i) {
    const CovarianceMatrix s = random_state(rng);
    const double ln = log_negativity(s);
    const double e = eof(s);
    EXPECT_EQ(e > 0.0, ln > 0.0) << i;
  }
}

TEST(Eof, LocalSymplecticInvariance) {
  std::mt19937_64 rng(33);
  Eigen::Matrix4d noisy = tmsv(0.6).matrix();
  noisy(0, 0) += 0.3;
  noisy(1, 1) += 0.3;
  noisy(2, 2) += 0.1;
  noisy(3, 3) += 0.1;
  const CovarianceMatrix s(noisy);
  ASSERT_TRUE(is_physical(s));
  const double ref = eof(s);
  EXPECT_GT(ref, 0.0);
  for (int i = 0; i < 5; ++i) {
    const Eigen::Matrix4d l = local_symplectic(rng);
    const Eigen::Matrix4d m = l * s.matrix() * l.transpose();
    EXPECT_NEAR(eof(CovarianceMatrix(0.5 * (m + m.transpose()))), ref, 1e-3);
  }
}

TEST(Eof, SingleRestartCannotConfirmMinimum) {
  EofOptions opt;
  opt.restarts = 1;
  EXPECT_THROW(eof(tmsv(0.5), 1e-4, opt), OptimizationFailed);
}
