#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include <diamond/numerics.hpp>
#include <diamond/quadrature.hpp>

using namespace diamond;

namespace {

double rel_err(cplx got, cplx want) { return std::abs(got - want) / std::abs(want); }

struct KummerCase {
  cplx a, b, z, expected;
};

// 60-digit mpmath hyp1f1 values.
const KummerCase kKummerOracle[] = {
    {{1, 1}, 2, {0, -4}, {-1.2700237118755199025, -2.7750524377353728013}},
    {{1, 0.5}, 2, {0, -400}, {0.0059349024065156412311, 0.010638475677292964003}},
    {{1, -2}, 2, {0, -40}, {0.0044082179590110286361, -0.0098618930515295790199}},
    {{1, 5}, 2, {0, -100}, {-8575.8792852129936413, -2331.7868260672170775}},
    {{1, 0.1}, 2, {0, -0.4}, {0.99319087956996741739, -0.20132975846451776273}},
    {{1, 3}, 2, {0, 40}, {-0.0040885040920334148936, -0.0091466416750001970142}},
    {{1, -0.7}, 2, {0, -12}, {0.070251389223107707872, 0.020443589217304186036}},
    {{1, 1.5}, 2, {0, -20}, {2.4376795203317798093, -1.5804959108823822481}},
    {{1, 8}, 2, {0, -160}, {14549211.635704735555, -130996081.29849701242}},
    {{1, 0.05}, 2, {0, -240}, {0.0022904671824862660802, -0.0016333848509904572073}},
    {{0.5, 0.2}, 1.5, {3, -2}, {3.0398806823727118688, -3.5060563733784493934}},
    {{1, -3.61}, 2, {0, -10.06552}, {0.00020123460039548896748, 0.00060649144119846222134}},
    {{1, -6.5}, 2, {0, -12}, {-0.011696505157644074599, -0.0034037554184380771827}},
    {{1, -6.5}, 2, {0, -4}, {0.0054435347108834882318, 0.011894340340328189443}},
    {{1, -4}, 2, {0, -32}, {-0.0028883262065158894751, 0.00086832398316126757937}},
    {{1, -7.5}, 2, {0, -20}, {-0.0086290039404386645076, 0.0055947081349705319582}},
    {{1, -51.7319457544106}, 2, {0, -1.76}, {-0.00588564387111353242, 0.0071196522208658416991}},
    {{1, -60}, 2, {0, -120}, {0.000034134928142983540264, -0.000010924555694323854722}},
    {{1, 40}, 2, {0, -320}, {9.318792698461278104170048e+50, 2.095855945309631980286549e+50}},
    {{1, -60}, 2, {0, -480}, {-0.00001882634105181626150189, 0.00005463564860817916831414}},
};

}  // namespace

TEST(Kummer, TrivialValues) {
  EXPECT_EQ(kummer_m(1.0, 2.0, 0.0), cplx(1.0));
  EXPECT_NEAR(kummer_m(1.0, 2.0, 1.0).real(), std::exp(1.0) - 1.0, 1e-14);
  for (double x : {-30.0, -3.0, 0.5, 7.0, 25.0})
    EXPECT_LT(rel_err(kummer_m(1.0, 2.0, x), std::expm1(x) / x), 1e-12) << x;
}

TEST(Kummer, HighPrecisionOracle) {
  for (const auto& c : kKummerOracle)
    EXPECT_LT(rel_err(kummer_m(c.a, c.b, c.z), c.expected), 1e-10) << c.a << " " << c.z;
}

TEST(Kummer, IndependentRoutesAgree) {
  for (double O : {0.3, 2.0, 6.0})
    for (double z : {12.0, 30.0, 80.0, 200.0}) {
      const cplx a(1.0, O), zz(0.0, -z);
      EXPECT_LT(rel_err(kummer_m(a, 2.0, zz), detail::kummer_integral(a, 2.0, zz)), 1e-10) << O << " " << z;
    }
}

TEST(Kummer, KummerTransformIdentity) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> om(0.1, 5.0), mag(0.0, 100.0), ang(0.0, 2 * std::numbers::pi);
  for (int i = 0; i < 100; ++i) {
    const cplx a(1.0, om(rng));
    const cplx z = std::polar(mag(rng), ang(rng));
    const cplx lhs = kummer_m(a, 2.0, z);
    const cplx rhs = std::exp(z) * kummer_m(2.0 - a, 2.0, -z);
    EXPECT_LE(std::abs(lhs - rhs) / std::abs(lhs), 1e-8) << a << " " << z;
  }
}

TEST(Kummer, Conjugation) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> om(0.1, 8.0), kap(0.0, 100.0);
  for (int i = 0; i < 60; ++i) {
    const cplx a(1.0, om(rng)), z(0.0, -4.0 * kap(rng));
    const cplx m = kummer_m(a, 2.0, z);
    EXPECT_LE(std::abs(kummer_m(std::conj(a), 2.0, std::conj(z)) - std::conj(m)), 1e-10 * std::abs(m));
  }
}

TEST(Kummer, ForbiddenB) {
  EXPECT_THROW(kummer_m(1.0, 0.0, 1.0), InvalidParameter);
  EXPECT_THROW(kummer_m(1.0, -3.0, 1.0), InvalidParameter);
  EXPECT_NO_THROW(kummer_m(1.0, cplx(-3.0, 0.1), 1.0));
}

TEST(Kummer, TerminatingSeries) {
  // M(-2, b, z) = 1 - 2z/b + z^2/(b(b+1)).
  const cplx b(1.5, 0.0), z(30.0, -7.0);
  EXPECT_LT(rel_err(kummer_m(-2.0, b, z), 1.0 - 2.0 * z / b + z * z / (b * (b + 1.0))), 1e-12);
}

TEST(LogGamma, MatchesRealLgamma) {
  for (double x : {0.3, 1.0, 2.5, 7.0, 33.0})
    EXPECT_NEAR(log_gamma(x).real(), std::lgamma(x), 1e-13 * std::max(1.0, std::abs(std::lgamma(x))));
  // |Gamma(1 + iy)|^2 = pi y / sinh(pi y).
  for (double y : {0.5, 2.0, 9.0}) {
    const double want = std::log(std::numbers::pi * y / std::sinh(std::numbers::pi * y));
    EXPECT_NEAR(2.0 * log_gamma(cplx(1.0, y)).real(), want, 1e-13);
  }
}

TEST(Squeezing, Values) {
  EXPECT_NEAR(squeezing_parameter(1.0), 0.04324084828357017785773926, 1e-16);
  EXPECT_THROW(squeezing_parameter(0.0), InvalidParameter);
  EXPECT_THROW(squeezing_parameter(-1.0), InvalidParameter);
  EXPECT_LT(squeezing_parameter(50.0), 1e-60);
  double prev = squeezing_parameter(0.01);
  for (double w = 0.02; w < 5.0; w += 0.01) {
    const double r = squeezing_parameter(w);
    EXPECT_LT(r, prev);
    prev = r;
  }
}

TEST(Squeezing, PlanckIdentity) {
  for (double w : {0.01, 0.1, 0.5, 1.0, 2.0, 4.0}) {
    const double s = std::sinh(squeezing_parameter(w));
    const double planck = 1.0 / (std::exp(2 * std::numbers::pi * w) - 1.0);
    EXPECT_LE(std::abs(s * s - planck), 1e-10 * planck) << w;
    EXPECT_LE(std::abs(planck_occupation(w) - planck), 1e-12 * planck);
  }
}

TEST(Quadrature, Examples) {
  auto one = integrate_adaptive([](double) { return 1.0; }, {0.0, 1.0}, 1e-14, 1e-14);
  EXPECT_NEAR(one.value, 1.0, 1e-15);
  EXPECT_GE(one.evaluations, 1u);
  EXPECT_GE(one.error_estimate, 0.0);

  auto g = integrate_adaptive([](double x) { return std::exp(-x * x); }, {0.0, 10.0}, 1e-14, 1e-13);
  EXPECT_NEAR(g.value, std::sqrt(std::numbers::pi) / 2, 1e-13);

  // 10^6-point trapezoid oracle.
  const cplx trap(-0.0026117245717749184, 0.0022347068882539057);
  auto osc = integrate_adaptive(
      [](double x) { return std::polar(std::exp(-(x - 3) * (x - 3)), 5.0 * x); }, {0.0, 20.0}, 1e-14, 1e-12);
  EXPECT_LT(std::abs(osc.value - trap), 1e-11);
}

TEST(Quadrature, VectorValuedComponentsMeetTolerance) {
  auto f = [](double x) { return std::array<cplx, 2>{std::exp(-x), 1e-12 * std::cos(3.0 * x)}; };
  auto r = integrate_adaptive(f, {0.0, 2.0}, 1e-30, 1e-10);
  EXPECT_NEAR(r.value[0].real(), 1.0 - std::exp(-2.0), 1e-12);
  EXPECT_NEAR(r.value[1].real(), 1e-12 * std::sin(6.0) / 3.0, 1e-21);
}

TEST(Quadrature, BisectionInvariance) {
  auto f = [](double x) { return std::polar(std::sqrt(x) * std::exp(-x), 7.0 * x); };
  const double tol = 1e-9;
  auto whole = integrate_adaptive(f, {1e-8, 30.0}, 1e-15, tol).value;
  for (double m : {0.7, 4.0, 17.3}) {
    auto left = integrate_adaptive(f, {1e-8, m}, 1e-15, tol).value;
    auto right = integrate_adaptive(f, {m, 30.0}, 1e-15, tol).value;
    EXPECT_LE(std::abs(left + right - whole), tol * std::abs(whole)) << m;
  }
}

TEST(Quadrature, Deterministic) {
  auto f = [](double x) { return std::polar(1.0 / (1.0 + x * x), 40.0 * x); };
  auto a = integrate_adaptive(f, {-5.0, 5.0}, 1e-13, 1e-10);
  auto b = integrate_adaptive(f, {-5.0, 5.0}, 1e-13, 1e-10);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.evaluations, b.evaluations);
}

TEST(Quadrature, ToleranceNotMetCarriesEstimate) {
  QuadratureOptions opt;
  opt.abs_tol = 1e-30;
  opt.rel_tol = 1e-15;
  opt.max_intervals = 3;
  try {
    integrate_adaptive([](double x) { return std::sin(50.0 * x) * std::exp(-x); }, {0.0, 10.0}, opt);
    FAIL() << "expected ToleranceNotMet";
  } catch (const ToleranceNotMet& e) {
    ASSERT_EQ(e.estimate().size(), 1u);
    EXPECT_TRUE(std::isfinite(e.estimate()[0].real()));
    EXPECT_GT(e.error_bound(), 0.0);
  }
  EXPECT_THROW(integrate_adaptive([](double) { return 1.0; }, {1.0, 1.0}), InvalidParameter);
}

TEST(Truncation, Windows) {
  auto w = truncate_semiinfinite(10.0, 1.0, 8.0);
  EXPECT_DOUBLE_EQ(w.lo, 2.0);
  EXPECT_DOUBLE_EQ(w.hi, 18.0);
  w = truncate_semiinfinite(2.0, 1.0, 8.0);
  EXPECT_DOUBLE_EQ(w.lo, kLowerCutoff);
  EXPECT_DOUBLE_EQ(w.hi, 10.0);
  w = truncate_semiinfinite(12.0, 3.2);
  EXPECT_DOUBLE_EQ(w.lo, kLowerCutoff);
  EXPECT_NEAR(w.hi, 37.6, 1e-12);
  EXPECT_THROW(truncate_semiinfinite(1.0, 0.0), InvalidParameter);
}
