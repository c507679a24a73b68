#include <gtest/gtest.h>

#include <polydyn/boettcher.hpp>
#include <polydyn/cycles.hpp>
#include <polydyn/digits.hpp>
#include <polydyn/rays.hpp>

using namespace polydyn;

namespace {

const Complex I{0.0, 1.0};
const double kGolden = (1.0 + std::sqrt(5.0)) / 2.0;
const Complex kRabbit{-0.12256116687665362, 0.74486176661974424};

Polynomial cubic(Complex c, Complex b) {
  MarkedParams a;
  a.degree = 3;
  a.c = c;
  a.b = b;
  return build_marked(a);
}

// |f^n(z)|^(d^-n) in long double, for n as large as the orbit allows.
double green_oracle(const Polynomial& f, Complex z0) {
  std::complex<long double> z(z0.real(), z0.imag());
  const int d = f.degree();
  long double scale = 1.0L;
  for (int n = 0; n < 9; ++n) {
    std::complex<long double> w = 0;
    for (int k = d; k >= 0; --k)
      w = w * z + std::complex<long double>(f.coefficient(k).real(), f.coefficient(k).imag());
    z = w;
    scale /= d;
  }
  return static_cast<double>(std::exp(std::log(std::abs(z)) * scale));
}

double angle_deviation(Complex z, double turns) {
  double t = std::arg(z) / kTwoPi - turns;
  t -= std::round(t);
  return std::abs(t) * kTwoPi;
}

std::vector<Angle> sixteen_angles() {
  std::vector<Angle> out;
  for (int k = 0; k < 16; ++k) out.emplace_back(2 * k + 1, 37);
  return out;
}

}  // namespace

TEST(Green, Examples) {
  EXPECT_NEAR(*green(Polynomial::unicritical(2, 0.0), 2.0), 2.0, 1e-12);
  EXPECT_FALSE(green(Polynomial::unicritical(2, 0.0), 0.5).has_value());
  const Polynomial b = Polynomial::unicritical(2, -1.0);
  const double g = *green(b, 2.0);
  EXPECT_NEAR(g, green_oracle(b, 2.0), 1e-10);
  // |f^n(2)|^(2^-n) iterated at 200 digits
  EXPECT_NEAR(g, 1.6784589651254290832, 1e-13);
}

TEST(ExternalRay, RadialForPowerMaps) {
  for (int d : {2, 3, 4}) {
    const Polynomial f = Polynomial::unicritical(d, 0.0);
    for (const Angle& t : sixteen_angles()) {
      ExternalRay r = trace_external_ray(f, t);
      ASSERT_FALSE(r.points.empty());
      for (const auto& s : r.points) ASSERT_LT(angle_deviation(s.z, t.to_double()), 1e-9) << "d=" << d << " " << t.str();
    }
  }
  ExternalRay r = trace_external_ray(Polynomial::unicritical(3, 0.0), Angle(1, 8));
  for (const auto& s : r.points) EXPECT_LT(angle_deviation(s.z, 0.125), 1e-9);
}

TEST(ExternalRay, SamplesMatchGreenAndFunctionalEquation) {
  for (const Polynomial& f : {Polynomial::unicritical(2, -1.0), Polynomial::unicritical(2, kRabbit), cubic({0.2, 0.1}, 0.0)}) {
    const int d = f.degree();
    for (const Angle& t : {Angle(1, 3), Angle(1, 5), Angle(3, 7)}) {
      ExternalRay r = trace_external_ray(f, t);
      for (std::size_t k = 0; k < r.points.size(); ++k) {
        const auto& s = r.points[k];
        if (k > 0) EXPECT_LT(s.potential, r.points[k - 1].potential);
        const auto g = green(f, s.z);
        ASSERT_TRUE(g.has_value());
        EXPECT_NEAR(std::log(*g), s.potential, 1e-8 * std::max(1.0, s.potential));
        const auto gf = green(f, f(s.z));
        EXPECT_NEAR(std::log(*gf), d * std::log(*g), 1e-8 * std::max(1.0, d * s.potential));
      }
    }
  }
}

TEST(ExternalRay, BasilicaRealRays) {
  const Polynomial f = Polynomial::unicritical(2, -1.0);
  ExternalRay r0 = trace_external_ray(f, Angle(0, 1));
  for (std::size_t k = 0; k < r0.points.size(); ++k) {
    EXPECT_LT(std::abs(r0.points[k].z.imag()), 1e-9);
    if (k > 0) EXPECT_LT(r0.points[k].z.real(), r0.points[k - 1].z.real());
  }
  EXPECT_NEAR(r0.points.back().z.real(), kGolden, 1e-3);

  ExternalRay r3 = trace_external_ray(f, Angle(1, 3));
  EXPECT_LT(std::abs(r3.points.back().z - (1.0 - kGolden)), 1e-3);
}

TEST(Landing, Examples) {
  {
    const Polynomial f = Polynomial::unicritical(2, 0.0);
    ExternalRay r = trace_external_ray(f, Angle(0, 1));
    const Landing l = landing_point(f, r);
    ASSERT_EQ(l.status, LandingStatus::landed);
    EXPECT_LT(std::abs(l.point - 1.0), 1e-9);
    EXPECT_EQ(l.period, 1);
  }
  const Polynomial f = Polynomial::unicritical(2, -1.0);
  {
    ExternalRay r = trace_external_ray(f, Angle(1, 2));
    const Landing l = landing_point(f, r);
    ASSERT_EQ(l.status, LandingStatus::landed);
    EXPECT_LT(std::abs(l.point + kGolden), 1e-9);
    EXPECT_EQ(l.preperiod, 1);
  }
  {
    ExternalRay r = trace_external_ray(f, Angle(1, 3));
    const Landing l = landing_point(f, r);
    ASSERT_EQ(l.status, LandingStatus::landed);
    EXPECT_LT(std::abs(l.point - (1.0 - kGolden)), 1e-9);
    EXPECT_EQ(l.period, 1);
    EXPECT_FALSE(l.parabolic);
  }
}

TEST(Landing, PushForwardAndNeverAttracting) {
  for (const Polynomial& f : {Polynomial::unicritical(2, -1.0), Polynomial::unicritical(2, kRabbit)}) {
    for (const Angle& t : sample_angles(7)) {
      ExternalRay r = trace_external_ray(f, t);
      const Landing l = landing_point(f, r);
      ASSERT_EQ(l.status, LandingStatus::landed) << t.str();
      EXPECT_GT(std::abs(l.multiplier), 1.0 - kIndifferenceBand) << t.str();
      ExternalRay r2 = trace_external_ray(f, tau(t, 2));
      const Landing l2 = landing_point(f, r2);
      ASSERT_EQ(l2.status, LandingStatus::landed);
      EXPECT_LT(std::abs(f(l.point) - l2.point), 1e-6) << t.str();
    }
  }
}

TEST(Landing, DisconnectedJuliaSetBlocksRays) {
  const Polynomial f = Polynomial::unicritical(2, 2.0);
  ExternalRay r = trace_external_ray(f, Angle(0, 1));
  const Landing l = landing_point(f, r);
  EXPECT_EQ(l.status, LandingStatus::blocked);
  EXPECT_GT(l.threshold, 1.0);
}

TEST(InternalModulus, Examples) {
  EXPECT_NEAR(*internal_modulus(Polynomial::unicritical(2, 0.0), 0.3), 0.3, 1e-12);
  EXPECT_NEAR(*internal_modulus(Polynomial::unicritical(3, 0.0), 0.5), 0.5, 1e-12);
  const Polynomial g = cubic(I * std::sqrt(2.0), 0.0);
  const double m = *internal_modulus(g, 0.1);
  const double mf = *internal_modulus(g, g(0.1));
  EXPECT_NEAR(mf, m * m, 1e-8);
  EXPECT_FALSE(internal_modulus(Polynomial::unicritical(2, 0.0), 1.5).has_value());
}

TEST(InternalRay, PowerMaps) {
  {
    const Polynomial f = Polynomial::unicritical(2, 0.0);
    InternalRay r = trace_internal_ray(f, Angle(1, 3));
    for (const auto& s : r.points) EXPECT_LT(angle_deviation(s.z, 1.0 / 3), 1e-9);
    const Landing l = internal_landing_point(f, r);
    ASSERT_TRUE(l.status == LandingStatus::landed || l.status == LandingStatus::converged);
    EXPECT_LT(std::abs(l.point - unit(1.0 / 3)), 1e-9);
  }
  {
    const Polynomial f = Polynomial::unicritical(3, 0.0);
    const DigitStream t = fibonacci_word(3);
    InternalRay r = trace_internal_ray(f, t);
    for (const auto& s : r.points) EXPECT_LT(angle_deviation(s.z, t.value()), 1e-9);
    const Landing l = internal_landing_point(f, r);
    ASSERT_EQ(l.status, LandingStatus::converged);
    EXPECT_NEAR(std::abs(l.point), 1.0, 1e-9);
  }
}

TEST(InternalRay, DualityWithExternalRaysOnPowerMaps) {
  for (int d : {2, 3}) {
    const Polynomial f = Polynomial::unicritical(d, 0.0);
    for (const Angle& t : {Angle(1, 3), Angle(1, 4), Angle(2, 7)}) {
      InternalRay ri = trace_internal_ray(f, t);
      const Landing li = internal_landing_point(f, ri);
      ExternalRay re = trace_external_ray(f, t);
      const Landing le = landing_point(f, re);
      ASSERT_TRUE(li.status == LandingStatus::landed || li.status == LandingStatus::converged);
      ASSERT_EQ(le.status, LandingStatus::landed);
      EXPECT_LT(std::abs(li.point - le.point), 1e-9) << "d=" << d << " " << t.str();
    }
  }
}

TEST(InternalRay, DisjointCubicAngleZeroLandsAtRepellingFixedPoint) {
  const Polynomial g = cubic(I * std::sqrt(2.0), 0.0);
  InternalRay r = trace_internal_ray(g, Angle(0, 1));
  const Landing l = internal_landing_point(g, r);
  ASSERT_EQ(l.status, LandingStatus::landed);
  EXPECT_EQ(l.period, 1);
  // Newton oracle for the fixed point closest to the landing point
  Complex z = r.points.back().z;
  for (int k = 0; k < 60; ++k) {
    auto [v, dv] = g.eval_with_derivative(z);
    z -= (v - z) / (dv - 1.0);
  }
  EXPECT_LT(std::abs(l.point - z), 1e-8);
  EXPECT_GT(std::abs(g.derivative_at(z)), 1.0 + kIndifferenceBand);
}

TEST(PhiOfA, Examples) {
  MarkedParams a;
  a.degree = 3;
  a.c = 0.1;
  const PhiValue ph = phi_of_a(a);
  const Polynomial f = build_marked(a);
  EXPECT_NEAR(std::abs(ph.value), *internal_modulus(f, f(a.c)), 1e-12);
  EXPECT_LT(std::abs(ph.value.imag()), 1e-14);
  a.c = -0.15;
  EXPECT_LT(std::abs(phi_of_a(a).value.imag()), 1e-14);
  // small-c asymptotics Phi ~ 3 c^4 / 4
  a.c = Complex(0.02, 0.01);
  const Complex expect = 0.75 * std::pow(a.c, 4);
  EXPECT_LT(std::abs(phi_of_a(a).value - expect), 0.05 * std::abs(expect));
}
