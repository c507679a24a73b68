#include <gtest/gtest.h>

#include <polydyn/continuation.hpp>
#include <polydyn/io.hpp>
#include <polydyn/lamination.hpp>

using namespace polydyn;

namespace {

const Complex I{0.0, 1.0};

MarkedParams cubic(Complex c, Complex b) {
  MarkedParams a;
  a.degree = 3;
  a.c = c;
  a.b = b;
  return a;
}

std::vector<double> grid(double from, double to, double ds) {
  std::vector<double> g{from};
  const double dir = to > from ? 1.0 : -1.0;
  while (std::abs(to - g.back()) > 1e-12) {
    const double next = g.back() + dir * ds;
    g.push_back((to - next) * dir <= 1e-12 ? to : next);
  }
  return g;
}

std::vector<double> tail(int lo, int hi) {
  std::vector<double> out;
  for (int n = lo; n <= hi; ++n) out.push_back(1.0 - std::ldexp(1.0, -n));
  return out;
}

// |Phi(a)| recomputed as the internal modulus of the critical value
double phi_modulus(const MarkedParams& a) {
  const Polynomial f = build_marked(a);
  const auto m = internal_modulus(f, f(a.c));
  return m ? *m : NAN;
}

// The eg1 family: d = 3, 0 fixed (b = 0), Fibonacci-word t1, s from 0.3 to 0.99.
struct Eg1 {
  DigitStream t1 = choose_t1(2, std::nullopt, {T1Options::Pattern::fibonacci});
  CriticalPortrait portrait{};
  StretchRay ray;

  Eg1() { ray = continue_stretch(cubic_start(t1, 0.3), portrait, t1, grid(0.3, 0.99, 0.05)); }

  const ContinuationState& at(double s) const {
    for (const auto& st : ray.states)
      if (std::abs(st.s - s) < 1e-12) return st;
    throw std::runtime_error("no state at s");
  }

  static const Eg1& get() {
    static const Eg1 e;
    return e;
  }
};

}  // namespace

TEST(Residuals, Examples) {
  const CriticalPortrait p1{};
  auto r = residuals(cubic(0.4, 0.0), p1);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(std::abs(r[0]), 0.0);
  r = residuals(cubic(0.4, 0.1), p1);
  EXPECT_NEAR(std::abs(r[0] - 0.1), 0.0, 1e-15);

  MarkedParams q;
  q.degree = 2;
  q.b = -1.0;
  CriticalPortrait p2;
  p2.p = 2;
  EXPECT_LT(std::abs(residuals(q, p2)[0]), 1e-15);
}

TEST(SolveConstraints, Examples) {
  const CriticalPortrait p1{};
  const auto frozen = dependent_mask(3, p1);
  auto s = solve_constraints(cubic(0.2, 0.1), p1, frozen);
  ASSERT_TRUE(s.converged);
  EXPECT_LT(std::abs(s.a.b), 1e-12);
  EXPECT_EQ(s.a.c, Complex(0.2));

  // rabbit: Newton oracle on c^3 + 2c^2 + c + 1 = 0 from the upper half plane
  Complex c{-0.1, 0.7};
  for (int k = 0; k < 50; ++k) c -= (c * c * c + 2.0 * c * c + c + 1.0) / (3.0 * c * c + 4.0 * c + 1.0);
  MarkedParams q;
  q.degree = 2;
  q.b = Complex(-0.1, 0.7);
  CriticalPortrait p3;
  p3.p = 3;
  auto r = solve_constraints(q, p3, {});
  ASSERT_TRUE(r.converged);
  EXPECT_LT(std::abs(r.a.b - c), 1e-10);
  EXPECT_GT(r.a.b.imag(), 0.0);

  const MarkedParams good = cubic({0.3, -0.2}, 0.0);
  auto u = solve_constraints(good, p1, frozen);
  EXPECT_LT(std::abs(u.a.c - good.c), 1e-12);
  EXPECT_LT(std::abs(u.a.b - good.b), 1e-12);
}

TEST(SolveConstraints, CountMismatchIsAnInputError) {
  EXPECT_THROW(solve_constraints(cubic(0.2, 0.1), CriticalPortrait{}, {false, false}), InputError);
}

TEST(Portrait, Validation) {
  CriticalPortrait p;
  EXPECT_NO_THROW(p.validate(3));
  EXPECT_THROW(p.validate(4), InputError);  // index 2 must be in I_F or I_infinity
  p.I_infinity = {2};
  EXPECT_NO_THROW(p.validate(4));
  p.relations = {{2, 2, 2}};
  EXPECT_THROW(p.validate(4), InputError);
}

TEST(ChooseT1, DefaultStreamIsDeterministic) {
  const DigitStream t = choose_t1(2);
  EXPECT_EQ(t.digits(0, 8), (std::vector<int>{0, 1, 1, 0, 1, 0, 0, 1}));
  EXPECT_EQ(choose_t1(2).digits(0, 64), t.digits(0, 64));
  EXPECT_THROW(choose_t1(1), InputError);
}

TEST(ChooseT1, ForbiddenArcExcludesBlock) {
  // cylinder of the block "11" is the arc from 3/4 to 1
  const Angle lo(3, 4), hi(0, 1);
  const DigitStream t = choose_t1(2, std::make_pair(lo, hi));
  const auto digits = t.digits(0, 10000);
  for (std::size_t i = 0; i + 1 < digits.size(); ++i) ASSERT_FALSE(digits[i] == 1 && digits[i + 1] == 1) << "at " << i;
  EXPECT_TRUE(avoids_arc(t, lo, hi, 1000));
  // not eventually periodic with a short period
  for (std::size_t per = 1; per <= 64; ++per) {
    bool periodic = true;
    for (std::size_t i = 5000; i + per < digits.size() && periodic; ++i) periodic = digits[i] == digits[i + per];
    EXPECT_FALSE(periodic) << per;
  }
  EXPECT_THROW(choose_t1(2, std::make_pair(Angle(1, 3), Angle(1, 3))), InputError);
}

TEST(ContinueStretch, FirstStateReproducesTheStart) {
  const auto& e = Eg1::get();
  ASSERT_FALSE(e.ray.stalled) << e.ray.diagnostics;
  const auto& st = e.ray.states.front();
  EXPECT_EQ(st.s, 0.3);
  EXPECT_LT(std::abs(st.phi - 0.3 * unit(e.t1.value())), 1e-8);
  EXPECT_NEAR(phi_modulus(st.a), 0.3, 1e-8);
}

TEST(ContinueStretch, AcceptedStatesMeetTheResidualBounds) {
  const auto& e = Eg1::get();
  ASSERT_FALSE(e.ray.stalled) << e.ray.diagnostics;
  EXPECT_EQ(e.ray.states.back().s, 0.99);
  for (std::size_t i = 0; i < e.ray.states.size(); ++i) {
    const auto& st = e.ray.states[i];
    if (i > 0) EXPECT_GT(st.s, e.ray.states[i - 1].s);
    EXPECT_LT(st.phi_residual, 1e-8) << "s=" << st.s;
    EXPECT_LT(st.max_constraint(), 1e-10) << "s=" << st.s;
    EXPECT_LT(max_abs(residuals(st.a, e.portrait)), 1e-10);
    EXPECT_NEAR(phi_modulus(st.a), st.s, 1e-8) << "s=" << st.s;
    EXPECT_LT(std::abs(std::arg(st.phi / unit(e.t1.value()))), 1e-8) << "s=" << st.s;
  }
}

TEST(ContinueStretch, SingleGridValueKeepsTheParameter) {
  const auto& e = Eg1::get();
  const auto& st = e.at(0.6);
  const StretchRay r = continue_stretch(st.a, e.portrait, e.t1, {0.6}, {}, &st.trace);
  ASSERT_EQ(r.states.size(), 1u);
  EXPECT_LT(std::abs(r.states[0].a.c - st.a.c), 1e-10);
  EXPECT_LT(std::abs(r.states[0].a.b - st.a.b), 1e-10);
}

TEST(ContinueStretch, ReverseContinuationReturnsToTheStart) {
  const auto& e = Eg1::get();
  const auto& st = e.at(0.9);
  const StretchRay back = continue_stretch(st.a, e.portrait, e.t1, grid(0.9, 0.3, 0.05), {}, &st.trace);
  ASSERT_FALSE(back.stalled) << back.diagnostics;
  EXPECT_EQ(back.states.back().s, 0.3);
  EXPECT_LT(std::abs(back.states.back().a.c - e.at(0.3).a.c), 1e-6);
}

TEST(ContinueStretch, RejectsBadGrids) {
  const auto& e = Eg1::get();
  EXPECT_THROW(continue_stretch(e.at(0.3).a, e.portrait, e.t1, {}), InputError);
  EXPECT_THROW(continue_stretch(e.at(0.3).a, e.portrait, e.t1, {0.3, 1.0}), InputError);
}

TEST(EstimateLimit, SingleStateIsInsufficient) {
  const auto& e = Eg1::get();
  const auto& st = e.at(0.6);
  StretchRay r = continue_stretch(st.a, e.portrait, e.t1, {0.6}, {}, &st.trace);
  try {
    estimate_limit(r, tail(3, 8));
    FAIL();
  } catch (const InputError& err) {
    EXPECT_NE(std::string(err.what()).find("insufficient tail"), std::string::npos);
  }
}

TEST(EstimateLimit, ShallowTail) {
  StretchRay r = Eg1::get().ray;
  const LimitEstimate est = estimate_limit(r, tail(3, 8));
  EXPECT_EQ(est.order, 3);
  EXPECT_LT(est.uncertainty, 1e-3);
  EXPECT_NEAR(phi_modulus(est.a2), 1.0, 1e-3);
  // orders 2 and 3 agree to the reported uncertainty
  StretchRay r2 = Eg1::get().ray;
  const LimitEstimate lower = estimate_limit(r2, tail(3, 8), 2);
  EXPECT_LT(std::abs(lower.a2.c - est.a2.c), 2e-3);
}

TEST(VerifyLimit, Eg1LimitPassesAllChecks) {
  const auto& e = Eg1::get();
  StretchRay r = e.ray;
  const LimitEstimate est = estimate_limit(r, tail(3, 24));
  EXPECT_LT(est.uncertainty, 1e-6);
  EXPECT_NEAR(phi_modulus(est.a2), 1.0, 1e-4);
  const LimitReport rep = verify_limit(est.a2, e.portrait, e.t1);
  ASSERT_EQ(rep.checks.size(), 4u);
  for (const auto& c : rep.checks) EXPECT_TRUE(c.pass) << c.name << ": " << c.detail;

  // equal (trivial) laminations with z^3 up to N = 20
  const auto lg = compute_lamination(build_marked(est.a2), 20);
  const auto lf = compute_lamination(Polynomial::unicritical(3, 0.0), 20);
  EXPECT_EQ(equal(lf, lg).verdict, LamVerdict::equal);
  EXPECT_TRUE(is_trivial(lg));
}

TEST(VerifyLimit, CenterFailsTheCriticalOrbitCheck) {
  const auto& e = Eg1::get();
  const LimitReport rep = verify_limit(cubic(I * std::sqrt(2.0), 0.0), e.portrait, e.t1);
  ASSERT_EQ(rep.checks.size(), 4u);
  EXPECT_TRUE(rep.checks[0].pass);
  EXPECT_FALSE(rep.checks[3].pass) << rep.checks[3].detail;
  EXPECT_FALSE(rep.all_pass());
}

TEST(VerifyLimit, BrokenRelationFailsTheFirstCheck) {
  const auto& e = Eg1::get();
  StretchRay r = e.ray;
  MarkedParams a2 = estimate_limit(r, tail(3, 8)).a2;
  a2.b = 0.1;
  const LimitReport rep = verify_limit(a2, e.portrait, e.t1);
  EXPECT_FALSE(rep.checks[0].pass);
  EXPECT_NEAR(rep.checks[0].value, 0.1, 1e-12);
}

TEST(LaminationStability, AlongTheStretchingRay) {
  const auto& e = Eg1::get();
  const auto ref = compute_lamination(Polynomial::unicritical(3, 0.0), 20);
  for (double s : {0.3, 0.6, 0.9, 0.99}) {
    const auto lam = compute_lamination(build_marked(e.at(s).a), 20);
    EXPECT_EQ(equal(lam, ref).verdict, LamVerdict::equal) << "s=" << s;
    EXPECT_TRUE(check_unlinked(lam));
    EXPECT_TRUE(check_invariance(lam, 3).ok);
  }
}

TEST(StateJson, RoundTrip) {
  const auto& st = Eg1::get().at(0.6);
  const ContinuationState back = state_from_json(Json::parse(dump_json(to_json(st))));
  EXPECT_EQ(back.s, st.s);
  EXPECT_EQ(back.a.c, st.a.c);
  EXPECT_EQ(back.a.b, st.a.b);
  EXPECT_EQ(back.phi_residual, st.phi_residual);
}
