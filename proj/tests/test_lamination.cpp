#include <gtest/gtest.h>

#include <polydyn/io.hpp>
#include <polydyn/lamination.hpp>

#include "oracles.hpp"

using namespace polydyn;

namespace {

const Complex kRabbit{-0.12256116687665362, 0.74486176661974424};

std::vector<Angle> angles(std::initializer_list<std::pair<int, int>> v) {
  std::vector<Angle> out;
  for (auto [p, q] : v) out.emplace_back(p, q);
  std::sort(out.begin(), out.end());
  return out;
}

bool has_class(const RationalLamination& lam, const std::vector<Angle>& cls) {
  for (const auto& c : lam.classes)
    if (c.angles == cls) return true;
  return false;
}

std::vector<std::vector<Angle>> partition_of(const RationalLamination& lam) {
  std::vector<std::vector<Angle>> out;
  for (const auto& c : lam.classes) out.push_back(c.angles);
  std::sort(out.begin(), out.end());
  return out;
}

void expect_structural(const RationalLamination& lam) {
  EXPECT_TRUE(check_unlinked(lam));
  EXPECT_TRUE(check_invariance(lam, lam.degree).ok);
  // partition soundness: each resolved angle in exactly one class
  for (const auto& th : lam.sample) {
    int hits = 0;
    for (const auto& c : lam.classes) hits += static_cast<int>(std::count(c.angles.begin(), c.angles.end(), th));
    EXPECT_EQ(hits + (lam.is_unresolved(th) ? 1 : 0), 1) << th.str();
  }
}

}  // namespace

TEST(ComputeLamination, CubeIsTrivial) {
  const auto lam = compute_lamination(Polynomial::unicritical(3, 0.0), 30);
  EXPECT_TRUE(is_trivial(lam));
  EXPECT_TRUE(lam.unresolved.empty());
  EXPECT_EQ(lam.classes.size(), lam.sample.size());
  expect_structural(lam);
}

TEST(ComputeLamination, Basilica) {
  const auto lam = compute_lamination(Polynomial::unicritical(2, -1.0), 6);
  const auto nt = nontrivial_classes(lam);
  ASSERT_EQ(nt.size(), 2u);
  EXPECT_TRUE(has_class(lam, angles({{1, 3}, {2, 3}})));
  EXPECT_TRUE(has_class(lam, angles({{1, 6}, {5, 6}})));
  EXPECT_TRUE(lam.unresolved.empty());
  for (const auto& c : lam.classes) EXPECT_EQ(c.status, ClassStatus::verified);
  expect_structural(lam);
}

TEST(ComputeLamination, Rabbit) {
  const auto lam = compute_lamination(Polynomial::unicritical(2, kRabbit), 7);
  EXPECT_TRUE(has_class(lam, angles({{1, 7}, {2, 7}, {4, 7}})));
  expect_structural(lam);
}

TEST(ComputeLamination, DisconnectedJuliaSetAborts) {
  try {
    compute_lamination(Polynomial::unicritical(2, 2.0), 4);
    FAIL();
  } catch (const ComputationError& e) {
    EXPECT_NE(std::string(e.what()).find("disconnected"), std::string::npos);
  }
}

TEST(ComputeLamination, MatchesBruteForceOracle) {
  for (Complex c : {Complex{0.0}, Complex{-1.0}, kRabbit}) {
    const oracle::QuadraticLamination oracle{c};
    const Polynomial f = Polynomial::unicritical(2, c);
    for (int N : {5, 7}) {
      const auto lam = compute_lamination(f, N);
      ASSERT_TRUE(lam.unresolved.empty());
      EXPECT_EQ(partition_of(lam), oracle.partition(N, 1e-7)) << "c=" << c << " N=" << N;
      expect_structural(lam);
    }
    // rays onto the weakly repelling rabbit alpha end ~0.04 short even at double depth
    EXPECT_LT(oracle.max_drift, 0.1);
  }
}

TEST(ComputeLamination, RestrictionEqualsDirectComputation) {
  for (Complex c : {Complex{-1.0}, kRabbit}) {
    const Polynomial f = Polynomial::unicritical(2, c);
    const auto big = compute_lamination(f, 8);
    for (int M : {3, 4, 6}) {
      const auto r = equal(restrict_to(big, M), compute_lamination(f, M));
      EXPECT_EQ(r.verdict, LamVerdict::equal) << "M=" << M;
    }
  }
}

TEST(Equal, Examples) {
  const auto b = compute_lamination(Polynomial::unicritical(2, -1.0), 3);
  EXPECT_EQ(equal(b, b).verdict, LamVerdict::equal);

  const auto z2 = compute_lamination(Polynomial::unicritical(2, 0.0), 3);
  const auto r = equal(z2, b);
  EXPECT_EQ(r.verdict, LamVerdict::different);
  bool found = false;
  for (const auto& [x, y] : r.diff) found |= x == Angle(1, 3) && y == Angle(2, 3);
  EXPECT_TRUE(found);

  EXPECT_THROW(equal(z2, compute_lamination(Polynomial::unicritical(2, 0.0), 4)), InputError);
}

TEST(Equal, UnresolvedIsInconclusive) {
  auto a = make_lamination(2, {angles({{0, 1}}), angles({{1, 2}})});
  auto b = a;
  b.classes.pop_back();
  b.unresolved.push_back({Angle(1, 2), "undecided"});
  const auto r = equal(a, b);
  EXPECT_EQ(r.verdict, LamVerdict::inconclusive);
  ASSERT_EQ(r.unresolved.size(), 1u);
  EXPECT_EQ(r.unresolved[0], Angle(1, 2));
}

TEST(CheckUnlinked, Examples) {
  EXPECT_TRUE(check_unlinked(make_lamination(2, {angles({{0, 1}}), angles({{1, 2}})})));
  EXPECT_TRUE(check_unlinked(make_lamination(2, {angles({{1, 3}, {2, 3}}), angles({{1, 6}, {5, 6}})})));
  EXPECT_FALSE(check_unlinked(make_lamination(2, {angles({{0, 1}, {1, 2}}), angles({{1, 4}, {3, 4}})})));
  EXPECT_FALSE(check_unlinked(make_lamination(2, {angles({{1, 7}, {2, 7}, {4, 7}}), angles({{3, 14}, {5, 14}})})));
}

TEST(CheckInvariance, Examples) {
  EXPECT_TRUE(check_invariance(compute_lamination(Polynomial::unicritical(3, 0.0), 10), 3).ok);
  const auto b = make_lamination(2, {angles({{0, 1}}), angles({{1, 2}}), angles({{1, 3}, {2, 3}}), angles({{1, 6}, {5, 6}})});
  EXPECT_TRUE(check_invariance(b, 2).ok);
  const auto bad = make_lamination(2, {angles({{0, 1}}), angles({{1, 3}, {1, 2}}), angles({{2, 3}})});
  const auto rep = check_invariance(bad, 2);
  EXPECT_FALSE(rep.ok);
  ASSERT_EQ(rep.violating_classes.size(), 1u);
  EXPECT_EQ(rep.violating_classes[0], 1u);
}

TEST(IsTrivial, Examples) {
  EXPECT_TRUE(is_trivial(compute_lamination(Polynomial::unicritical(2, 0.0), 10)));
  EXPECT_FALSE(is_trivial(compute_lamination(Polynomial::unicritical(2, -1.0), 3)));
  auto lam = make_lamination(2, {angles({{0, 1}})});
  lam.unresolved.push_back({Angle(1, 2), "blocked"});
  EXPECT_FALSE(is_trivial(lam));
}

TEST(LaminationJson, RoundTrip) {
  const auto lam = compute_lamination(Polynomial::unicritical(2, -1.0), 6);
  const Json j = to_json(lam);
  EXPECT_EQ(j.at("N"), 6);
  EXPECT_EQ(j.at("classes").size(), lam.classes.size());
  const auto back = lamination_from_json(Json::parse(dump_json(j)));
  EXPECT_EQ(equal(lam, back).verdict, LamVerdict::equal);
  EXPECT_EQ(partition_of(back), partition_of(lam));
}
