#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "angle.hpp"
#include "poly.hpp"
#include "rays.hpp"

namespace polydyn {

enum class ClassStatus { verified, merged_by_tolerance, split };

inline const char* to_string(ClassStatus s) {
  switch (s) {
    case ClassStatus::verified: return "verified";
    case ClassStatus::merged_by_tolerance: return "merged-by-tolerance";
    case ClassStatus::split: return "split";
  }
  return "?";
}

struct LamClass {
  std::vector<Angle> angles;  // sorted
  Complex landing{};
  ClassStatus status = ClassStatus::verified;
};

struct Unresolved {
  Angle angle;
  std::string reason;
};

struct RationalLamination {
  int N = 0;  // denominator bound, 0 for an explicit sample
  int degree = 2;
  std::vector<Angle> sample;
  std::vector<LamClass> classes;
  std::vector<Unresolved> unresolved;

  /// Index of the class containing theta, or -1.
  int class_of(const Angle& theta) const {
    for (std::size_t i = 0; i < classes.size(); ++i)
      if (std::binary_search(classes[i].angles.begin(), classes[i].angles.end(), theta)) return static_cast<int>(i);
    return -1;
  }
  bool is_unresolved(const Angle& theta) const {
    return std::any_of(unresolved.begin(), unresolved.end(), [&](const Unresolved& u) { return u.angle == theta; });
  }
};

/// Builds a lamination directly from a partition (used for artificial
/// laminations in checks and for the restriction of computed ones).
inline RationalLamination make_lamination(int degree, std::vector<std::vector<Angle>> parts, int N = 0) {
  RationalLamination lam;
  lam.N = N;
  lam.degree = degree;
  for (auto& p : parts) {
    std::sort(p.begin(), p.end());
    lam.sample.insert(lam.sample.end(), p.begin(), p.end());
    lam.classes.push_back({p, {}, ClassStatus::verified});
  }
  std::sort(lam.sample.begin(), lam.sample.end());
  return lam;
}

struct LaminationOptions {
  double tol = 1e-6;          // clustering tolerance on refined landing points
  double landing_tol = 1e-6;  // extrapolant vs refined point
  RayOptions rays;
  int escape_iter = 10000;
};

namespace detail {

struct DisjointSets {
  std::vector<int> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) { return parent[static_cast<std::size_t>(x)] == x ? x : parent[static_cast<std::size_t>(x)] = find(parent[static_cast<std::size_t>(x)]); }
  void unite(int a, int b) { parent[static_cast<std::size_t>(find(a))] = find(b); }
};

inline bool escapes(const Polynomial& f, Complex z, int n_iter) {
  const double esc = escape_radius(f);
  for (int n = 0; n < n_iter; ++n) {
    if (std::abs(z) > esc || !is_finite(z)) return true;
    z = f(z);
  }
  return false;
}

}  // namespace detail

/// Rational lamination of f on an explicit angle sample.
inline RationalLamination compute_lamination(const Polynomial& f, std::vector<Angle> sample, int N,
                                             const LaminationOptions& opt = {}) {
  for (const auto& cp : critical_points(f))
    if (detail::escapes(f, cp.z, opt.escape_iter)) throw ComputationError("disconnected Julia set");
  const int d = f.degree();
  std::sort(sample.begin(), sample.end());
  sample.erase(std::unique(sample.begin(), sample.end()), sample.end());
  RationalLamination lam;
  lam.N = N;
  lam.degree = d;
  lam.sample = sample;

  std::vector<ExternalRay> rays;
  std::map<std::string, Complex> estimates;
  for (const auto& th : sample) {
    rays.push_back(trace_external_ray(f, th, opt.rays));
    if (rays.back().landing.status != LandingStatus::pending) continue;
    if (auto ex = ray_extrapolant(rays.back())) estimates[th.str()] = ex->first;
  }
  // images outside the sample are traced on demand and remembered
  RaySeedSource seeds = [&](const Angle& th) -> std::optional<Complex> {
    auto it = estimates.find(th.str());
    if (it != estimates.end()) return it->second;
    ExternalRay r = trace_external_ray(f, th, opt.rays);
    if (r.landing.status != LandingStatus::pending) return std::nullopt;
    auto ex = ray_extrapolant(r);
    if (!ex) return std::nullopt;
    estimates[th.str()] = ex->first;
    return ex->first;
  };
  std::vector<Angle> landed;
  std::vector<Complex> points;
  for (auto& ray : rays) {
    const Angle& th = ray.angle;
    Landing l = landing_point(f, ray, opt.landing_tol, seeds);
    if (l.status == LandingStatus::landed) {
      landed.push_back(th);
      points.push_back(l.point);
    } else {
      lam.unresolved.push_back({th, std::string(to_string(l.status)) + ": " + l.reason});
    }
  }

  detail::DisjointSets ds(landed.size());
  for (std::size_t i = 0; i < landed.size(); ++i)
    for (std::size_t j = i + 1; j < landed.size(); ++j)
      if (std::abs(points[i] - points[j]) < opt.tol * (1.0 + std::abs(points[i]))) ds.unite(static_cast<int>(i), static_cast<int>(j));

  // cluster labels, then split clusters whose images are not classed together
  std::vector<int> label(landed.size());
  for (std::size_t i = 0; i < landed.size(); ++i) label[i] = ds.find(static_cast<int>(i));
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < landed.size(); ++i) index[landed[i].str()] = i;
  std::vector<char> was_split(landed.size(), 0);
  for (bool changed = true; changed;) {
    changed = false;
    std::map<int, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < landed.size(); ++i) groups[label[i]].push_back(i);
    for (auto& [lab, members] : groups) {
      if (members.size() < 2) continue;
      std::map<int, std::vector<std::size_t>> by_image;
      for (std::size_t i : members) {
        auto it = index.find(tau(landed[i], d).str());
        const int img = it == index.end() ? -1 : label[it->second];
        by_image[img].push_back(i);
      }
      // images outside the landed sample give no evidence either way
      std::size_t informative = by_image.size() - (by_image.count(-1) ? 1 : 0);
      if (informative <= 1) continue;
      int fresh = *std::max_element(label.begin(), label.end()) + 1;
      for (auto& [img, sub] : by_image) {
        if (img == -1) continue;
        for (std::size_t i : sub) {
          label[i] = fresh;
          was_split[i] = 1;
        }
        ++fresh;
      }
      changed = true;
      break;
    }
  }

  std::map<int, LamClass> cls;
  for (std::size_t i = 0; i < landed.size(); ++i) {
    LamClass& c = cls[label[i]];
    if (c.angles.empty()) c.landing = points[i];
    else if (std::abs(points[i] - c.landing) > 1e-10 * (1.0 + std::abs(c.landing)))
      c.status = ClassStatus::merged_by_tolerance;
    if (was_split[i]) c.status = ClassStatus::split;
    c.angles.push_back(landed[i]);
  }
  for (auto& [lab, c] : cls) {
    std::sort(c.angles.begin(), c.angles.end());
    lam.classes.push_back(std::move(c));
  }
  std::sort(lam.classes.begin(), lam.classes.end(),
            [](const LamClass& a, const LamClass& b) { return a.angles.front() < b.angles.front(); });
  return lam;
}

/// Rational lamination on all angles with denominator <= N.
inline RationalLamination compute_lamination(const Polynomial& f, int N, const LaminationOptions& opt = {}) {
  return compute_lamination(f, sample_angles(N, f.degree()), N, opt);
}

enum class LamVerdict { equal, different, inconclusive };

inline const char* to_string(LamVerdict v) {
  switch (v) {
    case LamVerdict::equal: return "equal";
    case LamVerdict::different: return "different";
    case LamVerdict::inconclusive: return "inconclusive";
  }
  return "?";
}

struct LamComparison {
  LamVerdict verdict = LamVerdict::equal;
  std::vector<std::pair<Angle, Angle>> diff;  // pairs classed together in exactly one lamination
  std::vector<Angle> unresolved;              // union of both unresolved sets
  bool ok() const { return verdict == LamVerdict::equal; }
};

/// Compares two laminations on their common resolved sample.
inline LamComparison equal(const RationalLamination& a, const RationalLamination& b) {
  if (a.sample != b.sample) throw InputError("laminations have different sample specs");
  LamComparison out;
  std::vector<Angle> common;
  for (const auto& th : a.sample) {
    if (a.is_unresolved(th) || b.is_unresolved(th)) out.unresolved.push_back(th);
    else common.push_back(th);
  }
  std::vector<int> ca, cb;
  for (const auto& th : common) {
    ca.push_back(a.class_of(th));
    cb.push_back(b.class_of(th));
  }
  for (std::size_t i = 0; i < common.size(); ++i)
    for (std::size_t j = i + 1; j < common.size(); ++j)
      if ((ca[i] == ca[j]) != (cb[i] == cb[j])) out.diff.emplace_back(common[i], common[j]);
  if (!out.diff.empty()) out.verdict = LamVerdict::different;
  else if (!out.unresolved.empty()) out.verdict = LamVerdict::inconclusive;
  return out;
}

/// No two distinct classes link: for classes A != B, the chords of A never
/// separate two points of B on the circle.
inline bool check_unlinked(const RationalLamination& lam) {
  for (std::size_t i = 0; i < lam.classes.size(); ++i) {
    const auto& A = lam.classes[i].angles;
    if (A.size() < 2) continue;
    for (std::size_t j = 0; j < lam.classes.size(); ++j) {
      if (i == j) continue;
      const auto& B = lam.classes[j].angles;
      if (B.size() < 2) continue;
      // B must lie inside a single complementary arc of A's vertices
      for (std::size_t k = 0; k < A.size(); ++k) {
        const Angle& lo = A[k];
        const Angle& hi = A[(k + 1) % A.size()];
        std::size_t inside = 0;
        for (const auto& x : B)
          if (in_open_arc(x, lo, hi)) ++inside;
        if (inside != 0 && inside != B.size()) return false;
      }
    }
  }
  return true;
}

struct InvarianceReport {
  bool ok = true;
  int skipped = 0;  // angles whose image lies outside the resolved sample
  std::vector<std::size_t> violating_classes;
};

/// tau_d maps each class into a single class (images outside the sample are skipped).
inline InvarianceReport check_invariance(const RationalLamination& lam, int d) {
  InvarianceReport rep;
  for (std::size_t i = 0; i < lam.classes.size(); ++i) {
    int target = -2;
    for (const auto& th : lam.classes[i].angles) {
      const int c = lam.class_of(tau(th, d));
      if (c < 0) {
        ++rep.skipped;
        continue;
      }
      if (target == -2) target = c;
      else if (c != target) {
        rep.ok = false;
        rep.violating_classes.push_back(i);
        break;
      }
    }
  }
  return rep;
}

inline bool is_trivial(const RationalLamination& lam) {
  return lam.unresolved.empty() &&
         std::all_of(lam.classes.begin(), lam.classes.end(), [](const LamClass& c) { return c.angles.size() == 1; });
}

/// Restriction to angles with denominator <= M.
inline RationalLamination restrict_to(const RationalLamination& lam, int M) {
  RationalLamination out;
  out.N = M;
  out.degree = lam.degree;
  for (const auto& th : lam.sample)
    if (th.den() <= M) out.sample.push_back(th);
  for (const auto& c : lam.classes) {
    LamClass r = c;
    r.angles.clear();
    for (const auto& th : c.angles)
      if (th.den() <= M) r.angles.push_back(th);
    if (!r.angles.empty()) out.classes.push_back(std::move(r));
  }
  for (const auto& u : lam.unresolved)
    if (u.angle.den() <= M) out.unresolved.push_back(u);
  return out;
}

/// Non-singleton classes only.
inline std::vector<std::vector<Angle>> nontrivial_classes(const RationalLamination& lam) {
  std::vector<std::vector<Angle>> out;
  for (const auto& c : lam.classes)
    if (c.angles.size() > 1) out.push_back(c.angles);
  return out;
}

}  // namespace polydyn
