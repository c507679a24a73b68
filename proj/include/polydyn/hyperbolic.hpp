#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "continuation.hpp"
#include "cycles.hpp"
#include "lamination.hpp"
#include "poly.hpp"
#include "roots.hpp"

namespace polydyn {

struct DisjointType {
  bool value = false;
  std::string rationale;
};

inline DisjointType disjoint_type(const BasinReport& br, int degree) {
  for (const auto& c : br.critical)
    if (c.fate == OrbitFate::julia || c.fate == OrbitFate::undecided)
      throw ComputationError("not hyperbolic at this bound");
  DisjointType out;
  for (const auto& c : br.critical)
    if (c.fate == OrbitFate::escaped) {
      out.rationale = "a critical point escapes";
      return out;
    }
  for (std::size_t i = 0; i < br.cycles.size(); ++i)
    if (br.attracted_count[i] != 1) {
      out.rationale = "attracting cycle of period " + std::to_string(br.cycles[i].period) + " attracts " +
                      std::to_string(br.attracted_count[i]) + " critical points";
      return out;
    }
  if (static_cast<int>(br.cycles.size()) != degree - 1) {
    out.rationale = std::to_string(br.cycles.size()) + " attracting cycles, expected " + std::to_string(degree - 1);
    return out;
  }
  out.value = true;
  out.rationale = std::to_string(degree - 1) + " attracting cycles, one critical point each";
  return out;
}

/// Disjoint type: every critical point attracted, one per attracting cycle,
/// d - 1 cycles. Throws "not hyperbolic at this bound" on unresolved orbits.
inline DisjointType disjoint_type(const Polynomial& f, int max_period = 6) {
  BasinOptions bo;
  bo.max_period = max_period;
  return disjoint_type(classify_basins(f, bo), f.degree());
}

/// Marked form of a monic polynomial: conjugated by a translation so that a
/// critical point sits at 0 when the linear coefficient does not vanish.
inline MarkedParams to_marked(const Polynomial& f) {
  if (f.marked()) return *f.marked();
  const int d = f.degree();
  if (d < 2 || !f.is_monic(1e-12)) throw InputError("marked form needs a monic polynomial of degree >= 2");
  Polynomial g = f;
  if (std::abs(f.coefficient(1)) > 1e-12) g = f.translated(critical_points(f).front().z);
  // critical points of g other than one copy of 0
  std::vector<Complex> crit;
  for (const auto& cp : critical_points(g))
    for (int k = 0; k < cp.multiplicity; ++k) crit.push_back(cp.z);
  auto zero = std::min_element(crit.begin(), crit.end(), [](Complex a, Complex b) { return std::abs(a) < std::abs(b); });
  crit.erase(zero);
  MarkedParams a;
  a.degree = d;
  a.b = g.coefficient(0);
  if (d >= 3) {
    a.c = crit[0];
    a.extra.assign(crit.begin() + 1, crit.end());
  }
  return a;
}

struct CenterResult {
  MarkedParams a;
  double residual = 0.0;
  int iterations = 0;
};

/// Newton on f^{q_i}(c_i) = c_i for every marked critical point c_i
/// (0, c, c_2, ...) with the given periods.
inline CenterResult find_center(const MarkedParams& a0, const std::vector<int>& periods, double tol = 1e-12,
                                int max_iter = 100) {
  a0.validate();
  const int d = a0.degree;
  if (static_cast<int>(periods.size()) != d - 1) throw InputError("need one period per marked critical point");
  for (int q : periods)
    if (q < 1) throw InputError("periods must be >= 1");
  auto fn = [&](const std::vector<Complex>& x) {
    const MarkedParams a = MarkedParams::from_coordinates(d, x);
    const Polynomial f = build_marked(a);
    const auto crit = a.critical_points();
    std::vector<Complex> r;
    for (std::size_t i = 0; i < crit.size(); ++i) {
      auto z = orbit_point(f, crit[i], periods[i]);
      r.push_back(z ? *z - crit[i] : Complex(INFINITY, 0));
    }
    return r;
  };
  std::vector<Complex> x = a0.coordinates();
  double box = 0.0;
  for (Complex v : x) box = std::max(box, std::abs(v));
  box = 10.0 * (1.0 + box);
  std::vector<int> cols(x.size());
  for (std::size_t j = 0; j < cols.size(); ++j) cols[j] = static_cast<int>(j);
  const int rows = d - 1;
  for (int it = 0; it < max_iter; ++it) {
    const auto r = fn(x);
    const double rn = max_abs(r);
    if (rn < tol) return {MarkedParams::from_coordinates(d, x), rn, it};
    Eigen::MatrixXcd J = detail::holomorphic_jacobian(fn, x, cols, rows);
    Eigen::VectorXcd rv(rows);
    for (int i = 0; i < rows; ++i) rv(i) = r[static_cast<std::size_t>(i)];
    Eigen::VectorXcd dx = J.fullPivLu().solve(rv);
    if (!dx.allFinite()) throw ComputationError("center Newton: singular Jacobian");
    double lambda = 1.0;
    bool moved = false;
    for (int half = 0; half < 30 && !moved; ++half, lambda *= 0.5) {
      std::vector<Complex> xn = x;
      for (int j = 0; j < rows; ++j) xn[static_cast<std::size_t>(j)] -= lambda * dx(j);
      const double rn2 = max_abs(fn(xn));
      if (std::isfinite(rn2) && rn2 < rn) {
        x = xn;
        moved = true;
      }
    }
    if (!moved) {
      // no decrease: accept the residual if it is at the rounding floor
      if (rn < 1e3 * tol) return {MarkedParams::from_coordinates(d, x), rn, it};
      throw ComputationError("center Newton stalled at residual " + std::to_string(rn));
    }
    for (Complex v : x)
      if (std::abs(v) > box) throw ComputationError("center Newton left the parameter box");
  }
  const double rn = max_abs(fn(x));
  if (rn < tol) return {MarkedParams::from_coordinates(d, x), rn, max_iter};
  throw ComputationError("center Newton did not converge (residual " + std::to_string(rn) + ")");
}

/// Periods read off from the attracting cycles of a hyperbolic parameter.
inline std::vector<int> center_periods(const MarkedParams& a, int max_period = 6) {
  const Polynomial f = build_marked(a);
  BasinOptions bo;
  bo.max_period = max_period;
  BasinReport br = classify_basins(f, bo);
  std::vector<int> periods;
  for (Complex c : a.critical_points()) {
    auto it = std::min_element(br.critical.begin(), br.critical.end(), [&](const CriticalFate& x, const CriticalFate& y) {
      return std::abs(x.point - c) < std::abs(y.point - c);
    });
    if (it == br.critical.end() || it->fate != OrbitFate::attracted)
      throw ComputationError("not hyperbolic at this bound: a critical point is not attracted");
    periods.push_back(br.cycles[static_cast<std::size_t>(it->cycle)].period);
  }
  return periods;
}

inline CenterResult find_center(const MarkedParams& a, int max_period = 6) {
  return find_center(a, center_periods(a, max_period));
}

/// Distance between f and g modulo affine conjugacy: g is translated to put
/// each of its critical points at 0 and rotated by (d-1)-th roots of unity.
inline double conjugacy_distance(const Polynomial& f, const Polynomial& g) {
  const int d = f.degree();
  if (g.degree() != d) return INFINITY;
  auto fc = f;
  if (std::abs(f.coefficient(1)) > 1e-12) fc = f.translated(critical_points(f).front().z);
  double best = INFINITY;
  for (const auto& cp : critical_points(g)) {
    const Polynomial h = g.translated(cp.z);
    for (int r = 0; r < d - 1; ++r) {
      const Complex w = std::polar(1.0, kTwoPi * r / (d - 1));
      double dist = 0.0;
      Complex wk{1.0 / w};  // w^{k-1} for k = 0
      for (int k = 0; k <= d; ++k, wk *= w) dist = std::max(dist, std::abs(h.coefficient(k) * wk - fc.coefficient(k)));
      best = std::min(best, dist);
    }
  }
  return best;
}

enum class ProbeVerdict { combinatorially_distinct, same_component, different_component, non_rigid, inconclusive };

inline const char* to_string(ProbeVerdict v) {
  switch (v) {
    case ProbeVerdict::combinatorially_distinct: return "combinatorially distinct";
    case ProbeVerdict::same_component: return "same component";
    case ProbeVerdict::different_component: return "different component";
    case ProbeVerdict::non_rigid: return "non-rigid configuration";
    case ProbeVerdict::inconclusive: return "inconclusive";
  }
  return "?";
}

struct ProbeOptions {
  int max_period = 6;
  double julia_band = 1e-4;
  double center_tol = 1e-8;
  LaminationOptions lamination;
};

struct ProbeReport {
  ProbeVerdict verdict = ProbeVerdict::inconclusive;
  std::string rationale;
  LamComparison laminations;
  int julia_critical_f = 0, julia_critical_g = 0;
  std::optional<DisjointType> disjoint_f, disjoint_g;
  std::optional<MarkedParams> center_f, center_g;
  double center_distance = INFINITY;
};

/// Compares laminations at bound N; for equal laminations of disjoint-type
/// maps compares the centers of their components.
inline ProbeReport rigidity_probe(const Polynomial& f, const Polynomial& g, int N, const ProbeOptions& opt = {}) {
  ProbeReport rep;
  const RationalLamination lf = compute_lamination(f, N, opt.lamination);
  const RationalLamination lg = compute_lamination(g, N, opt.lamination);
  rep.laminations = equal(lf, lg);
  if (rep.laminations.verdict == LamVerdict::different) {
    rep.verdict = ProbeVerdict::combinatorially_distinct;
    rep.rationale = "laminations differ at bound N=" + std::to_string(N);
    return rep;
  }
  if (rep.laminations.verdict == LamVerdict::inconclusive) {
    rep.verdict = ProbeVerdict::inconclusive;
    rep.rationale = "laminations agree only on the resolved angles";
    return rep;
  }
  BasinOptions bo;
  bo.max_period = opt.max_period;
  bo.julia_band = opt.julia_band;
  const BasinReport bf = classify_basins(f, bo), bg = classify_basins(g, bo);
  auto julia = [](const BasinReport& br) {
    int n = 0;
    for (const auto& c : br.critical)
      if (c.fate == OrbitFate::julia) n += c.multiplicity;
    return n;
  };
  rep.julia_critical_f = julia(bf);
  rep.julia_critical_g = julia(bg);
  auto dtype = [&](const BasinReport& br, int d) -> std::optional<DisjointType> {
    try {
      return disjoint_type(br, d);
    } catch (const ComputationError&) {
      return std::nullopt;
    }
  };
  rep.disjoint_f = dtype(bf, f.degree());
  rep.disjoint_g = dtype(bg, g.degree());
  const bool df = rep.disjoint_f && rep.disjoint_f->value;
  const bool dg = rep.disjoint_g && rep.disjoint_g->value;
  if (!df) {
    rep.verdict = ProbeVerdict::non_rigid;
    rep.rationale = "equal laminations at N=" + std::to_string(N) + " while the first map is not of disjoint type (" +
                    (rep.disjoint_f ? rep.disjoint_f->rationale : std::string("not hyperbolic at this bound")) +
                    "); critical points presumed in the Julia set: " + std::to_string(rep.julia_critical_f) + " vs " +
                    std::to_string(rep.julia_critical_g);
    return rep;
  }
  if (!dg) {
    rep.verdict = ProbeVerdict::different_component;
    rep.rationale = "equal laminations, but only the first map is of disjoint type";
    return rep;
  }
  const auto cf = find_center(to_marked(f), opt.max_period);
  const auto cg = find_center(to_marked(g), opt.max_period);
  rep.center_f = cf.a;
  rep.center_g = cg.a;
  rep.center_distance = conjugacy_distance(build_marked(cf.a), build_marked(cg.a));
  const bool same = rep.center_distance < opt.center_tol;
  rep.verdict = same ? ProbeVerdict::same_component : ProbeVerdict::different_component;
  rep.rationale = std::string("both maps of disjoint type; centers ") + (same ? "agree" : "differ") +
                  " up to affine conjugacy (distance " + std::to_string(rep.center_distance) + ")";
  return rep;
}

}  // namespace polydyn
