#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "local_boettcher.hpp"
#include "poly.hpp"
#include "roots.hpp"

namespace polydyn {

enum class CycleKind { superattracting, attracting, repelling, indifferent };

inline const char* to_string(CycleKind k) {
  switch (k) {
    case CycleKind::superattracting: return "superattracting";
    case CycleKind::attracting: return "attracting";
    case CycleKind::repelling: return "repelling";
    case CycleKind::indifferent: return "indifferent";
  }
  return "?";
}

inline constexpr double kSuperattractingBound = 1e-10;
inline constexpr double kIndifferenceBand = 1e-3;

inline CycleKind classify_multiplier(Complex m, double tau_ind = kIndifferenceBand) {
  const double a = std::abs(m);
  if (a < kSuperattractingBound) return CycleKind::superattracting;
  if (a < 1.0 - tau_ind) return CycleKind::attracting;
  if (a > 1.0 + tau_ind) return CycleKind::repelling;
  return CycleKind::indifferent;
}

inline bool is_attracting(CycleKind k) { return k == CycleKind::superattracting || k == CycleKind::attracting; }

struct CycleInfo {
  int period = 1;
  std::vector<Complex> points;
  Complex multiplier{};
  CycleKind kind = CycleKind::repelling;
};

struct CycleOptions {
  double tol = 1e-9;
  double tau_ind = kIndifferenceBand;
  double search_radius = 0.0;  // 0: use the escape radius of f
};

struct CycleReport {
  std::vector<CycleInfo> cycles;
  std::vector<int> roots_in_box;  // per period q (index q-1): roots of f^q(z) - z found in the box
  std::vector<std::string> warnings;
};

/// Multiplier (f^q)'(z) by the chain rule along the cycle through z.
inline Complex cycle_multiplier(const Polynomial& f, Complex z, int q) {
  return iterate_with_derivative(f, z, q).second;
}

namespace detail {

// Newton correction for f^q(z) - z. Once the orbit is far out, the ratio
// f^q / (f^q)' is propagated multiplicatively so nothing overflows.
inline Complex periodic_newton(const Polynomial& f, Complex z, int q) {
  Complex w = z, dw{1.0};
  for (int i = 0; i < q; ++i) {
    if (std::abs(w) > 1e30) {
      Complex r = w / dw;
      for (int j = i; j < q; ++j) r /= static_cast<double>(f.degree());
      return r;
    }
    auto [v, dv] = f.eval_with_derivative(w);
    dw *= dv;
    w = v;
  }
  return (w - z) / (dw - 1.0);
}

}  // namespace detail

/// Every cycle of exact period q <= max_period lying in the search box,
/// reported once, with chain-rule multipliers.
inline CycleReport find_cycles(const Polynomial& f, int max_period, const CycleOptions& opt = {}) {
  if (max_period < 1) throw InputError("max_period must be >= 1");
  if (max_period > 12) throw InputError("max_period above desk scale (12)");
  const int d = f.degree();
  const double box = opt.search_radius > 0 ? opt.search_radius : escape_radius(f);
  CycleReport rep;
  for (int q = 1; q <= max_period; ++q) {
    const double n_roots = std::pow(static_cast<double>(d), q);
    if (n_roots > 5000) throw InputError("f^q has too many periodic points for desk scale");
    const int n = static_cast<int>(n_roots);
    RootOptions ro;
    ro.max_iter = 2000;
    RootResult rr = aberth(n, std::min(box, 1.0 + escape_radius(f)),
                           [&](Complex z) { return detail::periodic_newton(f, z, q); }, ro);
    if (!rr.converged) rep.warnings.push_back("root finder did not fully converge for period " + std::to_string(q));
    int in_box = 0;
    std::vector<Complex> fresh;
    for (Complex z : rr.roots) {
      if (!is_finite(z) || std::abs(z) > box) continue;
      ++in_box;
      // skip points of a proper divisor period
      bool lower = false;
      for (int k = 1; k < q && !lower; ++k) {
        if (q % k) continue;
        auto w = orbit_point(f, z, k);
        if (w && std::abs(*w - z) < 1e-6 * (1.0 + std::abs(z))) lower = true;
      }
      if (!lower) fresh.push_back(z);
    }
    rep.roots_in_box.push_back(in_box);
    if (in_box < n)
      rep.warnings.push_back("period " + std::to_string(q) + ": found " + std::to_string(in_box) +
                             " of " + std::to_string(n) + " periodic points in the search box");
    // group into cycles
    const double merge = 1e-6;
    std::vector<char> used(fresh.size(), 0);
    for (std::size_t i = 0; i < fresh.size(); ++i) {
      if (used[i]) continue;
      bool known = false;
      for (const auto& c : rep.cycles) {
        if (c.period != q) continue;
        for (Complex p : c.points)
          if (std::abs(p - fresh[i]) < merge * (1.0 + std::abs(p))) known = true;
      }
      used[i] = 1;
      if (known) continue;
      CycleInfo cyc;
      cyc.period = q;
      Complex w = fresh[i];
      for (int k = 0; k < q; ++k) {
        cyc.points.push_back(w);
        w = f(w);
      }
      for (std::size_t j = i + 1; j < fresh.size(); ++j)
        for (Complex p : cyc.points)
          if (std::abs(p - fresh[j]) < merge * (1.0 + std::abs(p))) used[j] = 1;
      cyc.multiplier = cycle_multiplier(f, cyc.points[0], q);
      cyc.kind = classify_multiplier(cyc.multiplier, opt.tau_ind);
      rep.cycles.push_back(std::move(cyc));
    }
  }
  return rep;
}

enum class OrbitFate { attracted, escaped, julia, undecided };

inline const char* to_string(OrbitFate f) {
  switch (f) {
    case OrbitFate::attracted: return "attracted";
    case OrbitFate::escaped: return "escaped";
    case OrbitFate::julia: return "presumed-julia";
    case OrbitFate::undecided: return "undecided";
  }
  return "?";
}

struct CriticalFate {
  Complex point;
  int multiplicity = 1;
  OrbitFate fate = OrbitFate::undecided;
  int cycle = -1;       // index into BasinReport::cycles when attracted
  int iterations = 0;   // iterates until the decision
  double level = 0.0;   // internal modulus (superattracting) or exp(green) (escaping), when computed
};

struct BasinOptions {
  int max_period = 6;
  int n_iter = 100000;
  double attract_tol = 1e-6;
  // A critical point whose internal modulus in a superattracting basin is at
  // least 1 - julia_band, or whose exponential Green value is at most
  // 1 + julia_band, is presumed to lie in the Julia set at this resolution.
  double julia_band = 0.0;
  CycleOptions cycles;
};

struct BasinReport {
  std::vector<CycleInfo> cycles;           // attracting cycles only
  std::vector<CriticalFate> critical;
  std::vector<int> attracted_count;        // per attracting cycle, with multiplicity
  std::vector<std::string> warnings;

  bool all_resolved() const {
    return std::all_of(critical.begin(), critical.end(),
                       [](const CriticalFate& c) { return c.fate == OrbitFate::attracted || c.fate == OrbitFate::escaped; });
  }
};

namespace detail {

// exp of the Green function by the limit formula, starting from an escaping orbit
inline double escape_level(const Polynomial& f, Complex z) {
  const double d = f.degree();
  double log_g = 0.0;
  double w = 1.0;
  for (int n = 0; n < 4000; ++n) {
    const double a = std::abs(z);
    if (a > 1e40 || !is_finite(z)) break;
    z = f(z);
    w /= d;
    if (std::abs(z) > 1e40) {
      log_g = w * std::log(std::abs(z));
      break;
    }
  }
  return std::exp(log_g);
}

}  // namespace detail

/// Fate of every critical point of f: attracted to a found attracting cycle,
/// escaping, presumed Julia (inside the resolution band) or undecided.
inline BasinReport classify_basins(const Polynomial& f, const BasinOptions& opt = {}) {
  BasinReport rep;
  CycleReport cr = find_cycles(f, opt.max_period, opt.cycles);
  rep.warnings = cr.warnings;
  for (auto& c : cr.cycles)
    if (is_attracting(c.kind)) rep.cycles.push_back(c);
  rep.attracted_count.assign(rep.cycles.size(), 0);
  const double esc = escape_radius(f);
  for (const auto& cp : critical_points(f)) {
    CriticalFate fate{cp.z, cp.multiplicity};
    Complex z = cp.z;
    for (int n = 0; n <= opt.n_iter; ++n) {
      if (std::abs(z) > esc || !is_finite(z)) {
        fate.fate = OrbitFate::escaped;
        fate.iterations = n;
        break;
      }
      for (std::size_t i = 0; i < rep.cycles.size() && fate.fate == OrbitFate::undecided; ++i) {
        for (std::size_t j = 0; j < rep.cycles[i].points.size(); ++j) {
          if (std::abs(z - rep.cycles[i].points[j]) < opt.attract_tol) {
            fate.fate = OrbitFate::attracted;
            fate.cycle = static_cast<int>(i);
            fate.iterations = n;
            break;
          }
        }
      }
      if (fate.fate != OrbitFate::undecided) break;
      z = f(z);
      if (n == opt.n_iter) fate.iterations = n;
    }
    if (fate.fate == OrbitFate::undecided) fate.fate = OrbitFate::julia;
    if (fate.fate == OrbitFate::escaped) {
      fate.level = detail::escape_level(f, cp.z);
      if (opt.julia_band > 0 && fate.level <= 1.0 + opt.julia_band) fate.fate = OrbitFate::julia;
    } else if (fate.fate == OrbitFate::attracted && opt.julia_band > 0) {
      const CycleInfo& cyc = rep.cycles[static_cast<std::size_t>(fate.cycle)];
      if (cyc.kind == CycleKind::superattracting && std::pow(f.degree(), cyc.period) <= 64) {
        // internal level of the critical point relative to the return map
        const int n = fate.iterations;
        Complex target = *orbit_point(f, cp.z, n);
        std::size_t j = 0;
        for (std::size_t k = 0; k < cyc.points.size(); ++k)
          if (std::abs(target - cyc.points[k]) < std::abs(target - cyc.points[j])) j = k;
        try {
          SuperattractingCoordinate sc(f.iterate(cyc.period), cyc.points[j]);
          auto m = sc.modulus(target);
          if (m) {
            fate.level = std::pow(*m, std::pow(sc.local_degree(), -static_cast<double>(n) / cyc.period));
            if (fate.level >= 1.0 - opt.julia_band) fate.fate = OrbitFate::julia;
          }
        } catch (const InputError&) {
          // cycle point too inaccurate to center a coordinate on; keep the plain verdict
        }
      }
    }
    if (fate.fate == OrbitFate::attracted) rep.attracted_count[static_cast<std::size_t>(fate.cycle)] += cp.multiplicity;
    rep.critical.push_back(fate);
  }
  return rep;
}

}  // namespace polydyn
