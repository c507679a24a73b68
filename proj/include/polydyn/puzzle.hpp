#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "angle.hpp"
#include "boettcher.hpp"
#include "local_boettcher.hpp"
#include "poly.hpp"
#include "rays.hpp"
#include "sector.hpp"

namespace polydyn {

/// A gap is the open circle arc between two consecutive graph angles.
struct Gap {
  Angle a, b;
};

struct PuzzlePiece {
  int depth = 0;
  int index = 0;
  int parent = -1;                 // index among the pieces of depth - 1
  std::vector<Gap> gaps;           // counterclockwise
  std::vector<Complex> boundary;   // closed chain of ray arcs and equipotential arcs

  std::string id() const {
    std::string s = "P" + std::to_string(depth) + ":";
    for (std::size_t i = 0; i < gaps.size(); ++i) s += (i ? "," : "") + std::string("(") + gaps[i].a.str() + "," + gaps[i].b.str() + ")";
    return s;
  }
  double diameter() const { return polydyn::diameter(boundary); }
};

struct PuzzleOptions {
  int p = 1;
  double landing_tol = 1e-6;
  int arc_samples = 32;
  RayOptions rays;
};

/// Puzzle built on the external rays of the forward orbit of theta* and their
/// preimages; the internal ray t* certifies the common landing point z*.
struct Puzzle {
  Polynomial f;
  int p = 1;
  Angle t_star, theta_star;
  Complex z_star{};
  double s = 0.0, s_prime = 0.0;
  std::vector<std::vector<PuzzlePiece>> levels;
  std::vector<std::vector<Complex>> graph;  // ray arcs of the deepest level, landing point last

  int depth() const { return static_cast<int>(levels.size()) - 1; }

  bool in_domain(Complex z) const {
    if (auto g = potential(f, z, 5000); g && *g >= std::log(s_prime)) return false;
    const Polynomial F = p == 1 ? f : f.iterate(p);
    Complex c{};
    for (int k = 0; k < p; ++k, c = f(c)) {
      try {
        if (auto m = SuperattractingCoordinate(F, c).modulus(z); m && *m <= s) return false;
      } catch (const InputError&) {
      }
    }
    return true;
  }

  /// Index of the depth-n piece containing z, nullopt when none does.
  std::optional<int> locate(int n, Complex z) const {
    if (!in_domain(z)) return std::nullopt;
    for (const auto& P : levels[static_cast<std::size_t>(n)])
      if (winding_number(P.boundary, z) != 0) return P.index;
    return std::nullopt;
  }
};

namespace detail {

inline std::vector<Angle> angle_orbit(const Angle& t, int d) {
  std::vector<Angle> out{t};
  for (Angle x = tau(t, d); !(x == t); x = tau(x, d)) {
    out.push_back(x);
    if (out.size() > 4096) throw InputError("angle " + t.str() + " is not periodic");
  }
  return out;
}

// Index of the arc of the cyclically sorted class containing x.
inline int arc_index(const std::vector<Angle>& cls, const Angle& x) {
  for (std::size_t i = 0; i < cls.size(); ++i)
    if (in_open_arc(x, cls[i], cls[(i + 1) % cls.size()])) return static_cast<int>(i);
  return -1;
}

}  // namespace detail

inline Puzzle build_puzzle(const Polynomial& f, const Angle& t_star, const Angle& theta_star, double s, double s_prime,
                           int depth, const PuzzleOptions& opt = {}) {
  if (depth < 0) throw InputError("puzzle depth must be >= 0");
  if (!(s > 0 && s < 1 && s_prime > 1)) throw InputError("puzzle needs s < 1 < s'");
  const int d = f.degree();
  const Polynomial F = opt.p == 1 ? f : f.iterate(opt.p);
  Puzzle P;
  P.f = f;
  P.p = opt.p;
  P.t_star = t_star;
  P.theta_star = theta_star;
  P.s = s;
  P.s_prime = s_prime;
  // z*: common landing point, repelling periodic
  InternalRay ir = trace_internal_ray(F, t_star, 0.0, opt.rays);
  Landing il = internal_landing_point(F, ir, opt.landing_tol);
  if (il.status != LandingStatus::landed || il.parabolic)
    throw ComputationError("internal ray t* = " + t_star.str() + " does not land at a repelling point: " + il.reason);
  RayAtlas atlas(f, opt.rays, opt.landing_tol);
  auto el = atlas.landing(theta_star);
  if (!el) throw ComputationError("external ray theta* = " + theta_star.str() + " does not land verifiably");
  if (std::abs(*el - il.point) > 1e3 * opt.landing_tol * (1.0 + std::abs(il.point)))
    throw ComputationError("rays t* and theta* land at different points");
  auto po = point_orbit(f, il.point);
  if (!po || po->preperiod != 0) throw ComputationError("z* is not periodic");
  P.z_star = il.point;

  std::vector<Angle> angles = detail::angle_orbit(theta_star, d);
  std::sort(angles.begin(), angles.end());
  const double gp = std::log(s_prime);
  for (int n = 0; n <= depth; ++n) {
    if (n > 0) {
      std::vector<Angle> next;
      for (const auto& t : angles)
        for (const auto& pre : t.preimages(d)) next.push_back(pre);
      std::sort(next.begin(), next.end());
      next.erase(std::unique(next.begin(), next.end()), next.end());
      angles = std::move(next);
    }
    // landing classes
    std::vector<Complex> land(angles.size());
    for (std::size_t i = 0; i < angles.size(); ++i) {
      auto l = atlas.landing(angles[i]);
      if (!l) throw ComputationError("graph ray " + angles[i].str() + " at depth " + std::to_string(n) + " does not land");
      land[i] = *l;
    }
    std::vector<std::vector<Angle>> classes;
    std::vector<int> class_of(angles.size(), -1);
    for (std::size_t i = 0; i < angles.size(); ++i) {
      if (class_of[i] >= 0) continue;
      class_of[i] = static_cast<int>(classes.size());
      classes.push_back({angles[i]});
      for (std::size_t j = i + 1; j < angles.size(); ++j)
        if (class_of[j] < 0 && std::abs(land[i] - land[j]) < 1e-7 * (1.0 + std::abs(land[i]))) {
          class_of[j] = class_of[i];
          classes.back().push_back(angles[j]);
        }
    }
    // gaps grouped by their position relative to every class
    std::map<std::vector<int>, std::vector<std::size_t>> groups;
    std::vector<std::vector<int>> labels;
    const std::size_t m = angles.size();
    for (std::size_t i = 0; i < m; ++i) {
      const Angle& a = angles[i];
      const Angle& b = angles[(i + 1) % m];
      const Angle mid = m == 1 ? a + Angle(1, 2) : a + Angle(arc_length(a, b).num(), arc_length(a, b).den() * 2);
      std::vector<int> label;
      for (const auto& c : classes)
        if (c.size() > 1) label.push_back(detail::arc_index(c, mid));
      groups[label].push_back(i);
    }
    std::vector<PuzzlePiece> pieces;
    for (auto& [label, idx] : groups) {
      PuzzlePiece piece;
      piece.depth = n;
      piece.index = static_cast<int>(pieces.size());
      for (std::size_t i : idx) {
        const Angle& a = angles[i];
        const Angle& b = angles[(i + 1) % m];
        piece.gaps.push_back({a, b});
        auto ra = detail::ray_below(atlas.ray(a).points, gp, land[i]);
        auto rb = detail::ray_below(atlas.ray(b).points, gp, land[(i + 1) % m]);
        auto arc = external_arc(atlas, a, m == 1 ? a : b, gp, opt.arc_samples);
        piece.boundary.insert(piece.boundary.end(), ra.rbegin(), ra.rend() - 1);
        piece.boundary.insert(piece.boundary.end(), arc.begin(), arc.end());
        piece.boundary.insert(piece.boundary.end(), rb.begin() + 1, rb.end());
      }
      pieces.push_back(std::move(piece));
    }
    // nesting: the gaps of a deeper piece lie inside gaps of its parent
    if (n > 0) {
      for (auto& piece : pieces) {
        const Gap& g = piece.gaps.front();
        const Angle mid = g.a + Angle(arc_length(g.a, g.b).num(), arc_length(g.a, g.b).den() * 2);
        for (const auto& par : P.levels.back()) {
          for (const auto& pg : par.gaps)
            if (in_open_arc(mid, pg.a, pg.b) || (par.gaps.size() == 1 && pg.a == pg.b)) piece.parent = par.index;
          if (piece.parent >= 0) break;
        }
      }
    }
    P.levels.push_back(std::move(pieces));
    if (n == depth) {
      for (std::size_t i = 0; i < m; ++i) P.graph.push_back(detail::ray_below(atlas.ray(angles[i]).points, gp, land[i]));
    }
  }
  return P;
}

struct ImpressionLink {
  int depth = 0;
  int piece = -1;
  double diameter = 0.0;
};

/// Chain P_0(z) > P_1(z) > ... of puzzle pieces containing z.
inline std::vector<ImpressionLink> impression(const Puzzle& P, Complex z, int depth = -1, double graph_band = 1e-6) {
  if (depth < 0 || depth > P.depth()) depth = P.depth();
  for (const auto& arc : P.graph)
    if (distance_to_polyline(arc, z, false) < graph_band) throw ComputationError("on graph");
  if (!P.in_domain(z)) throw ComputationError("not in X");
  std::vector<ImpressionLink> chain;
  for (int n = 0; n <= depth; ++n) {
    auto k = P.locate(n, z);
    if (!k) throw ComputationError("no depth-" + std::to_string(n) + " piece contains the point");
    chain.push_back({n, *k, P.levels[static_cast<std::size_t>(n)][static_cast<std::size_t>(*k)].diameter()});
  }
  return chain;
}

}  // namespace polydyn
