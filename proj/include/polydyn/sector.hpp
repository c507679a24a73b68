#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "angle.hpp"
#include "boettcher.hpp"
#include "digits.hpp"
#include "local_boettcher.hpp"
#include "poly.hpp"
#include "rays.hpp"

namespace polydyn {

enum class Membership { inside, outside, boundary };

inline const char* to_string(Membership m) {
  switch (m) {
    case Membership::inside: return "inside";
    case Membership::outside: return "outside";
    case Membership::boundary: return "boundary";
  }
  return "?";
}

inline double distance_to_polyline(const std::vector<Complex>& pts, Complex z, bool closed = true) {
  double best = INFINITY;
  const std::size_t n = pts.size();
  if (n == 1) return std::abs(z - pts[0]);
  const std::size_t segs = closed ? n : n - 1;
  for (std::size_t i = 0; i < segs; ++i) {
    const Complex a = pts[i], b = pts[(i + 1) % n];
    const Complex ab = b - a;
    const double len2 = std::norm(ab);
    double t = len2 > 0 ? ((z - a) * std::conj(ab)).real() / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    best = std::min(best, std::abs(z - (a + t * ab)));
  }
  return best;
}

/// Winding number of a closed polyline around z.
inline int winding_number(const std::vector<Complex>& pts, Complex z) {
  int wn = 0;
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Complex a = pts[i], b = pts[(i + 1) % n];
    const double cross = (b.real() - a.real()) * (z.imag() - a.imag()) - (z.real() - a.real()) * (b.imag() - a.imag());
    if (a.imag() <= z.imag()) {
      if (b.imag() > z.imag() && cross > 0) ++wn;
    } else if (b.imag() <= z.imag() && cross < 0) {
      --wn;
    }
  }
  return wn;
}

inline Membership polygon_membership(const std::vector<Complex>& pts, Complex z, double band) {
  if (distance_to_polyline(pts, z) < band) return Membership::boundary;
  return winding_number(pts, z) != 0 ? Membership::inside : Membership::outside;
}

inline double diameter(const std::vector<Complex>& pts) {
  double d = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) d = std::max(d, std::abs(pts[i] - pts[j]));
  return d;
}

/// Preperiod and period of a point's orbit, detected by return within tol.
struct PointOrbit {
  int preperiod = 0;
  int period = 0;
};

inline std::optional<PointOrbit> point_orbit(const Polynomial& f, Complex z, int max_len = 64, double tol = 1e-7) {
  std::vector<Complex> orbit{z};
  for (int n = 1; n <= max_len; ++n) {
    const Complex w = f(orbit.back());
    if (!is_finite(w)) return std::nullopt;
    for (int m = n - 1; m >= 0; --m) {
      if (std::abs(w - orbit[static_cast<std::size_t>(m)]) < tol * (1.0 + std::abs(w))) return PointOrbit{m, n - m};
    }
    orbit.push_back(w);
  }
  return std::nullopt;
}

/// Cache of traced external rays of one polynomial and their verified landings.
class RayAtlas {
 public:
  explicit RayAtlas(const Polynomial& f, RayOptions opt = {}, double tol = 1e-6) : f_(f), opt_(opt), tol_(tol) {}

  const Polynomial& poly() const { return f_; }
  double tolerance() const { return tol_; }

  ExternalRay& ray(const Angle& t) {
    auto it = rays_.find(t.str());
    if (it == rays_.end()) it = rays_.emplace(t.str(), trace_external_ray(f_, t, opt_)).first;
    return it->second;
  }

  /// Verified landing point, or nullopt when the ray does not land verifiably.
  std::optional<Complex> landing(const Angle& t) {
    ExternalRay& r = ray(t);
    if (r.landing.status == LandingStatus::pending) {
      RaySeedSource seeds = [this](const Angle& img) -> std::optional<Complex> {
        ExternalRay& o = ray(img);
        if (o.landing.status == LandingStatus::landed) return o.landing.point;
        auto ex = ray_extrapolant(o);
        if (!ex) return std::nullopt;
        return ex->first;
      };
      landing_point(f_, r, tol_, seeds);
    }
    if (r.landing.status != LandingStatus::landed) return std::nullopt;
    return r.landing.point;
  }

  /// Rational angles whose rays land at z (z eventually periodic). Periodic
  /// rays of period q*r are searched for r = 1, 2, ... while d^{qr} <= max_den,
  /// then pulled back along the preperiodic part of the orbit.
  std::vector<Angle> angles_landing_at(Complex z, long long max_den = 4096) {
    const int d = f_.degree();
    auto po = point_orbit(f_, z);
    if (!po) return {};
    std::vector<Complex> orbit{z};
    for (int j = 0; j < po->preperiod; ++j) orbit.push_back(f_(orbit.back()));
    const Complex w = orbit.back();
    auto near = [&](Complex a, Complex b) { return std::abs(a - b) < 1e3 * tol_ * (1.0 + std::abs(b)); };
    std::vector<Angle> found;
    for (int r = 1; found.empty(); ++r) {
      const int n = po->period * r;
      const double den = std::pow(static_cast<double>(d), n) - 1.0;
      if (den > static_cast<double>(max_den)) break;
      const long long D = static_cast<long long>(den);
      for (long long k = 0; k < D; ++k) {
        const Angle t(k, D);
        if (orbit_type(t, d).period != n || orbit_type(t, d).preperiod != 0) continue;
        auto l = landing(t);
        if (l && near(*l, w)) found.push_back(t);
      }
    }
    for (int j = po->preperiod - 1; j >= 0 && !found.empty(); --j) {
      std::vector<Angle> next;
      for (const auto& t : found)
        for (const auto& pre : t.preimages(d)) {
          auto l = landing(pre);
          if (l && near(*l, orbit[static_cast<std::size_t>(j)])) next.push_back(pre);
        }
      found = std::move(next);
    }
    std::sort(found.begin(), found.end());
    return found;
  }

 private:
  Polynomial f_;
  RayOptions opt_;
  double tol_;
  std::map<std::string, ExternalRay> rays_;
};

namespace detail {

// Ray samples interpolated to the given potential (samples ordered by
// decreasing potential); nullopt if the ray never reaches it.
inline std::optional<Complex> at_potential(const std::vector<RaySample>& pts, double p) {
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (pts[i].potential <= p && pts[i - 1].potential >= p) {
      const double a = std::log(pts[i - 1].potential), b = std::log(pts[i].potential);
      const double u = a == b ? 0.0 : (std::log(p) - a) / (b - a);
      return pts[i - 1].z + u * (pts[i].z - pts[i - 1].z);
    }
  }
  return std::nullopt;
}

// Samples of a ray from potential p down to the landing point.
inline std::vector<Complex> ray_below(const std::vector<RaySample>& pts, double p, Complex landing) {
  std::vector<Complex> out;
  if (auto z = at_potential(pts, p)) out.push_back(*z);
  for (const auto& s : pts)
    if (s.potential < p) out.push_back(s.z);
  out.push_back(landing);
  return out;
}

inline std::vector<Angle> arc_angles(const Angle& a, const Angle& b, int n) {
  // a == b stands for the full turn
  const Angle len = arc_length(a, b);
  const BigInt num = a == b ? BigInt(1) : len.num(), den = a == b ? BigInt(1) : len.den();
  std::vector<Angle> out;
  for (int j = 0; j <= n; ++j) out.push_back(a + Angle(num * j, den * n));
  return out;
}

}  // namespace detail

/// Equipotential arc {G = p} from angle a to angle b counterclockwise.
inline std::vector<Complex> external_arc(RayAtlas& atlas, const Angle& a, const Angle& b, double p, int n) {
  const Polynomial& f = atlas.poly();
  ExteriorBoettcher bt(f);
  std::vector<Complex> out;
  const bool direct = std::exp(p) >= 1.2 * bt.reference_radius();
  for (const auto& t : detail::arc_angles(a, b, n)) {
    if (direct) {
      out.push_back(bt.psi(std::exp(p) * unit(t.to_double())));
      continue;
    }
    auto z = detail::at_potential(atlas.ray(t).points, p);
    if (!z) throw ComputationError("ray " + t.str() + " does not reach potential " + std::to_string(p));
    out.push_back(*z);
  }
  return out;
}

/// Internal equipotential arc {|phi^0| = s} of F from angle a to angle b counterclockwise.
inline std::vector<Complex> internal_arc(const Polynomial& F, const Angle& a, const Angle& b, double s, int n) {
  std::vector<Complex> out;
  const double p = -std::log(s);
  RayOptions opt;
  opt.early_stop = false;
  for (const auto& t : detail::arc_angles(a, b, n)) {
    InternalRay r = trace_internal_ray(F, t, 0.0, opt);
    if (r.points.front().potential <= p) {
      out.push_back(r.points.front().z);
      continue;
    }
    auto z = detail::at_potential(r.points, p);
    if (!z) throw ComputationError("internal ray " + t.str() + " blocked before level " + std::to_string(s));
    out.push_back(*z);
  }
  return out;
}

/// I = ((t-, t+)_+, (theta-, theta+)_+) with the common landing points.
struct Combinatorics {
  Angle t_minus, t_plus;
  Angle theta_minus, theta_plus;
  Complex z_minus{}, z_plus{};

  std::string str() const {
    return "((" + t_minus.str() + "," + t_plus.str() + "),(" + theta_minus.str() + "," + theta_plus.str() + "))";
  }
};

struct SectorOptions {
  int p = 1;                 // period of the superattracting point 0
  double band = 1e-6;        // on-boundary tolerance
  double landing_tol = 1e-6;
  int arc_samples = 512;
  RayOptions rays;
};

/// Sector S(I) of the basin component of 0, bounded by the internal rays t±,
/// the external rays theta± and, for the polygon, the equipotential at the
/// external rays' start potential.
struct Sector {
  Combinatorics comb;
  std::vector<Complex> boundary;
  std::vector<Complex> internal_minus, internal_plus;  // 0 -> z±
  std::vector<Complex> external_minus, external_plus;  // z± -> outer potential
  double outer_potential = 0.0;
  Polynomial f;
  double band = 1e-6;

  Membership contains(Complex z) const {
    if (distance_to_polyline(boundary, z) < band) return Membership::boundary;
    auto g = potential(f, z, 5000);
    if (g && *g >= outer_potential) {
      ExteriorBoettcher bt(f);
      if (std::abs(z) >= bt.reference_radius()) {
        double t = std::arg(bt.phi(z)) / kTwoPi;
        if (t < 0) t += 1.0;
        const double a = comb.theta_minus.to_double(), b = comb.theta_plus.to_double();
        const bool in = a < b ? (a < t && t < b) : (t > a || t < b);
        return in ? Membership::inside : Membership::outside;
      }
    }
    return winding_number(boundary, z) != 0 ? Membership::inside : Membership::outside;
  }
};

namespace detail {

struct InternalLanding {
  std::vector<Complex> points;  // from 0 to the landing point
  Landing landing;
};

inline InternalLanding land_internal(const Polynomial& F, const Angle& t, const SectorOptions& opt, const char* label) {
  InternalRay r = trace_internal_ray(F, t, 0.0, opt.rays);
  Landing l = internal_landing_point(F, r, opt.landing_tol);
  const std::string name = std::string("internal ray ") + label + " = " + t.str();
  if (l.status == LandingStatus::blocked)
    throw ComputationError(name + " blocked at s=" + std::to_string(l.threshold));
  if (l.status != LandingStatus::landed) throw ComputationError(name + " does not land: " + l.reason);
  if (l.parabolic) throw ComputationError(name + " lands at a parabolic point");
  InternalLanding out;
  out.points.push_back(Complex{});
  for (const auto& s : r.points) out.points.push_back(s.z);
  out.points.push_back(l.point);
  out.landing = l;
  return out;
}

inline bool on_critical_orbit(const Polynomial& f, Complex z) {
  for (const auto& cp : critical_points(f)) {
    Complex w = cp.z;
    for (int n = 1; n <= 64; ++n) {
      w = f(w);
      if (!is_finite(w)) break;
      if (std::abs(w - z) < 1e-8 * (1.0 + std::abs(z))) return true;
    }
  }
  return false;
}

}  // namespace detail

/// Builds S(I) after verifying (C1)-(C3); each failure is named.
inline Sector build_sector(const Polynomial& f, const Combinatorics& input, const SectorOptions& opt = {},
                           RayAtlas* atlas = nullptr) {
  RayAtlas local(f, opt.rays, opt.landing_tol);
  RayAtlas& at = atlas ? *atlas : local;
  const Polynomial F = opt.p == 1 ? f : f.iterate(opt.p);
  Sector S;
  S.f = f;
  S.band = opt.band;
  S.comb = input;
  // (C1), (C2)
  auto im = detail::land_internal(F, input.t_minus, opt, "t-");
  auto ip = detail::land_internal(F, input.t_plus, opt, "t+");
  for (auto [l, label] : {std::pair{&im, "t-"}, std::pair{&ip, "t+"}})
    if (detail::on_critical_orbit(f, l->landing.point))
      throw ComputationError(std::string("landing point of internal ray ") + label + " lies on a critical orbit");
  S.comb.z_minus = im.landing.point;
  S.comb.z_plus = ip.landing.point;
  // (C3)
  auto check_external = [&](const Angle& th, Complex z, const char* label) {
    auto l = at.landing(th);
    if (!l) throw ComputationError(std::string("external ray ") + label + " = " + th.str() + " does not land verifiably");
    if (std::abs(*l - z) > 1e3 * opt.landing_tol * (1.0 + std::abs(z)))
      throw ComputationError(std::string("external ray ") + label + " = " + th.str() + " lands " +
                             std::to_string(std::abs(*l - z)) + " away from z" + (label[5] == '-' ? "-" : "+"));
    return *l;
  };
  check_external(input.theta_minus, S.comb.z_minus, "theta-");
  check_external(input.theta_plus, S.comb.z_plus, "theta+");
  ExternalRay& rm = at.ray(input.theta_minus);
  ExternalRay& rp = at.ray(input.theta_plus);
  S.outer_potential = rm.points.front().potential;
  S.internal_minus = im.points;
  S.internal_plus = ip.points;
  for (auto it = rm.points.rbegin(); it != rm.points.rend(); ++it) S.external_minus.push_back(it->z);
  S.external_minus.insert(S.external_minus.begin(), S.comb.z_minus);
  for (auto it = rp.points.rbegin(); it != rp.points.rend(); ++it) S.external_plus.push_back(it->z);
  S.external_plus.insert(S.external_plus.begin(), S.comb.z_plus);
  // closed chain 0 -> z- -> out -> arc -> in -> z+ -> 0
  auto& B = S.boundary;
  B = S.internal_minus;
  B.insert(B.end(), S.external_minus.begin(), S.external_minus.end());
  const Angle len = arc_length(input.theta_minus, input.theta_plus);
  const int n_arc = std::max(8, static_cast<int>(opt.arc_samples * (input.theta_minus == input.theta_plus ? 1.0 : len.to_double())));
  auto arc = external_arc(at, input.theta_minus, input.theta_plus, S.outer_potential, n_arc);
  B.insert(B.end(), arc.begin() + 1, arc.end() - 1);
  B.insert(B.end(), S.external_plus.rbegin(), S.external_plus.rend());
  B.insert(B.end(), S.internal_plus.rbegin() + 1, S.internal_plus.rend() - 1);
  // orientation: the internal rays of the open arc must lie inside
  const Angle mid = input.t_minus + Angle(arc_length(input.t_minus, input.t_plus).num(),
                                          arc_length(input.t_minus, input.t_plus).den() * 2);
  RayOptions shallow = opt.rays;
  shallow.depth = 1;
  shallow.early_stop = false;
  InternalRay probe = trace_internal_ray(F, input.t_minus == input.t_plus ? input.t_minus + Angle(1, 2) : mid, 0.0, shallow);
  if (S.contains(probe.points.front().z) != Membership::inside)
    throw ComputationError("combinatorics " + input.str() + " does not bound the internal arc (orientation)");
  return S;
}

/// Combinatorics around the internal arc (t-, t+): landing points of the
/// internal rays, then the pair of external rays with the shortest external
/// arc that bounds a valid sector.
inline std::optional<Sector> find_sector(const Polynomial& f, const Angle& t_minus, const Angle& t_plus,
                                         const SectorOptions& opt, RayAtlas& atlas, std::string* why = nullptr) {
  const Polynomial F = opt.p == 1 ? f : f.iterate(opt.p);
  try {
    auto im = detail::land_internal(F, t_minus, opt, "t-");
    auto ip = detail::land_internal(F, t_plus, opt, "t+");
    auto am = atlas.angles_landing_at(im.landing.point);
    auto ap = atlas.angles_landing_at(ip.landing.point);
    if (am.empty() || ap.empty()) {
      if (why) *why = "no external ray found landing at z" + std::string(am.empty() ? "-" : "+");
      return std::nullopt;
    }
    std::vector<std::pair<double, std::pair<Angle, Angle>>> pairs;
    for (const auto& a : am)
      for (const auto& b : ap) pairs.push_back({a == b ? 1.0 : arc_length(a, b).to_double(), {a, b}});
    std::sort(pairs.begin(), pairs.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    for (const auto& [len, ab] : pairs) {
      Combinatorics c{t_minus, t_plus, ab.first, ab.second};
      try {
        return build_sector(f, c, opt, &atlas);
      } catch (const ComputationError& e) {
        if (why) *why = e.what();
      }
    }
  } catch (const ComputationError& e) {
    if (why) *why = e.what();
  }
  return std::nullopt;
}

/// Q(I, s, s'): the sector truncated by the internal level s and the
/// external level s'.
struct Quadrilateral {
  Sector sector;
  double s = 0.0, s_prime = 0.0;
  std::vector<Complex> boundary;
  int p = 1;

  Membership contains(Complex z) const {
    const Membership m = sector.contains(z);
    if (m != Membership::inside) return m;
    if (auto g = potential(sector.f, z, 5000); g && *g >= std::log(s_prime)) return Membership::outside;
    const Polynomial F = p == 1 ? sector.f : sector.f.iterate(p);
    if (auto m0 = SuperattractingCoordinate(F).modulus(z); m0 && *m0 <= s) return Membership::outside;
    return Membership::inside;
  }
  double diameter() const { return polydyn::diameter(boundary); }
};

inline Quadrilateral build_quadrilateral(const Sector& S, double s, double s_prime, RayAtlas& atlas,
                                         const SectorOptions& opt = {}, int arc_samples = 24) {
  if (!(s > 0 && s < 1 && s_prime > 1)) throw InputError("quadrilateral needs s < 1 < s'");
  const Polynomial F = opt.p == 1 ? S.f : S.f.iterate(opt.p);
  Quadrilateral Q;
  Q.sector = S;
  Q.s = s;
  Q.s_prime = s_prime;
  Q.p = opt.p;
  const double gp = std::log(s_prime);
  const double ip = -std::log(s);
  auto cut_internal = [&](const Angle& t, Complex landing) {
    RayOptions o = opt.rays;
    InternalRay r = trace_internal_ray(F, t, 0.0, o);
    std::vector<Complex> pts;
    if (r.points.front().potential <= ip) pts.push_back(r.points.front().z);
    else if (auto z = detail::at_potential(r.points, ip)) pts.push_back(*z);
    for (const auto& x : r.points)
      if (x.potential < ip) pts.push_back(x.z);
    pts.push_back(landing);
    return pts;  // level s -> landing
  };
  auto in_m = cut_internal(S.comb.t_minus, S.comb.z_minus);
  auto in_p = cut_internal(S.comb.t_plus, S.comb.z_plus);
  auto ex_m = detail::ray_below(atlas.ray(S.comb.theta_minus).points, gp, S.comb.z_minus);  // s' -> landing
  auto ex_p = detail::ray_below(atlas.ray(S.comb.theta_plus).points, gp, S.comb.z_plus);
  auto outer = external_arc(atlas, S.comb.theta_minus, S.comb.theta_plus, gp, arc_samples);
  auto inner = internal_arc(F, S.comb.t_minus, S.comb.t_plus, s, arc_samples);
  auto& B = Q.boundary;
  B = in_m;
  B.insert(B.end(), ex_m.rbegin() + 1, ex_m.rend());
  B.insert(B.end(), outer.begin() + 1, outer.end() - 1);
  B.insert(B.end(), ex_p.begin(), ex_p.end() - 1);
  B.insert(B.end(), in_p.rbegin(), in_p.rend());
  B.insert(B.end(), inner.rbegin() + 1, inner.rend() - 1);
  return Q;
}

struct LimbStep {
  Combinatorics comb;
  double s = 0.0, s_prime = 0.0;
  double diameter = 0.0;
};

struct LimbApproximation {
  std::vector<LimbStep> steps;
  Complex root{};
  LandingStatus root_status = LandingStatus::pending;
};

namespace detail {

// Open arc (a - d0^-j, a + d0^-j) with a = floor(t d0^j) / d0^j; contains t.
inline std::pair<Angle, Angle> arc_around(const InternalAngle& t, int d0, int j) {
  BigInt den = 1;
  for (int i = 0; i < j; ++i) den *= d0;
  BigInt a;
  if (auto r = std::get_if<Angle>(&t)) {
    a = (r->num() * den) / r->den();
  } else {
    const auto& s = std::get<DigitStream>(t);
    a = 0;
    for (int i = 0; i < j; ++i) a = a * d0 + s.digit(static_cast<std::size_t>(i));
  }
  return {Angle(a - 1 + den, den), Angle(a + 1, den)};
}

}  // namespace detail

/// Nested quadrilaterals around the internal angle t0 with internal arcs of
/// width 2 d0^-j (j = 2, 3, ...), and levels s = e^{-2 pi w}, s' = e^{2 pi w}.
inline LimbApproximation approximate_limb(const Polynomial& f, const InternalAngle& t0, int steps,
                                          const SectorOptions& opt = {}) {
  const Polynomial F = opt.p == 1 ? f : f.iterate(opt.p);
  const int d0 = SuperattractingCoordinate(F).local_degree();
  RayAtlas atlas(f, opt.rays, opt.landing_tol);
  LimbApproximation out;
  {
    InternalRay r = trace_internal_ray(F, t0, 0.0, opt.rays);
    Landing l = internal_landing_point(F, r, opt.landing_tol);
    if (l.status == LandingStatus::blocked) throw ComputationError("internal ray " + angle_name(t0) + " is blocked");
    out.root = (l.status == LandingStatus::landed || l.status == LandingStatus::converged) ? l.point : r.points.back().z;
    out.root_status = l.status;
  }
  for (int k = 0; k < steps; ++k) {
    const int j = k + 2;
    auto [tm, tp] = detail::arc_around(t0, d0, j);
    std::string why;
    auto S = find_sector(f, tm, tp, opt, atlas, &why);
    if (!S)
      throw ComputationError("no combinatorics for the internal arc (" + tm.str() + "," + tp.str() +
                             ") after searching the external angles landing at its endpoints: " + why);
    const double w = 2.0 * std::pow(static_cast<double>(d0), -j);
    const double s = std::exp(-kTwoPi * w), sp = std::exp(kTwoPi * w);
    Quadrilateral Q = build_quadrilateral(*S, s, sp, atlas, opt);
    out.steps.push_back({S->comb, s, sp, Q.diameter()});
  }
  return out;
}

struct SeparabilityEntry {
  int n = 0;
  Complex omega{};
  bool separated = false;
  std::optional<Combinatorics> witness;
  int searched = 0;
  std::string note;
};

struct SeparabilityReport {
  std::vector<SeparabilityEntry> entries;
  bool all_separated() const {
    return std::all_of(entries.begin(), entries.end(), [](const SeparabilityEntry& e) { return e.separated; });
  }
};

/// For every n <= n_max and every critical point omega of f^p, searches
/// internal arcs (a - d0^-j, a + d0^-j) around tau^n(t) with d0^j <= M for a
/// combinatorics whose sector omits omega.
inline SeparabilityReport critically_separable(const Polynomial& f, const DigitStream& t, int n_max, long long M = 64,
                                               const SectorOptions& opt = {}) {
  const Polynomial F = opt.p == 1 ? f : f.iterate(opt.p);
  const int d0 = SuperattractingCoordinate(F).local_degree();
  if (t.base() != d0) throw InputError("angle stream base differs from the local degree");
  RayAtlas atlas(f, opt.rays, opt.landing_tol);
  std::map<std::string, std::optional<Sector>> sectors;
  SeparabilityReport rep;
  const auto crit = critical_points(F);
  for (int n = 0; n <= n_max; ++n) {
    const DigitStream tn = t.shifted(static_cast<std::size_t>(n));
    for (const auto& cp : crit) {
      SeparabilityEntry e;
      e.n = n;
      e.omega = cp.z;
      // arcs of width 2 d0^-j; for d0 = 2 the first proper one is j = 2
      const int j0 = d0 == 2 ? 2 : 1;
      long long den = d0 == 2 ? 4 : d0;
      for (int j = j0; den <= M; ++j, den *= d0) {
        auto [tm, tp] = detail::arc_around(tn, d0, j);
        const std::string key = tm.str() + "|" + tp.str();
        auto it = sectors.find(key);
        if (it == sectors.end()) it = sectors.emplace(key, find_sector(f, tm, tp, opt, atlas, &e.note)).first;
        ++e.searched;
        if (!it->second) continue;
        if (it->second->contains(cp.z) != Membership::inside) {
          e.separated = true;
          e.witness = it->second->comb;
          e.note.clear();
          break;
        }
      }
      if (!e.separated && e.note.empty()) e.note = "no witness at bound M=" + std::to_string(M);
      rep.entries.push_back(e);
    }
  }
  return rep;
}

}  // namespace polydyn
