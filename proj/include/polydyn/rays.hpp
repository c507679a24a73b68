#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "angle.hpp"
#include "boettcher.hpp"
#include "cycles.hpp"
#include "digits.hpp"
#include "local_boettcher.hpp"
#include "poly.hpp"

namespace polydyn {

enum class LandingStatus { pending, landed, converged, blocked, undecided };

inline const char* to_string(LandingStatus s) {
  switch (s) {
    case LandingStatus::pending: return "pending";
    case LandingStatus::landed: return "landed";
    case LandingStatus::converged: return "converged";
    case LandingStatus::blocked: return "blocked";
    case LandingStatus::undecided: return "undecided";
  }
  return "?";
}

struct Landing {
  LandingStatus status = LandingStatus::pending;
  Complex point{};
  int period = 0;      // exact period of the landing point
  int preperiod = 0;   // preperiod of the angle
  Complex multiplier{};
  bool parabolic = false;
  double threshold = 0.0;  // blocked rays: where the ray stops (exp potential, or internal modulus)
  std::string reason;
};

/// One ray sample. `potential` is the Green potential log|phi| for external
/// rays and -log|phi^0| for internal rays; both decrease toward the landing point.
struct RaySample {
  double potential = 0.0;
  Complex z{};
};

struct RayOptions {
  int depth = 240;                    // maximal number of levels
  double start_potential = 0.0;       // 0: log 1000 (external) or from the valid radius (internal)
  int substeps = 4;
  int max_substeps = 256;
  double newton_tol = 1e-12;
  int max_newton = 50;
  bool early_stop = true;
  double stop_tol = 1e-11;
  int min_depth = 12;
};

struct ExternalRay {
  Angle angle;
  int degree = 2;
  RayOptions options;
  std::vector<RaySample> points;
  Landing landing;
  std::optional<Complex> extrapolant;
  double spread = 0.0;  // disagreement among the last Aitken extrapolants
};

using InternalAngle = std::variant<Angle, DigitStream>;

struct InternalRay {
  InternalAngle angle;
  int local_degree = 2;
  std::vector<RaySample> points;
  Landing landing;
  std::optional<Complex> extrapolant;
  double spread = 0.0;

  double modulus(std::size_t k) const { return std::exp(-points[k].potential); }
};

namespace detail {

struct Pullback {
  const Polynomial* map = nullptr;
  int degree = 2;
  double p0 = 1.0;
  std::function<double(int)> angle_at;             // tau^k of the angle as a double
  std::function<Complex(double, double)> target;   // (potential, angle) -> point near the reference
  int spacing = 0;                                  // period of the angle (Aitken spacing), 0 if none
};

struct PullbackResult {
  std::vector<RaySample> samples;
  bool failed = false;
  int fail_level = 0;
  std::string reason;
};

// Newton for F^k(z) = w from the seed; nullopt on divergence.
inline std::optional<Complex> solve_iterate(const Polynomial& F, int k, Complex w, Complex seed,
                                            const RayOptions& opt, double jump) {
  Complex z = seed;
  for (int it = 0; it < opt.max_newton; ++it) {
    auto [v, dv] = iterate_with_derivative(F, z, k);
    if (!is_finite(v) || !is_finite(dv) || dv == Complex{}) return std::nullopt;
    const Complex step = (v - w) / dv;
    z -= step;
    if (!is_finite(z) || std::abs(z - seed) > jump) return std::nullopt;
    if (std::abs(step) <= opt.newton_tol * (1.0 + std::abs(z))) return z;
  }
  return std::nullopt;
}

// Aitken extrapolants of the q-spaced subsequences ending at the last samples.
inline std::optional<std::pair<Complex, double>> aitken(const std::vector<RaySample>& s, int q, int count = 4) {
  q = std::max(q, 1);
  const int n = static_cast<int>(s.size());
  std::vector<Complex> xs;
  for (int i = 0; i < count; ++i) {
    const int c = n - 1 - i;
    if (c - 2 * q < 0) break;
    const Complex z2 = s[static_cast<std::size_t>(c)].z, z1 = s[static_cast<std::size_t>(c - q)].z,
                  z0 = s[static_cast<std::size_t>(c - 2 * q)].z;
    const Complex d1 = z2 - z1, d0 = z1 - z0;
    const Complex den = d1 - d0;
    if (std::abs(den) < 1e-300 || std::abs(d1) < 1e-15 * (1.0 + std::abs(z2))) xs.push_back(z2);
    else xs.push_back(z2 - d1 * d1 / den);
  }
  if (xs.empty()) return std::nullopt;
  double spread = 0.0;
  for (Complex x : xs) spread = std::max(spread, std::abs(x - xs.front()));
  return std::make_pair(xs.front(), spread);
}

inline PullbackResult pullback_trace(const Pullback& pb, const RayOptions& opt) {
  PullbackResult out;
  const Polynomial& F = *pb.map;
  const double d = pb.degree;
  Complex z = pb.target(pb.p0, pb.angle_at(0));
  out.samples.push_back({pb.p0, z});
  double last_step = 0.0;
  for (int k = 1; k <= opt.depth; ++k) {
    const double p_from = out.samples.back().potential;
    const Complex z_from = out.samples.back().z;
    const double ang = pb.angle_at(k);
    const double scale_k = std::pow(d, k);
    std::optional<Complex> accepted;
    for (int sub = opt.substeps; sub <= opt.max_substeps && !accepted; sub *= 2) {
      Complex cur = z_from;
      bool ok = true;
      for (int j = 1; j <= sub && ok; ++j) {
        const double p = p_from * std::pow(d, -static_cast<double>(j) / sub);
        const Complex w = pb.target(p * scale_k, ang);
        const double jump = 3.0 * (std::abs(cur) + last_step) + 1.0;
        auto r = solve_iterate(F, k, w, cur, opt, jump);
        if (!r) ok = false;
        else cur = *r;
      }
      if (!ok) continue;
      const double step = std::abs(cur - z_from);
      if (k > 2 && last_step > 0 && step > 4.0 * last_step + 1e-10 * (1.0 + std::abs(cur))) continue;  // branch jump
      accepted = cur;
    }
    if (!accepted) {
      out.failed = true;
      out.fail_level = k;
      out.reason = "Newton pullback failed at level " + std::to_string(k);
      return out;
    }
    last_step = std::abs(*accepted - z_from);
    out.samples.push_back({p_from / d, *accepted});
    if (!opt.early_stop || k < opt.min_depth) continue;
    if (last_step <= 1e-13 * (1.0 + std::abs(*accepted))) break;
    if (pb.spacing > 0 && k >= 3 * pb.spacing + 2) {
      auto now = aitken(out.samples, pb.spacing, 2);
      std::vector<RaySample> prev(out.samples.begin(), out.samples.end() - 1);
      auto before = aitken(prev, pb.spacing, 1);
      if (now && before && std::abs(now->first - before->first) <= opt.stop_tol * (1.0 + std::abs(now->first)) &&
          now->second <= opt.stop_tol * (1.0 + std::abs(now->first)))
        break;
    }
  }
  return out;
}

}  // namespace detail

/// Periodic orbit refinement by multiple shooting: unknowns x_0..x_{L-1},
/// equations F(x_j) = x_{j+1} (j < L-1) and F(x_{L-1}) = x_m.
inline std::optional<std::vector<Complex>> refine_landing_orbit(const Polynomial& F, std::vector<Complex> x, int m,
                                                                int max_iter = 60) {
  const int L = static_cast<int>(x.size());
  if (L < 1 || m < 0 || m >= L) throw InputError("bad orbit shape for landing refinement");
  using Mat = Eigen::MatrixXcd;
  using Vec = Eigen::VectorXcd;
  for (int it = 0; it < max_iter; ++it) {
    Mat J = Mat::Zero(L, L);
    Vec e(L);
    for (int j = 0; j < L; ++j) {
      auto [v, dv] = F.eval_with_derivative(x[static_cast<std::size_t>(j)]);
      const int nxt = j + 1 < L ? j + 1 : m;
      e(j) = v - x[static_cast<std::size_t>(nxt)];
      J(j, j) += dv;
      J(j, nxt) -= 1.0;
    }
    Eigen::PartialPivLU<Mat> lu(J);
    Vec dx = lu.solve(e);
    if (!dx.allFinite()) return std::nullopt;
    double nrm = 0.0, sz = 0.0;
    for (int j = 0; j < L; ++j) {
      x[static_cast<std::size_t>(j)] -= dx(j);
      nrm = std::max(nrm, std::abs(dx(j)));
      sz = std::max(sz, std::abs(x[static_cast<std::size_t>(j)]));
    }
    if (!std::isfinite(nrm)) return std::nullopt;
    if (nrm <= 1e-15 * (1.0 + sz)) return x;
    if (it == max_iter - 1 && nrm <= 1e-12 * (1.0 + sz)) return x;
  }
  // accept when the residual is tiny even if steps stagnated at rounding level
  double res = 0.0, sz = 0.0;
  for (int j = 0; j < L; ++j) {
    const int nxt = j + 1 < L ? j + 1 : m;
    res = std::max(res, std::abs(F(x[static_cast<std::size_t>(j)]) - x[static_cast<std::size_t>(nxt)]));
    sz = std::max(sz, std::abs(x[static_cast<std::size_t>(j)]));
  }
  if (res <= 1e-11 * (1.0 + sz)) return x;
  return std::nullopt;
}

namespace detail {

// Verifies and refines the landing of a traced ray with exact orbit type (m, q).
// seed_of(j) supplies the landing estimate of the j-th image ray when known;
// otherwise the samples are pushed forward j times and extrapolated.
inline Landing land(const Polynomial& F, const std::vector<RaySample>& samples, int m, int q, double tol,
                    std::optional<Complex>& extrapolant, double& spread,
                    const std::function<std::optional<Complex>(int)>& seed_of = {},
                    double tau_ind = kIndifferenceBand) {
  Landing out;
  out.preperiod = m;
  if (samples.size() < 3) {
    out.status = LandingStatus::undecided;
    out.reason = "fewer than 3 samples";
    return out;
  }
  auto ex = aitken(samples, q, 4);
  if (!ex) ex = aitken(samples, 1, 4);
  if (!ex) {
    out.status = LandingStatus::undecided;
    out.reason = "too few samples to extrapolate";
    return out;
  }
  extrapolant = ex->first;
  spread = ex->second;
  const int L = m + q;
  std::vector<Complex> seeds(static_cast<std::size_t>(L));
  std::vector<RaySample> pushed = samples;
  seeds[0] = ex->first;
  for (int j = 1; j < L; ++j) {
    for (auto& s : pushed) s.z = F(s.z);
    std::optional<Complex> known = seed_of ? seed_of(j) : std::nullopt;
    if (known) {
      seeds[static_cast<std::size_t>(j)] = *known;
      continue;
    }
    auto e = aitken(pushed, q, 1);
    seeds[static_cast<std::size_t>(j)] = e ? e->first : pushed.back().z;
  }
  auto orbit = refine_landing_orbit(F, seeds, m);
  if (!orbit) {
    out.status = LandingStatus::undecided;
    out.reason = "landing refinement did not converge";
    return out;
  }
  const Complex x = (*orbit)[0];
  out.point = x;
  if (std::abs(x - ex->first) > tol * (1.0 + std::abs(x))) {
    out.status = LandingStatus::undecided;
    out.reason = "extrapolant and refined landing point disagree by " + std::to_string(std::abs(x - ex->first));
    return out;
  }
  Complex mult{1.0};
  for (int j = m; j < L; ++j) mult *= F.derivative_at((*orbit)[static_cast<std::size_t>(j)]);
  const Complex y = (*orbit)[static_cast<std::size_t>(m)];
  out.period = q;
  for (int r = 1; r < q; ++r) {
    if (q % r) continue;
    if (std::abs((*orbit)[static_cast<std::size_t>(m + r)] - y) < 1e-9 * (1.0 + std::abs(y))) {
      out.period = r;
      break;
    }
  }
  out.multiplier = mult;
  const CycleKind kind = classify_multiplier(mult, tau_ind);
  if (kind == CycleKind::repelling) {
    out.status = LandingStatus::landed;
  } else if (kind == CycleKind::indifferent) {
    out.status = LandingStatus::landed;
    out.parabolic = true;
  } else {
    out.status = LandingStatus::undecided;
    out.reason = "refined point is attracting";
  }
  return out;
}

inline bool some_critical_point_escapes(const Polynomial& f) {
  const double esc = escape_radius(f);
  for (const auto& cp : critical_points(f)) {
    Complex z = cp.z;
    for (int n = 0; n < 2000; ++n) {
      if (std::abs(z) > esc || !is_finite(z)) return true;
      z = f(z);
    }
  }
  return false;
}

}  // namespace detail

/// External ray R(theta) sampled at potentials G0 d^-k by Newton pullback.
inline ExternalRay trace_external_ray(const Polynomial& f, const Angle& theta, const RayOptions& opt = {}) {
  ExteriorBoettcher bt(f);
  const int d = f.degree();
  ExternalRay ray;
  ray.angle = theta;
  ray.degree = d;
  ray.options = opt;
  const double g0 = opt.start_potential > 0 ? opt.start_potential
                                            : std::max(std::log(1000.0), std::log(1.5 * bt.reference_radius()));
  std::vector<double> angles{theta.to_double()};
  Angle cur = theta;
  const AngleOrbit ot = orbit_type(theta, d);
  detail::Pullback pb;
  pb.map = &f;
  pb.degree = d;
  pb.p0 = g0;
  pb.spacing = ot.period;
  pb.angle_at = [&](int k) {
    while (static_cast<int>(angles.size()) <= k) {
      cur = tau(cur, d);
      angles.push_back(cur.to_double());
    }
    return angles[static_cast<std::size_t>(k)];
  };
  pb.target = [&](double p, double a) { return bt.psi(std::exp(p) * unit(a)); };
  auto res = detail::pullback_trace(pb, opt);
  ray.points = std::move(res.samples);
  if (res.failed) {
    if (detail::some_critical_point_escapes(f)) {
      ray.landing.status = LandingStatus::blocked;
      ray.landing.threshold = std::exp(ray.points.back().potential);
      ray.landing.reason = res.reason + " (critical point escapes)";
    } else {
      ray.landing.status = LandingStatus::undecided;
      ray.landing.reason = res.reason;
    }
  }
  return ray;
}

/// Aitken extrapolant of the terminal samples (q-spaced, q the exact period
/// of the angle) and the spread of the last extrapolants.
inline std::optional<std::pair<Complex, double>> ray_extrapolant(const ExternalRay& ray) {
  const AngleOrbit ot = orbit_type(ray.angle, ray.degree);
  auto ex = detail::aitken(ray.points, ot.period, 4);
  return ex ? ex : detail::aitken(ray.points, 1, 4);
}

/// Landing estimates of other rays, used to seed the orbit refinement.
using RaySeedSource = std::function<std::optional<Complex>(const Angle&)>;

/// Extrapolates and verifies the landing point of a traced ray; the result is
/// stored in the ray and returned. Without a seed source the image rays of
/// the angle orbit are traced on demand.
inline Landing landing_point(const Polynomial& f, ExternalRay& ray, double tol = 1e-6,
                             const RaySeedSource& seeds = {}) {
  if (ray.landing.status == LandingStatus::blocked) return ray.landing;
  const int d = f.degree();
  const AngleOrbit ot = orbit_type(ray.angle, d);
  auto seed_of = [&](int j) -> std::optional<Complex> {
    const Angle img = tau_iter(ray.angle, d, j);
    if (seeds) return seeds(img);
    ExternalRay other = trace_external_ray(f, img, ray.options);
    if (other.landing.status == LandingStatus::blocked || other.landing.status == LandingStatus::undecided)
      return std::nullopt;
    auto ex = ray_extrapolant(other);
    if (!ex) return std::nullopt;
    return ex->first;
  };
  ray.landing = detail::land(f, ray.points, ot.preperiod, ot.period, tol, ray.extrapolant, ray.spread, seed_of);
  return ray.landing;
}

inline std::string angle_name(const InternalAngle& t) {
  if (auto a = std::get_if<Angle>(&t)) return a->str();
  return std::get<DigitStream>(t).name();
}

/// Internal ray R^0(t) of the superattracting fixed point 0 of F (pass f^p for
/// period p), sampled at internal moduli s_lo^{d0^-k}.
inline InternalRay trace_internal_ray(const Polynomial& F, const InternalAngle& t, double s_lo = 0.0,
                                      const RayOptions& opt = {}) {
  SuperattractingCoordinate sc(F);
  const int d0 = sc.local_degree();
  InternalRay ray;
  ray.angle = t;
  ray.local_degree = d0;
  const double safe = std::abs(sc.mu()) * sc.valid_radius() * 0.9;
  if (s_lo <= 0.0) s_lo = std::min(0.5, 0.5 * safe);
  if (s_lo >= safe) throw InputError("s_lo outside the linearizing disk of the internal coordinate");
  const Angle* rational = std::get_if<Angle>(&t);
  const DigitStream* stream = std::get_if<DigitStream>(&t);
  if (stream && stream->base() != d0) throw InputError("digit stream base differs from the local degree");
  std::vector<double> angles;
  Angle cur = rational ? *rational : Angle();
  if (rational) angles.push_back(cur.to_double());
  detail::Pullback pb;
  pb.map = &F;
  pb.degree = d0;
  pb.p0 = -std::log(s_lo);
  pb.spacing = rational ? orbit_type(*rational, d0).period : 0;
  pb.angle_at = [&](int k) {
    if (stream) return stream->value_after(static_cast<std::size_t>(k));
    while (static_cast<int>(angles.size()) <= k) {
      cur = tau(cur, d0);
      angles.push_back(cur.to_double());
    }
    return angles[static_cast<std::size_t>(k)];
  };
  pb.target = [&](double p, double a) {
    const Complex w = std::exp(-p) * unit(a);
    Complex z = w / sc.mu();
    for (int it = 0; it < 60; ++it) {
      const double h = 1e-7 * std::max(std::abs(z), 1e-300);
      auto v = sc.phi(z), vp = sc.phi(z + h), vm = sc.phi(z - h);
      if (!v || !vp || !vm) throw ComputationError("internal coordinate inversion left the basin");
      const Complex dphi = (vp->value - vm->value) / (2.0 * h);
      const Complex step = (v->value - w) / dphi;
      z -= step;
      if (std::abs(step) < 1e-16 * std::abs(z)) break;
    }
    return z;
  };
  auto res = detail::pullback_trace(pb, opt);
  ray.points = std::move(res.samples);
  if (res.failed) {
    bool crit_in_basin = false;
    for (const auto& cp : critical_points(F))
      if (std::abs(cp.z) > 1e-8 && sc.modulus(cp.z)) crit_in_basin = true;
    ray.landing.status = crit_in_basin ? LandingStatus::blocked : LandingStatus::undecided;
    ray.landing.threshold = std::exp(-ray.points.back().potential);
    ray.landing.reason = res.reason;
  }
  return ray;
}

/// Landing of an internal ray: rational angles are refined like external
/// rays; digit-stream angles report the stabilized terminal point.
inline Landing internal_landing_point(const Polynomial& F, InternalRay& ray, double tol = 1e-6) {
  if (ray.landing.status == LandingStatus::blocked) return ray.landing;
  if (auto a = std::get_if<Angle>(&ray.angle)) {
    const AngleOrbit ot = orbit_type(*a, ray.local_degree);
    ray.landing = detail::land(F, ray.points, ot.preperiod, ot.period, tol, ray.extrapolant, ray.spread);
    return ray.landing;
  }
  Landing out;
  const auto& s = ray.points;
  if (s.size() < 3) {
    out.status = LandingStatus::undecided;
    out.reason = "fewer than 3 samples";
  } else {
    const double step = std::abs(s.back().z - s[s.size() - 2].z);
    out.point = s.back().z;
    ray.extrapolant = s.back().z;
    ray.spread = step;
    out.status = step <= tol ? LandingStatus::converged : LandingStatus::undecided;
    if (out.status == LandingStatus::undecided) out.reason = "terminal step " + std::to_string(step) + " above tolerance";
  }
  ray.landing = out;
  return out;
}

}  // namespace polydyn
