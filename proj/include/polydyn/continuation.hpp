#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "boettcher.hpp"
#include "cycles.hpp"
#include "digits.hpp"
#include "local_boettcher.hpp"
#include "poly.hpp"
#include "rays.hpp"

namespace polydyn {

/// f^m(c_k) = f^n(c_k) for the marked critical point of index k (k >= 2).
struct CriticalRelation {
  int k = 2;
  int m = 1;
  int n = 0;
};

/// Critical portrait of the sub-manifold: 0 has period p, the relations of
/// I_F hold, and the indices of I_infinity stay free (frozen here).
struct CriticalPortrait {
  int p = 1;
  std::vector<CriticalRelation> relations;
  std::vector<int> I_infinity;

  void validate(int degree) const {
    if (p < 1) throw InputError("portrait period p must be >= 1");
    std::vector<int> seen;
    for (const auto& r : relations) {
      if (r.m <= r.n || r.n < 0) throw InputError("relation needs m > n >= 0");
      if (r.k < 2 || r.k > degree - 2) throw InputError("relation index outside {2..d-2}");
      seen.push_back(r.k);
    }
    for (int k : I_infinity) {
      if (k < 2 || k > degree - 2) throw InputError("I_infinity index outside {2..d-2}");
      seen.push_back(k);
    }
    std::sort(seen.begin(), seen.end());
    if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) throw InputError("portrait index listed twice");
    if (static_cast<int>(seen.size()) != std::max(0, degree - 3)) throw InputError("I_F and I_infinity must partition {2..d-2}");
  }
};

/// [f^p(0)] ++ [f^{m_k}(c_k) - f^{n_k}(c_k)].
inline std::vector<Complex> residuals(const MarkedParams& a, const CriticalPortrait& portrait) {
  const Polynomial f = build_marked(a);
  std::vector<Complex> r;
  r.push_back(orbit_point(f, Complex{}, portrait.p).value_or(Complex(INFINITY, 0)));
  for (const auto& rel : portrait.relations) {
    const Complex ck = a.critical(rel.k);
    const Complex zm = orbit_point(f, ck, rel.m).value_or(Complex(INFINITY, 0));
    const Complex zn = orbit_point(f, ck, rel.n).value_or(Complex(INFINITY, 0));
    r.push_back(zm - zn);
  }
  return r;
}

inline double max_abs(const std::vector<Complex>& v) {
  double m = 0.0;
  for (Complex z : v) m = std::max(m, std::abs(z));
  return m;
}

struct SolveResult {
  MarkedParams a;
  double residual = 0.0;
  bool converged = false;
  int iterations = 0;
};

namespace detail {

// Central difference Jacobian of a holomorphic vector function, real step.
template <class Fn>
Eigen::MatrixXcd holomorphic_jacobian(Fn&& fn, const std::vector<Complex>& x, const std::vector<int>& cols, int rows) {
  Eigen::MatrixXcd J(rows, static_cast<int>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    const std::size_t c = static_cast<std::size_t>(cols[j]);
    const double h = 1e-7 * (1.0 + std::abs(x[c]));
    std::vector<Complex> xp = x, xm = x;
    xp[c] += h;
    xm[c] -= h;
    const auto fp = fn(xp), fm = fn(xm);
    for (int i = 0; i < rows; ++i) J(i, static_cast<int>(j)) = (fp[static_cast<std::size_t>(i)] - fm[static_cast<std::size_t>(i)]) / (2.0 * h);
  }
  return J;
}

}  // namespace detail

/// Damped Newton for the portrait residuals in the unfrozen coordinates.
inline SolveResult solve_constraints(const MarkedParams& a0, const CriticalPortrait& portrait, std::vector<bool> frozen,
                                     double tol = 1e-12, int max_iter = 200) {
  a0.validate();
  const int dim = a0.dimension();
  if (frozen.empty()) frozen.assign(static_cast<std::size_t>(dim), false);
  if (static_cast<int>(frozen.size()) != dim) throw InputError("frozen mask has wrong length");
  std::vector<int> cols;
  for (int j = 0; j < dim; ++j)
    if (!frozen[static_cast<std::size_t>(j)]) cols.push_back(j);
  const int rows = 1 + static_cast<int>(portrait.relations.size());
  if (static_cast<int>(cols.size()) != rows)
    throw InputError("solve_constraints needs as many unfrozen coordinates (" + std::to_string(cols.size()) +
                     ") as residuals (" + std::to_string(rows) + ")");
  const int d = a0.degree;
  auto fn = [&](const std::vector<Complex>& x) { return residuals(MarkedParams::from_coordinates(d, x), portrait); };
  std::vector<Complex> x = a0.coordinates();
  SolveResult best{a0, max_abs(fn(x)), false, 0};
  for (int it = 0; it < max_iter; ++it) {
    const auto r = fn(x);
    const double rn = max_abs(r);
    if (rn < best.residual || it == 0) best = {MarkedParams::from_coordinates(d, x), rn, false, it};
    if (rn < tol) {
      best.converged = true;
      return best;
    }
    Eigen::MatrixXcd J = detail::holomorphic_jacobian(fn, x, cols, rows);
    Eigen::VectorXcd rv(rows);
    for (int i = 0; i < rows; ++i) rv(i) = r[static_cast<std::size_t>(i)];
    Eigen::VectorXcd dx = J.fullPivLu().solve(rv);
    if (!dx.allFinite()) break;
    double lambda = 1.0;
    bool moved = false;
    for (int half = 0; half < 30; ++half, lambda *= 0.5) {
      std::vector<Complex> xn = x;
      for (std::size_t j = 0; j < cols.size(); ++j) xn[static_cast<std::size_t>(cols[j])] -= lambda * dx(static_cast<int>(j));
      const double rn2 = max_abs(fn(xn));
      if (std::isfinite(rn2) && rn2 < rn) {
        x = xn;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  const double rn = max_abs(fn(x));
  if (rn < best.residual) best = {MarkedParams::from_coordinates(d, x), rn, false, max_iter};
  best.converged = best.residual < tol;
  return best;
}

/// Mask freezing the coordinates of I_infinity and c (index 0) so that the
/// remaining coordinates are exactly those determined by the residuals.
inline std::vector<bool> dependent_mask(int degree, const CriticalPortrait& portrait) {
  std::vector<bool> frozen(static_cast<std::size_t>(degree - 1), true);
  frozen.back() = false;  // b
  for (const auto& r : portrait.relations) frozen[static_cast<std::size_t>(r.k - 1)] = false;
  return frozen;
}

struct T1Options {
  enum class Pattern { thue_morse, fibonacci } pattern = Pattern::thue_morse;
  int max_block = 12;
  int max_word = 8;
};

/// Exact check that tau^n(t) avoids the open arc (a, b) for n <= n_max,
/// certified with cylinders of up to `max_len` digits.
inline bool avoids_arc(const DigitStream& t, const Angle& a, const Angle& b, std::size_t n_max, int max_len = 48) {
  for (std::size_t n = 0; n <= n_max; ++n) {
    bool certified = false;
    for (int len = 8; len <= max_len && !certified; len *= 2)
      certified = !cylinder_meets_arc(t.digits(n, static_cast<std::size_t>(len)), t.base(), a, b);
    if (!certified) return false;
  }
  return true;
}

/// Irrational internal angle t1 as a non-periodic base-d0 stream whose forward
/// orbit avoids the forbidden arc when one is given.
inline DigitStream choose_t1(int d0, const std::optional<std::pair<Angle, Angle>>& forbidden_arc = std::nullopt,
                             const T1Options& opt = {}) {
  if (d0 < 2) throw InputError("local degree must be >= 2");
  const bool fib = opt.pattern == T1Options::Pattern::fibonacci;
  if (!forbidden_arc) return fib ? fibonacci_word(d0) : thue_morse(d0);
  const auto& [lo, hi] = *forbidden_arc;
  if (lo == hi) throw InputError("forbidden arc covers the whole circle");
  const DigitStream binary = fib ? fibonacci_word(2) : thue_morse(2);
  for (int L = 1; L <= opt.max_block; ++L) {
    // blocks of length L whose cylinder meets the arc
    std::vector<std::vector<int>> banned;
    std::vector<int> w(static_cast<std::size_t>(L), 0);
    const long long total = static_cast<long long>(std::pow(d0, L));
    if (total > 200000) break;
    for (long long idx = 0; idx < total; ++idx) {
      long long v = idx;
      for (int i = L - 1; i >= 0; --i, v /= d0) w[static_cast<std::size_t>(i)] = static_cast<int>(v % d0);
      if (cylinder_meets_arc(w, d0, lo, hi)) banned.push_back(w);
    }
    if (static_cast<long long>(banned.size()) == total) continue;
    auto is_banned = [&](const std::vector<int>& x, std::size_t at) {
      for (const auto& bw : banned)
        if (std::equal(bw.begin(), bw.end(), x.begin() + static_cast<long>(at))) return true;
      return false;
    };
    for (int K = 1; K <= opt.max_word; ++K) {
      const long long words = static_cast<long long>(std::pow(d0, K));
      if (words > 4096) break;
      auto word = [&](long long idx) {
        std::vector<int> out(static_cast<std::size_t>(K));
        for (int i = K - 1; i >= 0; --i, idx /= d0) out[static_cast<std::size_t>(i)] = static_cast<int>(idx % d0);
        return out;
      };
      const int span = (L + K - 1) / K + 1;
      for (long long i0 = 0; i0 < words; ++i0) {
        for (long long i1 = i0 + 1; i1 < words; ++i1) {
          const auto w0 = word(i0), w1 = word(i1);
          bool ok = true;
          for (long long mask = 0; mask < (1LL << span) && ok; ++mask) {
            std::vector<int> seq;
            for (int j = 0; j < span; ++j) {
              const auto& src = (mask >> j) & 1 ? w1 : w0;
              seq.insert(seq.end(), src.begin(), src.end());
            }
            for (std::size_t at = 0; at < static_cast<std::size_t>(K) && at + static_cast<std::size_t>(L) <= seq.size() && ok; ++at)
              if (is_banned(seq, at)) ok = false;
          }
          if (ok) return block_coded(binary, d0, w0, w1);
        }
      }
    }
  }
  throw ComputationError("no stream avoids the forbidden arc at the searched block lengths");
}

/// Start parameter for the cubic family z^3 - (3c/2) z^2 + b with b = 0 near
/// the center: Phi ~ 3c^4/4, so c = (4 Phi / 3)^{1/4} i^k. Of the two
/// inequivalent branches, the one whose internal angle (t1 + k)/2 of the
/// marked critical point stays farthest from the doubling orbit of t1 is used.
inline MarkedParams cubic_start(const DigitStream& t1, double s0) {
  if (t1.base() != 2) throw InputError("cubic start needs a binary internal angle");
  if (!(s0 > 0.0 && s0 < 1.0)) throw InputError("start modulus must lie in (0,1)");
  const double t = t1.value();
  std::vector<double> orbit;
  for (std::size_t n = 0; n < 40; ++n) orbit.push_back(t1.value_after(n));
  auto circle_dist = [](double x, double y) {
    const double u = std::fmod(std::abs(x - y), 1.0);
    return std::min(u, 1.0 - u);
  };
  int best = 0;
  double best_gap = -1.0;
  for (int k = 0; k < 2; ++k) {
    const double angle = (t + k) / 2.0;
    double gap = 1.0;
    for (double o : orbit) gap = std::min(gap, circle_dist(angle, o));
    if (gap > best_gap) {
      best_gap = gap;
      best = k;
    }
  }
  MarkedParams a;
  a.degree = 3;
  const Complex phi = s0 * unit(t);
  a.c = std::pow(4.0 * phi / 3.0, 0.25) * std::pow(Complex(0, 1), best);
  a.b = 0.0;
  return a;
}

struct ContinuationState {
  double s = 0.0;
  MarkedParams a;
  double phi_residual = 0.0;
  std::vector<double> constraint_residuals;
  int newton_iters = 0;
  Complex phi{};
  BranchTrace trace;

  double max_constraint() const {
    double m = 0.0;
    for (double r : constraint_residuals) m = std::max(m, r);
    return m;
  }
};

struct LimitEstimate {
  MarkedParams a2;
  int order = 0;
  double uncertainty = 0.0;
  std::vector<std::vector<Complex>> extrapolants;  // successive orders
};

struct StretchRay {
  DigitStream t1;
  CriticalPortrait portrait;
  std::vector<ContinuationState> states;
  std::optional<LimitEstimate> limit;
  bool stalled = false;
  std::string diagnostics;
};

struct ContinuationOptions {
  double phi_tol = 1e-8;
  double constraint_tol = 1e-10;
  double newton_tol = 1e-13;
  int max_newton = 30;
  double min_step = 1e-6;
  double max_step = 0.05;
};

namespace detail {

struct Projected {
  MarkedParams a;
  double constraint = 0.0;
};

// Point of the sub-manifold over the free coordinate c (I_infinity frozen).
inline std::optional<Projected> project(const MarkedParams& base, Complex c, const CriticalPortrait& portrait,
                                        const ContinuationOptions& opt) {
  MarkedParams a = base;
  a.c = c;
  auto res = solve_constraints(a, portrait, dependent_mask(a.degree, portrait), 1e-13, 60);
  if (!(res.residual < opt.constraint_tol)) return std::nullopt;
  return Projected{res.a, res.residual};
}

struct Corrected {
  ContinuationState state;
  bool ok = false;
  std::string why;
};

// Newton on c for Phi(pi(c)) = target with branch prior.
inline Corrected correct(const MarkedParams& guess, Complex target, double s, const CriticalPortrait& portrait,
                         const BranchTrace* prior, const ContinuationOptions& opt) {
  Corrected out;
  Complex c = guess.c;
  BranchTrace trace = prior ? *prior : BranchTrace{};
  const BranchTrace* pr = prior;
  for (int it = 0; it < opt.max_newton; ++it) {
    auto eval = [&](Complex cc) -> std::optional<std::pair<PhiValue, Projected>> {
      auto pj = project(guess, cc, portrait, opt);
      if (!pj) return std::nullopt;
      try {
        return std::make_pair(phi_of_a(pj->a, portrait.p, pr), *pj);
      } catch (const ComputationError&) {
        return std::nullopt;
      }
    };
    auto here = eval(c);
    if (!here) {
      out.why = "phi undefined at the corrector iterate";
      return out;
    }
    const Complex g = here->first.value - target;
    trace = here->first.trace;
    if (std::abs(g) < opt.newton_tol) {
      out.ok = true;
      out.state.s = s;
      out.state.a = here->second.a;
      out.state.phi = here->first.value;
      out.state.phi_residual = std::abs(g);
      out.state.constraint_residuals = {here->second.constraint};
      out.state.newton_iters = it;
      out.state.trace = trace;
      return out;
    }
    const double h = 1e-7 * (1.0 + std::abs(c));
    auto p = eval(c + h), m = eval(c - h);
    if (!p || !m) {
      out.why = "phi undefined next to the corrector iterate";
      return out;
    }
    const Complex dg = (p->first.value - m->first.value) / (2.0 * h);
    if (dg == Complex{}) {
      out.why = "singular corrector derivative";
      return out;
    }
    Complex step = g / dg;
    // keep the step modest relative to |c| to stay on the tracked branch
    const double cap = 0.25 * (std::abs(c) + 1e-3);
    if (std::abs(step) > cap) step *= cap / std::abs(step);
    c -= step;
    if (pr == nullptr) pr = &trace;
  }
  out.why = "corrector did not converge";
  // accept a slightly looser solution if it meets the contract tolerances
  auto pj = project(guess, c, portrait, opt);
  if (pj) {
    try {
      auto ph = phi_of_a(pj->a, portrait.p, &trace);
      if (std::abs(ph.value - target) < opt.phi_tol) {
        out.ok = true;
        out.state = {s, pj->a, std::abs(ph.value - target), {pj->constraint}, opt.max_newton, ph.value, ph.trace};
      }
    } catch (const ComputationError&) {
    }
  }
  return out;
}

}  // namespace detail

/// Natural-parameter predictor-corrector along Phi(a(s)) = s e^{2 pi i t1}
/// inside the sub-manifold. The first grid value is reached by an initial
/// corrector solve (a homotopy in the target when plain Newton fails).
inline StretchRay continue_stretch(const MarkedParams& a1, const CriticalPortrait& portrait, const DigitStream& t1,
                                   const std::vector<double>& s_grid, const ContinuationOptions& opt = {},
                                   const BranchTrace* initial_trace = nullptr) {
  portrait.validate(a1.degree);
  if (s_grid.empty()) throw InputError("empty s grid");
  for (double s : s_grid)
    if (!(s > 0.0 && s < 1.0)) throw InputError("s values must lie in (0,1)");
  StretchRay ray;
  ray.t1 = t1;
  ray.portrait = portrait;
  const Complex dir = unit(t1.value());

  // initial corrector
  auto start = detail::project(a1, a1.c, portrait, opt);
  if (!start) throw ComputationError("start parameter cannot be projected onto the sub-manifold");
  PhiValue phi0 = phi_of_a(start->a, portrait.p, initial_trace);
  const Complex target0 = s_grid.front() * dir;
  ContinuationState cur;
  {
    auto first = detail::correct(start->a, target0, s_grid.front(), portrait, &phi0.trace, opt);
    if (!first.ok) {
      // homotopy from Phi(a1) to the first target
      MarkedParams a = start->a;
      BranchTrace tr = phi0.trace;
      double lam = 0.0, dl = 0.1;
      while (lam < 1.0) {
        const double next = std::min(1.0, lam + dl);
        const Complex tg = (1.0 - next) * phi0.value + next * target0;
        auto c = detail::correct(a, tg, s_grid.front(), portrait, &tr, opt);
        if (!c.ok) {
          dl *= 0.5;
          if (dl < 1e-6) throw ComputationError("initial corrector failed: " + c.why);
          continue;
        }
        a = c.state.a;
        tr = c.state.trace;
        lam = next;
        first = c;
      }
    }
    cur = first.state;
  }
  ray.states.push_back(cur);

  for (std::size_t gi = 1; gi < s_grid.size(); ++gi) {
    const double goal = s_grid[gi];
    double step = std::min(opt.max_step, std::abs(goal - cur.s));
    const double sign = goal > cur.s ? 1.0 : -1.0;
    while (std::abs(goal - cur.s) > 1e-15) {
      step = std::min(step, std::abs(goal - cur.s));
      const double s_new = std::abs(goal - cur.s) <= step ? goal : cur.s + sign * step;
      // secant predictor on all coordinates
      MarkedParams guess = cur.a;
      if (ray.states.size() >= 2) {
        const auto& prev = ray.states[ray.states.size() - 2];
        const double ds = cur.s - prev.s;
        if (std::abs(ds) > 0) {
          const auto xc = cur.a.coordinates(), xp = prev.a.coordinates();
          std::vector<Complex> xg(xc.size());
          for (std::size_t j = 0; j < xc.size(); ++j) xg[j] = xc[j] + (xc[j] - xp[j]) * ((s_new - cur.s) / ds);
          guess = MarkedParams::from_coordinates(cur.a.degree, xg);
        }
      }
      auto res = detail::correct(guess, s_new * dir, s_new, portrait, &cur.trace, opt);
      if (!res.ok || res.state.phi_residual >= opt.phi_tol || res.state.max_constraint() >= opt.constraint_tol) {
        step *= 0.5;
        if (step < opt.min_step) {
          ray.stalled = true;
          ray.diagnostics = "stalled at s=" + std::to_string(cur.s) + " toward " + std::to_string(goal) + ": " + res.why;
          return ray;
        }
        continue;
      }
      cur = res.state;
      ray.states.push_back(cur);
      step = std::min(opt.max_step, step * 1.5);
    }
  }
  return ray;
}

namespace detail {

// Neville extrapolation of samples y(h_i) to h = 0; returns every diagonal.
inline std::vector<std::vector<Complex>> neville_to_zero(const std::vector<double>& h,
                                                         const std::vector<std::vector<Complex>>& y) {
  const std::size_t n = h.size();
  std::vector<std::vector<Complex>> diag;  // diag[k]: extrapolant of order k from the last k+1 points
  std::vector<std::vector<Complex>> T = y;
  diag.push_back(T.back());
  for (std::size_t k = 1; k < n; ++k) {
    std::vector<std::vector<Complex>> next;
    for (std::size_t i = 0; i + k < n; ++i) {
      std::vector<Complex> v(y[0].size());
      for (std::size_t j = 0; j < v.size(); ++j)
        v[j] = (h[i] * T[i + 1][j] - h[i + k] * T[i][j]) / (h[i] - h[i + k]);
      next.push_back(v);
    }
    T = next;
    diag.push_back(T.back());
  }
  return diag;
}

}  // namespace detail

/// Extends the ray over s_tail and extrapolates the coordinates to s = 1
/// (polynomial extrapolation in h = 1 - s). `order` caps the polynomial
/// degree; the uncertainty is the distance between the last two orders.
inline LimitEstimate estimate_limit(StretchRay& ray, const std::vector<double>& s_tail, int order = 3,
                                    const ContinuationOptions& opt = {}) {
  if (ray.states.size() < 2) throw InputError("insufficient tail: the ray has a single state");
  if (s_tail.size() < 3) throw InputError("insufficient tail: need at least 3 tail values");
  if (order < 1) throw InputError("extrapolation order must be >= 1");
  for (std::size_t i = 0; i < s_tail.size(); ++i) {
    if (!(s_tail[i] > 0.0 && s_tail[i] < 1.0)) throw InputError("tail values must lie in (0,1)");
    if (i > 0 && !(s_tail[i] > s_tail[i - 1])) throw InputError("tail values must increase");
  }
  // restart from the last state at or below the tail, keeping s increasing
  auto base = std::find_if(ray.states.rbegin(), ray.states.rend(),
                           [&](const ContinuationState& st) { return st.s <= s_tail.front(); });
  if (base == ray.states.rend()) throw InputError("insufficient tail: tail starts below the traced ray");
  const ContinuationState from = *base;
  std::vector<double> grid{from.s};
  for (double s : s_tail)
    if (s > from.s) grid.push_back(s);
  StretchRay ext = continue_stretch(from.a, ray.portrait, ray.t1, grid, opt, &from.trace);
  if (ext.stalled) throw ComputationError("continuation stalled while extending the tail: " + ext.diagnostics);
  ray.states.erase(base.base(), ray.states.end());
  ray.states.insert(ray.states.end(), ext.states.begin() + 1, ext.states.end());
  std::vector<double> h;
  std::vector<std::vector<Complex>> y;
  for (double s : s_tail) {
    const auto it = std::find_if(ray.states.begin(), ray.states.end(), [&](const ContinuationState& st) { return st.s == s; });
    if (it == ray.states.end()) throw ComputationError("tail value not reached");
    h.push_back(1.0 - s);
    y.push_back(it->a.coordinates());
  }
  // only the last order+1 points enter the extrapolation
  const std::size_t use = std::min(h.size(), static_cast<std::size_t>(order) + 1);
  std::vector<double> hh(h.end() - static_cast<long>(use), h.end());
  std::vector<std::vector<Complex>> yy(y.end() - static_cast<long>(use), y.end());
  auto diag = detail::neville_to_zero(hh, yy);
  LimitEstimate est;
  est.order = static_cast<int>(diag.size()) - 1;
  est.extrapolants = diag;
  const auto& top = diag.back();
  const auto& below = diag[diag.size() - 2];
  double unc = 0.0;
  for (std::size_t j = 0; j < top.size(); ++j) unc = std::max(unc, std::abs(top[j] - below[j]));
  est.uncertainty = unc;
  est.a2 = MarkedParams::from_coordinates(ray.states.back().a.degree, top);
  ray.limit = est;
  return est;
}

struct LimitCheck {
  std::string name;
  bool pass = false;
  double value = 0.0;
  std::string detail;
};

struct LimitReport {
  std::vector<LimitCheck> checks;
  bool all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const LimitCheck& c) { return c.pass; });
  }
};

struct VerifyOptions {
  double residual_tol = 1e-6;
  double landing_tol = 1e-3;
  double indifference_band = 1e-3;
  int max_period = 6;
  int n_iter = 100000;
  double julia_band = 1e-4;
  RayOptions ray;
};

/// Checks the verifiable conclusions at a limit parameter. Every check is
/// reported independently; computational failures become failed checks.
inline LimitReport verify_limit(const MarkedParams& a2, const CriticalPortrait& portrait, const DigitStream& t1,
                                const VerifyOptions& opt = {}) {
  LimitReport rep;
  Polynomial f;
  {
    LimitCheck c{"relations", false, 0.0, {}};
    try {
      f = build_marked(a2);
      c.value = max_abs(residuals(a2, portrait));
      c.pass = c.value < opt.residual_tol;
      c.detail = "max residual " + std::to_string(c.value);
    } catch (const std::exception& e) {
      c.detail = e.what();
    }
    rep.checks.push_back(c);
  }
  if (f.degree() < 1) {
    for (const char* n : {"internal-ray", "no-indifferent-cycle", "critical-orbit"})
      rep.checks.push_back({n, false, 0.0, "no polynomial"});
    return rep;
  }
  const Polynomial F = portrait.p == 1 ? f : f.iterate(portrait.p);
  {
    LimitCheck c{"internal-ray", false, 0.0, {}};
    try {
      InternalRay r = trace_internal_ray(F, t1, 0.0, opt.ray);
      const Landing l = internal_landing_point(F, r, opt.landing_tol);
      const Complex v = f(a2.c);
      c.value = std::abs(r.points.back().z - v);
      c.pass = l.status == LandingStatus::converged && c.value < opt.landing_tol;
      c.detail = "terminal point at distance " + std::to_string(c.value) + " from v, status " + to_string(l.status);
    } catch (const std::exception& e) {
      c.detail = e.what();
    }
    rep.checks.push_back(c);
  }
  {
    LimitCheck c{"no-indifferent-cycle", false, 0.0, {}};
    try {
      CycleReport cr = find_cycles(f, opt.max_period);
      double closest = INFINITY;
      int period = 0;
      for (const auto& cy : cr.cycles) {
        const double gap = std::abs(std::abs(cy.multiplier) - 1.0);
        if (gap < closest) {
          closest = gap;
          period = cy.period;
        }
      }
      c.value = closest;
      c.pass = closest >= opt.indifference_band;
      c.detail = "closest ||m|-1| = " + std::to_string(closest) + " at period " + std::to_string(period);
      for (const auto& w : cr.warnings) c.detail += "; " + w;
    } catch (const std::exception& e) {
      c.detail = e.what();
    }
    rep.checks.push_back(c);
  }
  {
    LimitCheck c{"critical-orbit", false, 0.0, {}};
    try {
      BasinOptions bo;
      bo.max_period = opt.max_period;
      bo.n_iter = opt.n_iter;
      bo.julia_band = opt.julia_band;
      BasinReport br = classify_basins(f, bo);
      const Complex cc = a2.c;
      auto it = std::min_element(br.critical.begin(), br.critical.end(), [&](const CriticalFate& x, const CriticalFate& y) {
        return std::abs(x.point - cc) < std::abs(y.point - cc);
      });
      if (it == br.critical.end() || std::abs(it->point - cc) > 1e-6 * (1.0 + std::abs(cc))) throw ComputationError("c not among the critical points");
      c.value = it->level;
      c.pass = it->fate == OrbitFate::julia;
      c.detail = std::string("orbit of c: ") + to_string(it->fate) + ", level " + std::to_string(it->level);
    } catch (const std::exception& e) {
      c.detail = e.what();
    }
    rep.checks.push_back(c);
  }
  return rep;
}

}  // namespace polydyn
