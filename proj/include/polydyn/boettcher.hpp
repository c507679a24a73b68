#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "cycles.hpp"
#include "local_boettcher.hpp"
#include "poly.hpp"
#include "roots.hpp"

namespace polydyn {

/// |phi_infinity(z)| = lim |f^n(z)|^{d^-n} for escaping z; nullopt ("inside")
/// when the orbit stays bounded for n_iter steps.
inline std::optional<double> green(const Polynomial& f, Complex z, int n_iter = 100000) {
  const double d = f.degree();
  const double esc = escape_radius(f);
  const double big = std::pow(1e300, 1.0 / d) * 1e-10;
  int n = 0;
  while (std::abs(z) <= esc) {
    if (n >= n_iter) return std::nullopt;
    z = f(z);
    ++n;
  }
  double scale = std::pow(d, -n);
  double log_g = std::log(std::abs(z)) * scale;
  for (int k = 0; k < 200; ++k) {
    const double az = std::abs(z);
    if (az > big) break;
    const Complex w = f(z);
    scale /= d;
    const double next = std::log(std::abs(w)) * scale;
    const bool done = std::abs(next - log_g) <= 1e-12 * std::abs(next);
    log_g = next;
    z = w;
    if (done) break;
  }
  return std::exp(log_g);
}

/// Potential log|phi_infinity(z)|, or nullopt for non-escaping points.
inline std::optional<double> potential(const Polynomial& f, Complex z, int n_iter = 100000) {
  auto g = green(f, z, n_iter);
  if (!g) return std::nullopt;
  return std::log(*g);
}

/// Böttcher coordinate at infinity near the reference radius, where the
/// ratios f(z)/z^d stay within 0.1 of 1 along the orbit.
class ExteriorBoettcher {
 public:
  explicit ExteriorBoettcher(const Polynomial& f) : f_(f) {
    if (!f.is_monic(1e-12)) throw InputError("Böttcher coordinate at infinity needs a monic polynomial");
    const int d = f.degree();
    auto bound = [&](double r) {
      double s = 0.0;
      for (int k = 0; k < d; ++k) s += std::abs(f.coefficient(k)) * std::pow(r, k - d);
      return s;
    };
    double r = 2.0;
    while (bound(r) > 0.1) r *= 1.5;
    r_ref_ = r;
  }

  double reference_radius() const { return r_ref_; }
  const Polynomial& poly() const { return f_; }

  // f(z)/z^d by Horner in 1/z
  Complex ratio(Complex z) const {
    const int d = f_.degree();
    const Complex u = 1.0 / z;
    Complex acc{};
    for (int k = 0; k < d; ++k) acc = (acc + f_.coefficient(k)) * u;
    return 1.0 + acc;
  }

  Complex phi(Complex z) const {
    if (std::abs(z) < r_ref_) throw InputError("phi_infinity evaluated inside the reference radius");
    const double d = f_.degree();
    Complex acc = std::log(z);
    double w = 1.0 / d;
    for (int k = 0; k < 60; ++k, w /= d) {
      const Complex lr = std::log(ratio(z));
      acc += w * lr;
      if (std::abs(w * lr) < 1e-18) break;
      z = f_(z);
      if (!is_finite(z) || std::abs(z) > 1e150) break;
    }
    return std::exp(acc);
  }

  /// Inverse of phi for |w| > reference radius, by Newton.
  Complex psi(Complex w) const {
    if (std::abs(w) < 1.2 * r_ref_) throw InputError("psi_infinity requested too close to the Julia set");
    Complex z = w - f_.coefficient(f_.degree() - 1) / static_cast<double>(f_.degree());
    for (int it = 0; it < 60; ++it) {
      const double h = 1e-6 * std::abs(z);
      const Complex dphi = (phi(z + h) - phi(z - h)) / (2.0 * h);
      const Complex step = (phi(z) - w) / dphi;
      z -= step;
      if (std::abs(step) < 1e-15 * std::abs(z)) break;
    }
    return z;
  }

 private:
  Polynomial f_;
  double r_ref_ = 2.0;
};

/// Internal modulus |phi^0(z)| for the superattracting fixed point 0 of f;
/// nullopt when z is not in the basin.
inline std::optional<double> internal_modulus(const Polynomial& f, Complex z) {
  return SuperattractingCoordinate(f).modulus(z);
}

/// Critical level s_a: least internal modulus over critical points of F other
/// than the center, restricted to the basin; 1 when there are none.
inline double critical_level(const Polynomial& F, const SuperattractingCoordinate& sc) {
  double level = 1.0;
  for (const auto& cp : critical_points(F)) {
    if (std::abs(cp.z - sc.center()) < 1e-8) continue;
    auto m = sc.modulus(cp.z);
    if (m) level = std::min(level, *m);
  }
  return level;
}

struct PhiValue {
  Complex value{};
  int ell = 0;
  BranchTrace trace;
  double critical_level = 1.0;
};

/// Phi(a) = phi_a(f_a^ell(c)) for the marked family with 0 superattracting of
/// period p. The prior trace, when given, pins the logarithm branches.
inline PhiValue phi_of_a(const MarkedParams& a, int p = 1, const BranchTrace* prior = nullptr) {
  if (a.degree < 3) throw InputError("phi_of_a needs the free critical point c (degree >= 3)");
  const Polynomial f = build_marked(a);
  const Polynomial F = p == 1 ? f : f.iterate(p);
  SuperattractingCoordinate sc(F);
  PhiValue out;
  out.critical_level = critical_level(F, sc);
  Complex v = a.c;
  for (int ell = 0; ell <= 1000; ++ell) {
    auto m = sc.modulus(v);
    if (m && *m < out.critical_level * (1.0 - 1e-9)) {
      auto ph = sc.phi(v, prior);
      if (!ph) break;
      if (ph->ambiguous && !prior) throw ComputationError("branch ambiguity: no prior state at a branch cut");
      out.value = ph->value;
      out.ell = ell;
      out.trace = ph->trace;
      return out;
    }
    v = f(v);
    if (!is_finite(v) || std::abs(v) > escape_radius(f)) break;
  }
  throw ComputationError("not attracted: orbit of c never enters B_a(s_a)");
}

}  // namespace polydyn
