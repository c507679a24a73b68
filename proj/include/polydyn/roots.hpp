#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "poly.hpp"

namespace polydyn {

struct RootOptions {
  double tol = 1e-15;
  int max_iter = 800;
};

struct RootResult {
  std::vector<Complex> roots;
  bool converged = false;
  int iterations = 0;
};

/// Simultaneous Aberth-Ehrlich iteration for the n roots of a function whose
/// Newton correction g/g' is supplied by `correction`. This is Newton's method
/// with implicit deflation against every other current approximation.
template <class Correction>
RootResult aberth(int n, double radius, Correction&& correction, const RootOptions& opt = {}) {
  RootResult out;
  out.roots.resize(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k)
    out.roots[static_cast<std::size_t>(k)] = std::polar(radius, kTwoPi * (k + 0.25) / n);
  std::vector<char> done(static_cast<std::size_t>(n), 0);
  auto& z = out.roots;
  for (int it = 0; it < opt.max_iter; ++it) {
    out.iterations = it + 1;
    bool all = true;
    for (std::size_t k = 0; k < z.size(); ++k) {
      if (done[k]) continue;
      const Complex newton = correction(z[k]);
      if (!is_finite(newton)) {
        z[k] *= 0.9;
        all = false;
        continue;
      }
      Complex repel{};
      for (std::size_t j = 0; j < z.size(); ++j)
        if (j != k) repel += 1.0 / (z[k] - z[j]);
      const Complex w = newton / (1.0 - newton * repel);
      z[k] -= w;
      if (std::abs(w) <= opt.tol * (1.0 + std::abs(z[k]))) done[k] = 1;
      else all = false;
    }
    if (all) {
      out.converged = true;
      break;
    }
  }
  return out;
}

/// Cauchy bound on the moduli of the roots of p.
inline double root_bound(const Polynomial& p) {
  const Complex lead = p.coefficients().back();
  double m = 0.0;
  for (int k = 0; k < p.degree(); ++k) m = std::max(m, std::abs(p.coefficient(k) / lead));
  return 1.0 + m;
}

/// All roots of p (with repetition), polished by Newton on p.
inline std::vector<Complex> polynomial_roots(const Polynomial& p) {
  const int n = p.degree();
  if (n < 1) return {};
  auto corr = [&](Complex z) {
    auto [v, dv] = p.eval_with_derivative(z);
    return v / dv;
  };
  RootResult r = aberth(n, root_bound(p), corr);
  return r.roots;
}

struct CriticalPoint {
  Complex z;
  int multiplicity = 1;
};

/// Roots of f' with multiplicities. Clustered approximations of a multiple
/// root are replaced by the Newton root of the matching higher derivative.
inline std::vector<CriticalPoint> critical_points(const Polynomial& f, double cluster_tol = 1e-4) {
  if (f.degree() < 2) throw InputError("critical points need degree >= 2");
  const Polynomial df = f.derivative();
  std::vector<Complex> raw = polynomial_roots(df);
  const double scale = 1.0 + root_bound(df);
  std::vector<int> owner(raw.size(), -1);
  std::vector<CriticalPoint> out;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (owner[i] >= 0) continue;
    owner[i] = static_cast<int>(out.size());
    Complex sum = raw[i];
    int m = 1;
    for (std::size_t j = i + 1; j < raw.size(); ++j) {
      if (owner[j] < 0 && std::abs(raw[j] - raw[i]) < cluster_tol * scale) {
        owner[j] = owner[i];
        sum += raw[j];
        ++m;
      }
    }
    out.push_back({sum / static_cast<double>(m), m});
  }
  for (auto& cp : out) {
    Polynomial g = df;
    for (int k = 1; k < cp.multiplicity; ++k) g = g.derivative();
    Complex z = cp.z;
    for (int it = 0; it < 60; ++it) {
      auto [v, dv] = g.eval_with_derivative(z);
      if (v == Complex{} || dv == Complex{}) break;
      const Complex step = v / dv;
      z -= step;
      if (std::abs(step) < 1e-17 * (1.0 + std::abs(z))) break;
    }
    // residual check on every derivative that must vanish
    Polynomial h = df;
    for (int k = 0; k < cp.multiplicity; ++k) {
      const double res = std::abs(h(z));
      const double ref = 1e-8 * std::pow(scale, std::max(1, h.degree()));
      if (res > ref)
        throw ComputationError("critical point refinement failed: |f^(" + std::to_string(k + 1) +
                               ")(z)| = " + std::to_string(res));
      h = h.derivative();
    }
    cp.z = z;
  }
  std::sort(out.begin(), out.end(), [](const CriticalPoint& a, const CriticalPoint& b) {
    if (a.z.real() != b.z.real()) return a.z.real() < b.z.real();
    return a.z.imag() < b.z.imag();
  });
  return out;
}

}  // namespace polydyn
