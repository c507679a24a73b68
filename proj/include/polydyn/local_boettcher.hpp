#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <vector>

#include "poly.hpp"

namespace polydyn {

/// Record of the logarithm branches used along the orbit when evaluating the
/// internal Böttcher coordinate; feeding a previous trace back in keeps the
/// value continuous along a path of nearby evaluations.
struct BranchTrace {
  std::vector<Complex> log_ratio;  // log r(z_k) for the iterates outside the linear disk
  Complex log_mu_z{};
};

struct LocalPhi {
  Complex value{};
  Complex log_value{};
  int iterations = 0;  // iterates needed to reach the linear disk
  BranchTrace trace;
  bool ambiguous = false;  // principal branch chosen next to a cut without a prior
};

/// Böttcher coordinate of a polynomial F at a superattracting fixed point
/// `center` (F(center) = center, F'(center) = 0): phi(F(z)) = phi(z)^{d0},
/// phi(z) = mu (z - center) + O((z - center)^2) with mu^{d0-1} = lambda.
class SuperattractingCoordinate {
 public:
  SuperattractingCoordinate() = default;

  SuperattractingCoordinate(const Polynomial& f, Complex center = {}) : center_(center) {
    g_ = center == Complex{} ? f : f.translated(center);
    const double scale = 1.0 + escape_radius(g_);
    if (std::abs(g_.coefficient(0)) > 1e-10 * scale || std::abs(g_.coefficient(1)) > 1e-10 * scale)
      throw InputError("point is not a superattracting fixed point");
    d0_ = 2;
    while (d0_ < g_.degree() && std::abs(g_.coefficient(d0_)) <= 1e-14 * scale) ++d0_;
    lambda_ = g_.coefficient(d0_);
    mu_ = d0_ == 2 ? lambda_ : std::pow(lambda_, 1.0 / (d0_ - 1));
    for (int k = d0_ + 1; k <= g_.degree(); ++k) tail_.push_back(g_.coefficient(k) / lambda_);
    r_lin_ = linear_radius();
  }

  int local_degree() const { return d0_; }
  Complex lambda() const { return lambda_; }
  Complex mu() const { return mu_; }
  Complex center() const { return center_; }
  /// Radius of the disk where F(z) = lambda z^{d0} (1 + g(z)) with |g| <= 0.1.
  double linear_radius() const {
    auto bound = [&](double r) {
      double s = 0.0, ds = 0.0, p = r;
      for (std::size_t k = 0; k < tail_.size(); ++k, p *= r) {
        s += std::abs(tail_[k]) * p;
        ds += static_cast<double>(k + 1) * std::abs(tail_[k]) * p;
      }
      return std::max(s, ds);
    };
    double hi = std::pow(0.5 / std::abs(lambda_), 1.0 / (d0_ - 1));
    if (tail_.empty() || bound(hi) <= 0.1) return hi;
    double lo = 0.0;
    for (int i = 0; i < 80; ++i) {
      const double mid = 0.5 * (lo + hi);
      (bound(mid) <= 0.1 ? lo : hi) = mid;
    }
    return lo;
  }
  double valid_radius() const { return r_lin_; }

  /// Ratio F(z) / (lambda z^{d0}) evaluated without cancellation.
  Complex ratio(Complex w) const {
    Complex acc{};
    for (std::size_t k = tail_.size(); k-- > 0;) acc = (acc + tail_[k]) * w;
    return 1.0 + acc;
  }

  Complex step(Complex w) const { return g_(w); }

  /// Modulus |phi| via the limit formula; defined on the whole basin.
  std::optional<double> modulus(Complex z, int max_iter = 100000) const {
    Complex w = z - center_;
    const double esc = escape_radius(g_);
    int n = 0;
    while (std::abs(w) >= r_lin_) {
      if (n >= max_iter || std::abs(w) > esc || !is_finite(w)) return std::nullopt;
      w = g_(w);
      ++n;
    }
    if (w == Complex{}) return 0.0;
    const double log_mod = (std::log(std::abs(mu_)) + std::log(std::abs(w)) + tail_sum(w).real()) *
                           std::pow(static_cast<double>(d0_), -n);
    return std::exp(log_mod);
  }

  /// phi(z) with branch continuation: the logarithm of every ratio outside
  /// the linear disk is taken on the branch nearest the prior trace (when one
  /// is given and has the same orbit length), else on the principal branch.
  std::optional<LocalPhi> phi(Complex z, const BranchTrace* prior = nullptr, int max_iter = 100000) const {
    LocalPhi out;
    Complex w = z - center_;
    const double esc = escape_radius(g_);
    std::vector<Complex> orbit;
    while (std::abs(w) >= r_lin_) {
      if (static_cast<int>(orbit.size()) >= max_iter || std::abs(w) > esc || !is_finite(w)) return std::nullopt;
      orbit.push_back(w);
      w = g_(w);
    }
    out.iterations = static_cast<int>(orbit.size());
    const bool use_prior = prior && prior->log_ratio.size() == orbit.size();
    Complex z0 = z - center_;
    if (z0 == Complex{}) return out;
    Complex lz = std::log(mu_ * z0);
    if (use_prior) lz = nearest_branch(lz, prior->log_mu_z);
    out.trace.log_mu_z = lz;
    Complex acc = lz;
    double weight = 1.0 / d0_;
    for (std::size_t k = 0; k < orbit.size(); ++k, weight /= d0_) {
      Complex lr = std::log(ratio(orbit[k]));
      if (use_prior) lr = nearest_branch(lr, prior->log_ratio[k]);
      else if (std::abs(std::arg(ratio(orbit[k]))) > 0.9 * M_PI) out.ambiguous = true;
      out.trace.log_ratio.push_back(lr);
      acc += weight * lr;
    }
    // tail inside the linear disk, principal branch is exact there
    acc += weight * d0_ * tail_sum(w);
    out.log_value = acc;
    out.value = std::exp(acc);
    return out;
  }

 private:
  // sum_{k>=0} d0^{-(k+1)} log r(w_k), w_0 = w inside the linear disk
  Complex tail_sum(Complex w) const {
    Complex s{};
    double weight = 1.0 / d0_;
    for (int k = 0; k < 200; ++k, weight /= d0_) {
      const Complex lr = std::log(ratio(w));
      s += weight * lr;
      if (std::abs(weight * lr) < 1e-18 || std::abs(w) < 1e-200) break;
      w = g_(w);
    }
    return s;
  }

  static Complex nearest_branch(Complex value, Complex reference) {
    const double k = std::round((reference.imag() - value.imag()) / kTwoPi);
    return value + Complex(0.0, k * kTwoPi);
  }

  Polynomial g_;
  Complex center_{};
  int d0_ = 2;
  Complex lambda_{1.0};
  Complex mu_{1.0};
  std::vector<Complex> tail_;
  double r_lin_ = 0.0;
};

}  // namespace polydyn
