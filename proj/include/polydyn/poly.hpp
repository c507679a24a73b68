#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace polydyn {

using Complex = std::complex<double>;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Raised when a numerical procedure cannot produce a result at all
/// (as opposed to producing a negative verdict).
struct ComputationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised for malformed inputs (bad degree, inconsistent parameter shapes).
struct InputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

inline bool is_finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

inline Complex unit(double turns) { return std::polar(1.0, kTwoPi * turns); }

/// Parameters a = (c, c_2, ..., c_{d-2}, b) of the family whose critical
/// points are exactly 0, c, c_2, ..., c_{d-2}. For d = 2 only b is present.
struct MarkedParams {
  int degree = 2;
  Complex c{};
  std::vector<Complex> extra;
  Complex b{};

  void validate() const {
    if (degree < 2) throw InputError("marked parameters need degree >= 2");
    const std::size_t want = degree >= 3 ? static_cast<std::size_t>(degree - 3) : 0;
    if (extra.size() != want)
      throw InputError("marked parameters of degree " + std::to_string(degree) + " need " +
                       std::to_string(want) + " extra critical points");
  }

  /// Number of complex coordinates (d - 1).
  int dimension() const { return degree - 1; }

  /// Coordinates as a flat vector ordered (c, c_2, ..., c_{d-2}, b); (b) for d = 2.
  std::vector<Complex> coordinates() const {
    std::vector<Complex> x;
    if (degree >= 3) {
      x.push_back(c);
      x.insert(x.end(), extra.begin(), extra.end());
    }
    x.push_back(b);
    return x;
  }

  static MarkedParams from_coordinates(int degree, const std::vector<Complex>& x) {
    MarkedParams a;
    a.degree = degree;
    if (static_cast<int>(x.size()) != degree - 1) throw InputError("coordinate vector has wrong length");
    if (degree >= 3) {
      a.c = x[0];
      a.extra.assign(x.begin() + 1, x.end() - 1);
    }
    a.b = x.back();
    return a;
  }

  /// Marked critical point by index: 0 -> 0, 1 -> c, k >= 2 -> c_k.
  Complex critical(int k) const {
    if (k == 0) return {};
    if (degree < 3) throw InputError("degree-2 family has no free critical point c");
    if (k == 1) return c;
    if (k - 2 >= static_cast<int>(extra.size())) throw InputError("critical index out of range");
    return extra[static_cast<std::size_t>(k - 2)];
  }

  /// All marked critical points (0 first), one entry per index.
  std::vector<Complex> critical_points() const {
    std::vector<Complex> out{Complex{}};
    if (degree >= 3) {
      out.push_back(c);
      out.insert(out.end(), extra.begin(), extra.end());
    }
    return out;
  }
};

/// Polynomial with complex coefficients stored in ascending order
/// (coeffs[k] multiplies z^k). Dynamical operations assume the polynomial is
/// monic; derivatives and other auxiliary polynomials need not be.
class Polynomial {
 public:
  Polynomial() : coeffs_{Complex{1.0}} {}

  explicit Polynomial(std::vector<Complex> ascending, std::optional<MarkedParams> marked = std::nullopt)
      : coeffs_(std::move(ascending)), marked_(std::move(marked)) {
    while (coeffs_.size() > 1 && coeffs_.back() == Complex{}) coeffs_.pop_back();
    if (coeffs_.empty()) coeffs_.push_back({});
  }

  /// z^d + c.
  static Polynomial unicritical(int d, Complex c) {
    std::vector<Complex> a(static_cast<std::size_t>(d) + 1);
    a[0] = c;
    a[static_cast<std::size_t>(d)] = 1.0;
    return Polynomial(std::move(a));
  }

  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  const std::vector<Complex>& coefficients() const { return coeffs_; }
  Complex coefficient(int k) const {
    return k >= 0 && k < static_cast<int>(coeffs_.size()) ? coeffs_[static_cast<std::size_t>(k)] : Complex{};
  }
  const std::optional<MarkedParams>& marked() const { return marked_; }
  bool is_monic(double tol = 0.0) const { return std::abs(coeffs_.back() - 1.0) <= tol; }

  Complex operator()(Complex z) const {
    Complex acc = coeffs_.back();
    for (std::size_t i = coeffs_.size() - 1; i-- > 0;) acc = acc * z + coeffs_[i];
    return acc;
  }

  /// Value and first derivative by a single Horner pass.
  std::pair<Complex, Complex> eval_with_derivative(Complex z) const {
    Complex p = coeffs_.back();
    Complex dp{};
    for (std::size_t i = coeffs_.size() - 1; i-- > 0;) {
      dp = dp * z + p;
      p = p * z + coeffs_[i];
    }
    return {p, dp};
  }

  Complex derivative_at(Complex z) const { return eval_with_derivative(z).second; }

  Polynomial derivative() const {
    if (coeffs_.size() == 1) return Polynomial(std::vector<Complex>{Complex{}});
    std::vector<Complex> d(coeffs_.size() - 1);
    for (std::size_t k = 1; k < coeffs_.size(); ++k) d[k - 1] = coeffs_[k] * static_cast<double>(k);
    return Polynomial(std::move(d));
  }

  Polynomial operator*(const Polynomial& o) const {
    std::vector<Complex> r(coeffs_.size() + o.coeffs_.size() - 1);
    for (std::size_t i = 0; i < coeffs_.size(); ++i)
      for (std::size_t j = 0; j < o.coeffs_.size(); ++j) r[i + j] += coeffs_[i] * o.coeffs_[j];
    return Polynomial(std::move(r));
  }

  Polynomial operator+(const Polynomial& o) const {
    std::vector<Complex> r(std::max(coeffs_.size(), o.coeffs_.size()));
    for (std::size_t i = 0; i < coeffs_.size(); ++i) r[i] += coeffs_[i];
    for (std::size_t i = 0; i < o.coeffs_.size(); ++i) r[i] += o.coeffs_[i];
    return Polynomial(std::move(r));
  }

  /// (*this) o g, i.e. z -> f(g(z)).
  Polynomial compose(const Polynomial& g) const {
    Polynomial acc(std::vector<Complex>{coeffs_.back()});
    for (std::size_t i = coeffs_.size() - 1; i-- > 0;)
      acc = acc * g + Polynomial(std::vector<Complex>{coeffs_[i]});
    return acc;
  }

  /// f^p as an explicit polynomial of degree d^p.
  Polynomial iterate(int p) const {
    if (p < 1) throw InputError("iterate needs p >= 1");
    Polynomial r = *this;
    for (int i = 1; i < p; ++i) r = compose(r);
    return r;
  }

  /// Conjugate by the translation z -> z + shift: returns g(z) = f(z + shift) - shift.
  Polynomial translated(Complex shift) const {
    Polynomial inner(std::vector<Complex>{shift, 1.0});
    Polynomial g = compose(inner);
    g.coeffs_[0] -= shift;
    return g;
  }

 private:
  std::vector<Complex> coeffs_;
  std::optional<MarkedParams> marked_;
};

/// f_a(z) = d * integral_0^z s (s - c)(s - c_2)...(s - c_{d-2}) ds + b.
inline Polynomial build_marked(const MarkedParams& a) {
  a.validate();
  const int d = a.degree;
  // integrand s * prod (s - c_k), ascending coefficients
  std::vector<Complex> integrand{Complex{}, Complex{1.0}};
  if (d >= 3) {
    std::vector<Complex> roots;
    roots.push_back(a.c);
    roots.insert(roots.end(), a.extra.begin(), a.extra.end());
    for (Complex r : roots) {
      std::vector<Complex> next(integrand.size() + 1);
      for (std::size_t i = 0; i < integrand.size(); ++i) {
        next[i + 1] += integrand[i];
        next[i] -= r * integrand[i];
      }
      integrand = std::move(next);
    }
  }
  std::vector<Complex> coeffs(integrand.size() + 1);
  coeffs[0] = a.b;
  for (std::size_t k = 0; k < integrand.size(); ++k)
    coeffs[k + 1] = integrand[k] * (static_cast<double>(d) / static_cast<double>(k + 1));
  coeffs.back() = 1.0;
  return Polynomial(std::move(coeffs), a);
}

/// Value of f at z, or nullopt when the evaluation overflowed.
inline std::optional<Complex> evaluate(const Polynomial& f, Complex z) {
  const Complex v = f(z);
  if (!is_finite(v)) return std::nullopt;
  return v;
}

inline std::optional<Complex> derivative_at(const Polynomial& f, Complex z) {
  const Complex v = f.derivative_at(z);
  if (!is_finite(v)) return std::nullopt;
  return v;
}

/// n-th iterate of z; stops early and returns nullopt on overflow.
inline std::optional<Complex> orbit_point(const Polynomial& f, Complex z, int n) {
  for (int i = 0; i < n; ++i) {
    z = f(z);
    if (!is_finite(z)) return std::nullopt;
  }
  return z;
}

/// Value and derivative of f^n at z by the chain rule.
inline std::pair<Complex, Complex> iterate_with_derivative(const Polynomial& f, Complex z, int n) {
  Complex dz{1.0};
  for (int i = 0; i < n; ++i) {
    auto [v, dv] = f.eval_with_derivative(z);
    dz *= dv;
    z = v;
  }
  return {z, dz};
}

/// Bound beyond which every orbit escapes: 2 + sum of |a_k| over non-leading
/// coefficients of a monic polynomial.
inline double escape_radius(const Polynomial& f) {
  double m = 0.0;
  for (int k = 0; k < f.degree(); ++k) m += std::abs(f.coefficient(k));
  return 2.0 + m;
}

}  // namespace polydyn
