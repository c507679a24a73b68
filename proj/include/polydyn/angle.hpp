#pragma once

#include <algorithm>
#include <boost/integer/common_factor.hpp>
#include <boost/multiprecision/cpp_int.hpp>
#include <compare>
#include <ostream>
#include <string>
#include <vector>

#include "poly.hpp"

namespace polydyn {

using BigInt = boost::multiprecision::cpp_int;

/// Exact angle num/den in Q/Z, kept reduced with 0 <= num < den.
class Angle {
 public:
  Angle() : num_(0), den_(1) {}
  Angle(BigInt num, BigInt den) : num_(std::move(num)), den_(std::move(den)) { normalize(); }
  Angle(long long num, long long den) : Angle(BigInt(num), BigInt(den)) {}

  /// Parses "p/q" or an integer.
  static Angle parse(const std::string& s) {
    const auto slash = s.find('/');
    try {
      if (slash == std::string::npos) return Angle(BigInt(trim(s)), BigInt(1));
      return Angle(BigInt(trim(s.substr(0, slash))), BigInt(trim(s.substr(slash + 1))));
    } catch (const std::runtime_error&) {
      throw InputError("malformed angle '" + s + "'");
    }
  }

  const BigInt& num() const { return num_; }
  const BigInt& den() const { return den_; }

  double to_double() const {
    // exact for moderate sizes; long division keeps precision for huge ones
    if (den_ < BigInt(1) << 52) return static_cast<double>(num_) / static_cast<double>(den_);
    BigInt scaled = (num_ << 64) / den_;
    return std::ldexp(static_cast<double>(scaled), -64);
  }

  std::string str() const { return num_.str() + "/" + den_.str(); }

  /// d * theta mod 1.
  Angle times(int d) const { return Angle(num_ * d, den_); }

  /// Exact sum and difference mod 1.
  Angle operator+(const Angle& o) const { return Angle(num_ * o.den_ + o.num_ * den_, den_ * o.den_); }
  Angle operator-(const Angle& o) const { return Angle(num_ * o.den_ - o.num_ * den_, den_ * o.den_); }

  /// All d preimages (theta + j)/d, j = 0..d-1, in increasing order.
  std::vector<Angle> preimages(int d) const {
    std::vector<Angle> out;
    for (int j = 0; j < d; ++j) out.emplace_back(num_ + j * den_, den_ * d);
    return out;
  }

  friend bool operator==(const Angle& a, const Angle& b) { return a.num_ == b.num_ && a.den_ == b.den_; }
  friend std::strong_ordering operator<=>(const Angle& a, const Angle& b) {
    const BigInt l = a.num_ * b.den_, r = b.num_ * a.den_;
    if (l < r) return std::strong_ordering::less;
    if (l > r) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }
  friend std::ostream& operator<<(std::ostream& os, const Angle& a) { return os << a.str(); }

 private:
  static std::string trim(std::string s) {
    s.erase(0, s.find_first_not_of(" \t"));
    s.erase(s.find_last_not_of(" \t") + 1);
    return s;
  }

  void normalize() {
    if (den_ == 0) throw InputError("angle with zero denominator");
    if (den_ < 0) {
      den_ = -den_;
      num_ = -num_;
    }
    num_ %= den_;
    if (num_ < 0) num_ += den_;
    const BigInt g = boost::integer::gcd(num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
    if (num_ == 0) den_ = 1;
  }

  BigInt num_, den_;
};

/// tau_d(theta) = d theta mod 1.
inline Angle tau(const Angle& theta, int d) {
  if (d < 2) throw InputError("tau_d needs d >= 2");
  return theta.times(d);
}

inline Angle tau_iter(Angle theta, int d, int n) {
  for (int i = 0; i < n; ++i) theta = tau(theta, d);
  return theta;
}

struct AngleOrbit {
  int preperiod = 0;
  int period = 1;
};

/// Exact preperiod m (least k with gcd(den of tau^k theta, d) = 1) and period
/// q (order of d modulo that denominator).
inline AngleOrbit orbit_type(const Angle& theta, int d) {
  AngleOrbit o;
  Angle t = theta;
  while (boost::integer::gcd(t.den(), BigInt(d)) != 1) {
    t = tau(t, d);
    ++o.preperiod;
  }
  const BigInt& q = t.den();
  if (q == 1) return o;
  BigInt pw = d % q;
  o.period = 1;
  while (pw != 1) {
    pw = (pw * d) % q;
    ++o.period;
    if (o.period > 100000) throw ComputationError("angle period too long: " + theta.str());
  }
  return o;
}

/// Euler phi by trial division.
inline long long euler_phi(long long n) {
  long long r = n;
  for (long long p = 2; p * p <= n; ++p) {
    if (n % p == 0) {
      while (n % p == 0) n /= p;
      r -= r / p;
    }
  }
  if (n > 1) r -= r / n;
  return r;
}

/// All reduced fractions in [0,1) with denominator <= N, sorted by value.
inline std::vector<Angle> sample_angles(int N, int d = 2) {
  (void)d;
  if (N < 2) throw InputError("sample bound N must be >= 2");
  std::vector<Angle> out;
  out.emplace_back(0, 1);
  for (long long q = 2; q <= N; ++q)
    for (long long p = 1; p < q; ++p)
      if (boost::integer::gcd(p, q) == 1) out.emplace_back(p, q);
  std::sort(out.begin(), out.end());
  return out;
}

/// True iff x lies in the open positively oriented arc from a to b.
/// A degenerate arc (a == b) is the whole circle minus that point.
inline bool in_open_arc(const Angle& x, const Angle& a, const Angle& b) {
  if (a == b) return !(x == a);
  if (a < b) return a < x && x < b;
  return x > a || x < b;
}

/// Length of the positively oriented arc from a to b (0 when a == b).
inline Angle arc_length(const Angle& a, const Angle& b) {
  if (a == b) return Angle(0, 1);
  return b - a;
}

}  // namespace polydyn
