#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "angle.hpp"

namespace polydyn {

/// Lazily generated base-b expansion t = 0.x_0 x_1 x_2 ... of an angle.
/// Used for irrational internal angles, which no floating value can represent
/// without becoming preperiodic.
class DigitStream {
 public:
  using Generator = std::function<int(std::size_t)>;

  DigitStream() = default;
  DigitStream(int base, Generator gen, std::string name)
      : base_(base), gen_(std::make_shared<Generator>(std::move(gen))), name_(std::move(name)) {
    if (base < 2) throw InputError("digit stream base must be >= 2");
  }

  int base() const { return base_; }
  const std::string& name() const { return name_; }
  bool empty() const { return !gen_; }

  int digit(std::size_t i) const {
    if (!gen_) throw InputError("empty digit stream");
    return (*gen_)(i);
  }

  std::vector<int> digits(std::size_t from, std::size_t count) const {
    std::vector<int> out(count);
    for (std::size_t i = 0; i < count; ++i) out[i] = digit(from + i);
    return out;
  }

  /// tau_b^k(t) as a double, from the next `precision` digits.
  double value_after(std::size_t k, int precision = 64) const {
    long double v = 0.0L;
    for (int j = precision - 1; j >= 0; --j) v = (v + digit(k + static_cast<std::size_t>(j))) / base_;
    return static_cast<double>(v);
  }
  double value() const { return value_after(0); }

  /// Exact truncation 0.x_k ... x_{k+n-1} (left end of the cylinder of tau^k(t)).
  Angle prefix(std::size_t n, std::size_t k = 0) const {
    BigInt num = 0, den = 1;
    for (std::size_t i = 0; i < n; ++i) {
      num = num * base_ + digit(k + i);
      den *= base_;
    }
    return Angle(num, den);
  }

  /// The stream shifted by k digits, i.e. tau_b^k(t).
  DigitStream shifted(std::size_t k) const {
    auto g = gen_;
    return DigitStream(base_, [g, k](std::size_t i) { return (*g)(i + k); }, name_ + ">>" + std::to_string(k));
  }

 private:
  int base_ = 2;
  std::shared_ptr<Generator> gen_;
  std::string name_;
};

/// Generalized Thue-Morse pattern: digit i is the base-b digit sum of i, mod b.
inline DigitStream thue_morse(int base) {
  return DigitStream(
      base,
      [base](std::size_t i) {
        std::size_t s = 0;
        for (; i; i /= static_cast<std::size_t>(base)) s += i % static_cast<std::size_t>(base);
        return static_cast<int>(s % static_cast<std::size_t>(base));
      },
      "thue-morse(" + std::to_string(base) + ")");
}

/// Fibonacci word (fixed point of 0 -> 01, 1 -> 0) written in base b; the
/// golden-type angle, with no two consecutive 1s.
inline DigitStream fibonacci_word(int base) {
  return DigitStream(
      base,
      [](std::size_t i) {
        // Sturmian form of the word 0100101001001...
        constexpr long double phi = 1.6180339887498948482045868343656L;
        const long double n = static_cast<long double>(i);
        return static_cast<int>(2 + std::floor((n + 1) * phi) - std::floor((n + 2) * phi));
      },
      "fibonacci(" + std::to_string(base) + ")");
}

/// Base-b stream substituting block W0 or W1 for each binary digit of the pattern.
inline DigitStream block_coded(const DigitStream& pattern, int base, std::vector<int> w0, std::vector<int> w1) {
  if (w0.size() != w1.size() || w0.empty() || w0 == w1) throw InputError("block code needs two distinct equal-length words");
  const std::size_t len = w0.size();
  std::string name = pattern.name() + "[";
  for (int x : w0) name += std::to_string(x);
  name += "|";
  for (int x : w1) name += std::to_string(x);
  name += "]";
  return DigitStream(
      base,
      [pattern, w0, w1, len](std::size_t i) {
        const int bit = pattern.digit(i / len);
        return bit ? w1[i % len] : w0[i % len];
      },
      name);
}

/// True iff the open cylinder of the base-b word w meets the open arc (a, b).
inline bool cylinder_meets_arc(const std::vector<int>& w, int base, const Angle& a, const Angle& b) {
  // cylinder = (num/den, (num+1)/den) on the real line
  BigInt num = 0, den = 1;
  for (int x : w) {
    num = num * base + x;
    den *= base;
  }
  const BigInt lo = num, hi = num + 1;
  auto below = [&](const BigInt& s, const Angle& x) { return s * x.den() < x.num() * den; };
  auto above = [&](const BigInt& s, const Angle& x) { return s * x.den() > x.num() * den; };
  if (a == b) return true;
  if (a < b) return below(lo, b) && above(hi, a);
  // the arc wraps through 0: (a, 1) together with [0, b)
  return above(hi, a) || below(lo, b);
}

}  // namespace polydyn
