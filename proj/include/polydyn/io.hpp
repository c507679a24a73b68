#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "continuation.hpp"
#include "lamination.hpp"
#include "poly.hpp"
#include "rays.hpp"

namespace polydyn {

using Json = nlohmann::json;

/// Number formatting used by every writer: 17 significant digits.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "NaN";
  if (std::isinf(x)) return x > 0 ? "Infinity" : "-Infinity";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline void dump_json(const Json& j, std::ostream& out) {
  switch (j.type()) {
    case Json::value_t::object: {
      out << '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out << ',';
        first = false;
        out << Json(it.key()).dump() << ':';
        dump_json(it.value(), out);
      }
      out << '}';
      break;
    }
    case Json::value_t::array: {
      out << '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out << ',';
        dump_json(j[i], out);
      }
      out << ']';
      break;
    }
    case Json::value_t::number_float: {
      const double x = j.get<double>();
      // JSON has no non-finite numbers
      if (std::isfinite(x)) out << format_double(x);
      else out << Json(format_double(x)).dump();
      break;
    }
    default:
      out << j.dump();
  }
}

inline std::string dump_json(const Json& j) {
  std::ostringstream s;
  dump_json(j, s);
  return s.str();
}

inline Json to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

inline Complex complex_from_json(const Json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2) return {j[0].get<double>(), j[1].get<double>()};
  throw InputError("complex value must be a number or [re, im]");
}

/// Complex literal: "1.5", "-2i", "0.3-0.7i", "i", "(0.3,-0.7)".
inline Complex parse_complex(std::string s) {
  s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }), s.end());
  if (s.empty()) throw InputError("empty complex literal");
  if (s.front() == '(' && s.back() == ')') {
    const auto comma = s.find(',');
    if (comma == std::string::npos) return parse_complex(s.substr(1, s.size() - 2));
    return {std::stod(s.substr(1, comma - 1)), std::stod(s.substr(comma + 1, s.size() - comma - 2))};
  }
  auto part = [&](const std::string& t) -> Complex {
    if (t.empty()) throw InputError("bad complex literal '" + s + "'");
    if (t.back() == 'i' || t.back() == 'I') {
      std::string m = t.substr(0, t.size() - 1);
      if (m.empty() || m == "+") return {0, 1};
      if (m == "-") return {0, -1};
      std::size_t used = 0;
      const double v = std::stod(m, &used);
      if (used != m.size()) throw InputError("bad complex literal '" + s + "'");
      return {0, v};
    }
    std::size_t used = 0;
    const double v = std::stod(t, &used);
    if (used != t.size()) throw InputError("bad complex literal '" + s + "'");
    return {v, 0};
  };
  // split at a sign that is not the leading one and not an exponent sign
  for (std::size_t k = s.size(); k-- > 1;) {
    if ((s[k] == '+' || s[k] == '-') && s[k - 1] != 'e' && s[k - 1] != 'E') {
      try {
        return part(s.substr(0, k)) + part(s.substr(k));
      } catch (const std::exception&) {
        throw InputError("bad complex literal '" + s + "'");
      }
    }
  }
  try {
    return part(s);
  } catch (const InputError&) {
    throw;
  } catch (const std::exception&) {
    throw InputError("bad complex literal '" + s + "'");
  }
}

inline std::string format_complex(Complex z) {
  std::string s = format_double(z.real());
  s += z.imag() < 0 || std::signbit(z.imag()) ? "-" : "+";
  s += format_double(std::abs(z.imag())) + "i";
  return s;
}

namespace detail {

// Expression in z: sum of terms [coef][*]z[^n]; coefficients may be
// parenthesized complex literals or real numbers with an optional i.
class ExprParser {
 public:
  explicit ExprParser(std::string s) {
    for (char c : s)
      if (!std::isspace(static_cast<unsigned char>(c))) s_ += c;
  }

  std::vector<Complex> parse() {
    std::vector<Complex> coeffs;
    if (s_.empty()) throw InputError("empty polynomial expression");
    while (pos_ < s_.size()) {
      double sign = 1.0;
      if (peek() == '+' || peek() == '-') {
        sign = get() == '-' ? -1.0 : 1.0;
      } else if (pos_ != 0) {
        throw error("expected + or -");
      }
      Complex coef{1.0};
      bool have_coef = false;
      if (peek() == '(') {
        const auto close = s_.find(')', pos_);
        if (close == std::string::npos) throw error("unbalanced parenthesis");
        coef = parse_complex(s_.substr(pos_, close - pos_ + 1));
        pos_ = close + 1;
        have_coef = true;
      } else if (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '.') {
        const std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.' ||
                                    ((s_[pos_] == 'e' || s_[pos_] == 'E') && pos_ + 1 < s_.size() &&
                                     (std::isdigit(static_cast<unsigned char>(s_[pos_ + 1])) || s_[pos_ + 1] == '-' || s_[pos_ + 1] == '+')) ||
                                    ((s_[pos_] == '-' || s_[pos_] == '+') && (s_[pos_ - 1] == 'e' || s_[pos_ - 1] == 'E'))))
          ++pos_;
        coef = std::stod(s_.substr(start, pos_ - start));
        have_coef = true;
      }
      if (peek() == 'i' || peek() == 'I') {
        ++pos_;
        coef *= Complex(0, 1);
        have_coef = true;
      }
      int power = 0;
      if (peek() == '*') {
        if (!have_coef) throw error("dangling *");
        ++pos_;
        if (peek() != 'z') throw error("expected z after *");
      }
      if (peek() == 'z' || peek() == 'Z') {
        ++pos_;
        power = 1;
        if (peek() == '^') {
          ++pos_;
          const std::size_t start = pos_;
          while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
          if (start == pos_) throw error("expected exponent");
          power = std::stoi(s_.substr(start, pos_ - start));
        }
      } else if (!have_coef) {
        throw error("expected a term");
      }
      if (power > 64) throw error("degree above 64");
      if (static_cast<int>(coeffs.size()) <= power) coeffs.resize(static_cast<std::size_t>(power) + 1);
      coeffs[static_cast<std::size_t>(power)] += sign * coef;
    }
    return coeffs;
  }

 private:
  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
  char get() { return s_[pos_++]; }
  InputError error(const std::string& what) const {
    return InputError("polynomial expression '" + s_ + "': " + what + " at position " + std::to_string(pos_));
  }
  std::string s_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline MarkedParams marked_from_json(const Json& j) {
  MarkedParams a;
  a.degree = j.at("degree").get<int>();
  if (j.contains("c")) a.c = complex_from_json(j.at("c"));
  if (j.contains("extra"))
    for (const auto& e : j.at("extra")) a.extra.push_back(complex_from_json(e));
  if (j.contains("b")) a.b = complex_from_json(j.at("b"));
  a.validate();
  return a;
}

inline Json to_json(const MarkedParams& a) {
  Json j;
  j["degree"] = a.degree;
  if (a.degree >= 3) j["c"] = to_json(a.c);
  Json ex = Json::array();
  for (Complex e : a.extra) ex.push_back(to_json(e));
  if (!a.extra.empty()) j["extra"] = ex;
  j["b"] = to_json(a.b);
  return j;
}

/// JSON polynomial: {"degree": d, "coefficients": [[re, im], ...]} in
/// ascending order, or {"marked": {"degree", "c", "extra", "b"}}.
inline Polynomial polynomial_from_json(const Json& j) {
  if (j.contains("marked")) return build_marked(marked_from_json(j.at("marked")));
  if (!j.contains("coefficients")) throw InputError("polynomial JSON needs 'coefficients' or 'marked'");
  std::vector<Complex> c;
  for (const auto& x : j.at("coefficients")) c.push_back(complex_from_json(x));
  Polynomial f(c);
  if (j.contains("degree") && j.at("degree").get<int>() != f.degree())
    throw InputError("polynomial JSON: degree does not match the coefficients");
  return f;
}

inline Json to_json(const Polynomial& f) {
  Json j;
  j["degree"] = f.degree();
  Json c = Json::array();
  for (Complex a : f.coefficients()) c.push_back(to_json(a));
  j["coefficients"] = c;
  if (f.marked()) j["marked"] = to_json(*f.marked());
  return j;
}

/// Polynomial from text: an expression in z ("z^3", "z^2-1"), the text form
/// "poly d=3 coeffs=[1, 0, 0, 0]" (descending), inline JSON, or a path to a
/// JSON file.
inline Polynomial parse_polynomial(const std::string& text) {
  std::string t = text;
  const auto first = t.find_first_not_of(" \t\n");
  if (first == std::string::npos) throw InputError("empty polynomial");
  t = t.substr(first);
  if (t.front() == '{') return polynomial_from_json(Json::parse(t));
  if (t.rfind("poly", 0) == 0) {
    const auto dpos = t.find("d=");
    const auto cpos = t.find("coeffs=[");
    const auto close = t.find(']', cpos == std::string::npos ? 0 : cpos);
    if (dpos == std::string::npos || cpos == std::string::npos || close == std::string::npos)
      throw InputError("text form is 'poly d=<degree> coeffs=[a_d, ..., a_0]'");
    const int d = std::stoi(t.substr(dpos + 2));
    std::vector<Complex> desc;
    std::stringstream list(t.substr(cpos + 8, close - cpos - 8));
    std::string item;
    // commas inside parentheses belong to the literal
    std::string cur;
    int depth = 0;
    for (char ch : list.str()) {
      if (ch == '(') ++depth;
      if (ch == ')') --depth;
      if (ch == ',' && depth == 0) {
        desc.push_back(parse_complex(cur));
        cur.clear();
      } else {
        cur += ch;
      }
    }
    if (!cur.empty()) desc.push_back(parse_complex(cur));
    if (static_cast<int>(desc.size()) != d + 1)
      throw InputError("text form: expected " + std::to_string(d + 1) + " coefficients, got " + std::to_string(desc.size()));
    return Polynomial(std::vector<Complex>(desc.rbegin(), desc.rend()));
  }
  if (t.size() > 5 && t.substr(t.size() - 5) == ".json") {
    std::ifstream in(t);
    if (!in) throw InputError("cannot open " + t);
    return polynomial_from_json(Json::parse(in));
  }
  Polynomial f(detail::ExprParser(t).parse());
  // z^d + a_{d-2} z^{d-2} + ... with a_1 = 0 is the marked normal form when d = 2
  if (f.degree() == 2 && f.is_monic() && f.coefficient(1) == Complex{}) {
    MarkedParams a;
    a.degree = 2;
    a.b = f.coefficient(0);
    return build_marked(a);
  }
  return f;
}

inline std::string polynomial_text(const Polynomial& f) {
  std::string s = "poly d=" + std::to_string(f.degree()) + " coeffs=[";
  for (int k = f.degree(); k >= 0; --k) s += format_complex(f.coefficient(k)) + (k ? ", " : "]");
  return s;
}

inline Json to_json(const Angle& t) { return Json::array({t.num().str(), t.den().str()}); }

inline Angle angle_from_json(const Json& j) {
  if (j.is_string()) return Angle::parse(j.get<std::string>());
  if (j.is_array() && j.size() == 2 && j[0].is_string() && j[1].is_string())
    return Angle::parse(j[0].get<std::string>() + "/" + j[1].get<std::string>());
  throw InputError("angle must be \"p/q\" or [\"p\", \"q\"]");
}

/// {"N", "degree", "classes": [[["p","q"], ...], ...], "status", "landing",
/// "unresolved": [{"angle", "reason"}], "trivial"}.
inline Json to_json(const RationalLamination& lam) {
  Json j;
  j["N"] = lam.N;
  j["degree"] = lam.degree;
  Json cls = Json::array(), land = Json::array(), status = Json::array();
  for (const auto& c : lam.classes) {
    Json a = Json::array();
    for (const auto& t : c.angles) a.push_back(to_json(t));
    cls.push_back(a);
    land.push_back(to_json(c.landing));
    status.push_back(to_string(c.status));
  }
  j["classes"] = cls;
  j["landing"] = land;
  j["status"] = status;
  Json un = Json::array();
  for (const auto& u : lam.unresolved) un.push_back({{"angle", to_json(u.angle)}, {"reason", u.reason}});
  j["unresolved"] = un;
  j["trivial"] = is_trivial(lam);
  return j;
}

inline RationalLamination lamination_from_json(const Json& j) {
  std::vector<std::vector<Angle>> parts;
  for (const auto& c : j.at("classes")) {
    std::vector<Angle> p;
    for (const auto& a : c) p.push_back(angle_from_json(a));
    parts.push_back(p);
  }
  RationalLamination lam = make_lamination(j.value("degree", 2), parts, j.value("N", 0));
  if (j.contains("landing"))
    for (std::size_t i = 0; i < lam.classes.size() && i < j.at("landing").size(); ++i)
      lam.classes[i].landing = complex_from_json(j.at("landing")[i]);
  if (j.contains("unresolved"))
    for (const auto& u : j.at("unresolved")) {
      if (u.is_object()) lam.unresolved.push_back({angle_from_json(u.at("angle")), u.value("reason", "")});
      else lam.unresolved.push_back({angle_from_json(u), ""});
      lam.sample.push_back(lam.unresolved.back().angle);
    }
  std::sort(lam.sample.begin(), lam.sample.end());
  return lam;
}

inline Json to_json(const Landing& l) {
  Json j;
  j["status"] = to_string(l.status);
  if (l.status == LandingStatus::landed || l.status == LandingStatus::converged) {
    j["point"] = to_json(l.point);
    if (l.status == LandingStatus::landed) {
      j["period"] = l.period;
      j["preperiod"] = l.preperiod;
      j["multiplier"] = to_json(l.multiplier);
      j["parabolic"] = l.parabolic;
    }
  }
  if (l.status == LandingStatus::blocked) j["threshold"] = l.threshold;
  if (!l.reason.empty()) j["reason"] = l.reason;
  return j;
}

/// Ray samples as CSV rows "k,potential,re,im"; the landing record follows
/// as "# key=value" footer lines.
inline void write_ray_csv(const std::vector<RaySample>& pts, const Landing& landing, std::ostream& out) {
  out << "k,potential,re,im\n";
  for (std::size_t k = 0; k < pts.size(); ++k)
    out << k << ',' << format_double(pts[k].potential) << ',' << format_double(pts[k].z.real()) << ','
        << format_double(pts[k].z.imag()) << '\n';
  out << "# status=" << to_string(landing.status) << '\n';
  if (landing.status == LandingStatus::landed || landing.status == LandingStatus::converged)
    out << "# point=" << format_complex(landing.point) << '\n';
  if (landing.status == LandingStatus::landed)
    out << "# period=" << landing.period << "\n# preperiod=" << landing.preperiod << "\n# multiplier="
        << format_complex(landing.multiplier) << "\n# parabolic=" << (landing.parabolic ? "true" : "false") << '\n';
  if (landing.status == LandingStatus::blocked) out << "# threshold=" << format_double(landing.threshold) << '\n';
  if (!landing.reason.empty()) out << "# reason=" << landing.reason << '\n';
}

inline Json to_json(const std::vector<RaySample>& pts) {
  Json a = Json::array();
  for (const auto& s : pts) a.push_back({s.potential, s.z.real(), s.z.imag()});
  return a;
}

inline Json to_json(const BranchTrace& t) {
  Json lr = Json::array();
  for (Complex z : t.log_ratio) lr.push_back(to_json(z));
  return {{"log_ratio", lr}, {"log_mu_z", to_json(t.log_mu_z)}};
}

inline BranchTrace trace_from_json(const Json& j) {
  BranchTrace t;
  for (const auto& z : j.at("log_ratio")) t.log_ratio.push_back(complex_from_json(z));
  t.log_mu_z = complex_from_json(j.at("log_mu_z"));
  return t;
}

inline Json to_json(const ContinuationState& st) {
  Json j;
  j["s"] = st.s;
  j["a"] = to_json(st.a);
  j["phi"] = to_json(st.phi);
  j["phi_residual"] = st.phi_residual;
  Json cr = Json::array();
  for (double r : st.constraint_residuals) cr.push_back(r);
  j["constraint_residuals"] = cr;
  j["newton_iters"] = st.newton_iters;
  j["trace"] = to_json(st.trace);
  return j;
}

inline ContinuationState state_from_json(const Json& j) {
  ContinuationState st;
  st.s = j.at("s").get<double>();
  st.a = marked_from_json(j.at("a"));
  st.phi = complex_from_json(j.at("phi"));
  st.phi_residual = j.at("phi_residual").get<double>();
  for (const auto& r : j.at("constraint_residuals")) st.constraint_residuals.push_back(r.get<double>());
  st.newton_iters = j.at("newton_iters").get<int>();
  st.trace = trace_from_json(j.at("trace"));
  return st;
}

inline Json to_json(const LimitEstimate& e) {
  Json ex = Json::array();
  for (const auto& v : e.extrapolants) {
    Json row = Json::array();
    for (Complex z : v) row.push_back(to_json(z));
    ex.push_back(row);
  }
  return {{"a2", to_json(e.a2)}, {"order", e.order}, {"uncertainty", e.uncertainty}, {"extrapolants", ex}};
}

inline Json to_json(const LimitReport& r) {
  Json checks = Json::array();
  for (const auto& c : r.checks) checks.push_back({{"name", c.name}, {"pass", c.pass}, {"value", c.value}, {"detail", c.detail}});
  return {{"checks", checks}, {"all_pass", r.all_pass()}};
}

}  // namespace polydyn
