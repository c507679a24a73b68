// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <polydyn/polydyn.hpp>

#include "oracles.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>

using namespace polydyn;

namespace {

const Complex I{0.0, 1.0};

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void run(int id, const char* name, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome r;
  try {
    r = body();
  } catch (const std::exception& e) {
    r = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  failures += !r.pass;
  std::printf("[%s] %2d %s: %s (%.1f s)\n", r.pass ? "PASS" : "FAIL", id, name, r.detail.c_str(), secs);
  std::fflush(stdout);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <class... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

MarkedParams cubic(Complex c, Complex b) {
  MarkedParams a;
  a.degree = 3;
  a.c = c;
  a.b = b;
  return a;
}

std::vector<double> grid(double from, double to, double ds) {
  std::vector<double> g{from};
  const double dir = to > from ? 1.0 : -1.0;
  while (std::abs(to - g.back()) > 1e-12) {
    const double next = g.back() + dir * ds;
    g.push_back((to - next) * dir <= 1e-12 ? to : next);
  }
  return g;
}

std::vector<std::vector<Angle>> partition_of(const RationalLamination& lam) {
  std::vector<std::vector<Angle>> out;
  for (const auto& c : lam.classes) out.push_back(c.angles);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::vector<Angle>> nontrivial_partition(const RationalLamination& lam) {
  std::vector<std::vector<Angle>> out;
  for (const auto& c : lam.classes)
    if (c.angles.size() > 1) out.push_back(c.angles);
  std::sort(out.begin(), out.end());
  return out;
}

// shared across criteria
struct Shared {
  std::vector<std::pair<std::string, RationalLamination>> laminations;  // for criterion 10
  DigitStream t1 = choose_t1(2, std::nullopt, {T1Options::Pattern::fibonacci});
  CriticalPortrait portrait{};
  std::optional<StretchRay> ray;
  std::optional<LimitEstimate> limit;
};

Outcome radial_rays() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  std::size_t samples = 0;
  for (int d : {2, 3}) {
    const Polynomial f = Polynomial::unicritical(d, 0.0);
    for (int k = 0; k < 16; ++k) {
      const Angle t(2 * k + 1, 37);
      const ExternalRay r = trace_external_ray(f, t);
      if (r.points.empty()) return {false, "empty ray at " + t.str()};
      for (const auto& s : r.points) {
        double dt = std::arg(s.z) / (2.0 * M_PI) - t.to_double();
        dt -= std::round(dt);
        worst = std::max(worst, std::abs(dt) * 2.0 * M_PI);
        ++samples;
      }
    }
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-9 && secs < 5.0, fmt("max angular deviation %.2e over %zu samples, %.2f s (limits 1e-9, 5 s)", worst, samples, secs)};
}

Outcome cube_trivial(Shared& sh) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto lam = compute_lamination(Polynomial::unicritical(3, 0.0), 30);
  const double secs = seconds_since(t0);
  sh.laminations.emplace_back("z^3 N=30", lam);
  const bool ok = is_trivial(lam) && lam.unresolved.empty() && secs < 60.0;
  return {ok, fmt("trivial=%d unresolved=%zu classes=%zu, %.2f s (limit 60 s)", is_trivial(lam), lam.unresolved.size(),
                  lam.classes.size(), secs)};
}

Outcome basilica_rabbit(Shared& sh) {
  auto A = [](int p, int q) { return Angle(p, q); };
  const auto bas = compute_lamination(Polynomial::unicritical(2, -1.0), 6);
  const std::vector<std::vector<Angle>> want_bas{{A(1, 6), A(5, 6)}, {A(1, 3), A(2, 3)}};
  auto sorted = want_bas;
  std::sort(sorted.begin(), sorted.end());
  const bool bas_exact = nontrivial_partition(bas) == sorted && bas.unresolved.empty();
  const bool bas_oracle = partition_of(bas) == oracle::QuadraticLamination{-1.0}.partition(6, 1e-6);

  const Complex c = oracle::rabbit_center();
  const auto rab = compute_lamination(Polynomial::unicritical(2, c), 7);
  const std::vector<Angle> rabbit_class{A(1, 7), A(2, 7), A(4, 7)};
  bool rab_has = false;
  for (const auto& cl : rab.classes) rab_has |= cl.angles == rabbit_class;
  const bool rab_oracle = rab.unresolved.empty() && partition_of(rab) == oracle::QuadraticLamination{c}.partition(7, 1e-6);

  sh.laminations.emplace_back("basilica N=6", bas);
  sh.laminations.emplace_back("rabbit N=7", rab);
  return {bas_exact && bas_oracle && rab_has && rab_oracle,
          fmt("basilica classes exact=%d oracle match=%d; rabbit {1/7,2/7,4/7} present=%d oracle match=%d", bas_exact,
              bas_oracle, rab_has, rab_oracle)};
}

Outcome stretching(Shared& sh) {
  const auto t0 = std::chrono::steady_clock::now();
  sh.ray = continue_stretch(cubic_start(sh.t1, 0.3), sh.portrait, sh.t1, grid(0.3, 0.99, 0.05));
  const StretchRay& ray = *sh.ray;
  double phi = 0.0, cons = 0.0;
  for (const auto& st : ray.states) {
    phi = std::max(phi, st.phi_residual);
    cons = std::max(cons, st.max_constraint());
  }
  const bool reached = !ray.stalled && !ray.states.empty() && ray.states.back().s == 0.99;

  const ContinuationState* s09 = nullptr;
  for (const auto& st : ray.states)
    if (std::abs(st.s - 0.9) < 1e-12) s09 = &st;
  if (!s09) return {false, "no accepted state at s=0.9"};
  const StretchRay back = continue_stretch(s09->a, sh.portrait, sh.t1, grid(0.9, 0.3, 0.05), {}, &s09->trace);
  const MarkedParams& end = back.states.back().a;
  const MarkedParams& start = ray.states.front().a;
  const double ret = std::max(std::abs(end.c - start.c), std::abs(end.b - start.b));
  const double secs = seconds_since(t0);

  const bool back_ok = !back.stalled && back.states.size() > 1 && back.states.back().s == 0.3;
  const bool ok = reached && phi < 1e-8 && cons < 1e-10 && back_ok && ret < 1e-6 && secs < 300.0;
  return {ok, fmt("%zu states to s=0.99 (reached=%d), max phi_residual %.2e, max constraint %.2e, reverse return %.2e "
                  "after %zu states to s=%.2f, %.1f s (limits 1e-8, 1e-10, 1e-6, 300 s)",
                  ray.states.size(), reached, phi, cons, ret, back.states.size(), back.states.back().s, secs)};
}

Outcome stability(Shared& sh) {
  if (!sh.ray) return {false, "no stretching ray"};
  const auto ref = compute_lamination(Polynomial::unicritical(3, 0.0), 20);
  sh.laminations.emplace_back("z^3 N=20", ref);
  std::string detail;
  bool ok = true;
  std::optional<RationalLamination> first;
  for (double s : {0.3, 0.6, 0.9, 0.99}) {
    const ContinuationState* st = nullptr;
    for (const auto& x : sh.ray->states)
      if (std::abs(x.s - s) < 1e-12) st = &x;
    if (!st) return {false, fmt("no state at s=%.2f", s)};
    const auto lam = compute_lamination(build_marked(st->a), 20);
    sh.laminations.emplace_back(fmt("eg1 s=%.2f N=20", s), lam);
    const LamVerdict vz = equal(lam, ref).verdict;
    const LamVerdict vf = first ? equal(lam, *first).verdict : LamVerdict::equal;
    if (!first) first = lam;
    ok &= vz == LamVerdict::equal && vf == LamVerdict::equal;
    detail += fmt("%ss=%.2f vs z^3 %s", detail.empty() ? "" : "; ", s, to_string(vz));
  }
  return {ok, detail};
}

Outcome limit_checks(Shared& sh) {
  if (!sh.ray) return {false, "no stretching ray"};
  std::vector<double> tail;
  for (int n = 3; n <= 24; ++n) tail.push_back(1.0 - std::ldexp(1.0, -n));
  StretchRay r = *sh.ray;
  sh.limit = estimate_limit(r, tail);
  const LimitReport rep = verify_limit(sh.limit->a2, sh.portrait, sh.t1);
  std::string detail = fmt("a2 c=%.12f%+.12fi uncertainty %.1e;", sh.limit->a2.c.real(), sh.limit->a2.c.imag(),
                           sh.limit->uncertainty);
  for (const auto& c : rep.checks) detail += fmt(" [%s %s: %s]", c.pass ? "ok" : "FAILED", c.name.c_str(), c.detail.c_str());
  return {rep.checks.size() == 4 && rep.all_pass(), detail};
}

Outcome non_rigidity(Shared& sh) {
  if (!sh.limit) return {false, "no limit estimate"};
  const ProbeReport rep = rigidity_probe(Polynomial::unicritical(3, 0.0), build_marked(sh.limit->a2), 20);
  const bool ok = rep.verdict == ProbeVerdict::non_rigid && rep.laminations.verdict == LamVerdict::equal &&
                  rep.julia_critical_f != rep.julia_critical_g;
  return {ok, fmt("verdict \"%s\", laminations %s, Julia critical points %d vs %d", to_string(rep.verdict),
                  to_string(rep.laminations.verdict), rep.julia_critical_f, rep.julia_critical_g)};
}

Outcome disjoint_dichotomy() {
  const bool cube = disjoint_type(Polynomial::unicritical(3, 0.0)).value;
  const bool center = disjoint_type(build_marked(cubic(I * std::sqrt(2.0), 0.0))).value;
  const Polynomial f = build_marked(cubic({0.02, std::sqrt(2.0) - 0.01}, {0.01, 0.005}));
  const Polynomial g = build_marked(cubic({-0.015, std::sqrt(2.0) + 0.02}, {-0.005, 0.01}));
  const ProbeReport rep = rigidity_probe(f, g, 15);
  const bool ok = !cube && center && rep.verdict == ProbeVerdict::same_component && rep.center_distance < 1e-8;
  return {ok, fmt("z^3 %d, z^3-(3i*sqrt2/2)z^2 %d, perturbations \"%s\" with center distance %.1e", cube, center,
                  to_string(rep.verdict), rep.center_distance)};
}

Outcome centers() {
  MarkedParams q;
  q.degree = 2;
  q.b = -0.9;
  const double e2 = std::abs(find_center(q, std::vector<int>{2}).a.b + 1.0);
  q.b = Complex(-0.1, 0.75);
  const double e3 = std::abs(find_center(q, std::vector<int>{3}).a.b - oracle::rabbit_center());
  return {e2 < 1e-12 && e3 < 1e-10, fmt("period 2 error %.1e (limit 1e-12), period 3 error %.1e (limit 1e-10)", e2, e3)};
}

Outcome structural(const Shared& sh) {
  bool ok = !sh.laminations.empty();
  std::string bad;
  for (const auto& [name, lam] : sh.laminations) {
    const bool u = check_unlinked(lam);
    const bool v = check_invariance(lam, lam.degree).ok;
    if (!u || !v) {
      ok = false;
      bad += " " + name;
    }
  }
  return {ok, fmt("%zu laminations checked%s%s", sh.laminations.size(), bad.empty() ? "" : ", violations:", bad.c_str())};
}

Outcome puzzle() {
  const Polynomial f = Polynomial::unicritical(2, -1.0);
  PuzzleOptions o;
  o.p = 2;
  int counts[2], regions[2];
  for (int depth : {0, 1}) {
    const Puzzle P = build_puzzle(f, Angle(0, 1), Angle(1, 3), 0.5, std::exp(0.5), depth, o);
    counts[depth] = static_cast<int>(P.levels.back().size());
    regions[depth] = oracle::region_count(f, P.graph, 0.5, 2.2, 440);
  }
  const Puzzle P = build_puzzle(f, Angle(0, 1), Angle(1, 3), 0.5, std::exp(0.5), 4, o);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.9, 1.9);
  int tested = 0, broken = 0;
  for (int k = 0; k < 2000; ++k) {
    const Complex z{u(rng), u(rng)};
    if (!P.in_domain(z)) continue;
    bool near_graph = false;
    for (const auto& arc : P.graph) near_graph |= oracle::distance_to_chain(arc, z) < 1e-6;
    if (near_graph) continue;
    ++tested;
    std::optional<int> prev;
    for (int n = 0; n <= P.depth(); ++n) {
      int hits = 0, which = -1;
      for (const auto& piece : P.levels[static_cast<std::size_t>(n)])
        if (winding_number(piece.boundary, z) != 0) {
          ++hits;
          which = piece.index;
        }
      if (hits != 1 || (prev && P.levels[static_cast<std::size_t>(n)][static_cast<std::size_t>(which)].parent != *prev)) {
        ++broken;
        break;
      }
      prev = which;
    }
  }
  const bool ok = counts[0] == 2 && counts[1] == 3 && regions[0] == 2 && regions[1] == 3 && P.depth() == 4 &&
                  tested > 300 && broken == 0;
  return {ok, fmt("pieces %d/%d, oracle regions %d/%d at depths 0/1; nesting to depth %d broken at %d of %d points",
                  counts[0], counts[1], regions[0], regions[1], P.depth(), broken, tested)};
}

}  // namespace

int main() {
  Shared sh;
  run(1, "radial-ray exactness", radial_rays);
  run(2, "trivial lamination of z^3", [&] { return cube_trivial(sh); });
  run(3, "basilica and rabbit laminations", [&] { return basilica_rabbit(sh); });
  run(4, "stretching-ray contract", [&] { return stretching(sh); });
  run(5, "lamination stability along the ray", [&] { return stability(sh); });
  run(6, "limit verification", [&] { return limit_checks(sh); });
  run(7, "non-rigidity verdict", [&] { return non_rigidity(sh); });
  run(8, "disjoint-type dichotomy", disjoint_dichotomy);
  run(9, "center finding", centers);
  run(10, "structural invariants", [&] { return structural(sh); });
  run(11, "puzzle sanity", puzzle);
  std::printf("%d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
