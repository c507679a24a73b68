#include <CLI11.hpp>

#include <polydyn/polydyn.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace polydyn;

namespace {

struct Args {
  std::string config, out;
  std::uint64_t seed = 0;
  int threads = 0;

  std::string poly, f, g, lam, angle, format = "json";
  int N = 10;
  double tol = 1e-6;
  int depth = 240;
  int p = 1;
  double s_lo = 0.0;
  int max_period = 6;
  double julia_band = 1e-4;
  int n_iter = 100000;
  int size = 512;
  std::string svg;

  // stretch
  int degree = 3;
  std::string pattern = "fibonacci", relations, infinity, start, tail = "3..8", log, a2;
  double s0 = 0.3, s1 = 0.99, ds = 0.05;
  int order = 3;
  double phi_tol = 1e-8, constraint_tol = 1e-10;

  // sector / puzzle / separable
  std::string t_minus, t_plus, theta_minus, theta_plus, classify, limb, t_star, theta_star, impression;
  int random_points = 0, steps = 3, n_max = 3;
  long long M = 64;
  double s = 0.5, s_prime = std::exp(0.5);
  bool boundaries = true;

  // center / render
  std::string periods, center = "0", rays, internal_rays, marked;
  double width = 4.0, escape = 0.0;
  int pixels = 512, max_iter = 500;
};

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  for (char c : s) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if ((c == ',' || c == ';') && depth == 0) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c)) || depth > 0) {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::vector<Angle> parse_angles(const std::string& s) {
  std::vector<Angle> out;
  for (const auto& x : split_list(s)) out.push_back(Angle::parse(x));
  return out;
}

std::vector<Complex> parse_points(const std::string& s) {
  std::vector<Complex> out;
  for (const auto& x : split_list(s)) out.push_back(parse_complex(x));
  return out;
}

// "fibonacci", "thue-morse", "constant-K" or "digits:0110" (repeated).
DigitStream parse_stream(const std::string& name, int base) {
  if (name == "fibonacci") return fibonacci_word(base);
  if (name == "thue-morse") return thue_morse(base);
  if (name.rfind("constant-", 0) == 0) {
    const int k = std::stoi(name.substr(9));
    if (k < 0 || k >= base) throw InputError("digit " + std::to_string(k) + " out of range for base " + std::to_string(base));
    return DigitStream(base, [k](std::size_t) { return k; }, name);
  }
  if (name.rfind("digits:", 0) == 0) {
    std::vector<int> w;
    for (char c : name.substr(7)) {
      if (!std::isdigit(static_cast<unsigned char>(c)) || c - '0' >= base) throw InputError("bad digit in '" + name + "'");
      w.push_back(c - '0');
    }
    if (w.empty()) throw InputError("empty digit word");
    return DigitStream(base, [w](std::size_t i) { return w[i % w.size()]; }, name);
  }
  throw InputError("unknown digit stream '" + name + "' (fibonacci, thue-morse, constant-K, digits:W)");
}

InternalAngle parse_internal_angle(const std::string& s, int base) {
  if (!s.empty() && (std::isdigit(static_cast<unsigned char>(s[0])) || s[0] == '-')) return Angle::parse(s);
  return parse_stream(s, base);
}

int local_degree(const Polynomial& f, int p) {
  return SuperattractingCoordinate(p == 1 ? f : f.iterate(p)).local_degree();
}

Polynomial need_poly(const std::string& s, const char* flag) {
  if (s.empty()) throw UsageError(std::string("missing ") + flag);
  return parse_polynomial(s);
}

MarkedParams parse_marked(const std::string& s) {
  if (s.empty()) throw UsageError("missing marked parameter");
  const std::string t = s.substr(s.find_first_not_of(" \t"));
  if (t.front() == '{') {
    const Json j = Json::parse(t);
    if (j.contains("degree") && !j.contains("coefficients") && !j.contains("marked")) return marked_from_json(j);
  }
  if (t.size() > 5 && t.substr(t.size() - 5) == ".json") {
    std::ifstream in(t);
    if (!in) throw InputError("cannot open " + t);
    const Json j = Json::parse(in);
    if (j.contains("degree") && !j.contains("coefficients") && !j.contains("marked")) return marked_from_json(j);
  }
  return to_marked(parse_polynomial(t));
}

CriticalPortrait parse_portrait(const Args& a) {
  CriticalPortrait P;
  P.p = a.p;
  for (const auto& r : split_list(a.relations)) {
    int k = 0, m = 0, n = 0;
    if (std::sscanf(r.c_str(), "%d:%d:%d", &k, &m, &n) != 3) throw InputError("relation '" + r + "' is not k:m:n");
    P.relations.push_back({k, m, n});
  }
  for (const auto& x : split_list(a.infinity)) P.I_infinity.push_back(std::stoi(x));
  return P;
}

DigitStream stretch_t1(const Args& a) {
  if (a.pattern == "fibonacci") return choose_t1(2, std::nullopt, {T1Options::Pattern::fibonacci});
  if (a.pattern == "thue-morse") return choose_t1(2, std::nullopt, {T1Options::Pattern::thue_morse});
  return parse_stream(a.pattern, 2);
}

// "3..8" -> 1 - 2^-n for n = 3..8; otherwise an explicit list of s values.
std::vector<double> parse_tail(const std::string& s) {
  std::vector<double> out;
  const auto dots = s.find("..");
  if (dots != std::string::npos) {
    const int lo = std::stoi(s.substr(0, dots)), hi = std::stoi(s.substr(dots + 2));
    if (lo < 1 || hi < lo) throw InputError("tail range must be 1 <= lo <= hi");
    for (int n = lo; n <= hi; ++n) out.push_back(1.0 - std::ldexp(1.0, -n));
    return out;
  }
  for (const auto& x : split_list(s)) out.push_back(std::stod(x));
  return out;
}

std::vector<double> stretch_grid(double from, double to, double ds) {
  if (!(ds > 0)) throw InputError("ds must be positive");
  std::vector<double> grid{from};
  const double dir = to > from ? 1.0 : -1.0;
  while (std::abs(to - grid.back()) > 1e-12) {
    const double next = grid.back() + dir * ds;
    grid.push_back((to - next) * dir <= 1e-12 ? to : next);
  }
  return grid;
}

ContinuationOptions continuation_options(const Args& a) {
  ContinuationOptions o;
  o.phi_tol = a.phi_tol;
  o.constraint_tol = a.constraint_tol;
  return o;
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_.open(path);
      if (!file_) throw InputError("cannot write " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }
  void json(const Json& j) { stream() << dump_json(j) << '\n'; }

 private:
  std::ofstream file_;
};

std::vector<ContinuationState> read_log(const std::string& path, std::optional<MarkedParams>* limit = nullptr) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open log " + path);
  std::vector<ContinuationState> states;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const Json j = Json::parse(line);
    if (j.contains("stalled")) continue;
    if (j.contains("limit")) {
      if (limit) *limit = marked_from_json(j.at("limit").at("a2"));
    } else {
      states.push_back(state_from_json(j));
    }
  }
  if (states.empty()) throw InputError("log " + path + " holds no continuation state");
  return states;
}

// One state per line; the limit line (when a tail is given) comes last and
// the logged states include those of the tail continuation.
void emit_ray(Output& out, StretchRay& ray, const Args& a) {
  std::optional<LimitEstimate> est;
  if (!ray.stalled && !a.tail.empty()) est = estimate_limit(ray, parse_tail(a.tail), a.order, continuation_options(a));
  for (const auto& st : ray.states) out.json(to_json(st));
  if (ray.stalled) {
    out.json({{"stalled", true}, {"diagnostics", ray.diagnostics}});
    throw ComputationError(ray.diagnostics);
  }
  if (est) out.json({{"limit", to_json(*est)}});
}

// ---- subcommand bodies ----------------------------------------------------

void cmd_lam_compute(const Args& a) {
  const Polynomial f = need_poly(a.poly, "--poly");
  LaminationOptions lo;
  lo.tol = a.tol;
  const auto lam = compute_lamination(f, a.N, lo);
  Json j = to_json(lam);
  j["unlinked"] = check_unlinked(lam);
  j["invariant"] = check_invariance(lam, f.degree()).ok;
  Output(a.out).json(j);
  if (!a.svg.empty()) {
    std::ofstream svg(a.svg);
    if (!svg) throw InputError("cannot write " + a.svg);
    svg << render_lamination(lam, a.size);
  }
}

void cmd_lam_compare(const Args& a) {
  const Polynomial f = need_poly(a.f, "--f"), g = need_poly(a.g, "--g");
  LaminationOptions lo;
  lo.tol = a.tol;
  const auto lf = compute_lamination(f, a.N, lo), lg = compute_lamination(g, a.N, lo);
  Json j = to_json(equal(lf, lg));
  j["f"] = to_json(lf);
  j["g"] = to_json(lg);
  Output(a.out).json(j);
}

void cmd_lam_render(const Args& a) {
  RationalLamination lam;
  if (!a.lam.empty()) {
    std::ifstream in(a.lam);
    if (!in) throw InputError("cannot open " + a.lam);
    lam = lamination_from_json(Json::parse(in));
  } else {
    LaminationOptions lo;
    lo.tol = a.tol;
    lam = compute_lamination(need_poly(a.poly, "--poly or --lam"), a.N, lo);
  }
  Output(a.out).stream() << render_lamination(lam, a.size);
}

RayOptions ray_options(const Args& a) {
  RayOptions ro;
  ro.depth = a.depth;
  return ro;
}

void write_ray(const Args& a, const std::vector<RaySample>& pts, const Landing& l, const std::string& name) {
  Output out(a.out);
  if (a.format == "csv") {
    write_ray_csv(pts, l, out.stream());
  } else if (a.format == "json") {
    out.json({{"angle", name}, {"samples", to_json(pts)}, {"landing", to_json(l)}});
  } else {
    throw UsageError("--format must be json or csv");
  }
}

void cmd_ray_external(const Args& a) {
  const Polynomial f = need_poly(a.poly, "--poly");
  if (a.angle.empty()) throw UsageError("missing --angle");
  const Angle theta = Angle::parse(a.angle);
  ExternalRay ray = trace_external_ray(f, theta, ray_options(a));
  const Landing l = landing_point(f, ray, a.tol);
  write_ray(a, ray.points, l, theta.str());
}

void cmd_ray_internal(const Args& a) {
  const Polynomial f = need_poly(a.poly, "--poly");
  if (a.angle.empty()) throw UsageError("missing --angle");
  const Polynomial F = a.p == 1 ? f : f.iterate(a.p);
  const InternalAngle t = parse_internal_angle(a.angle, local_degree(f, a.p));
  InternalRay ray = trace_internal_ray(F, t, a.s_lo, ray_options(a));
  const Landing l = internal_landing_point(F, ray, a.tol);
  write_ray(a, ray.points, l, angle_name(t));
}

void cmd_cycles(const Args& a) {
  const Polynomial f = need_poly(a.poly, "--poly");
  Output(a.out).json(to_json(find_cycles(f, a.max_period)));
}

void cmd_basins(const Args& a) {
  const Polynomial f = need_poly(a.poly, "--poly");
  BasinOptions bo;
  bo.max_period = a.max_period;
  bo.julia_band = a.julia_band;
  bo.n_iter = a.n_iter;
  const BasinReport br = classify_basins(f, bo);
  Json j = to_json(br);
  try {
    j["disjoint_type"] = to_json(disjoint_type(br, f.degree()));
  } catch (const ComputationError& e) {
    j["disjoint_type"] = {{"verdict", "undetermined"}, {"rationale", e.what()}};
  }
  Output(a.out).json(j);
}

void cmd_stretch_run(const Args& a) {
  const CriticalPortrait P = parse_portrait(a);
  const DigitStream t1 = stretch_t1(a);
  MarkedParams start;
  if (!a.start.empty()) {
    start = parse_marked(a.start);
  } else {
    if (a.degree != 3 || a.p != 1) throw UsageError("automatic start needs degree 3 and p 1; give --start otherwise");
    start = cubic_start(t1, a.s0);
  }
  StretchRay ray = continue_stretch(start, P, t1, stretch_grid(a.s0, a.s1, a.ds), continuation_options(a));
  Output out(a.out);
  emit_ray(out, ray, a);
}

void cmd_stretch_resume(const Args& a) {
  if (a.log.empty()) throw UsageError("missing --log");
  const CriticalPortrait P = parse_portrait(a);
  const DigitStream t1 = stretch_t1(a);
  const auto states = read_log(a.log);
  const ContinuationState& last = states.back();
  StretchRay ray;
  ray.t1 = t1;
  ray.portrait = P;
  ray.states = states;
  if (std::abs(a.s1 - last.s) > 1e-15) {
    StretchRay ext = continue_stretch(last.a, P, t1, stretch_grid(last.s, a.s1, a.ds), continuation_options(a), &last.trace);
    ray.states.insert(ray.states.end(), ext.states.begin() + 1, ext.states.end());
    ray.stalled = ext.stalled;
    ray.diagnostics = ext.diagnostics;
  }
  Output out(a.out);
  emit_ray(out, ray, a);
}

void cmd_stretch_verify(const Args& a) {
  const CriticalPortrait P = parse_portrait(a);
  const DigitStream t1 = stretch_t1(a);
  MarkedParams a2;
  if (!a.a2.empty()) {
    a2 = parse_marked(a.a2);
  } else if (!a.log.empty()) {
    std::optional<MarkedParams> lim;
    read_log(a.log, &lim);
    if (!lim) throw InputError("log " + a.log + " has no limit line");
    a2 = *lim;
  } else {
    throw UsageError("missing --a2 or --log");
  }
  VerifyOptions vo;
  vo.max_period = a.max_period;
  vo.julia_band = a.julia_band;
  vo.n_iter = a.n_iter;
  const LimitReport rep = verify_limit(a2, P, t1, vo);
  Json j = to_json(rep);
  j["a2"] = to_json(a2);
  j["verdict"] = rep.all_pass() ? "limit verified" : "limit not verified";
  Output(a.out).json(j);
}

SectorOptions sector_options(const Args& a) {
  SectorOptions so;
  so.p = a.p;
  so.rays = ray_options(a);
  return so;
}

void cmd_sector(const Args& a) {
  const Polynomial f = need_poly(a.poly, "--poly");
  const SectorOptions so = sector_options(a);
  if (!a.limb.empty()) {
    const InternalAngle t0 = parse_internal_angle(a.limb, local_degree(f, a.p));
    Output(a.out).json(to_json(approximate_limb(f, t0, a.steps, so)));
    return;
  }
  if (a.t_minus.empty() || a.t_plus.empty()) throw UsageError("missing --t-minus/--t-plus (or --limb)");
  RayAtlas atlas(f, so.rays, so.landing_tol);
  Sector S;
  if (!a.theta_minus.empty() || !a.theta_plus.empty()) {
    Combinatorics c;
    c.t_minus = Angle::parse(a.t_minus);
    c.t_plus = Angle::parse(a.t_plus);
    c.theta_minus = Angle::parse(a.theta_minus);
    c.theta_plus = Angle::parse(a.theta_plus);
    S = build_sector(f, c, so, &atlas);
  } else {
    std::string why;
    auto found = find_sector(f, Angle::parse(a.t_minus), Angle::parse(a.t_plus), so, atlas, &why);
    if (!found) throw ComputationError("no sector for these internal angles: " + why);
    S = *found;
  }
  Json j = to_json(S);
  std::vector<Complex> pts = parse_points(a.classify);
  if (a.random_points > 0) {
    std::mt19937_64 rng(a.seed);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int i = 0; i < a.random_points; ++i) pts.emplace_back(u(rng), u(rng));
  }
  Json cls = Json::array();
  for (Complex z : pts) cls.push_back({{"point", to_json(z)}, {"membership", to_string(S.contains(z))}});
  if (!pts.empty()) j["classified"] = cls;
  Output(a.out).json(j);
}

void cmd_puzzle(const Args& a) {
  const Polynomial f = need_poly(a.poly, "--poly");
  if (a.t_star.empty() || a.theta_star.empty()) throw UsageError("missing --t-star/--theta-star");
  PuzzleOptions po;
  po.p = a.p;
  po.rays = ray_options(a);
  const Puzzle P = build_puzzle(f, Angle::parse(a.t_star), Angle::parse(a.theta_star), a.s, a.s_prime, a.steps, po);
  Json j = to_json(P, a.boundaries);
  if (!a.impression.empty()) j["impression"] = to_json(impression(P, parse_complex(a.impression)));
  Output(a.out).json(j);
}

void cmd_separable(const Args& a) {
  const Polynomial f = need_poly(a.poly, "--poly");
  if (a.angle.empty()) throw UsageError("missing --angle (digit stream)");
  const DigitStream t = parse_stream(a.angle, local_degree(f, a.p));
  Output(a.out).json(to_json(critically_separable(f, t, a.n_max, a.M, sector_options(a))));
}

void cmd_center(const Args& a) {
  const MarkedParams m = parse_marked(a.poly);
  CenterResult c;
  if (a.periods.empty()) {
    c = find_center(m, a.max_period);
  } else {
    std::vector<int> q;
    for (const auto& x : split_list(a.periods)) q.push_back(std::stoi(x));
    c = find_center(m, q);
  }
  Output(a.out).json(to_json(c));
}

void cmd_probe(const Args& a) {
  const Polynomial f = need_poly(a.f, "--f"), g = need_poly(a.g, "--g");
  ProbeOptions po;
  po.max_period = a.max_period;
  po.julia_band = a.julia_band;
  po.lamination.tol = a.tol;
  Output(a.out).json(to_json(rigidity_probe(f, g, a.N, po)));
}

void cmd_julia(const Args& a) {
  const Polynomial f = need_poly(a.poly, "--poly");
  if (a.out.empty() || a.out == "-") throw UsageError("julia needs --out <image.ppm|image.png>");
  RenderSpec spec;
  spec.center = parse_complex(a.center);
  spec.width = a.width;
  spec.pixels_x = spec.pixels_y = a.pixels;
  spec.max_iter = a.max_iter;
  spec.escape = a.escape;
  spec.external_rays = parse_angles(a.rays);
  spec.internal_rays = parse_angles(a.internal_rays);
  spec.marked_points = parse_points(a.marked);
  spec.threads = a.threads;
  const Image img = render_julia(f, spec);
  const bool png = a.out.size() > 4 && a.out.substr(a.out.size() - 4) == ".png";
  if (png) write_png(img, a.out);
  else write_ppm(img, a.out);
  std::cout << dump_json({{"image", a.out}, {"format", png ? "png" : "ppm"}, {"width", img.width}, {"height", img.height}})
            << '\n';
}

// ---- command-line surface -------------------------------------------------

CLI::App* leaf(CLI::App* parent, const std::string& name, const std::string& help, Args& a,
               std::function<void(const Args&)> body, std::vector<std::pair<CLI::App*, std::function<void(const Args&)>>>& table) {
  CLI::App* sub = parent->add_subcommand(name, help);
  sub->add_option("--config", a.config, "TOML file of key = value settings; flags override it");
  sub->add_option("--out,-o", a.out, "output file (default stdout)");
  sub->add_option("--seed", a.seed, "seed for randomized point sets");
  sub->add_option("--threads", a.threads, "worker threads (0: all cores)");
  table.emplace_back(sub, std::move(body));
  return sub;
}

void add_lam_options(CLI::App* c, Args& a) {
  c->add_option("--N", a.N, "denominator bound");
  c->add_option("--tol", a.tol, "clustering tolerance");
}

// Leaf subcommand selected on the command line, with its path of names.
CLI::App* selected_leaf(CLI::App* app, std::vector<std::string>& path) {
  for (CLI::App* sub : app->get_subcommands()) {
    path.push_back(sub->get_name());
    return selected_leaf(sub, path);
  }
  return app;
}

}  // namespace

int main(int argc, char** argv) {
  Args a;
  CLI::App app{"polydyn: polynomial dynamics toolkit"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  std::vector<std::pair<CLI::App*, std::function<void(const Args&)>>> table;

  auto* lam = app.add_subcommand("lam", "rational laminations");
  lam->require_subcommand(1);
  auto* lc = leaf(lam, "compute", "lamination of a polynomial at a denominator bound", a, cmd_lam_compute, table);
  lc->add_option("--poly", a.poly, "polynomial");
  lc->add_option("--svg", a.svg, "also write the disk diagram");
  lc->add_option("--size", a.size, "SVG size in pixels");
  add_lam_options(lc, a);
  auto* lcmp = leaf(lam, "compare", "compare the laminations of two polynomials", a, cmd_lam_compare, table);
  lcmp->add_option("--f", a.f, "first polynomial");
  lcmp->add_option("--g", a.g, "second polynomial");
  add_lam_options(lcmp, a);
  auto* lr = leaf(lam, "render", "disk diagram of a lamination as SVG", a, cmd_lam_render, table);
  lr->add_option("--poly", a.poly, "polynomial");
  lr->add_option("--lam", a.lam, "lamination JSON file");
  lr->add_option("--size", a.size, "SVG size in pixels");
  add_lam_options(lr, a);

  auto* ray = app.add_subcommand("ray", "external and internal rays");
  ray->require_subcommand(1);
  for (const bool external : {true, false}) {
    auto* r = leaf(ray, external ? "external" : "internal", external ? "trace an external ray" : "trace an internal ray of 0",
                   a, external ? cmd_ray_external : cmd_ray_internal, table);
    r->add_option("--poly", a.poly, "polynomial");
    r->add_option("--angle", a.angle, external ? "angle p/q" : "angle p/q or digit stream name");
    r->add_option("--format", a.format, "json or csv");
    r->add_option("--depth", a.depth, "maximal ray depth");
    r->add_option("--tol", a.tol, "landing tolerance");
    if (!external) {
      r->add_option("--p", a.p, "period of 0");
      r->add_option("--s-lo", a.s_lo, "stop at this internal modulus");
    }
  }

  auto* cy = leaf(&app, "cycles", "periodic cycles and multipliers", a, cmd_cycles, table);
  cy->add_option("--poly", a.poly, "polynomial");
  cy->add_option("--max-period", a.max_period, "maximal period");

  auto* ba = leaf(&app, "basins", "fates of the critical points", a, cmd_basins, table);
  ba->add_option("--poly", a.poly, "polynomial");
  ba->add_option("--max-period", a.max_period, "maximal period of attracting cycles");
  ba->add_option("--julia-band", a.julia_band, "band for presumed-Julia critical points");
  ba->add_option("--n-iter", a.n_iter, "iteration budget");

  auto* st = app.add_subcommand("stretch", "stretching-ray continuation");
  st->require_subcommand(1);
  // the three stretch leaves share one settings set, so one config file serves all of them
  auto stretch_options = [&](CLI::App* c) {
    c->add_option("--pattern", a.pattern, "t1: fibonacci, thue-morse, constant-K or digits:W");
    c->add_option("--p", a.p, "period of 0");
    c->add_option("--relations", a.relations, "critical relations k:m:n, comma separated");
    c->add_option("--infinity", a.infinity, "marked indices expected in the Julia set");
    c->add_option("--degree", a.degree, "degree (automatic start: 3)");
    c->add_option("--start", a.start, "start parameter (marked JSON or polynomial)");
    c->add_option("--s0", a.s0, "initial modulus");
    c->add_option("--s1", a.s1, "final modulus");
    c->add_option("--ds", a.ds, "grid spacing");
    c->add_option("--tail", a.tail, "limit tail: lo..hi for s = 1 - 2^-n, or a list; empty to skip");
    c->add_option("--order", a.order, "extrapolation order");
    c->add_option("--phi-tol", a.phi_tol, "accepted phi residual");
    c->add_option("--constraint-tol", a.constraint_tol, "accepted constraint residual");
    c->add_option("--log", a.log, "ray log (resume, verify-limit)");
    c->add_option("--a2", a.a2, "limit parameter to verify (marked JSON or polynomial)");
    c->add_option("--max-period", a.max_period, "maximal cycle period (verify-limit)");
    c->add_option("--julia-band", a.julia_band, "band for presumed-Julia critical points (verify-limit)");
    c->add_option("--n-iter", a.n_iter, "iteration budget (verify-limit)");
  };
  stretch_options(leaf(st, "run", "continue from s0 to s1 and extrapolate the limit", a, cmd_stretch_run, table));
  stretch_options(leaf(st, "resume", "extend a JSON-lines ray log", a, cmd_stretch_resume, table));
  stretch_options(leaf(st, "verify-limit", "check the dynamics of a limit parameter", a, cmd_stretch_verify, table));

  auto* se = leaf(&app, "sector", "sector bounded by internal and external rays, or a limb approximation", a, cmd_sector, table);
  se->add_option("--poly", a.poly, "polynomial");
  se->add_option("--p", a.p, "period of 0");
  se->add_option("--t-minus", a.t_minus, "internal angle t-");
  se->add_option("--t-plus", a.t_plus, "internal angle t+");
  se->add_option("--theta-minus", a.theta_minus, "external angle theta-");
  se->add_option("--theta-plus", a.theta_plus, "external angle theta+");
  se->add_option("--classify", a.classify, "points to classify, comma separated");
  se->add_option("--random", a.random_points, "classify this many seeded random points in [-2,2]^2");
  se->add_option("--limb", a.limb, "approximate the limb at this internal angle");
  se->add_option("--steps", a.steps, "limb approximation steps");
  se->add_option("--depth", a.depth, "maximal ray depth");

  auto* pz = leaf(&app, "puzzle", "puzzle pieces from a ray graph", a, cmd_puzzle, table);
  pz->add_option("--poly", a.poly, "polynomial");
  pz->add_option("--p", a.p, "period of 0");
  pz->add_option("--t-star", a.t_star, "internal angle of the graph");
  pz->add_option("--theta-star", a.theta_star, "external angle of the graph");
  pz->add_option("--s", a.s, "inner level");
  pz->add_option("--s-prime", a.s_prime, "outer level");
  pz->add_option("--steps", a.steps, "puzzle depth");
  pz->add_option("--impression", a.impression, "point whose nest of pieces is reported");
  pz->add_option("--boundaries", a.boundaries, "include boundary polylines");
  pz->add_option("--depth", a.depth, "maximal ray depth");

  auto* sp = leaf(&app, "separable", "critical separability along a digit stream", a, cmd_separable, table);
  sp->add_option("--poly", a.poly, "polynomial");
  sp->add_option("--p", a.p, "period of 0");
  sp->add_option("--angle", a.angle, "digit stream");
  sp->add_option("--n-max", a.n_max, "last forward iterate");
  sp->add_option("--M", a.M, "denominator bound of the internal arcs");

  auto* ce = leaf(&app, "center", "center of a hyperbolic component", a, cmd_center, table);
  ce->add_option("--poly", a.poly, "parameter (polynomial or marked JSON)");
  ce->add_option("--periods", a.periods, "periods of the marked critical points (default: detected)");
  ce->add_option("--max-period", a.max_period, "maximal period for detection");

  auto* pr = leaf(&app, "probe-rigidity", "compare two maps combinatorially and by component", a, cmd_probe, table);
  pr->add_option("--f", a.f, "first polynomial");
  pr->add_option("--g", a.g, "second polynomial");
  pr->add_option("--max-period", a.max_period, "maximal cycle period");
  pr->add_option("--julia-band", a.julia_band, "band for presumed-Julia critical points");
  add_lam_options(pr, a);

  auto* ju = leaf(&app, "julia", "render the filled Julia set", a, cmd_julia, table);
  ju->add_option("--poly", a.poly, "polynomial");
  ju->add_option("--center", a.center, "view center");
  ju->add_option("--width", a.width, "view width");
  ju->add_option("--pixels", a.pixels, "image side in pixels");
  ju->add_option("--max-iter", a.max_iter, "escape iterations");
  ju->add_option("--escape", a.escape, "escape radius (0: automatic)");
  ju->add_option("--rays", a.rays, "external ray angles");
  ju->add_option("--internal-rays", a.internal_rays, "internal ray angles of 0");
  ju->add_option("--marked", a.marked, "points to mark");

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    {
      std::vector<std::string> rev(args.rbegin(), args.rend());
      app.parse(rev);
    }
    std::vector<std::string> path;
    CLI::App* sel = selected_leaf(&app, path);
    if (!a.config.empty()) {
      // config values go first so that command-line flags take precedence
      std::vector<CLI::ConfigItem> items;
      try {
        items = CLI::ConfigTOML().from_file(a.config);
      } catch (const CLI::Error& e) {
        throw UsageError("config " + a.config + ": " + e.what());
      }
      std::vector<std::string> merged = path;
      for (const auto& item : items) {
        std::string key = item.name;
        for (const auto& parent : item.parents) key = parent + "." + key;
        std::string flag = item.name;
        std::replace(flag.begin(), flag.end(), '_', '-');
        const CLI::Option* opt = item.parents.empty() ? sel->get_option_no_throw("--" + flag) : nullptr;
        if (!opt || flag == "config") throw UsageError("config " + a.config + ": unknown key '" + key + "'");
        if (item.inputs.size() != 1) throw UsageError("config " + a.config + ": key '" + key + "' must hold one value");
        merged.push_back("--" + flag + "=" + item.inputs.front());
      }
      merged.insert(merged.end(), args.begin() + static_cast<long>(path.size()), args.end());
      const std::string config = a.config;
      a = Args{};
      app.clear();
      std::vector<std::string> rev(merged.rbegin(), merged.rend());
      app.parse(rev);
      a.config = config;
    }
    for (auto& [sub, body] : table)
      if (sub == sel) {
        body(a);
        return 0;
      }
    throw UsageError("no command selected");
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // --help exits 0
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 2;
  } catch (const ComputationError& e) {
    std::cerr << "computation failed: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
