#include <gtest/gtest.h>

#include <polydyn/io.hpp>
#include <polydyn/lamination.hpp>
#include <polydyn/render.hpp>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace polydyn;
namespace fs = std::filesystem;

namespace {

const Complex kRabbit{-0.12256116687665362, 0.74486176661974424};

// escape shading has blue = 90 + 165 u and red = 255 u; basin colors and
// black never satisfy that relation
bool escaped(const Image& img, int x, int y) {
  const auto* p = img.at(x, y);
  return std::abs((p[2] - 90.0) - 165.0 * p[0] / 255.0) <= 2.0;
}

int interior_pixels(const Image& img) {
  int n = 0;
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) n += !escaped(img, x, y);
  return n;
}

int count(const std::string& s, const std::string& what) {
  int n = 0;
  for (auto pos = s.find(what); pos != std::string::npos; pos = s.find(what, pos + 1)) ++n;
  return n;
}

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

fs::path scratch_dir() {
  static const fs::path dir = [] {
    fs::path p = fs::temp_directory_path() / ("polydyn_cli_" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

CliResult cli(const std::string& args) {
  const fs::path err = scratch_dir() / "stderr.txt";
  const std::string cmd = std::string("\"") + POLYDYN_CLI + "\" " + args + " 2>\"" + err.string() + "\"";
  CliResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  for (std::size_t n; (n = std::fread(buf, 1, sizeof buf, pipe)) > 0;) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(err);
  std::stringstream ss;
  ss << in.rdbuf();
  r.err = ss.str();
  return r;
}

std::string configs(const std::string& name) { return std::string("\"") + POLYDYN_CONFIGS + "/" + name + "\""; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RenderSpec spec(int px, int max_iter) {
  RenderSpec s;
  s.pixels_x = s.pixels_y = px;
  s.max_iter = max_iter;
  s.width = 4.0;
  return s;
}

}  // namespace

TEST(RenderJulia, SquareMapInteriorIsTheUnitDisk) {
  const Image img = render_julia(Polynomial::unicritical(2, 0.0), spec(256, 100));
  const double pixel = (4.0 / 256) * (4.0 / 256);
  const double area = interior_pixels(img) * pixel;
  EXPECT_NEAR(area / M_PI, 1.0, 0.02);
}

TEST(RenderJulia, CantorJuliaSetHasNoInterior) {
  const Image img = render_julia(Polynomial::unicritical(2, 2.0), spec(200, 200));
  EXPECT_EQ(interior_pixels(img), 0);
}

TEST(RenderJulia, RealMapsRenderSymmetricImages) {
  MarkedParams a;
  a.degree = 3;
  a.c = 0.6;
  a.b = -0.2;
  for (const Polynomial& f : {Polynomial::unicritical(2, -1.0), build_marked(a)}) {
    RenderSpec s = spec(161, 300);
    s.center = Complex(0.1, 0.0);
    const Image img = render_julia(f, s);
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x)
        ASSERT_EQ(std::memcmp(img.at(x, y), img.at(x, img.height - 1 - y), 3), 0) << x << "," << y;
  }
}

TEST(RenderJulia, DeterministicAcrossThreadCounts) {
  RenderSpec s = spec(128, 200);
  s.external_rays = {Angle(1, 3), Angle(2, 3)};
  s.internal_rays = {Angle(0, 1)};
  s.marked_points = {Complex(0.0)};
  s.threads = 1;
  const Image a = render_julia(Polynomial::unicritical(2, -1.0), s);
  s.threads = 4;
  const Image b = render_julia(Polynomial::unicritical(2, -1.0), s);
  EXPECT_EQ(a.rgb, b.rgb);
  std::ostringstream pa, pb;
  write_ppm(a, pa);
  write_ppm(b, pb);
  EXPECT_EQ(pa.str(), pb.str());
  EXPECT_EQ(pa.str().rfind("P6\n128 128\n255\n", 0), 0u);
}

TEST(RenderJulia, RejectsBadSpecs) {
  RenderSpec s = spec(0, 10);
  EXPECT_THROW(render_julia(Polynomial::unicritical(2, 0.0), s), InputError);
  s = spec(16, 10);
  s.escape = 1.0;
  EXPECT_THROW(render_julia(Polynomial::unicritical(2, 0.0), s), InputError);
}

TEST(RenderLamination, ChordCounts) {
  const auto trivial = render_lamination(compute_lamination(Polynomial::unicritical(3, 0.0), 10));
  EXPECT_EQ(count(trivial, "class=\"chord\""), 0);
  EXPECT_EQ(count(trivial, "<circle"), 1);

  const auto bas = render_lamination(compute_lamination(Polynomial::unicritical(2, -1.0), 6));
  EXPECT_EQ(count(bas, "<line class=\"chord\""), 2);
  EXPECT_EQ(count(bas, "data-angles=\"1/3 2/3\""), 1);
  EXPECT_EQ(count(bas, "data-angles=\"1/6 5/6\""), 1);

  const auto rab = render_lamination(compute_lamination(Polynomial::unicritical(2, kRabbit), 7));
  EXPECT_EQ(count(rab, "<polygon class=\"chord\" data-angles=\"1/7 2/7 4/7\""), 1);
}

TEST(Cli, LamComputeCube) {
  const CliResult r = cli("lam compute --poly \"z^3\" --N 30");
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = Json::parse(r.out);
  EXPECT_EQ(j.at("N"), 30);
  EXPECT_TRUE(j.at("trivial").get<bool>());
  for (const auto& c : j.at("classes")) EXPECT_EQ(c.size(), 1u);
  EXPECT_EQ(j.at("classes").size(), sample_angles(30).size());
  // byte-identical reruns
  EXPECT_EQ(cli("lam compute --poly \"z^3\" --N 30").out, r.out);
}

TEST(Cli, NegativeVerdictsExitZero) {
  const CliResult r = cli("lam compare --f \"z^2\" --g \"z^2-1\" --N 3");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(Json::parse(r.out).at("verdict"), "different");
  const CliResult b = cli("basins --poly \"z^3\"");
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(Json::parse(b.out).at("disjoint_type").at("verdict"), "not disjoint type");
}

TEST(Cli, FailuresExitNonzero) {
  const CliResult r = cli("lam compute --poly \"z^2+2\" --N 4");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("disconnected"), std::string::npos) << r.err;
  EXPECT_EQ(cli("lam compute --poly \"z^^2\"").code, 2);
  EXPECT_EQ(cli("lam compute --no-such-flag").code, 2);
}

TEST(Cli, ProbeRigidityConfigs) {
  const CliResult r = cli("probe-rigidity --f " + configs("center-disjoint.json") + " --g " + configs("perturbed.json") + " --N 15");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(Json::parse(r.out).at("verdict"), "same component");
}

TEST(Cli, StretchRunEndsWithLimit) {
  const fs::path log = scratch_dir() / "eg1.jsonl";
  const CliResult r = cli("stretch run --config " + configs("eg1.toml") + " --out \"" + log.string() + "\"");
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(log);
  std::vector<Json> lines;
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) lines.push_back(Json::parse(line));
  ASSERT_GE(lines.size(), 3u);
  EXPECT_DOUBLE_EQ(lines.front().at("s").get<double>(), 0.3);
  ASSERT_TRUE(lines.back().contains("limit"));
  EXPECT_LT(lines.back().at("limit").at("uncertainty").get<double>(), 1e-6);
  for (std::size_t i = 0; i + 1 < lines.size(); ++i) EXPECT_LT(lines[i].at("phi_residual").get<double>(), 1e-8);

  // flags override config values
  const CliResult shallow = cli("stretch run --config " + configs("eg1.toml") + " --tail 3..8");
  ASSERT_EQ(shallow.code, 0) << shallow.err;
  const auto last = Json::parse(shallow.out.substr(shallow.out.rfind('\n', shallow.out.size() - 2) + 1));
  EXPECT_LT(last.at("limit").at("uncertainty").get<double>(), 1e-3);
  EXPECT_GT(last.at("limit").at("uncertainty").get<double>(), 1e-6);

  // identical config, byte-identical log
  EXPECT_EQ(cli("stretch run --config " + configs("eg1.toml")).out, slurp(log));
}

TEST(Cli, UnknownConfigKeyIsAUsageError) {
  const fs::path bad = scratch_dir() / "bad.toml";
  {
    std::ofstream out(bad);
    out << "pattern = \"fibonacci\"\nsmoothness = 3\n";
  }
  const CliResult r = cli("stretch run --config \"" + bad.string() + "\"");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("smoothness"), std::string::npos) << r.err;
}

TEST(Cli, JuliaWritesDeterministicImages) {
  const fs::path a = scratch_dir() / "a.ppm", b = scratch_dir() / "b.ppm";
  const std::string args = "julia --poly \"z^2-1\" --pixels 96 --max-iter 200 --rays 1/3,2/3 --out ";
  const CliResult ra = cli(args + "\"" + a.string() + "\"");
  ASSERT_EQ(ra.code, 0) << ra.err;
  EXPECT_EQ(Json::parse(ra.out).at("format"), "ppm");
  ASSERT_EQ(cli(args + "\"" + b.string() + "\" --threads 3").code, 0);
  const std::string ia = slurp(a);
  EXPECT_EQ(ia.rfind("P6\n96 96\n255\n", 0), 0u);
  EXPECT_EQ(ia, slurp(b));
  const CliResult missing = cli("julia --poly \"z^2\"");
  EXPECT_EQ(missing.code, 2);
}

TEST(Cli, LamRenderFromFile) {
  const fs::path lam = scratch_dir() / "bas.json";
  ASSERT_EQ(cli("lam compute --poly \"z^2-1\" --N 6 --out \"" + lam.string() + "\"").code, 0);
  const CliResult r = cli("lam render --lam \"" + lam.string() + "\"");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(count(r.out, "class=\"chord\""), 2);
}
