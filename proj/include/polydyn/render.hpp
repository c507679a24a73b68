#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "angle.hpp"
#include "cycles.hpp"
#include "lamination.hpp"
#include "poly.hpp"
#include "rays.hpp"

#ifdef POLYDYN_HAVE_PNG
#include <png.h>
#endif

namespace polydyn {

struct RenderSpec {
  Complex center{};
  double width = 4.0;           // horizontal extent; the vertical one follows the aspect ratio
  int pixels_x = 512, pixels_y = 512;
  int max_iter = 500;
  double escape = 0.0;          // 0: escape_radius(f)
  std::vector<Angle> external_rays;
  std::vector<Angle> internal_rays;  // of the superattracting point 0, drawn in its own component
  int internal_period = 0;           // period of 0; 0: detected up to 6
  std::vector<Complex> marked_points;
  int threads = 0;              // 0: hardware concurrency

  void validate(const Polynomial& f) const {
    if (pixels_x < 1 || pixels_y < 1 || pixels_x > 8192 || pixels_y > 8192) throw InputError("resolution must lie in 1..8192");
    if (!(width > 0)) throw InputError("render width must be positive");
    if (max_iter < 1) throw InputError("max_iter must be >= 1");
    if (escape != 0.0 && escape < escape_radius(f)) throw InputError("escape radius below 2 + sum |a_k|");
  }
};

struct Image {
  int width = 0, height = 0;
  std::vector<std::uint8_t> rgb;

  std::uint8_t* at(int x, int y) { return &rgb[3 * (static_cast<std::size_t>(y) * width + x)]; }
  const std::uint8_t* at(int x, int y) const { return &rgb[3 * (static_cast<std::size_t>(y) * width + x)]; }
};

/// Pixel centers placed symmetrically about the spec center, so conjugate
/// rows of a real-centered view are exact mirror images.
inline Complex pixel_point(const RenderSpec& spec, int i, int j) {
  const double h = spec.width * spec.pixels_y / spec.pixels_x;
  const double x = ((2.0 * i - (spec.pixels_x - 1)) * spec.width) / (2.0 * spec.pixels_x);
  const double y = (((spec.pixels_y - 1) - 2.0 * j) * h) / (2.0 * spec.pixels_y);
  return spec.center + Complex(x, y);
}

inline std::pair<int, int> point_pixel(const RenderSpec& spec, Complex z) {
  const double h = spec.width * spec.pixels_y / spec.pixels_x;
  const Complex w = z - spec.center;
  const int i = static_cast<int>(std::lround((w.real() * 2.0 * spec.pixels_x / spec.width + (spec.pixels_x - 1)) / 2.0));
  const int j = static_cast<int>(std::lround(((spec.pixels_y - 1) - w.imag() * 2.0 * spec.pixels_y / h) / 2.0));
  return {i, j};
}

namespace detail {

inline void put(Image& img, int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  if (x < 0 || y < 0 || x >= img.width || y >= img.height) return;
  auto* p = img.at(x, y);
  p[0] = r;
  p[1] = g;
  p[2] = b;
}

inline void line(Image& img, std::pair<int, int> a, std::pair<int, int> b, std::uint8_t r, std::uint8_t g, std::uint8_t bl) {
  auto [x0, y0] = a;
  auto [x1, y1] = b;
  const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
  const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  for (int guard = 0; guard < 20000; ++guard) {
    put(img, x0, y0, r, g, bl);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

inline void polyline(Image& img, const RenderSpec& spec, const std::vector<RaySample>& pts, std::uint8_t r, std::uint8_t g,
                     std::uint8_t b) {
  for (std::size_t k = 1; k < pts.size(); ++k) {
    auto p = point_pixel(spec, pts[k - 1].z), q = point_pixel(spec, pts[k].z);
    const int big = 4 * std::max(spec.pixels_x, spec.pixels_y);
    if (std::abs(p.first) > big || std::abs(p.second) > big || std::abs(q.first) > big || std::abs(q.second) > big) continue;
    line(img, p, q, r, g, b);
  }
}

// Colors of the attracting basins; conjugate cycles share a color.
inline std::vector<int> basin_palette_index(const std::vector<CycleInfo>& cycles) {
  std::vector<std::tuple<int, double, double>> keys;
  for (const auto& c : cycles) {
    double re = INFINITY, im = INFINITY;
    for (Complex z : c.points)
      if (std::make_pair(z.real(), std::abs(z.imag())) < std::make_pair(re, im)) {
        re = z.real();
        im = std::abs(z.imag());
      }
    keys.emplace_back(c.period, std::round(re * 1e6) / 1e6, std::round(im * 1e6) / 1e6);
  }
  auto sorted = keys;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<int> idx;
  for (const auto& k : keys) idx.push_back(static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), k) - sorted.begin()));
  return idx;
}

}  // namespace detail

/// Escape-time image: escaping pixels shaded by the smoothed escape count,
/// bounded pixels colored by the attracting basin their orbit reaches
/// (black when none is reached within max_iter).
inline Image render_julia(const Polynomial& f, const RenderSpec& spec) {
  spec.validate(f);
  Image img;
  img.width = spec.pixels_x;
  img.height = spec.pixels_y;
  img.rgb.assign(static_cast<std::size_t>(img.width) * img.height * 3, 0);
  const double R = spec.escape > 0 ? spec.escape : escape_radius(f);
  std::vector<CycleInfo> cycles;
  int qmax = 0;
  while (qmax < 6 && std::pow(f.degree(), qmax + 1) <= 5000) ++qmax;
  if (f.degree() >= 2 && qmax > 0) {
    for (auto& c : find_cycles(f, qmax).cycles)
      if (is_attracting(c.kind)) cycles.push_back(c);
  }
  const auto palette = detail::basin_palette_index(cycles);
  static constexpr std::uint8_t basin_rgb[6][3] = {{200, 40, 40}, {40, 160, 60}, {200, 160, 40}, {120, 60, 180}, {40, 140, 180}, {180, 90, 140}};
  const double logd = std::log(static_cast<double>(f.degree()));
  auto shade = [&](int x, int y) {
    Complex z = pixel_point(spec, x, y);
    int n = 0;
    for (; n < spec.max_iter && std::abs(z) <= R; ++n) z = f(z);
    if (std::abs(z) > R) {
      // smoothed count from log log |z|
      const double nu = n + 1.0 - std::log(std::log(std::abs(z)) / std::log(R)) / logd;
      const double t = std::clamp(nu / spec.max_iter, 0.0, 1.0);
      const double u = std::pow(t, 0.35);
      detail::put(img, x, y, static_cast<std::uint8_t>(255 * u), static_cast<std::uint8_t>(255 * u * u),
                  static_cast<std::uint8_t>(90 + 165 * u));
      return;
    }
    for (std::size_t c = 0; c < cycles.size(); ++c) {
      for (Complex w : cycles[c].points) {
        if (std::abs(z - w) < 1e-3) {
          const auto* col = basin_rgb[palette[c] % 6];
          detail::put(img, x, y, col[0], col[1], col[2]);
          return;
        }
      }
    }
  };
  const int threads = spec.threads > 0 ? spec.threads : std::max(1u, std::thread::hardware_concurrency());
  std::atomic<int> next_row{0};
  auto work = [&] {
    for (int y; (y = next_row++) < img.height;)
      for (int x = 0; x < img.width; ++x) shade(x, y);
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  for (const auto& th : spec.external_rays) {
    ExternalRay r = trace_external_ray(f, th);
    detail::polyline(img, spec, r.points, 255, 255, 255);
  }
  int p = spec.internal_period;
  if (!spec.internal_rays.empty() && p == 0) {
    Complex z = f(0.0);
    for (p = 1; p <= 6 && std::abs(z) > 1e-10; ++p) z = f(z);
    if (p > 6) throw InputError("internal rays need 0 periodic of period <= 6");
  }
  const Polynomial F = p > 1 ? f.iterate(p) : f;
  for (const auto& th : spec.internal_rays) {
    InternalRay r = trace_internal_ray(F, th);
    std::vector<RaySample> pts{{0.0, Complex{}}};
    pts.insert(pts.end(), r.points.begin(), r.points.end());
    detail::polyline(img, spec, pts, 255, 255, 120);
  }
  for (Complex z : spec.marked_points) {
    auto [x, y] = point_pixel(spec, z);
    for (int k = -3; k <= 3; ++k) {
      detail::put(img, x + k, y, 0, 255, 255);
      detail::put(img, x, y + k, 0, 255, 255);
    }
  }
  return img;
}

inline void write_ppm(const Image& img, std::ostream& out) {
  out << "P6\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.rgb.data()), static_cast<std::streamsize>(img.rgb.size()));
}

inline void write_ppm(const Image& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open " + path);
  write_ppm(img, out);
}

inline bool png_available() {
#ifdef POLYDYN_HAVE_PNG
  return true;
#else
  return false;
#endif
}

inline void write_png(const Image& img, const std::string& path) {
#ifdef POLYDYN_HAVE_PNG
  png_image pi{};
  pi.version = PNG_IMAGE_VERSION;
  pi.width = static_cast<png_uint_32>(img.width);
  pi.height = static_cast<png_uint_32>(img.height);
  pi.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&pi, path.c_str(), 0, img.rgb.data(), 0, nullptr))
    throw ComputationError(std::string("PNG write failed: ") + pi.message);
#else
  (void)img;
  throw InputError("no PNG writer in this build; cannot write " + path);
#endif
}

namespace detail {

inline std::string svg_num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

}  // namespace detail

/// Unit-circle diagram with one chord element (class "chord") per
/// non-singleton class, carrying the exact angles as metadata.
inline std::string render_lamination(const RationalLamination& lam, int size = 512) {
  const double r = 0.45 * size, cx = 0.5 * size, cy = 0.5 * size;
  auto px = [&](const Angle& t) {
    const Complex z = unit(t.to_double());
    return detail::svg_num(cx + r * z.real()) + "," + detail::svg_num(cy - r * z.imag());
  };
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size << "\" viewBox=\"0 0 " << size
    << " " << size << "\">\n";
  s << "  <metadata>degree=" << lam.degree << " N=" << lam.N << "</metadata>\n";
  s << "  <circle cx=\"" << detail::svg_num(cx) << "\" cy=\"" << detail::svg_num(cy) << "\" r=\"" << detail::svg_num(r)
    << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
  for (const auto& cls : nontrivial_classes(lam)) {
    std::string names, points;
    for (std::size_t i = 0; i < cls.size(); ++i) {
      names += (i ? " " : "") + cls[i].str();
      points += (i ? " " : "") + px(cls[i]);
    }
    if (cls.size() == 2) {
      const auto a = px(cls[0]), b = px(cls[1]);
      s << "  <line class=\"chord\" data-angles=\"" << names << "\" x1=\"" << a.substr(0, a.find(',')) << "\" y1=\""
        << a.substr(a.find(',') + 1) << "\" x2=\"" << b.substr(0, b.find(',')) << "\" y2=\"" << b.substr(b.find(',') + 1)
        << "\" stroke=\"#b03030\" stroke-width=\"1.5\"/>\n";
    } else {
      s << "  <polygon class=\"chord\" data-angles=\"" << names << "\" points=\"" << points
        << "\" fill=\"#b0303033\" stroke=\"#b03030\" stroke-width=\"1.5\"/>\n";
    }
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace polydyn
