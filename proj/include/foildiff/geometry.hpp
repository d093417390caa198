#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "foildiff/common.hpp"
#include "foildiff/spline.hpp"

namespace foildiff {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

// Surface coordinates in Selig traversal order: upper surface trailing
// edge -> leading edge, then lower surface leading edge -> trailing edge.
struct AirfoilProfile {
  std::string name;
  std::vector<Point2> points;
};

inline constexpr int kPointsPerSurface = 100;
inline constexpr int kCanonicalPoints = 2 * kPointsPerSurface;

// Cosine-spaced abscissae on [0, 1], ascending; clusters points at the
// leading and trailing edges where curvature concentrates.
inline std::vector<double> cosine_grid(int n_per_surface) {
  std::vector<double> grid(n_per_surface);
  for (int k = 0; k < n_per_surface; ++k) {
    grid[k] = 0.5 * (1.0 - std::cos(3.14159265358979323846 * k / (n_per_surface - 1)));
  }
  grid.front() = 0.0;
  grid.back() = 1.0;
  return grid;
}

// The shared x-grid every canonical sample lives on. Immutable.
inline const std::vector<double>& canonical_grid() {
  static const std::vector<double> grid = cosine_grid(kPointsPerSurface);
  return grid;
}

// y-values on the canonical grid: channel 0 is the upper surface at x
// decreasing 1 -> 0, channel 1 the lower surface at x increasing 0 -> 1.
struct CanonicalSample {
  std::array<double, kPointsPerSurface> upper{};
  std::array<double, kPointsPerSurface> lower{};

  bool operator==(const CanonicalSample& o) const { return upper == o.upper && lower == o.lower; }
};

inline Signal to_signal(const CanonicalSample& s) {
  Signal out(2, kPointsPerSurface);
  for (int i = 0; i < kPointsPerSurface; ++i) {
    out(0, i) = s.upper[i];
    out(1, i) = s.lower[i];
  }
  return out;
}

inline CanonicalSample from_signal(const Signal& sig) {
  if (sig.channels != 2 || sig.length != kPointsPerSurface) {
    fail(ErrorCode::ShapeMismatch, "canonical sample requires a 2x100 signal");
  }
  CanonicalSample s;
  for (int i = 0; i < kPointsPerSurface; ++i) {
    s.upper[i] = sig(0, i);
    s.lower[i] = sig(1, i);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Selig coordinate files

inline AirfoilProfile parse_selig(std::istream& in) {
  std::string line;
  std::string name;
  bool have_name = false;
  AirfoilProfile profile;

  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream tokens(line);
    if (!have_name) {
      // first non-blank line is the name
      std::string probe;
      if (!(tokens >> probe)) continue;
      const auto first = line.find_first_not_of(" \t\r\n");
      const auto last = line.find_last_not_of(" \t\r\n");
      name = line.substr(first, last - first + 1);
      have_name = true;
      continue;
    }
    std::vector<std::string> toks;
    std::string tok;
    while (tokens >> tok) toks.push_back(tok);
    if (toks.empty()) continue;
    if (toks.size() != 2) {
      fail(ErrorCode::MalformedLine,
           "line " + std::to_string(line_no) + ": expected 2 tokens, got " +
               std::to_string(toks.size()));
    }
    Point2 p;
    try {
      std::size_t used = 0;
      p.x = std::stod(toks[0], &used);
      if (used != toks[0].size()) throw std::invalid_argument(toks[0]);
      p.y = std::stod(toks[1], &used);
      if (used != toks[1].size()) throw std::invalid_argument(toks[1]);
    } catch (const std::exception&) {
      fail(ErrorCode::MalformedLine, "line " + std::to_string(line_no) + ": non-numeric token");
    }
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      fail(ErrorCode::MalformedLine, "line " + std::to_string(line_no) + ": non-finite value");
    }
    profile.points.push_back(p);
  }

  if (!have_name) fail(ErrorCode::EmptyInput, "no content");
  if (profile.points.size() < 4) {
    fail(ErrorCode::TooFewPoints,
         "got " + std::to_string(profile.points.size()) + " coordinate pairs, need at least 4");
  }
  profile.name = name;
  return profile;
}

inline AirfoilProfile parse_selig(const std::string& text) {
  std::istringstream in(text);
  return parse_selig(in);
}

inline void write_selig(const AirfoilProfile& profile, std::ostream& out) {
  out << profile.name << "\n";
  char buf[64];
  for (const Point2& p : profile.points) {
    std::snprintf(buf, sizeof(buf), "%.6f %.6f\n", p.x, p.y);
    out << buf;
  }
}

inline std::string write_selig(const AirfoilProfile& profile) {
  std::ostringstream out;
  write_selig(profile, out);
  return out.str();
}

// ---------------------------------------------------------------------------
// Normalization

// Affine x to [0, 1]; y scaled by the same factor so shape is preserved.
inline AirfoilProfile normalize(const AirfoilProfile& profile) {
  if (profile.points.empty()) fail(ErrorCode::EmptyInput, "profile has no points");
  double min_x = profile.points.front().x, max_x = min_x;
  for (const Point2& p : profile.points) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
  }
  const double chord = max_x - min_x;
  if (!(chord > 1e-12)) fail(ErrorCode::ZeroChord, "chord extent is zero");

  AirfoilProfile out;
  out.name = profile.name;
  out.points.reserve(profile.points.size());
  for (const Point2& p : profile.points) {
    out.points.push_back({(p.x - min_x) / chord, p.y / chord});
  }
  for (const Point2& p : out.points) {
    if (std::abs(p.y) > 1.0 + 1e-12) {
      fail(ErrorCode::YOutOfRange, "profile taller than a full chord after scaling");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Repanelization

namespace detail {

struct SurfaceSpline {
  CubicSpline x;  // x(s), s = cumulative arc length along the surface
  CubicSpline y;  // y(s)
  double total = 0.0;
};

inline SurfaceSpline fit_surface(const std::vector<Point2>& pts) {
  std::vector<double> s(pts.size()), xs(pts.size()), ys(pts.size());
  s[0] = 0.0;
  xs[0] = pts[0].x;
  ys[0] = pts[0].y;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double dx = pts[i].x - pts[i - 1].x;
    const double dy = pts[i].y - pts[i - 1].y;
    s[i] = s[i - 1] + std::hypot(dx, dy);
    xs[i] = pts[i].x;
    ys[i] = pts[i].y;
  }
  if (!(s.back() > 1e-12)) fail(ErrorCode::DegenerateProfile, "zero arc length on a surface");
  SurfaceSpline fit;
  fit.total = s.back();
  fit.x = CubicSpline(s, std::move(xs));
  fit.y = CubicSpline(std::move(s), std::move(ys));
  return fit;
}

// Solves x(s) = target by scanning knot intervals for the first sign change,
// then bisecting. x need not be globally monotone in s.
inline double arc_position_at_x(const SurfaceSpline& fit, double target) {
  const CubicSpline& fx = fit.x;
  const std::size_t nseg = fx.segments();
  double lo = 0.0, hi = fit.total;
  bool bracketed = false;
  for (std::size_t i = 0; i < nseg; ++i) {
    const double fa = fx.value(i) - target;
    const double fb = fx.value(i + 1) - target;
    if (fa == 0.0) return fx.knot(i);
    if (fa * fb <= 0.0) {
      lo = fx.knot(i);
      hi = fx.knot(i + 1);
      bracketed = true;
      break;
    }
  }
  if (!bracketed) {
    // target outside the sampled range; clamp to the nearer endpoint
    const double d_front = std::abs(fx.value(0) - target);
    const double d_back = std::abs(fx.value(nseg) - target);
    return d_front <= d_back ? fx.knot(0) : fx.knot(nseg);
  }
  double flo = fx(lo) - target;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double fmid = fx(mid) - target;
    if (fmid == 0.0 || hi - lo < 1e-15 * std::max(1.0, fit.total)) return mid;
    if (flo * fmid <= 0.0) {
      hi = mid;
    } else {
      lo = mid;
      flo = fmid;
    }
  }
  return 0.5 * (lo + hi);
}

inline std::vector<Point2> collapse_duplicates(const std::vector<Point2>& pts) {
  std::vector<Point2> out;
  out.reserve(pts.size());
  for (const Point2& p : pts) {
    if (!out.empty() && std::abs(p.x - out.back().x) <= 1e-9 &&
        std::abs(p.y - out.back().y) <= 1e-9) {
      continue;
    }
    out.push_back(p);
  }
  return out;
}

}  // namespace detail

// Resamples both surfaces onto the cosine grid via arc-length cubic splines.
// The input is split at the leading edge (minimum x, ties by minimum |y|).
inline AirfoilProfile repanelize(const AirfoilProfile& profile, int n_per_surface = kPointsPerSurface) {
  if (n_per_surface < 4) fail(ErrorCode::InvalidRange, "n_per_surface must be >= 4");
  const std::vector<Point2> pts = detail::collapse_duplicates(profile.points);
  if (pts.size() < 3) fail(ErrorCode::DegenerateProfile, "fewer than 3 distinct points");

  double min_x = pts[0].x, max_x = pts[0].x;
  std::size_t le = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    min_x = std::min(min_x, pts[i].x);
    max_x = std::max(max_x, pts[i].x);
    if (pts[i].x < pts[le].x ||
        (pts[i].x == pts[le].x && std::abs(pts[i].y) < std::abs(pts[le].y))) {
      le = i;
    }
  }
  const double extent = max_x - min_x;
  if (!(extent > 1e-12)) fail(ErrorCode::DegenerateProfile, "zero chord extent");
  if (min_x > 0.01) {
    fail(ErrorCode::NoLeadingEdge, "minimum x does not reach near 0; normalize first");
  }

  if (le < 1 || le + 2 > pts.size()) {
    fail(ErrorCode::DegenerateProfile, "leading edge at sequence boundary; surfaces not split");
  }

  // Upper surface reversed to LE -> TE so both fits share x ascending.
  std::vector<Point2> upper(pts.rend() - le - 1, pts.rend());
  std::vector<Point2> lower(pts.begin() + le, pts.end());
  if (upper.size() < 2 || lower.size() < 2) {
    fail(ErrorCode::DegenerateProfile, "a surface has fewer than 2 points");
  }

  const detail::SurfaceSpline upper_fit = detail::fit_surface(upper);
  const detail::SurfaceSpline lower_fit = detail::fit_surface(lower);
  const std::vector<double> grid =
      n_per_surface == kPointsPerSurface ? canonical_grid() : cosine_grid(n_per_surface);

  AirfoilProfile out;
  out.name = profile.name;
  out.points.resize(2 * std::size_t(n_per_surface));
  for (int k = 0; k < n_per_surface; ++k) {
    const double gx = grid[k];
    const double su = detail::arc_position_at_x(upper_fit, gx);
    const double sl = detail::arc_position_at_x(lower_fit, gx);
    out.points[n_per_surface - 1 - k] = {gx, upper_fit.y(su)};
    out.points[n_per_surface + k] = {gx, lower_fit.y(sl)};
  }
  return out;
}

// ---------------------------------------------------------------------------
// Canonical layout

inline CanonicalSample to_canonical(const AirfoilProfile& profile) {
  if (profile.points.size() != kCanonicalPoints) {
    fail(ErrorCode::WrongPointCount, "expected " + std::to_string(kCanonicalPoints) +
                                         " points, got " + std::to_string(profile.points.size()));
  }
  CanonicalSample s;
  for (int i = 0; i < kPointsPerSurface; ++i) {
    s.upper[i] = profile.points[i].y;
    s.lower[i] = profile.points[kPointsPerSurface + i].y;
  }
  return s;
}

inline AirfoilProfile from_canonical(const CanonicalSample& sample, const std::string& name = "canonical") {
  const std::vector<double>& grid = canonical_grid();
  AirfoilProfile profile;
  profile.name = name;
  profile.points.resize(kCanonicalPoints);
  for (int i = 0; i < kPointsPerSurface; ++i) {
    profile.points[i] = {grid[kPointsPerSurface - 1 - i], sample.upper[i]};
    profile.points[kPointsPerSurface + i] = {grid[i], sample.lower[i]};
  }
  return profile;
}

// ---------------------------------------------------------------------------
// Geometric metrics

struct GeometricMetrics {
  double chord = 0.0;
  double max_thickness = 0.0;
  double thickness_ratio = 0.0;
  double max_camber = 0.0;  // max |camber line y|
  std::array<Point2, kPointsPerSurface> camber_line{};
  bool surfaces_cross = false;  // warning: negative thickness somewhere
};

inline GeometricMetrics geometric_metrics(const AirfoilProfile& profile) {
  const CanonicalSample s = to_canonical(profile);
  const std::vector<double>& grid = canonical_grid();

  GeometricMetrics m;
  double min_x = profile.points.front().x, max_x = min_x;
  for (const Point2& p : profile.points) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
  }
  m.chord = max_x - min_x;
  if (!(m.chord > 0.0)) fail(ErrorCode::ZeroChord, "chord extent is zero");

  m.max_thickness = 0.0;
  m.max_camber = 0.0;
  for (int j = 0; j < kPointsPerSurface; ++j) {
    const double up = s.upper[kPointsPerSurface - 1 - j];  // upper channel is x-descending
    const double lo = s.lower[j];
    const double thickness = up - lo;
    const double camber = 0.5 * (up + lo);
    m.camber_line[j] = {grid[j], camber};
    if (thickness < -1e-12) m.surfaces_cross = true;
    m.max_thickness = std::max(m.max_thickness, thickness);
    m.max_camber = std::max(m.max_camber, std::abs(camber));
  }
  m.thickness_ratio = m.max_thickness / m.chord;
  return m;
}

inline GeometricMetrics geometric_metrics(const CanonicalSample& sample) {
  return geometric_metrics(from_canonical(sample));
}

}  // namespace foildiff
