#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "foildiff/common.hpp"
#include "foildiff/geometry.hpp"

namespace foildiff {

// Analytic NACA 4-digit section. Thickness polynomial and camber line per
// the standard definition; surfaces displaced perpendicular to the camber
// line. Camber m and thickness t are chord fractions, p is the chordwise
// position of maximum camber.
struct Naca4 {
  double camber = 0.0;      // m
  double camber_pos = 0.0;  // p
  double thickness = 0.0;   // t
  bool closed_te = true;

  static Naca4 from_code(const std::string& code) {
    if (code.size() != 4) fail(ErrorCode::InvalidRange, "NACA code must have 4 digits");
    const int m = code[0] - '0';
    const int p = code[1] - '0';
    const int t = 10 * (code[2] - '0') + (code[3] - '0');
    Naca4 n;
    n.camber = m / 100.0;
    n.camber_pos = p / 10.0;
    n.thickness = t / 100.0;
    return n;
  }

  double half_thickness(double x) const {
    const double k4 = closed_te ? -0.1036 : -0.1015;
    return 5.0 * thickness *
           (0.2969 * std::sqrt(x) - 0.1260 * x - 0.3516 * x * x + 0.2843 * x * x * x +
            k4 * x * x * x * x);
  }

  double camber_y(double x) const {
    if (camber == 0.0) return 0.0;
    const double p = camber_pos;
    if (x < p) return camber / (p * p) * (2.0 * p * x - x * x);
    return camber / ((1.0 - p) * (1.0 - p)) * (1.0 - 2.0 * p + 2.0 * p * x - x * x);
  }

  double camber_slope(double x) const {
    if (camber == 0.0) return 0.0;
    const double p = camber_pos;
    if (x < p) return 2.0 * camber / (p * p) * (p - x);
    return 2.0 * camber / ((1.0 - p) * (1.0 - p)) * (p - x);
  }

  Point2 upper_point(double x) const {
    const double yt = half_thickness(x);
    const double theta = std::atan(camber_slope(x));
    return {x - yt * std::sin(theta), camber_y(x) + yt * std::cos(theta)};
  }

  Point2 lower_point(double x) const {
    const double yt = half_thickness(x);
    const double theta = std::atan(camber_slope(x));
    return {x + yt * std::sin(theta), camber_y(x) - yt * std::cos(theta)};
  }
};

// Selig-ordered profile with a shared leading-edge point: 2n-1 points.
inline AirfoilProfile naca4_profile(const std::string& code, int n_per_surface = 66,
                                    const std::vector<double>* stations = nullptr) {
  const Naca4 section = Naca4::from_code(code);
  std::vector<double> xs;
  if (stations != nullptr) {
    xs = *stations;
  } else {
    xs = cosine_grid(n_per_surface);
  }

  AirfoilProfile profile;
  profile.name = "NACA " + code;
  for (auto it = xs.rbegin(); it != xs.rend(); ++it) {
    profile.points.push_back(section.upper_point(*it));
  }
  for (std::size_t i = 1; i < xs.size(); ++i) {
    profile.points.push_back(section.lower_point(xs[i]));
  }
  return profile;
}

}  // namespace foildiff
