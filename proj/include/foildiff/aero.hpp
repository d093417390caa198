#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "foildiff/common.hpp"
#include "foildiff/geometry.hpp"

namespace foildiff {

struct FlowCondition {
  double alpha = 0.0;        // angle of attack, radians
  double reynolds = 1.0e6;   // chord Reynolds number
};

struct AeroCoefficients {
  double cl = 0.0;
  double cd = 0.0;
  double lift_to_drag = 0.0;

  static AeroCoefficients make(double cl, double cd) { return {cl, cd, cl / cd}; }
};

namespace detail {

inline constexpr double kPi = 3.14159265358979323846;

// Below this thickness ratio the surface formulation degenerates (upper and
// lower panels coincide); circulation is solved on the camber line instead.
inline constexpr double kThinSectionThreshold = 0.005;

// Linear-strength vortex panel method, Kuethe & Chow formulation.
// Nodes ordered trailing edge -> lower surface -> leading edge -> upper
// surface -> trailing edge. Returns cl referenced to unit chord.
inline double surface_vortex_cl(const std::vector<Point2>& nodes, double alpha) {
  const int m = int(nodes.size()) - 1;  // panel count
  Eigen::VectorXd xm(m), ym(m), theta(m), slen(m), sine(m), cosine(m);
  for (int i = 0; i < m; ++i) {
    const double dx = nodes[i + 1].x - nodes[i].x;
    const double dy = nodes[i + 1].y - nodes[i].y;
    xm(i) = 0.5 * (nodes[i].x + nodes[i + 1].x);
    ym(i) = 0.5 * (nodes[i].y + nodes[i + 1].y);
    theta(i) = std::atan2(dy, dx);
    slen(i) = std::hypot(dx, dy);
    sine(i) = std::sin(theta(i));
    cosine(i) = std::cos(theta(i));
  }

  Eigen::MatrixXd an = Eigen::MatrixXd::Zero(m + 1, m + 1);
  Eigen::VectorXd rhs(m + 1);
  Eigen::MatrixXd cn1(m, m), cn2(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      if (i == j) {
        cn1(i, j) = -1.0;
        cn2(i, j) = 1.0;
        continue;
      }
      const double a = -(xm(i) - nodes[j].x) * cosine(j) - (ym(i) - nodes[j].y) * sine(j);
      const double b = (xm(i) - nodes[j].x) * (xm(i) - nodes[j].x) +
                       (ym(i) - nodes[j].y) * (ym(i) - nodes[j].y);
      const double c = std::sin(theta(i) - theta(j));
      const double d = std::cos(theta(i) - theta(j));
      const double e = (xm(i) - nodes[j].x) * sine(j) - (ym(i) - nodes[j].y) * cosine(j);
      const double f = std::log(1.0 + slen(j) * (slen(j) + 2.0 * a) / b);
      const double g = std::atan2(e * slen(j), b + a * slen(j));
      const double p = (xm(i) - nodes[j].x) * std::sin(theta(i) - 2.0 * theta(j)) +
                       (ym(i) - nodes[j].y) * std::cos(theta(i) - 2.0 * theta(j));
      const double q = (xm(i) - nodes[j].x) * std::cos(theta(i) - 2.0 * theta(j)) -
                       (ym(i) - nodes[j].y) * std::sin(theta(i) - 2.0 * theta(j));
      cn2(i, j) = d + 0.5 * q * f / slen(j) - (a * c + d * e) * g / slen(j);
      cn1(i, j) = 0.5 * d * f + c * g - cn2(i, j);
    }
  }
  for (int i = 0; i < m; ++i) {
    an(i, 0) = cn1(i, 0);
    an(i, m) = cn2(i, m - 1);
    for (int j = 1; j < m; ++j) an(i, j) = cn1(i, j) + cn2(i, j - 1);
    rhs(i) = std::sin(theta(i) - alpha);
  }
  // Kutta condition: tangential velocities on the two trailing-edge panels
  // match, expressed through the nodal strengths there.
  an(m, 0) = 1.0;
  an(m, m) = 1.0;
  rhs(m) = 0.0;

  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(an);
  const Eigen::VectorXd gamma = lu.solve(rhs);
  const double residual = (an * gamma - rhs).cwiseAbs().maxCoeff();
  if (!std::isfinite(residual) || residual > 1e-6 * (rhs.cwiseAbs().maxCoeff() + 1.0)) {
    fail(ErrorCode::SingularSystem, "panel influence matrix is not solvable");
  }

  // gamma is gamma'/(2 pi V); circulation per panel integrates the linear
  // strength. Traversal is counterclockwise, so lift = -rho V Gamma_ccw.
  double circulation = 0.0;
  for (int j = 0; j < m; ++j) {
    circulation += slen(j) * 0.5 * (gamma(j) + gamma(j + 1));
  }
  double chord = 0.0;
  for (const Point2& p : nodes) chord = std::max(chord, p.x);
  double min_x = nodes.front().x;
  for (const Point2& p : nodes) min_x = std::min(min_x, p.x);
  chord -= min_x;
  return 4.0 * kPi * circulation / chord;
}

// Lumped-vortex (discrete vortex) method on the camber line; exact
// thin-airfoil behavior for flat and cambered plates.
inline double camber_vortex_cl(const std::vector<Point2>& camber, double alpha) {
  const int m = int(camber.size()) - 1;
  Eigen::VectorXd vx(m), vy(m), cx(m), cy(m), nx(m), ny(m);
  for (int i = 0; i < m; ++i) {
    const double dx = camber[i + 1].x - camber[i].x;
    const double dy = camber[i + 1].y - camber[i].y;
    const double len = std::hypot(dx, dy);
    if (!(len > 0.0)) fail(ErrorCode::SingularSystem, "degenerate camber panel");
    vx(i) = camber[i].x + 0.25 * dx;
    vy(i) = camber[i].y + 0.25 * dy;
    cx(i) = camber[i].x + 0.75 * dx;
    cy(i) = camber[i].y + 0.75 * dy;
    nx(i) = -dy / len;
    ny(i) = dx / len;
  }

  Eigen::MatrixXd a(m, m);
  Eigen::VectorXd rhs(m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      const double rx = cx(i) - vx(j);
      const double ry = cy(i) - vy(j);
      const double r2 = rx * rx + ry * ry;
      // unit counterclockwise vortex at (vx, vy)
      const double u = -ry / (2.0 * kPi * r2);
      const double w = rx / (2.0 * kPi * r2);
      a(i, j) = u * nx(i) + w * ny(i);
    }
    rhs(i) = -(std::cos(alpha) * nx(i) + std::sin(alpha) * ny(i));
  }
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  const Eigen::VectorXd gamma = lu.solve(rhs);
  const double residual = (a * gamma - rhs).cwiseAbs().maxCoeff();
  if (!std::isfinite(residual) || residual > 1e-6 * (rhs.cwiseAbs().maxCoeff() + 1.0)) {
    fail(ErrorCode::SingularSystem, "camber influence matrix is not solvable");
  }

  double chord = camber.back().x - camber.front().x;
  if (!(chord > 0.0)) fail(ErrorCode::SingularSystem, "zero camber-line chord");
  // Kutta-Joukowski with clockwise-positive circulation giving positive lift.
  return -2.0 * gamma.sum() / chord;
}

}  // namespace detail

// Deterministic potential-flow coefficient oracle: linear-strength vortex
// panels for lift, flat-plate turbulent friction with a thickness form
// factor for drag.
inline AeroCoefficients evaluate(const AirfoilProfile& profile, const FlowCondition& flow) {
  if (!(std::abs(flow.alpha) < detail::kPi / 6.0)) {
    fail(ErrorCode::EnvelopeExceeded, "|alpha| must be below pi/6");
  }
  if (!(flow.reynolds > 0.0)) fail(ErrorCode::EnvelopeExceeded, "Reynolds number must be positive");

  const CanonicalSample s = to_canonical(profile);
  const std::vector<double>& grid = canonical_grid();

  // chord of the provided coordinates; coefficients are nondimensional
  double min_x = profile.points.front().x, max_x = min_x;
  for (const Point2& p : profile.points) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
  }
  const double chord = max_x - min_x;
  if (!(chord > 0.0)) fail(ErrorCode::ZeroChord, "zero chord");

  double max_thickness = 0.0;
  for (int j = 0; j < kPointsPerSurface; ++j) {
    max_thickness = std::max(max_thickness, s.upper[kPointsPerSurface - 1 - j] - s.lower[j]);
  }
  const double tc = max_thickness / chord;

  double cl = 0.0;
  if (tc < detail::kThinSectionThreshold) {
    std::vector<Point2> camber(kPointsPerSurface);
    for (int j = 0; j < kPointsPerSurface; ++j) {
      camber[j] = {profile.points[kPointsPerSurface + j].x,
                   0.5 * (s.upper[kPointsPerSurface - 1 - j] + s.lower[j])};
    }
    cl = detail::camber_vortex_cl(camber, flow.alpha);
  } else {
    // reverse Selig order: trailing edge -> lower -> leading edge -> upper
    std::vector<Point2> nodes(profile.points.rbegin(), profile.points.rend());
    // drop exactly coincident consecutive nodes (shared LE point)
    std::vector<Point2> cleaned;
    cleaned.reserve(nodes.size());
    for (const Point2& p : nodes) {
      if (!cleaned.empty() && p.x == cleaned.back().x && p.y == cleaned.back().y) continue;
      cleaned.push_back(p);
    }
    cl = detail::surface_vortex_cl(cleaned, flow.alpha);
  }

  // Schlichting turbulent flat-plate friction over the wetted arc length,
  // with form factor (1 + 2 t/c).
  const double log_re = std::log10(flow.reynolds);
  const double cf = 0.455 / std::pow(log_re, 2.58);
  double wetted = 0.0;
  for (std::size_t i = 1; i < profile.points.size(); ++i) {
    wetted += std::hypot(profile.points[i].x - profile.points[i - 1].x,
                         profile.points[i].y - profile.points[i - 1].y);
  }
  wetted /= chord;
  const double cd = cf * wetted * (1.0 + 2.0 * tc);

  return AeroCoefficients::make(cl, cd);
}

struct BatchEvaluation {
  bool ok = false;
  AeroCoefficients coefficients{};
  ErrorCode error = ErrorCode::SingularSystem;
  std::string message;
};

// Elementwise evaluate; per-item failures recorded without aborting.
inline std::vector<BatchEvaluation> evaluate_batch(const std::vector<AirfoilProfile>& profiles,
                                                   const FlowCondition& flow) {
  std::vector<BatchEvaluation> results;
  results.reserve(profiles.size());
  for (const AirfoilProfile& profile : profiles) {
    BatchEvaluation item;
    try {
      item.coefficients = evaluate(profile, flow);
      item.ok = true;
    } catch (const Error& e) {
      item.error = e.code();
      item.message = e.what();
    }
    results.push_back(item);
  }
  return results;
}

}  // namespace foildiff
