#pragma once

// Stereographic chart geometry for the round sphere (S², g_round), sectional
// curvature +1, realized as the unit sphere in R³.
//
// Two antipodal charts cover the sphere:
//
//   north chart (projection from the north pole):
//       z(x) = ( 2x₁, 2x₂, |x|²−1 ) / (1+|x|²),   origin ↦ south pole (0,0,−1)
//   south chart (projection from the south pole):
//       z(y) = ( 2y₁, 2y₂, 1−|y|² ) / (1+|y|²),   origin ↦ north pole (0,0,+1)
//
// The transition map between them is the plane inversion  y = x/|x|².
// On either chart the round metric is conformally flat,
//
//       g = e^{φ(x)} |dx|²,   φ(x) = ln( 4 / (1+|x|²)² ),
//
// (note the convention: the conformal factor is e^φ, not e^{2φ}) and the
// Christoffel symbols of e^φ|dx|² are the four combinations
//
//   Γ¹₁₁ = Γ²₁₂ =  φ₁/2,   Γ²₁₁ = −φ₂/2,
//   Γ¹₁₂ = Γ²₂₂ =  φ₂/2,   Γ¹₂₂ = −φ₁/2,     with φ_k = −4 x_k/(1+|x|²).
//
// All formulas here are analytic (no finite differences).

#include <array>
#include <cmath>

namespace sigma2 {

struct Vec2 {
  double x = 0, y = 0;
  double norm2() const { return x * x + y * y; }
  double norm() const { return std::sqrt(norm2()); }
  double& operator[](int i) { return i == 0 ? x : y; }
  double operator[](int i) const { return i == 0 ? x : y; }
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

struct Vec3 {
  double x = 0, y = 0, z = 0;
  double norm2() const { return x * x + y * y + z * z; }
  double norm() const { return std::sqrt(norm2()); }
  double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
  double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
};

inline Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(Vec3 a, Vec3 b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline Vec3 normalized(Vec3 a) {
  double n = a.norm();
  return {a.x / n, a.y / n, a.z / n};
}

enum class ChartId { North, South }; // projection pole

inline ChartId other_chart(ChartId c) {
  return c == ChartId::North ? ChartId::South : ChartId::North;
}

// Chart point -> unit sphere point.
inline Vec3 stereo_to_sphere(ChartId chart, Vec2 x) {
  const double r2 = x.norm2();
  const double d = 1.0 + r2;
  if (chart == ChartId::North) return {2.0 * x.x / d, 2.0 * x.y / d, (r2 - 1.0) / d};
  return {2.0 * x.x / d, 2.0 * x.y / d, (1.0 - r2) / d};
}

// Unit sphere point -> chart point. The chart's projection pole itself has no
// image (the formula blows up as z₃ → ±1); callers pick the chart where the
// point is well inside (see SphereField::eval).
inline Vec2 sphere_to_stereo(ChartId chart, Vec3 z) {
  if (chart == ChartId::North) {
    const double d = 1.0 - z.z;
    return {z.x / d, z.y / d};
  }
  const double d = 1.0 + z.z;
  return {z.x / d, z.y / d};
}

// Transition map between the two charts (either direction): plane inversion.
inline Vec2 chart_transition_point(Vec2 x) {
  const double r2 = x.norm2();
  return {x.x / r2, x.y / r2};
}

// φ(x) = ln(4/(1+|x|²)²) and its first partials φ_k = −4x_k/(1+|x|²).
inline double conformal_phi(Vec2 x) {
  const double d = 1.0 + x.norm2();
  return std::log(4.0) - 2.0 * std::log(d);
}

inline Vec2 conformal_phi_grad(Vec2 x) {
  const double d = 1.0 + x.norm2();
  return {-4.0 * x.x / d, -4.0 * x.y / d};
}

inline double conformal_factor(Vec2 x) { // e^{φ(x)} = 4/(1+|x|²)²
  const double d = 1.0 + x.norm2();
  return 4.0 / (d * d);
}

// Christoffel symbols Γ^k_{ij} of a conformally flat metric e^{ψ}|dx|², given
// the gradient of the log-factor ψ. Layout: gamma[k][i][j], symmetric in (i,j).
struct Christoffel {
  double g[2][2][2];
};

inline Christoffel christoffel_conformal(Vec2 grad_psi) {
  const double p1 = grad_psi.x, p2 = grad_psi.y;
  Christoffel c;
  // Γ¹: [ p1/2   p2/2 ; p2/2  −p1/2 ]
  c.g[0][0][0] = 0.5 * p1;
  c.g[0][0][1] = 0.5 * p2;
  c.g[0][1][0] = 0.5 * p2;
  c.g[0][1][1] = -0.5 * p1;
  // Γ²: [ −p2/2  p1/2 ; p1/2   p2/2 ]
  c.g[1][0][0] = -0.5 * p2;
  c.g[1][0][1] = 0.5 * p1;
  c.g[1][1][0] = 0.5 * p1;
  c.g[1][1][1] = 0.5 * p2;
  return c;
}

// Christoffels of the round background g = e^{φ}|dx|² at chart point x.
inline Christoffel christoffel_round(Vec2 x) {
  return christoffel_conformal(conformal_phi_grad(x));
}

// Geodesic distance on the unit round sphere.
inline double geodesic_distance(Vec3 a, Vec3 b) {
  // atan2 form is accurate for both small and near-antipodal angles.
  const double c = dot(a, b);
  const double s = cross(a, b).norm();
  return std::atan2(s, c);
}

// A rotation matrix (row-major) taking `from` to `to` (both unit vectors),
// rotating in the plane they span; identity when from ≈ to, and a flip about
// a stable orthogonal axis when from ≈ −to.
struct Rot3 {
  double m[3][3];
  Vec3 apply(Vec3 v) const {
    return {m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z};
  }
  Rot3 transpose() const {
    Rot3 t;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) t.m[i][j] = m[j][i];
    return t;
  }
};

Rot3 rotation_identity();
Rot3 rotation_about_axis(Vec3 axis_unit, double angle);
Rot3 rotation_taking(Vec3 from, Vec3 to);

} // namespace sigma2
