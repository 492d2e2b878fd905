#include "sigma2/geometry.hpp"

#include <cmath>

namespace sigma2 {

Rot3 rotation_identity() {
  Rot3 r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r.m[i][j] = (i == j) ? 1.0 : 0.0;
  return r;
}

Rot3 rotation_about_axis(Vec3 a, double angle) {
  // Rodrigues formula, a assumed unit.
  const double c = std::cos(angle), s = std::sin(angle), t = 1.0 - c;
  Rot3 r;
  r.m[0][0] = c + t * a.x * a.x;
  r.m[0][1] = t * a.x * a.y - s * a.z;
  r.m[0][2] = t * a.x * a.z + s * a.y;
  r.m[1][0] = t * a.y * a.x + s * a.z;
  r.m[1][1] = c + t * a.y * a.y;
  r.m[1][2] = t * a.y * a.z - s * a.x;
  r.m[2][0] = t * a.z * a.x - s * a.y;
  r.m[2][1] = t * a.z * a.y + s * a.x;
  r.m[2][2] = c + t * a.z * a.z;
  return r;
}

Rot3 rotation_taking(Vec3 from, Vec3 to) {
  from = normalized(from);
  to = normalized(to);
  const Vec3 ax = cross(from, to);
  const double s = ax.norm();
  const double c = dot(from, to);
  if (s < 1e-14) {
    if (c > 0) return rotation_identity();
    // from ≈ −to: rotate by π about any axis orthogonal to `from`.
    Vec3 helper = std::fabs(from.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
    Vec3 axis = normalized(cross(from, helper));
    return rotation_about_axis(axis, M_PI);
  }
  return rotation_about_axis({ax.x / s, ax.y / s, ax.z / s}, std::atan2(s, c));
}

} // namespace sigma2
