#pragma once

// Prescribed-curvature fields on the unit sphere.
//
// A KField is a quadratic polynomial in the ambient coordinates restricted to
// S²,
//
//     K(z) = c0 + a·z + z·Bz,      B symmetric 3×3,
//
// which is rich enough for every curvature prescription the solver and the
// degree machinery exercise (constants, tilted linear fields, quadrics) while
// keeping all derivatives closed-form. For the restriction of an ambient
// function F to the unit sphere the exact identities are
//
//     ∇_g K(z) = (I − zzᵀ) ∇F(z)                       (tangential gradient)
//     Δ_g K(z) = Δ̄F(z) − Hess F(z)[z,z] − 2 z·∇F(z)    (Laplace–Beltrami)
//
// which for the quadratic ansatz reduce to
//
//     ∇F = a + 2Bz,   Δ_g K = 2 tr B − 6 z·Bz − 2 a·z.
//
// Sanity anchors: Δ_g z_i = −2 z_i and Δ_g (z_i z_j) = −6 z_i z_j (i ≠ j),
// the degree-1 and degree-2 spherical-harmonic eigenvalues.
//
// Fields are constructed from a small text mini-language (see parse_kfield)
// so the command line and config files can name them without an expression
// parser.

#include <array>
#include <string>

#include "sigma2/geometry.hpp"
#include "sigma2/grid.hpp"

namespace sigma2 {

struct KField {
  double c0 = 1.0;
  Vec3 a{0.0, 0.0, 0.0};
  std::array<std::array<double, 3>, 3> B{{{0, 0, 0}, {0, 0, 0}, {0, 0, 0}}};
  std::string name = "const:1"; // canonical spec string, echoed in manifests

  double eval(const Vec3& z) const;
  // Gradient of the ambient extension c0 + a·z + z·Bz at z.
  Vec3 ambient_grad(const Vec3& z) const;
  // Tangential (intrinsic) gradient (I − zzᵀ)∇F; satisfies ⟨∇_g K, z⟩ = 0.
  Vec3 sphere_grad(const Vec3& z) const;
  // Laplace–Beltrami of the restriction.
  double laplacian(const Vec3& z) const;

  bool is_constant() const; // a = 0 and B = 0 exactly
  // Scale of the non-constant part, ‖a‖ + 2‖B‖_F. Bounds sup|∇K| over the
  // sphere; used to normalize tolerance thresholds.
  double gradient_scale() const;
};

// Mini-language accepted by the CLI and config files:
//   "<number>"                 constant field (e.g. "1", "0.25")
//   "const:<v>"                same, explicit
//   "2+z3"                     the tilted field 2 + z₃
//   "linear:c0,a1,a2,a3"       c0 + a·z
//   "quadric:<eps>"            1 + eps·(z₁² + 1.5 z₂² + 3 z₃² − 2)
//   "poly:c0;a1,a2,a3;b11,b12,b13,b22,b23,b33"
//                              full quadratic, B given by its upper triangle
//   "json:<path>"              JSON file {"c0": …, "a": [3], "B": [[3×3]]}
//                              ("a"/"B" optional; "B" must be symmetric)
// Malformed specs throw InputError.
KField parse_kfield(const std::string& spec);

SphereField sample_kfield(const KField& K, const GridSpec& spec);

} // namespace sigma2
