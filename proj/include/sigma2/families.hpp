#pragma once

// Closed-form solution families and the conformal transforms that act on them.
//
// Planar (flat background, metric e^u|dx|²):
//   * Bubble U_{a,q}(x) = 2 ln(a/(a²+|x−q|²)) + ln 4 — the entire solutions of
//     σ₂(λ(A^u)) = 1; normalized eigenvalues are exactly (1,1).
//   * Radial boundary-of-cone catalog on r > 0 (families tagged a…e below):
//       a       u = C₁ ln r + C₂                      (p = 1, σ₁ ≡ 0)
//       b-log   u = −4 ln r + C₁                       (λ ≡ (0,0))
//       b-const u = C₁                                 (λ ≡ (0,0))
//       c       u = −(4/(p−1)) ln(r^{p−1} + C₁) + C₂,  C₁ > 0
//       d       u = κ ln(r^{−q} − C₁) + C₂ on r < C₁^{−1/q},  C₁ > 0
//       e       u = κ ln(C₁ − r^{−q}) + C₂ on r > C₁^{−1/q},  C₁ > 0
//     with κ = 4(2−p)/(p−1), q = (p−1)/(2−p) (κq = 4), valid for 1 < p < 2
//     (family c extends to p = 2, where d/e degenerate away).
//     For radial u the normalized eigenvalues in physical order are
//       λ_rad = ((u′)² − 4u″)/(4e^u),   λ_tan = −u′(4 + r u′)/(4 r e^u),
//     and every family above satisfies a by-role boundary relation:
//       c:   λ_rad = (p−2) λ_tan (λ_tan > 0);   d,e: λ_tan = (p−2) λ_rad.
//   * Planar Möbius inversion u_{x,λ}(y) = u(x + λ²(y−x)/|y−x|²) − 4 ln(|y−x|/λ),
//     which permutes the eigenvalue multiset of A^u.
//
// Sphere (round background):
//   * MobiusSphere(P, t): the conformal map reading x ↦ t·x in the
//     stereographic chart whose origin is P. Its pullback acts on metric
//     exponents as T(v) = v∘ψ + ln c with ψ*g = c·g; T(0) is the bubble
//     concentrated at P with peak value 2 ln t.
//   * Annulus two-point boundary problem: the unique radial boundary-of-cone
//     solution with u(a) = α, u(b) = β, selected by branch on β − α.

#include <functional>
#include <string>

#include "sigma2/geometry.hpp"
#include "sigma2/grid.hpp"
#include "sigma2/tensor.hpp"

namespace sigma2 {

// --- Bubbles -----------------------------------------------------------------

struct Bubble {
  double a = 1.0;
  Vec2 q{0, 0};
};

double bubble_eval(const Bubble& b, Vec2 x);
Vec2 bubble_grad(const Bubble& b, Vec2 x);

// --- Radial catalog ----------------------------------------------------------

enum class RadialFamily {
  GeneralLog,     // tag "a":       C₁ ln r + C₂ (p = 1 only)
  PureLog,        // tag "b-log":   −4 ln r + C₁
  Constant,       // tag "b-const": C₁
  ShiftedPowerLog,// tag "c"
  InnerPowerCap,  // tag "d"
  OuterPowerCap   // tag "e"
};

std::string family_tag(RadialFamily f);
RadialFamily parse_family_tag(const std::string& tag); // throws InputError

struct RadialSolution {
  RadialFamily family = RadialFamily::Constant;
  double p = 2.0;
  double C1 = 0.0, C2 = 0.0;
  double rmin = 0.0, rmax = 0.0; // validity interval (rmax = INFINITY allowed)
};

// Validates the family invariants (C₁ signs, p ranges) and fills the validity
// interval. Throws InputError on a malformed combination.
RadialSolution make_radial(RadialFamily f, double p, double C1, double C2);

struct RadialValue {
  double u = 0, du = 0, ddu = 0;
};

// Closed-form value and analytic derivatives. Throws DomainError when r is
// outside the validity interval.
RadialValue radial_eval(const RadialSolution& rs, double r);

// Normalized eigenvalues of A^u for radial planar u, in physical order:
// lam1 = radial direction, lam2 = tangential. Throws InputError for r <= 0.
EigenPair radial_eigenvalues(double u, double du, double ddu, double r);

// Boundary-of-cone margins in physical (role) order:
//   m1 = λ_tan − (p−2) λ_rad,   m2 = λ_rad − (p−2) λ_tan.
// One of them vanishes identically on each catalog family.
struct RoleMargins {
  double m1 = 0, m2 = 0;
};
RoleMargins radial_cone_margins(const EigenPair& role_pair, double p);

// --- Planar Möbius inversion ---------------------------------------------------

struct PlanarMobius {
  Vec2 x{0, 0};
  double lambda = 1.0;
};

// u_{x,λ} as a callable. Evaluation at y = x throws DomainError.
std::function<double(Vec2)> mobius_invert(std::function<double(Vec2)> u, PlanarMobius m);
// Grid-sampled variant: bicubic interpolation at the pre-images (DomainError
// when a pre-image leaves the grid).
std::function<double(Vec2)> mobius_invert(const PlanarField& u, PlanarMobius m);

// --- Sphere Möbius maps --------------------------------------------------------

class MobiusSphere {
public:
  // t = 1 is the identity; t > 1 concentrates the pullback at P. Requires
  // |P| = 1 and t >= 1 (use apply_inverse for the reciprocal-scale map).
  MobiusSphere(Vec3 P, double t);

  Vec3 apply(Vec3 z) const;       // ψ_{P,t}
  Vec3 apply_inverse(Vec3 z) const; // ψ_{P,1/t}
  double log_factor(Vec3 z) const;  // ln c with ψ*g = c·g; peak 2 ln t at P

  Vec3 center() const { return P_; }
  double scale() const { return t_; }

private:
  Vec3 P_;
  double t_;
  Rot3 to_chart_;   // takes P to the north-chart origin (the south pole)
  Rot3 from_chart_; // inverse
};

// T_ψ(v) = v∘ψ + ln c on the two-chart grid (bicubic at pre-images).
SphereField sphere_mobius_pullback(const SphereField& v, Vec3 P, double t);

// Same transform acting on an analytic function of the sphere point.
std::function<double(Vec3)> sphere_mobius_pullback_fn(std::function<double(Vec3)> v, Vec3 P,
                                                      double t);

// --- Annulus boundary-value problem -------------------------------------------

// The unique radial boundary-of-cone solution on [a,b] with u(a) = α,
// u(b) = β. Requires 0 < a < b and p ∈ (1,2]. Branches on β′ = β − α:
//   β′ = 0            → b-const;      β′ = −4 ln(b/a) → b-log
//   −4 ln(b/a) < β′ < 0 → family c
//   β′ < −4 ln(b/a)     → family d   (p = 2: unsolvable, DomainError)
//   β′ > 0              → family e   (p = 2: unsolvable, DomainError)
// Endpoint closure is re-verified to 1e−10 (NumericsError otherwise).
RadialSolution annulus_bvp(double p, double a, double b, double alpha, double beta);

} // namespace sigma2
