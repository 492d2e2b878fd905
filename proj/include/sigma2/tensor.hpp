#pragma once

// Conformal curvature tensor operations.
//
// For a conformal metric g_u = e^u g (background g round of curvature 1, or
// flat), the trace-modified Ricci tensor is
//
//     A_{g_u} = −∇²_g u + ½ du⊗du − ¼ |∇_g u|² g + K_g g,
//
// written in chart coordinates (background e^φ|dx|², φ ≡ 0 and K_g = 0 in the
// flat case) as
//
//     A_ij = −u_ij + Γ^k_ij u_k + ½ u_i u_j − ¼ |∇u|² δ_ij + e^φ δ_ij.
//
// The eigenvalues λ(g_u⁻¹ A_{g_u}) are those of A_ij / e^{u+φ}. σ₁ = λ₁+λ₂,
// σ₂ = λ₁λ₂ = det. The cone Γ_p (1 ≤ p ≤ 2) is
//
//     Γ_p = { λ : λ₂ > (p−2)λ₁  and  λ₁ > (p−2)λ₂ },
//
// with margins m₁ = λ₂ − (p−2)λ₁ and m₂ = λ₁ − (p−2)λ₂ (Γ₂ = positive
// quadrant, Γ₁ = {σ₁ > 0}).
//
// The first Newton transform T₁(Λ) = σ₁(Λ)I − Λ satisfies the contraction
// identity T₁(Λ):Λ = 2σ₂(Λ) and, evaluated on Λ = g_u⁻¹A_{g_u}, is divergence
// free with respect to g_u. A itself satisfies the Codazzi symmetry
// ∇_c A_ab = ∇_b A_ac (again w.r.t. g_u). Both are checked numerically here;
// they are the discrete backbone of the Kazdan–Warner identity.

#include <functional>

#include "sigma2/grid.hpp"
#include "sigma2/kernels.hpp"

namespace sigma2 {

struct EigenPair {
  double lam1 = 0, lam2 = 0; // ascending
  double sig1 = 0, sig2 = 0; // trace / determinant
};

// Eigen-decompose the metric-normalized symmetric matrix A/m.
EigenPair eigen_sigma(double a11, double a12, double a22, double metric_factor);

enum class ConePosition { Interior, Boundary, Exterior };

struct ConeStatus {
  ConePosition pos = ConePosition::Exterior;
  double m1 = 0, m2 = 0; // m1 = λ₂−(p−2)λ₁, m2 = λ₁−(p−2)λ₂
};

// Membership of λ (any order) in Γ_p with tolerance band `tol` around ∂Γ_p.
// Throws InputError for p outside [1,2].
ConeStatus cone_check(double lam1, double lam2, double p, double tol = 1e-9);

struct Mat2 {
  double m[2][2] = {{0, 0}, {0, 0}};
};

struct NewtonTransform {
  Mat2 t0;            // identity
  Mat2 t1;            // σ₁(Λ)I − Λ
  double contraction; // T₁(Λ):Λ  (= 2σ₂(Λ))
  double two_sigma2;  // 2·det(Λ), for the identity check
};

NewtonTransform newton_transform(const Mat2& lambda);

// --- Field-level assembly ----------------------------------------------------

// Schouten data of e^u·(flat) on a rectangle. Derivatives O(h²) (one-sided at
// edges, diagnostics only).
kernels::SchoutenField schouten_flat(const PlanarGrid& g, const std::vector<double>& u);

// Schouten data of e^u·g_round on one chart / both charts.
kernels::SchoutenField schouten_sphere_chart(const GridSpec& g, const std::vector<double>& u);

struct SphereSchouten {
  kernels::SchoutenField north, south;
};
SphereSchouten schouten_sphere(const SphereField& u);

// Fraction of nodes (per chart, all nodes) whose A-matrix is positive definite
// with min eigenvalue ≥ eps·e^{u+φ}; cone census for diagnostics and the
// solver safeguard.
double cone_census(const GridSpec& g, const std::vector<double>& u,
                   const kernels::SchoutenField& s, double eps);
// Same census over the owned nodes (|x| ≤ 1) of both charts.
double cone_census(const SphereField& u, const SphereSchouten& s, double eps);

// --- Pointwise assembly from analytic callables (FD step fd_h) --------------

struct PointSchouten {
  double a11 = 0, a12 = 0, a22 = 0;
  EigenPair eig;
};

PointSchouten schouten_flat_at(const std::function<double(Vec2)>& u, Vec2 x, double fd_h);
// `u` given in chart coordinates of `chart`.
PointSchouten schouten_sphere_at(const std::function<double(Vec2)>& u, Vec2 x, double fd_h);

// --- Divergence / Codazzi diagnostics (identities w.r.t. g_u) ---------------

struct DivergenceReport {
  // Per chart: components b=1,2 of ∇_a T₁(g_u⁻¹A)^a_b at every node.
  std::vector<double> north_b1, north_b2, south_b1, south_b2;
  double sup_owned = 0; // over nodes with |x| ≤ 1, boundary ring excluded
};
DivergenceReport divergence_newton(const SphereField& u);

struct CodazziReport {
  // Residuals ∇₁A_a2 − ∇₂A_a1 for a = 1,2, per chart.
  std::vector<double> north_r1, north_r2, south_r1, south_r2;
  double sup_owned = 0;
};
CodazziReport codazzi_residual(const SphereField& u);

} // namespace sigma2
