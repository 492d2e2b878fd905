#pragma once

// Conformal Killing fields of the round sphere and the integral identities
// they generate.
//
// Basis of the 6-dimensional conformal algebra of S²:
//   rotations            rot_i(z) = e_i × z
//   conformal gradients  conf_i(z) = ∇_g z_i = e_i − z_i z
// All six are tangent (X·z = 0 identically).
//
// For every smooth conformal factor u — solution or not — the curvature
// quantity σ₂ of the conformal metric satisfies the vanishing identity
//
//     ∫_{S²} X(σ₂) e^u dV_g = 0        for every conformal Killing field X,
//
// so the discretized integrals are pure truncation error and must decay at
// O(h²). kw_check assembles them; kw_check_study fits the decay order.
//
// kw_obstruction searches the basis span for a field X with X(K) ≥ 0
// everywhere and X(K) > δ on ≥ 1% of the sphere. Such a single-signed
// directional derivative certifies that no conformal metric can realize K as
// its σ₂-curvature (no positive density can annihilate ∫ X(K) e^u dV).  The
// test is sufficient-only: failure to find a witness is reported as
// "inconclusive", never as "condition satisfied".
//
// planar_kw_moments evaluates the chart-plane moment quantities used in the
// concentration analysis: truncated integrals of ∇K̃ and coordinate moments
// against the conformal density e^u.

#include <array>
#include <functional>
#include <vector>

#include "sigma2/geometry.hpp"
#include "sigma2/grid.hpp"
#include "sigma2/kfield.hpp"

namespace sigma2 {

enum class KillingTag { Rot1, Rot2, Rot3, Conf1, Conf2, Conf3 };

inline constexpr std::array<KillingTag, 6> killing_basis = {
    KillingTag::Rot1,  KillingTag::Rot2,  KillingTag::Rot3,
    KillingTag::Conf1, KillingTag::Conf2, KillingTag::Conf3};

const char* killing_name(KillingTag tag); // "rot1" … "conf3"

// Tangent vector of the basis field at a sphere point.
Vec3 killing_eval(KillingTag tag, const Vec3& z);

// Chart components of a tangent vector X at the sphere point over chart
// coordinate x: the unique v ∈ ℝ² with dz(v) = X (dz = differential of
// stereo_to_sphere). Used to turn ambient directional derivatives into chart
// finite differences and back.
Vec2 chart_vector(ChartId chart, Vec2 x, const Vec3& X);

struct KWReport {
  double h = 0;
  // Basis order: rot1, rot2, rot3, conf1, conf2, conf3.
  std::array<double, 6> integrals{};
  // λ(A) left the closed half-cone Γ̄₁ (trace < 0) somewhere; the integrals
  // are still computed, the flag marks them as geometrically suspect.
  bool cone_warning = false;
  double max_abs() const;
};

KWReport kw_check(const SphereField& u);

struct KWStudy {
  std::vector<KWReport> levels; // coarsest first; h halves per level
  double order = 0;             // least-squares slope of ln(max entry) vs ln h
  bool below_floor = false;     // every level < 1e−12: identities hold to
                                // rounding and the order fit is meaningless
};

KWStudy kw_check_study(const std::function<double(const Vec3&)>& u, GridSpec coarsest,
                       int nlevels = 3);

struct ObstructionReport {
  bool violated = false;
  // Coefficients of the witness in the basis order above (unit vector).
  std::array<double, 6> witness{};
  // min over the sphere sample of X(K̂) for the best X found, where K̂ is K
  // rescaled to unit gradient_scale (the verdict is then invariant under
  // K → cK, c > 0).
  double min_directional = 0;
  // Fraction of sphere area with X(K̂) > delta.
  double positive_fraction = 0;
  double delta = 0; // threshold actually used
};

ObstructionReport kw_obstruction(const KField& K);

struct PlanarMoments {
  double I1 = 0, I2 = 0;             // ∫_{|y|≤r0} ∂_l K̃ e^u dy
  double J = 0;                      // ∫_{|y|≤r0} y·∇K̃ e^u dy
  double M = 0;                      // ∫_{|y|≤r0} e^u dy
  double mu1 = 0, mu2 = 0;           // first moments / M
  double mu11 = 0, mu12 = 0, mu22 = 0; // second moments / M (symmetric)
  double r0 = 0;
};

// grad_Kt is the (analytic) gradient of the planar curvature field K̃ — the
// integrals consume nothing else of K̃. The disk |y| ≤ r0 has to fit inside
// the grid rectangle (InputError otherwise).
PlanarMoments planar_kw_moments(const PlanarField& u, const std::function<Vec2(Vec2)>& grad_Kt,
                                double r0);

} // namespace sigma2
