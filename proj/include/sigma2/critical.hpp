#pragma once
// Critical-point census and degree bookkeeping for smooth fields K on S².
//
// The census partitions the critical set by the sign of the Laplace–Beltrami
// value: Crit₋ = {∇_g K = 0, Δ_g K < 0} and Crit₊ = {∇_g K = 0, Δ_g K > 0}.
// For a Morse field the Brouwer degree of ∇K over Crit₋ reduces to the sum
//
//     deg_minus = Σ_{x ∈ Crit₋} (−1)^{index(x)},
//
// and the existence indicator −1 + deg_minus decides whether the curvature
// problem is guaranteed solvable for this K (indicator ≠ 0) or sits in the
// regime where obstructions are possible (indicator = 0).  Poincaré–Hopf
// (Σ over all critical points of (−1)^index = χ(S²) = 2) is used as a
// completeness cross-check on the census.
//
// Numerical contract:
//   - Newton iteration runs on the chart-coordinate gradient of K∘chart,
//     evaluated exactly by the chain rule through the stereographic chart;
//     the Jacobian is a centered finite difference of that exact gradient.
//   - Seeds are all grid-local minima of the squared intrinsic gradient
//     norm |∇K|²_g over the owned region of both charts, so every zero of
//     the gradient (extremum or saddle) attracts at least one seed.
//   - Converged points closer than 3h in geodesic distance are merged.
//   - Completeness is certified per cell: every cell across which both
//     gradient components change sign must end up within the merge radius
//     of a converged point, else the census reports an unresolved region.
//   - Δ_g K is evaluated through the conformal-chart identity
//     Δ_g K = e^{−φ}(∂₁₁ + ∂₂₂)(K∘chart) = trace of the chart Hessian
//     over the conformal factor.
//   - Hessian eigenvalues are reported in an orthonormal tangent frame
//     (chart Hessian / e^φ), which is the intrinsic covariant Hessian at a
//     critical point; the Morse index is the number of negative eigenvalues.

#include <string>
#include <vector>

#include "sigma2/geometry.hpp"
#include "sigma2/grid.hpp"
#include "sigma2/kfield.hpp"

namespace sigma2 {

enum class CritClass { Plus, Minus };

inline const char* crit_class_name(CritClass c) {
  return c == CritClass::Minus ? "minus" : "plus";
}

struct CriticalPoint {
  Vec3 z;                  // location on the unit sphere
  double grad_residual;    // |∇K|_g at z after Newton (should be ~machine eps)
  double hess_eig[2];      // intrinsic Hessian eigenvalues, ascending
  double lap_K;            // Δ_g K at z (sum of the intrinsic eigenvalues)
  CritClass cls;           // Minus iff lap_K < 0
  int index;               // Morse index: number of negative Hessian eigenvalues
  double hess_det;         // product of the intrinsic eigenvalues
};

struct CriticalCensus {
  std::vector<CriticalPoint> points;
  // True when a sign-change cell — a grid cell across which *both* chart
  // gradient components change sign, the discrete certificate that a zero is
  // bracketed inside — is not covered by any converged point within the
  // merge radius.  A merely small gradient norm is not a certificate (a
  // shallow valley looks identical), so failed seeds alone never set this.
  bool unresolved = false;
  std::vector<Vec3> unresolved_at; // centers of uncovered sign-change cells
};

struct NondegeneracyReport {
  bool pass;
  double min_value;   // min over owned grid nodes of |∇K|_g + |Δ_g K|
  double threshold;   // 10 h²
  Vec3 worst;         // node attaining the minimum
};

struct DegreeReport {
  std::vector<CriticalPoint> points;
  int deg_minus;              // Σ_{Crit₋} (−1)^index
  int existence_indicator;    // −1 + deg_minus
  int poincare_hopf_total;    // Σ_all (−1)^index; must be 2 for a Morse field
  bool morse_ok;              // every point clears the Morse determinant floor
  double min_det_ratio;       // min |det Hess| / (morse_floor_factor · ‖K‖_{C²})
  std::vector<std::string> warnings;
};

// Tuning constants (documented at their point of use in the implementation).
inline constexpr double kCritNewtonTol = 1e-9;    // intrinsic-gradient stop, × (1+scale)
// Iteration cap: damped Newton from a seed deep in a curved gradient-norm
// valley crawls (clamped steps along the valley) before entering the
// quadratic basin, so the cap is sized for the crawl, not the endgame.
inline constexpr int kCritMaxIter = 200;
inline constexpr double kCritEscapeRadius = 3.0;  // chart |x| beyond which a seed is dropped
inline constexpr double kMorseFloorFactor = 1e-6; // |det Hess| floor, × ‖K‖_{C²-discrete}
inline constexpr int kCritSeedCap = 512;          // per-chart seed cap (degenerate fields)

// Exact chart-coordinate gradient of K∘chart at chart point x (covariant
// components ∂(K∘chart)/∂x_k).  Exposed for tests.
Vec2 chart_covariant_grad(const KField& K, ChartId chart, Vec2 x);

// Locate and classify the critical points of K; see the header comment for
// the algorithm.  Never throws on degenerate fields — inspect `unresolved`.
CriticalCensus find_critical_points(const KField& K, const GridSpec& spec);

// min over owned nodes (both charts) of |∇K|_g + |Δ_g K| against 10 h².
NondegeneracyReport nondegeneracy_check(const KField& K, const GridSpec& spec);

// Full degree bookkeeping.  Throws DomainError when the field fails the
// nondegeneracy check, when the census left an unresolved region, when a
// non-Morse point is found and `require_morse` is set, or when a Morse
// census violates Poincaré–Hopf (a missed point).  With `require_morse`
// false, non-Morse points are reported in `warnings` and the sums are
// computed from the (then unreliable) eigenvalue signs.
DegreeReport degree_report(const KField& K, const GridSpec& spec,
                           bool require_morse = false);

} // namespace sigma2
