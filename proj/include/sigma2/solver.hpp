#pragma once

// The σ₂ = K solver on the round sphere.
//
// Unknown: a conformal exponent u (scalar sphere field, two-chart samples)
// with g_u = e^u·g_round. In each stereographic chart the equation
// σ₂(g_u⁻¹A_{g_u}) = K becomes the determinant form
//
//     F(u) = det(A_ij(u)) − K·e^{2(u+φ)} = 0,
//
// polynomial in the derivatives of u, and the admissibility cone λ ∈ Γ₂ is
// exactly A ≻ 0. The exact linearization of det along T₁ (adjugate) reads
//
//     δF = T₁(A) : δA(δu) − 2K e^{2(u+φ)} δu,
//
// a 9-point stencil once the same centered differences are used for δA as for
// A. At u ≡ 0, K ≡ 1 this reduces to −e^φ Δ_chart δu − 2e^{2φ} δu (the
// first-order Christoffel terms cancel in the trace pair Γ¹₁₁+Γ¹₂₂ = 0 =
// Γ²₁₁+Γ²₂₂; the constant-direction image is −2e^{2φ}, the exact derivative
// of −Ke^{2(u+φ)} in u, since constant δu leaves A unchanged).
//
// Solver structure:
//   * Curvature homotopy K_μ = μK + (1−μ)/4. At μ = 0 the solution is the
//     constant u = ln 2 (σ₂ of e^{ln 2}g is 1/4); μ is stepped adaptively
//     toward 1.
//   * Each μ-stage runs a damped Newton iteration. The two charts' linearized
//     equations are assembled into one sparse system — exact 9-point rows at
//     interior nodes plus boundary-ring rows that tie each ring value to the
//     4×4 interpolation of the partner chart at x/|x|² (with a consistency-
//     healing right-hand side) — and solved by a sparse direct factorization,
//     so every step is a true Newton direction and a full step leaves the two
//     charts exactly consistent on the boundary rings (interior overlap
//     agreement then holds to discretization error; nothing is blended, which
//     would re-inject overlap mismatch scaled by the 1/h² stencils).
//   * The line search accepts a step only when the sup-residual strictly
//     decreases AND every owned node keeps min-eig(A) ≥ ε_cone·e^{u+φ}
//     (iterates never leave the ellipticity cone). Step underflow or the
//     iteration cap produce an honest nonconverged state, never a fake one.
//   * Initial guesses come from the reduced center-of-mass map
//     G(ξ) = ∫ K(ψ⁻¹(z))·z dV(z), ξ ∈ B³, where ψ is the Möbius map
//     concentrating at P = ξ/|ξ| with scale t = (1−|ξ|)⁻¹. Zeros of G mark
//     bubble positions/concentrations compatible with K; the degree of G on
//     B_{0.9} (finite-dimensional index of the problem) is cross-checked
//     against the critical-point census: deg(G) = −1 + deg(∇K, Crit₋).
//   * When continuation stalls, blow-up diagnostics are computed: peak
//     location/height, the concentration constant (least C with
//     u ≤ −2 ln d_g(·, peak) + C), the planar decay constant in the
//     peak-centered chart (least C with u(y) ≤ C − u(0) − 4 ln|y| on
//     0 < |y| ≤ 1/2), and a least-squares bubble fit to the rescaled profile.
//
// Bubble-fit convention: the profile fitted over |z| ≤ 10 is the rescaled
// *conformal exponent* of the metric in the peak-centered chart,
//     p(z) = (u+φ)(z/λ) − (u+φ)(0),   λ = e^{u(peak)/2},
// against the model −2 ln(1 + a²|z−x₀|²) + 2 ln(1 + a²|x₀|²). A pure Möbius
// pullback is then an exact fixed point with a* = 1, x₀* = 0 at every scale
// (u alone differs from the bubble by the background chart factor φ, which
// only becomes negligible in the rescaled limit; including it makes the fit
// exact at finite scale too, so fit residuals measure genuine shape error).

#include <string>
#include <vector>

#include "sigma2/grid.hpp"
#include "sigma2/identities.hpp"
#include "sigma2/kfield.hpp"

namespace sigma2 {

struct SolveOptions {
  double newton_tol = 1e-10; // residual sup-norm, relative to 1 + rhs scale
  int max_iters = 30;
  double cone_eps = 1e-8;  // accepted iterates keep min-eig(A) ≥ cone_eps·e^{u+φ}
  double min_step = 1e-12; // line-search backtracking underflow ⇒ nonconvergence
  double mu_start = 0.05;  // first homotopy stage
  double mu_min_step = 1e-5; // continuation step underflow ⇒ stalled
  int latch_iters = 300;     // Newton cap for continuation stages: latching the
                             // branch near μ ≈ 0 and the first doublings after
                             // it travel far along the soft concentration mode
                             // in short damped steps; max_iters stays the cap
                             // for standalone solves
  double min_peak_cells = 4.0; // resolution trust gate for continuation stages:
                               // a converged stage whose peak half-height disk
                               // has area-equivalent radius below this many grid
                               // cells is rejected as under-resolved (the grid
                               // supports spurious bubbles ~2–3 cells wide whose
                               // truncation error fakes solvability)
  GridSpec grid = default_grid();
};

// K_μ = μ·K + (1−μ)/4, exact within the quadratic-polynomial class.
KField homotopy_field(const KField& K, double mu);

// --- Residual -----------------------------------------------------------------

struct ResidualReport {
  SphereField F;                // det(A) − K_μ e^{2(u+φ)} at every node
  double sup_owned = 0;         // sup |F| over owned nodes (|x| ≤ 1, both charts)
  double rhs_scale = 0;         // sup |K_μ e^{2(u+φ)}| over owned nodes
  double cone_fraction = 0;     // fraction of owned nodes with min-eig(A) ≥ eps·e^{u+φ}
  double min_margin = 0;        // min over owned nodes of λ₁(A/e^{u+φ})
};

// Assembles the determinant-form residual with cone census attached.
// Preconditions: the two charts agree on the overlap (transition residual
// < 10h², InputError "inconsistent-overlap" otherwise); all exponentials
// finite (NumericsError "residual-overflow" otherwise).
ResidualReport residual(const SphereField& u, const KField& K, double mu,
                        double cone_eps = 1e-8);

// Action of the exact Jacobian δu ↦ T₁(A):δA(δu) − 2K_μe^{2(u+φ)}δu at
// interior nodes of each chart (outer ring set to 0; those rows carry
// cross-chart boundary data in the solver, not the operator). Refuses to
// linearize outside the cone: DomainError "cone-violation" unless every owned
// node has min-eig(A) ≥ cone_eps·e^{u+φ}.
SphereField apply_linearized(const SphereField& u, const KField& K, double mu,
                             const SphereField& du, double cone_eps = 1e-8);

// --- Newton / continuation -----------------------------------------------------

struct ContinuationState {
  double mu = 0;
  SphereField u;
  bool converged = false;
  int iters = 0;
  double residual_sup = 0; // sup-norm over owned nodes at exit
  double tol_used = 0;     // newton_tol·(1 + rhs_scale)
  double rhs_scale = 0;
  double max_u = 0;     // signed max over owned nodes
  double sup_abs_u = 0; // monitored C⁰ norm
  double min_margin = 0;
  double cone_fraction = 0;
  KWReport kw;          // six conformal-Killing integrals (recorded along
                        // continuation; pure truncation error for any u)
  std::string note;     // empty when converged; otherwise "damping-underflow",
                        // "iteration-cap", …
};

// One damped-Newton stage at fixed μ. u0 must be admissible (cone interior,
// DomainError "cone-violation" otherwise) and chart-consistent. Never throws
// on nonconvergence: inspect .converged / .note.
ContinuationState newton_solve(const KField& K, double mu, const SphereField& u0,
                               const SolveOptions& opts);

// --- Reduced center-of-mass map -------------------------------------------------

struct ReducedMapSample {
  Vec3 xi{0, 0, 0};
  Vec3 G{0, 0, 0};
  double jac[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}}; // centered-FD Jacobian
};

// G(ξ) = ∫ K(ψ_{P,t}⁻¹(z))·z dV(z), P = ξ/|ξ|, t = (1−|ξ|)⁻¹ (identity map at
// ξ = 0). Requires |ξ| < 1 − 1e−6 (InputError "reduced-map-domain": the map
// degenerates at the boundary). Constant K gives G ≡ 0 (odd moment).
Vec3 reduced_map_G(const KField& K, Vec3 xi, const GridSpec& spec);

// G together with its centered finite-difference Jacobian (step 1e-5).
ReducedMapSample reduced_map_sample(const KField& K, Vec3 xi, const GridSpec& spec);

// Newton zero search from a deterministic seed lattice filling B_radius;
// converged zeros (|G| below 1e-9 scale) deduplicated. Constant K returns
// empty (the map vanishes identically; every point is a non-isolated zero).
std::vector<ReducedMapSample> reduced_map_zeros(const KField& K, const GridSpec& spec,
                                                double radius = 0.9);

// deg(G, B_radius, 0) as the sign-sum of FD-Jacobian determinants over the
// located zeros. NumericsError "degenerate-zero" when a located zero has a
// near-singular Jacobian (sign unreliable). Constant K: InputError (degree
// undefined for the identically-zero map).
int reduced_map_degree(const KField& K, const GridSpec& spec, double radius = 0.9);

// The pure Möbius conformal factor concentrated at P = ξ/|ξ| with scale
// t = (1−|ξ|)⁻¹: the canonical initial guess attached to a zero of G.
// ξ = 0 gives u ≡ 0. σ₂ ≡ 1 on it exactly; cone-interior by construction.
SphereField bubble_initial_guess(Vec3 xi, const GridSpec& spec);

// --- Blow-up diagnostics ---------------------------------------------------------

struct BlowupDiagnostics {
  Vec3 peak{0, 0, -1};
  double peak_height = 0;
  double conc_C = 0;  // least C:  u ≤ −2 ln d_g(·, peak) + C   (owned nodes)
  double decay_C = 0; // least C:  u(y) ≤ C − u(0) − 4 ln|y|,  0 < |y| ≤ 1/2,
                      // in the peak-centered chart
  double bubble_a = 1;         // fitted bubble scale (exact Möbius pullback → 1)
  Vec2 bubble_x{0, 0};         // fitted center offset in rescaled coordinates
  double bubble_residual = 0;  // rms misfit of the profile over |z| ≤ 10
  bool multi_peak = false;     // a second local max within 1 of the global max
  int peaks_found = 1;         // count of comparable peak clusters
};

BlowupDiagnostics blowup_diagnose(const SphereField& u);

// --- Homotopy driver -------------------------------------------------------------

struct HomotopyAttempt {
  double mu = 0;
  bool accepted = false;
  int iters = 0;
  double residual = 0;
  double max_u = 0;
  double min_margin = 0;
  std::string note; // "" | Newton's failure note | "under-resolved" when a
                    // converged stage was rejected by the resolution gate
};

struct HomotopyRun {
  std::vector<ContinuationState> path; // accepted states, μ strictly increasing
  std::vector<HomotopyAttempt> attempts; // every trial, accepted or not
  bool reached_one = false;
  double stalled_mu = 0;  // last accepted μ when !reached_one
  Vec3 seed_xi{0, 0, 0};  // reduced-map zero used for the initial bubble
  bool seed_from_zero = false;
  BlowupDiagnostics diag; // filled when stalled (valid iff has_diag)
  bool has_diag = false;
};

// Adaptive continuation from μ = mu_start to 1: step ×1.5 after a ≤3-iteration
// success, halved after a failure, underflow below mu_min_step ⇒ stall with
// blow-up diagnostics of the last accepted state (of the furthest Newton
// iterate when nothing was accepted). Initial guess: the bubble at the
// smallest-|ξ| zero of G (zero profile when K is constant or no zero exists)
// plus the curvature-matched constant −½·ln K̄_μ. Failed attempts leave their
// terminal iterate as a candidate warm start for the retry (chosen by measured
// residual), so the driver can ladder down in μ to latch the branch and climb
// back. Converged stages narrower than min_peak_cells are rejected as
// under-resolved; kw_check and the cone census are recorded on every accepted
// state.
HomotopyRun homotopy_continue(const KField& K, const SolveOptions& opts);

} // namespace sigma2
