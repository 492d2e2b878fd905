#pragma once

// Hot per-node kernels.
//
// Every kernel exists twice with identical scalar arithmetic:
//   sigma2::kernels::…          — OpenMP-parallel loops (the production path)
//   sigma2::kernels::serial::…  — plain serial loops, kept as the reference
//                                 implementation for tests and benchmarks
//
// Both paths are bit-for-bit deterministic: per-node maps write disjoint
// slots, and reductions use fixed 4096-element blocks (Kahan-compensated
// within a block, blocks combined in index order), so results do not depend
// on scheduling or thread count. tools/bench_kernels.cpp times one against
// the other; tests/test_kernels_ref.cpp asserts exact equality.
//
// Finite differences are O(h²) everywhere: 3-point centered stencils in the
// interior, shifted one-sided stencils at chart edges (3-point for first
// derivatives, 4-point for second). The mixed derivative is D₁ applied to the
// D₂ field, which reproduces the standard 4-point cross stencil at interior
// nodes and stays O(h²) at edges.

#include <cstddef>
#include <vector>

#include "sigma2/grid.hpp"

namespace sigma2::kernels {

struct DerivFields {
  std::vector<double> d1, d2, d11, d22, d12;
  void resize(size_t n) {
    d1.assign(n, 0);
    d2.assign(n, 0);
    d11.assign(n, 0);
    d22.assign(n, 0);
    d12.assign(n, 0);
  }
};

// Schouten-type curvature data of the conformal metric at every node of one
// chart. `a??` are the components of
//     A = −∇²u + Γ(∇u) + ½ du⊗du − ¼|∇u|² I + e^φ I      (round background)
//     A = −∇²u          + ½ du⊗du − ¼|∇u|² I             (flat background)
// and lam1 ≤ lam2 are the eigenvalues of the metric-normalized endomorphism
// A / e^{u+φ} (round) or A / e^{u} (flat), with sig1 = λ₁+λ₂ (trace) and
// sig2 = λ₁λ₂ (determinant, computed directly from A for accuracy).
struct SchoutenField {
  std::vector<double> a11, a12, a22;
  std::vector<double> lam1, lam2, sig1, sig2;
  void resize(size_t n) {
    a11.assign(n, 0);
    a12.assign(n, 0);
    a22.assign(n, 0);
    lam1.assign(n, 0);
    lam2.assign(n, 0);
    sig1.assign(n, 0);
    sig2.assign(n, 0);
  }
};

// Per-node scalar pieces shared verbatim by the parallel and serial paths.
inline void schouten_node_round(double u1, double u2, double u11, double u12, double u22,
                                double phi1, double phi2, double ephi, double& A11, double& A12,
                                double& A22) {
  const double gradsq = u1 * u1 + u2 * u2;
  A11 = -u11 + 0.5 * (phi1 * u1 - phi2 * u2) + 0.5 * u1 * u1 - 0.25 * gradsq + ephi;
  A12 = -u12 + 0.5 * (phi2 * u1 + phi1 * u2) + 0.5 * u1 * u2;
  A22 = -u22 + 0.5 * (-phi1 * u1 + phi2 * u2) + 0.5 * u2 * u2 - 0.25 * gradsq + ephi;
}

inline void schouten_node_flat(double u1, double u2, double u11, double u12, double u22,
                               double& A11, double& A12, double& A22) {
  A11 = -u11 + 0.25 * (u1 * u1 - u2 * u2);
  A12 = -u12 + 0.5 * u1 * u2;
  A22 = -u22 + 0.25 * (u2 * u2 - u1 * u1);
}

// Ascending eigenvalues of the symmetric matrix [a b; b c].
inline void sym_eigen(double a, double b, double c, double& lo, double& hi) {
  const double mid = 0.5 * (a + c);
  const double off = 0.5 * (a - c);
  const double d = std::sqrt(off * off + b * b);
  lo = mid - d;
  hi = mid + d;
}

// ---- OpenMP-parallel kernels ----------------------------------------------

// 1-D derivative fields of a chart sample (nx × ny rectangle, spacing h).
void derivative_fields(const double* u, int nx, int ny, double h, DerivFields& out);

// Assemble Schouten data on one chart of the round sphere.
void schouten_sphere_chart(const GridSpec& g, const std::vector<double>& u, SchoutenField& out);

// Assemble Schouten data on a flat rectangle.
void schouten_flat_grid(const PlanarGrid& g, const std::vector<double>& u, SchoutenField& out);

// Deterministic compensated sum: fixed 4096-element blocks, Kahan within a
// block, blocks combined in order.
double block_sum(const double* v, size_t n);
inline double block_sum(const std::vector<double>& v) { return block_sum(v.data(), v.size()); }

// ---- Serial reference implementations --------------------------------------

namespace serial {
void derivative_fields(const double* u, int nx, int ny, double h, DerivFields& out);
void schouten_sphere_chart(const GridSpec& g, const std::vector<double>& u, SchoutenField& out);
void schouten_flat_grid(const PlanarGrid& g, const std::vector<double>& u, SchoutenField& out);
double block_sum(const double* v, size_t n);
} // namespace serial

} // namespace sigma2::kernels
