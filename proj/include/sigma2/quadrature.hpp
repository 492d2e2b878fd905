#pragma once

// Sphere quadrature: trapezoid rule on both chart squares with the C²
// partition of unity folded into the weights,
//
//     ∫_{S²} f dV_g ≈ Σ_charts Σ_nodes w(|x|) e^{φ(x)} h² f(node).
//
// Because the PoU vanishes identically before the square boundary (w = 0 for
// |x| ≥ R), the trapezoid boundary corrections vanish and the rule is plain
// h²-weighted summation; with a C² blend the observed order is ≥ 2. Sums are
// compensated and deterministically blocked (kernels::block_sum), so results
// are bit-stable across runs and thread counts.

#include "sigma2/grid.hpp"

namespace sigma2 {

class SphereQuadrature {
public:
  explicit SphereQuadrature(const GridSpec& spec);

  const GridSpec& spec() const { return spec_; }
  // Node weights (identical on both charts: they depend only on |x|).
  const std::vector<double>& weights() const { return w_; }

  double integrate(const SphereField& f) const;
  double integrate_charts(const std::vector<double>& north,
                          const std::vector<double>& south) const;

  // ∫ f · e^{u} dV_g — the conformal measure showing up in the Kazdan–Warner
  // integrals (dV_{g_u} = e^u dV_g in this normalization).
  double integrate_weighted_exp(const SphereField& f, const SphereField& u) const;

  double area() const; // ∫ 1 dV_g, for sanity checks

private:
  GridSpec spec_;
  std::vector<double> w_;
};

} // namespace sigma2
