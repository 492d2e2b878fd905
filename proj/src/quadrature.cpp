#include "sigma2/quadrature.hpp"

#include <cmath>

#include "sigma2/kernels.hpp"

namespace sigma2 {

SphereQuadrature::SphereQuadrature(const GridSpec& spec) : spec_(spec) {
  w_.assign(spec.num_nodes(), 0.0);
  const double h2 = spec.h * spec.h;
#pragma omp parallel for schedule(static)
  for (int j = 0; j < spec.n; ++j)
    for (int i = 0; i < spec.n; ++i) {
      const Vec2 x = spec.node(i, j);
      const double w = pou_weight(x.norm(), spec.R);
      w_[spec.idx(i, j)] = w <= 0.0 ? 0.0 : w * conformal_factor(x) * h2;
    }
}

double SphereQuadrature::integrate_charts(const std::vector<double>& north,
                                          const std::vector<double>& south) const {
  if (north.size() != w_.size() || south.size() != w_.size())
    throw InputError("grid-mismatch", "quadrature and field grids are inconsistent");
  std::vector<double> prod(2 * w_.size());
  const size_t nn = w_.size();
#pragma omp parallel for schedule(static)
  for (long long k = 0; k < static_cast<long long>(nn); ++k) {
    prod[k] = w_[k] * north[k];
    prod[nn + k] = w_[k] * south[k];
  }
  return kernels::block_sum(prod);
}

double SphereQuadrature::integrate(const SphereField& f) const {
  if (!f.spec().same_as(spec_))
    throw InputError("grid-mismatch", "quadrature and field grids are inconsistent");
  return integrate_charts(f.chart(ChartId::North), f.chart(ChartId::South));
}

double SphereQuadrature::integrate_weighted_exp(const SphereField& f,
                                                const SphereField& u) const {
  if (!f.spec().same_as(spec_) || !u.spec().same_as(spec_))
    throw InputError("grid-mismatch", "quadrature and field grids are inconsistent");
  const size_t nn = w_.size();
  std::vector<double> prod(2 * nn);
  const auto& fn = f.chart(ChartId::North);
  const auto& fs = f.chart(ChartId::South);
  const auto& un = u.chart(ChartId::North);
  const auto& us = u.chart(ChartId::South);
#pragma omp parallel for schedule(static)
  for (long long k = 0; k < static_cast<long long>(nn); ++k) {
    prod[k] = w_[k] * fn[k] * std::exp(un[k]);
    prod[nn + k] = w_[k] * fs[k] * std::exp(us[k]);
  }
  return kernels::block_sum(prod);
}

double SphereQuadrature::area() const {
  std::vector<double> ones(w_.size(), 1.0);
  return integrate_charts(ones, ones);
}

} // namespace sigma2
