#include "sigma2/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace sigma2::kernels {

namespace detail {

// Derivative along a strided direction at index i (0..nlast), O(h²):
// centered inside, shifted one-sided at the ends.
inline double d1_at(const double* v, int stride, int i, int nlast, double h) {
  if (i == 0) return (-3.0 * v[0] + 4.0 * v[stride] - v[2 * stride]) / (2.0 * h);
  if (i == nlast)
    return (3.0 * v[i * stride] - 4.0 * v[(i - 1) * stride] + v[(i - 2) * stride]) / (2.0 * h);
  return (v[(i + 1) * stride] - v[(i - 1) * stride]) / (2.0 * h);
}

inline double d2_at(const double* v, int stride, int i, int nlast, double h) {
  const double h2 = h * h;
  if (i == 0) return (2.0 * v[0] - 5.0 * v[stride] + 4.0 * v[2 * stride] - v[3 * stride]) / h2;
  if (i == nlast)
    return (2.0 * v[i * stride] - 5.0 * v[(i - 1) * stride] + 4.0 * v[(i - 2) * stride] -
            v[(i - 3) * stride]) /
           h2;
  return (v[(i + 1) * stride] - 2.0 * v[i * stride] + v[(i - 1) * stride]) / h2;
}

// One row (fixed j) of the x-direction derivative fields.
inline void deriv_row_x(const double* u, int nx, int j, double h, double* d1, double* d11) {
  const double* row = u + static_cast<size_t>(j) * nx;
  double* o1 = d1 + static_cast<size_t>(j) * nx;
  double* o11 = d11 + static_cast<size_t>(j) * nx;
  for (int i = 0; i < nx; ++i) {
    o1[i] = d1_at(row, 1, i, nx - 1, h);
    o11[i] = d2_at(row, 1, i, nx - 1, h);
  }
}

// One column (fixed i) of the y-direction derivative fields.
inline void deriv_col_y(const double* u, int nx, int ny, int i, double h, double* d2,
                        double* d22) {
  const double* col = u + i;
  for (int j = 0; j < ny; ++j) {
    d2[static_cast<size_t>(j) * nx + i] = d1_at(col, nx, j, ny - 1, h);
    d22[static_cast<size_t>(j) * nx + i] = d2_at(col, nx, j, ny - 1, h);
  }
}

// One row of the mixed derivative: D₁ applied to the D₂ field.
inline void deriv_row_mixed(const double* d2field, int nx, int j, double h, double* d12) {
  const double* row = d2field + static_cast<size_t>(j) * nx;
  double* out = d12 + static_cast<size_t>(j) * nx;
  for (int i = 0; i < nx; ++i) out[i] = d1_at(row, 1, i, nx - 1, h);
}

// Full Schouten data for one node of the round-sphere chart, given derivatives.
inline void schouten_sphere_node(const GridSpec& g, const std::vector<double>& u,
                                 const DerivFields& d, int i, int j, SchoutenField& out) {
  const int k = g.idx(i, j);
  const Vec2 x = g.node(i, j);
  const Vec2 dphi = conformal_phi_grad(x);
  const double ephi = conformal_factor(x);
  double A11, A12, A22;
  schouten_node_round(d.d1[k], d.d2[k], d.d11[k], d.d12[k], d.d22[k], dphi.x, dphi.y, ephi, A11,
                      A12, A22);
  out.a11[k] = A11;
  out.a12[k] = A12;
  out.a22[k] = A22;
  const double inv_m = std::exp(-(u[k] + conformal_phi(x)));
  double lo, hi;
  sym_eigen(A11 * inv_m, A12 * inv_m, A22 * inv_m, lo, hi);
  out.lam1[k] = lo;
  out.lam2[k] = hi;
  out.sig1[k] = (A11 + A22) * inv_m;
  out.sig2[k] = (A11 * A22 - A12 * A12) * inv_m * inv_m;
}

inline void schouten_flat_node(const PlanarGrid& g, const std::vector<double>& u,
                               const DerivFields& d, int i, int j, SchoutenField& out) {
  const int k = g.idx(i, j);
  double A11, A12, A22;
  schouten_node_flat(d.d1[k], d.d2[k], d.d11[k], d.d12[k], d.d22[k], A11, A12, A22);
  out.a11[k] = A11;
  out.a12[k] = A12;
  out.a22[k] = A22;
  const double inv_m = std::exp(-u[k]);
  double lo, hi;
  sym_eigen(A11 * inv_m, A12 * inv_m, A22 * inv_m, lo, hi);
  out.lam1[k] = lo;
  out.lam2[k] = hi;
  out.sig1[k] = (A11 + A22) * inv_m;
  out.sig2[k] = (A11 * A22 - A12 * A12) * inv_m * inv_m;
}

constexpr size_t kBlock = 4096;

inline double kahan(const double* v, size_t m) {
  double s = 0, c = 0;
  for (size_t i = 0; i < m; ++i) {
    const double y = v[i] - c;
    const double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return s;
}

} // namespace detail

// ---- OpenMP-parallel path ---------------------------------------------------

void derivative_fields(const double* u, int nx, int ny, double h, DerivFields& out) {
  out.resize(static_cast<size_t>(nx) * ny);
#pragma omp parallel for schedule(static)
  for (int j = 0; j < ny; ++j) detail::deriv_row_x(u, nx, j, h, out.d1.data(), out.d11.data());
#pragma omp parallel for schedule(static)
  for (int i = 0; i < nx; ++i)
    detail::deriv_col_y(u, nx, ny, i, h, out.d2.data(), out.d22.data());
#pragma omp parallel for schedule(static)
  for (int j = 0; j < ny; ++j) detail::deriv_row_mixed(out.d2.data(), nx, j, h, out.d12.data());
}

void schouten_sphere_chart(const GridSpec& g, const std::vector<double>& u, SchoutenField& out) {
  DerivFields d;
  derivative_fields(u.data(), g.n, g.n, g.h, d);
  out.resize(u.size());
#pragma omp parallel for schedule(static)
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i) detail::schouten_sphere_node(g, u, d, i, j, out);
}

void schouten_flat_grid(const PlanarGrid& g, const std::vector<double>& u, SchoutenField& out) {
  DerivFields d;
  derivative_fields(u.data(), g.nx, g.ny, g.h, d);
  out.resize(u.size());
#pragma omp parallel for schedule(static)
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) detail::schouten_flat_node(g, u, d, i, j, out);
}

double block_sum(const double* v, size_t n) {
  if (n == 0) return 0;
  const size_t nb = (n + detail::kBlock - 1) / detail::kBlock;
  std::vector<double> partial(nb);
#pragma omp parallel for schedule(static)
  for (long long b = 0; b < static_cast<long long>(nb); ++b) {
    const size_t lo = static_cast<size_t>(b) * detail::kBlock;
    partial[b] = detail::kahan(v + lo, std::min(detail::kBlock, n - lo));
  }
  return detail::kahan(partial.data(), nb);
}

// ---- Serial reference path (no OpenMP constructs at all) --------------------

namespace serial {

void derivative_fields(const double* u, int nx, int ny, double h, DerivFields& out) {
  out.resize(static_cast<size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j) detail::deriv_row_x(u, nx, j, h, out.d1.data(), out.d11.data());
  for (int i = 0; i < nx; ++i)
    detail::deriv_col_y(u, nx, ny, i, h, out.d2.data(), out.d22.data());
  for (int j = 0; j < ny; ++j) detail::deriv_row_mixed(out.d2.data(), nx, j, h, out.d12.data());
}

void schouten_sphere_chart(const GridSpec& g, const std::vector<double>& u, SchoutenField& out) {
  DerivFields d;
  serial::derivative_fields(u.data(), g.n, g.n, g.h, d);
  out.resize(u.size());
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i) detail::schouten_sphere_node(g, u, d, i, j, out);
}

void schouten_flat_grid(const PlanarGrid& g, const std::vector<double>& u, SchoutenField& out) {
  DerivFields d;
  serial::derivative_fields(u.data(), g.nx, g.ny, g.h, d);
  out.resize(u.size());
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) detail::schouten_flat_node(g, u, d, i, j, out);
}

double block_sum(const double* v, size_t n) {
  if (n == 0) return 0;
  const size_t nb = (n + detail::kBlock - 1) / detail::kBlock;
  std::vector<double> partial(nb);
  for (size_t b = 0; b < nb; ++b) {
    const size_t lo = b * detail::kBlock;
    partial[b] = detail::kahan(v + lo, std::min(detail::kBlock, n - lo));
  }
  return detail::kahan(partial.data(), nb);
}

} // namespace serial

} // namespace sigma2::kernels
