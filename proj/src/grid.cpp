#include "sigma2/grid.hpp"

#include <algorithm>
#include <cmath>

namespace sigma2 {

GridSpec::GridSpec(double h_, double R_) : h(h_), R(R_) {
  if (!(h > 0) || !(R > 1.0))
    throw InputError("bad-grid", "grid requires h > 0 and R > 1");
  const double m = 2.0 * R / h;
  const long mi = std::lround(m);
  if (std::fabs(m - static_cast<double>(mi)) > 1e-9 || mi < 8)
    throw InputError("bad-grid", "2R/h must be an integer >= 8");
  n = static_cast<int>(mi) + 1;
}

bool GridSpec::same_as(const GridSpec& o) const {
  return n == o.n && std::fabs(h - o.h) < 1e-15 && std::fabs(R - o.R) < 1e-15;
}

double smootherstep(double q) {
  if (q <= 0) return 0;
  if (q >= 1) return 1;
  return q * q * q * (10.0 + q * (-15.0 + 6.0 * q));
}

double pou_weight(double r, double R) {
  if (r * R <= 1.0) return 1.0; // r <= 1/R
  if (r >= R) return 0.0;
  const double s = std::log(r) / std::log(R); // in (−1,1)
  return 1.0 - smootherstep(0.5 * (s + 1.0));
}

namespace {

// 1-D 4-point Lagrange weights at offsets {−1,0,1,2} for local coordinate
// t ∈ [0,1] measured from the second stencil node.
inline void lagrange4(double t, double w[4]) {
  w[0] = -t * (t - 1.0) * (t - 2.0) / 6.0;
  w[1] = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
  w[2] = -(t + 1.0) * t * (t - 2.0) / 2.0;
  w[3] = (t + 1.0) * t * (t - 1.0) / 6.0;
}

inline int cell_index(const GridSpec& g, double x) {
  return static_cast<int>(std::floor((x + g.R) / g.h));
}

} // namespace

bool interp_stencil_ok(const GridSpec& g, Vec2 p) {
  int i0 = cell_index(g, p.x), j0 = cell_index(g, p.y);
  // allow points sitting exactly on the last node
  if (i0 == g.n - 1 && p.x <= g.R + 1e-12) i0--;
  if (j0 == g.n - 1 && p.y <= g.R + 1e-12) j0--;
  return i0 >= 1 && i0 <= g.n - 3 && j0 >= 1 && j0 <= g.n - 3;
}

InterpStencil make_interp_stencil(const GridSpec& g, Vec2 p) {
  int i0 = cell_index(g, p.x), j0 = cell_index(g, p.y);
  if (i0 == g.n - 1 && p.x <= g.R + 1e-12) i0--;
  if (j0 == g.n - 1 && p.y <= g.R + 1e-12) j0--;
  if (i0 < 1 || i0 > g.n - 3 || j0 < 1 || j0 > g.n - 3)
    throw DomainError("outside-chart", "interpolation stencil falls outside the chart grid");
  InterpStencil s;
  s.i0 = i0;
  s.j0 = j0;
  lagrange4((p.x - g.coord(i0)) / g.h, s.wx);
  lagrange4((p.y - g.coord(j0)) / g.h, s.wy);
  return s;
}

double InterpStencil::apply(const GridSpec& g, const std::vector<double>& v) const {
  double acc = 0;
  for (int b = 0; b < 4; ++b) {
    const int row = (j0 - 1 + b) * g.n + (i0 - 1);
    const double rowv =
        wx[0] * v[row] + wx[1] * v[row + 1] + wx[2] * v[row + 2] + wx[3] * v[row + 3];
    acc += wy[b] * rowv;
  }
  return acc;
}

double interp_bicubic(const GridSpec& g, const std::vector<double>& v, Vec2 p) {
  return make_interp_stencil(g, p).apply(g, v);
}

double interp_bicubic(const PlanarGrid& g, const std::vector<double>& v, Vec2 p) {
  int i0 = static_cast<int>(std::floor((p.x - g.x0) / g.h));
  int j0 = static_cast<int>(std::floor((p.y - g.y0) / g.h));
  if (i0 == g.nx - 1 && p.x <= g.xc(g.nx - 1) + 1e-12) i0--;
  if (j0 == g.ny - 1 && p.y <= g.yc(g.ny - 1) + 1e-12) j0--;
  if (i0 < 1 || i0 > g.nx - 3 || j0 < 1 || j0 > g.ny - 3)
    throw DomainError("outside-grid", "interpolation stencil falls outside the planar grid");
  double wx[4], wy[4];
  lagrange4((p.x - g.xc(i0)) / g.h, wx);
  lagrange4((p.y - g.yc(j0)) / g.h, wy);
  double acc = 0;
  for (int b = 0; b < 4; ++b) {
    const int row = g.idx(i0 - 1, j0 - 1 + b);
    acc += wy[b] * (wx[0] * v[row] + wx[1] * v[row + 1] + wx[2] * v[row + 2] + wx[3] * v[row + 3]);
  }
  return acc;
}

double transition_value(const GridSpec& g, const std::vector<double>& src, Vec2 target,
                        FieldKind kind) {
  const double r2 = target.norm2();
  if (r2 * g.R * g.R < 1.0)
    throw DomainError("outside-chart",
                      "transition target |x| < 1/R: image lies outside the source chart");
  const Vec2 pre = chart_transition_point(target);
  double val = interp_bicubic(g, src, pre);
  if (kind == FieldKind::MetricExponent) val -= 2.0 * std::log(r2); // −4 ln|target|
  return val;
}

SphereField SphereField::sampled(const GridSpec& spec, const std::function<double(Vec3)>& f) {
  SphereField u(spec);
  for (int cid = 0; cid < 2; ++cid) {
    const ChartId c = cid == 0 ? ChartId::North : ChartId::South;
    auto& vals = u.chart(c);
#pragma omp parallel for schedule(static)
    for (int j = 0; j < spec.n; ++j)
      for (int i = 0; i < spec.n; ++i)
        vals[spec.idx(i, j)] = f(stereo_to_sphere(c, spec.node(i, j)));
  }
  return u;
}

SphereField SphereField::sampled_chartwise(const GridSpec& spec,
                                           const std::function<double(ChartId, Vec2)>& f) {
  SphereField u(spec);
  for (int cid = 0; cid < 2; ++cid) {
    const ChartId c = cid == 0 ? ChartId::North : ChartId::South;
    auto& vals = u.chart(c);
#pragma omp parallel for schedule(static)
    for (int j = 0; j < spec.n; ++j)
      for (int i = 0; i < spec.n; ++i) vals[spec.idx(i, j)] = f(c, spec.node(i, j));
  }
  return u;
}

double SphereField::eval(Vec3 z) const {
  const ChartId c = (z.z <= 0.0) ? ChartId::North : ChartId::South;
  return interp_bicubic(spec_, chart(c), sphere_to_stereo(c, z));
}

double SphereField::sup_abs_owned() const {
  double m = 0;
  for (int cid = 0; cid < 2; ++cid) {
    const ChartId c = cid == 0 ? ChartId::North : ChartId::South;
    const auto& vals = chart(c);
    for (int j = 0; j < spec_.n; ++j)
      for (int i = 0; i < spec_.n; ++i) {
        if (spec_.node(i, j).norm2() <= 1.0) m = std::max(m, std::fabs(vals[spec_.idx(i, j)]));
      }
  }
  return m;
}

double SphereField::max_owned() const {
  double m = -HUGE_VAL;
  for (int cid = 0; cid < 2; ++cid) {
    const ChartId c = cid == 0 ? ChartId::North : ChartId::South;
    const auto& vals = chart(c);
    for (int j = 0; j < spec_.n; ++j)
      for (int i = 0; i < spec_.n; ++i)
        if (spec_.node(i, j).norm2() <= 1.0) m = std::max(m, vals[spec_.idx(i, j)]);
  }
  return m;
}

Vec3 SphereField::argmax_owned() const {
  double m = -HUGE_VAL;
  Vec3 at{0, 0, -1};
  for (int cid = 0; cid < 2; ++cid) {
    const ChartId c = cid == 0 ? ChartId::North : ChartId::South;
    const auto& vals = chart(c);
    for (int j = 0; j < spec_.n; ++j)
      for (int i = 0; i < spec_.n; ++i) {
        const Vec2 x = spec_.node(i, j);
        if (x.norm2() <= 1.0 && vals[spec_.idx(i, j)] > m) {
          m = vals[spec_.idx(i, j)];
          at = stereo_to_sphere(c, x);
        }
      }
  }
  return at;
}

SphereField& SphereField::operator+=(double c) {
  for (auto& v : north_) v += c;
  for (auto& v : south_) v += c;
  return *this;
}

SphereField& SphereField::operator+=(const SphereField& o) {
  for (size_t k = 0; k < north_.size(); ++k) north_[k] += o.north_[k];
  for (size_t k = 0; k < south_.size(); ++k) south_[k] += o.south_[k];
  return *this;
}

void SphereField::axpy(double a, const SphereField& d) {
  for (size_t k = 0; k < north_.size(); ++k) north_[k] += a * d.north_[k];
  for (size_t k = 0; k < south_.size(); ++k) south_[k] += a * d.south_[k];
}

double SphereField::sup_abs_all() const {
  double m = 0;
  for (const auto& v : north_) m = std::max(m, std::fabs(v));
  for (const auto& v : south_) m = std::max(m, std::fabs(v));
  return m;
}

SphereField rotate_field(const SphereField& u, const Rot3& rot) {
  const Rot3 inv = rot.transpose();
  return SphereField::sampled(u.spec(), [&](Vec3 z) { return u.eval(inv.apply(z)); });
}

double overlap_consistency(const SphereField& u, FieldKind kind) {
  // Probe a ring of points with |x| = 1 (deep inside both charts).
  const int m = 64;
  double worst = 0;
  for (int k = 0; k < m; ++k) {
    const double th = 2.0 * M_PI * (k + 0.5) / m;
    const Vec2 x{std::cos(th), std::sin(th)};
    for (int cid = 0; cid < 2; ++cid) {
      const ChartId c = cid == 0 ? ChartId::North : ChartId::South;
      const double self = interp_bicubic(u.spec(), u.chart(c), x);
      const double other = transition_value(u.spec(), u.chart(other_chart(c)), x, kind);
      worst = std::max(worst, std::fabs(self - other));
    }
  }
  return worst;
}

PlanarField PlanarField::sampled(const PlanarGrid& g, const std::function<double(Vec2)>& f) {
  PlanarField out;
  out.grid = g;
  out.v.resize(g.num_nodes());
#pragma omp parallel for schedule(static)
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) out.v[g.idx(i, j)] = f({g.xc(i), g.yc(j)});
  return out;
}

} // namespace sigma2
