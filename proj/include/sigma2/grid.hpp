#pragma once

// Two-chart grid machinery.
//
// A sphere-wide scalar field is stored as samples on two identical square
// grids, one per stereographic chart, covering [−R,R]² with spacing h
// (n = 2R/h + 1 nodes per side, node x_i = −R + i·h). The charts overlap on
// the annulus 1/R ≤ |x| ≤ R; a C² partition of unity supported there blends
// them. Weight profile (log-radius symmetric so the two charts sum to 1
// exactly):
//
//   w(r) = 1                 for r ≤ 1/R
//        = 1 − S((s+1)/2)    for 1/R < r < R,  s = ln r / ln R ∈ (−1,1)
//        = 0                 for r ≥ R
//
// with the quintic smoothstep S(q) = 6q⁵ − 15q⁴ + 10q³ (C², S(q)+S(1−q)=1).
// Since the transition map gives the partner radius 1/r, the partner weight
// is w(1/r) = 1 − w(r).
//
// Scalar fields on the sphere transition between charts by plain composition
// with x ↦ x/|x|²; "metric exponent" fields v (meaning e^{v}|dx|² is a metric
// being represented in chart coordinates) pick up the conformal log-Jacobian
// of the inversion:  v_other(y) = v(y/|y|²) − 4 ln|y|.

#include <cstdint>
#include <functional>
#include <vector>

#include "sigma2/errors.hpp"
#include "sigma2/geometry.hpp"

namespace sigma2 {

struct GridSpec {
  double h = 0;
  double R = 0;
  int n = 0; // nodes per side

  GridSpec() = default;
  GridSpec(double h_, double R_);

  double coord(int i) const { return -R + i * h; }
  Vec2 node(int i, int j) const { return {coord(i), coord(j)}; }
  int idx(int i, int j) const { return j * n + i; }
  int num_nodes() const { return n * n; }
  bool is_boundary(int i, int j) const { return i == 0 || j == 0 || i == n - 1 || j == n - 1; }
  bool same_as(const GridSpec& o) const;
};

// Defaults used by the CLI and the acceptance checks.
inline GridSpec default_grid() { return GridSpec(2.0 * 1.2 / 128.0, 1.2); }

double smootherstep(double q);              // 6q⁵−15q⁴+10q³ clamped to [0,1]
double pou_weight(double r, double R);      // the profile documented above

// 4-point tensor-product Lagrange interpolation (O(h⁴), C⁰ across cells) on a
// square chart grid. Throws DomainError("outside-chart") when the 4×4 stencil
// does not fit inside the grid.
double interp_bicubic(const GridSpec& g, const std::vector<double>& v, Vec2 p);
bool interp_stencil_ok(const GridSpec& g, Vec2 p);

// Precomputed 16-point interpolation stencil (for hot paths that evaluate at
// the same off-grid points every iteration).
struct InterpStencil {
  int i0 = 0, j0 = 0;
  double wx[4] = {0, 0, 0, 0};
  double wy[4] = {0, 0, 0, 0};
  double apply(const GridSpec& g, const std::vector<double>& v) const;
};
InterpStencil make_interp_stencil(const GridSpec& g, Vec2 p); // throws like interp_bicubic

enum class FieldKind {
  Scalar,        // honest function on the sphere
  MetricExponent // v with e^{v}|dx|² a chart-coordinate metric
};

// Value of a field at chart point `target` of the *other* chart, interpolated
// from samples `src` living on chart grid `g`.
double transition_value(const GridSpec& g, const std::vector<double>& src, Vec2 target,
                        FieldKind kind);

class SphereField {
public:
  SphereField() = default;
  explicit SphereField(const GridSpec& spec)
      : spec_(spec), north_(spec.num_nodes(), 0.0), south_(spec.num_nodes(), 0.0) {}

  static SphereField sampled(const GridSpec& spec, const std::function<double(Vec3)>& f);
  // For fields defined chart-wise (e.g. analytic planar conformal factors).
  static SphereField sampled_chartwise(const GridSpec& spec,
                                       const std::function<double(ChartId, Vec2)>& f);

  const GridSpec& spec() const { return spec_; }
  std::vector<double>& chart(ChartId c) { return c == ChartId::North ? north_ : south_; }
  const std::vector<double>& chart(ChartId c) const {
    return c == ChartId::North ? north_ : south_;
  }

  // Evaluate at a sphere point using the chart that holds the point in its
  // core (|coord| ≤ 1), bicubic.
  double eval(Vec3 z) const;

  // Sup over nodes the chart owns (PoU weight ≥ 1/2, i.e. |x| ≤ 1).
  double sup_abs_owned() const;
  double max_owned() const; // signed max, with argmax sphere point
  Vec3 argmax_owned() const;

  SphereField& operator+=(double c);
  SphereField& operator+=(const SphereField& o);
  void axpy(double a, const SphereField& d); // this += a*d
  double sup_abs_all() const;

private:
  GridSpec spec_;
  std::vector<double> north_, south_;
};

// Resample u∘rot⁻¹ (i.e. rotate the field so that rotate(peak)=target moves
// features around the sphere). Interpolation error O(h⁴).
SphereField rotate_field(const SphereField& u, const Rot3& rot);

// Sup over overlap probe points of |u_self − u_other∘transition| — how
// consistently the two charts represent one function.
double overlap_consistency(const SphereField& u, FieldKind kind = FieldKind::Scalar);

// --- Planar (flat-background) rectangles, for the R² operations ------------

struct PlanarGrid {
  double x0 = 0, y0 = 0; // lower-left node
  double h = 0;
  int nx = 0, ny = 0;
  double xc(int i) const { return x0 + i * h; }
  double yc(int j) const { return y0 + j * h; }
  int idx(int i, int j) const { return j * nx + i; }
  int num_nodes() const { return nx * ny; }
};

struct PlanarField {
  PlanarGrid grid;
  std::vector<double> v;
  static PlanarField sampled(const PlanarGrid& g, const std::function<double(Vec2)>& f);
};

// Same 4-point Lagrange interpolation on a planar rectangle grid.
double interp_bicubic(const PlanarGrid& g, const std::vector<double>& v, Vec2 p);

} // namespace sigma2
