#include "sigma2/solver.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "sigma2/errors.hpp"
#include "sigma2/families.hpp"
#include "sigma2/kernels.hpp"
#include "sigma2/quadrature.hpp"
#include "sigma2/tensor.hpp"

namespace sigma2 {

namespace {

constexpr double kOwnedRadius = 1.0 + 1e-12;

// --- local clamped Lagrange interpolation ------------------------------------
//
// Same 4-point tensor-product rule as interp_bicubic, but when the target sits
// within two cells of the square edge the stencil is shifted inward instead of
// throwing. The shifted stencil still brackets the target (the grid reaches
// the edge), so this stays interpolation — only the Lebesgue constant grows
// slightly. Ring-coupling targets x/|x|² land well inside the square, but the
// shift keeps the helper total for any in-square target.

struct LagStencil {
  int i0 = 0, j0 = 0;
  double wx[4] = {0, 0, 0, 0};
  double wy[4] = {0, 0, 0, 0};
};

void lag_axis(const GridSpec& g, double v, int& i0, double* w) {
  int ic = static_cast<int>(std::floor((v + g.R) / g.h));
  i0 = std::clamp(ic - 1, 0, g.n - 4);
  double xs[4];
  for (int k = 0; k < 4; ++k) xs[k] = g.coord(i0 + k);
  for (int a = 0; a < 4; ++a) {
    double num = 1, den = 1;
    for (int b = 0; b < 4; ++b) {
      if (b == a) continue;
      num *= v - xs[b];
      den *= xs[a] - xs[b];
    }
    w[a] = num / den;
  }
}

LagStencil lag_stencil(const GridSpec& g, Vec2 p) {
  if (std::max(std::abs(p.x), std::abs(p.y)) > g.R + 1e-12)
    throw DomainError("outside-chart", "interpolation target outside the chart square");
  LagStencil s;
  lag_axis(g, p.x, s.i0, s.wx);
  lag_axis(g, p.y, s.j0, s.wy);
  return s;
}

double lag_apply(const GridSpec& g, const std::vector<double>& v, const LagStencil& s) {
  double acc = 0;
  for (int b = 0; b < 4; ++b) {
    double row = 0;
    for (int a = 0; a < 4; ++a) row += s.wx[a] * v[g.idx(s.i0 + a, s.j0 + b)];
    acc += s.wy[b] * row;
  }
  return acc;
}

// --- per-chart geometry caches -------------------------------------------------

struct ChartGeom {
  std::vector<double> ephi;  // e^φ
  std::vector<double> phi1, phi2;
  std::vector<uint8_t> owned; // |x| ≤ 1
};

ChartGeom chart_geom(const GridSpec& g) {
  ChartGeom cg;
  const int n = g.n;
  cg.ephi.resize(g.num_nodes());
  cg.phi1.resize(g.num_nodes());
  cg.phi2.resize(g.num_nodes());
  cg.owned.resize(g.num_nodes());
#pragma omp parallel for schedule(static)
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const Vec2 x = g.node(i, j);
      const int id = g.idx(i, j);
      cg.ephi[id] = conformal_factor(x);
      const Vec2 pg = conformal_phi_grad(x);
      cg.phi1[id] = pg.x;
      cg.phi2[id] = pg.y;
      cg.owned[id] = x.norm() <= kOwnedRadius ? 1 : 0;
    }
  return cg;
}

// K_μ·e^{2(u+φ)} per node of one chart.
std::vector<double> rhs_field(const GridSpec& g, const ChartGeom& cg, const KField& Kmu,
                              ChartId chart, const std::vector<double>& u) {
  std::vector<double> r(g.num_nodes());
  const int n = g.n;
#pragma omp parallel for schedule(static)
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const int id = g.idx(i, j);
      const double e = cg.ephi[id];
      const double conf = std::exp(u[id]) * e; // e^{u+φ}
      r[id] = Kmu.eval(stereo_to_sphere(chart, g.node(i, j))) * conf * conf;
    }
  return r;
}

struct ChartWork {
  kernels::SchoutenField S;
  kernels::DerivFields D;
  std::vector<double> rhs; // K_μ e^{2(u+φ)}
  std::vector<double> F;   // residual
};

void assemble_chart(const GridSpec& g, const ChartGeom& cg, const KField& Kmu, ChartId chart,
                    const std::vector<double>& u, ChartWork& w) {
  kernels::schouten_sphere_chart(g, u, w.S);
  kernels::derivative_fields(u.data(), g.n, g.n, g.h, w.D);
  w.rhs = rhs_field(g, cg, Kmu, chart, u);
  w.F.resize(g.num_nodes());
  const int n = g.n;
#pragma omp parallel for schedule(static)
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const int id = g.idx(i, j);
      const double det =
          w.S.a11[id] * w.S.a22[id] - w.S.a12[id] * w.S.a12[id];
      w.F[id] = det - w.rhs[id];
    }
}

struct ResidualStats {
  double sup_owned = 0;
  double rhs_scale = 0;
  double min_margin = std::numeric_limits<double>::infinity();
  bool finite = true;
};

ResidualStats chart_stats(const GridSpec& g, const ChartGeom& cg, const ChartWork& w) {
  ResidualStats st;
  for (int id = 0; id < g.num_nodes(); ++id) {
    if (!std::isfinite(w.F[id]) || !std::isfinite(w.rhs[id])) {
      st.finite = false;
      continue;
    }
    if (!cg.owned[id]) continue;
    st.sup_owned = std::max(st.sup_owned, std::abs(w.F[id]));
    st.rhs_scale = std::max(st.rhs_scale, std::abs(w.rhs[id]));
    st.min_margin = std::min(st.min_margin, w.S.lam1[id]);
  }
  return st;
}

// Exact Jacobian 9-point stencil of the determinant-form residual at an
// interior node. Derivative mapping, with p = D₁u, q = D₂u:
//   ∂a11/∂(p,q) = (+(φ₁+p)/2, −(φ₂+q)/2)     ∂a11/∂u₁₁ = −1
//   ∂a12/∂(p,q) = (+(φ₂+q)/2, +(φ₁+p)/2)     ∂a12/∂u₁₂ = −1
//   ∂a22/∂(p,q) = (−(φ₁+p)/2, +(φ₂+q)/2)     ∂a22/∂u₂₂ = −1
// and δdet = a22·δa11 + a11·δa22 − 2a12·δa12 (the adjugate contraction).
struct Stencil9 {
  // [dj+1][di+1] for di,dj ∈ {−1,0,1}
  double c[3][3];
};

inline Stencil9 lin_stencil(const GridSpec& g, const ChartGeom& cg, const ChartWork& w,
                            int i, int j) {
  const int id = g.idx(i, j);
  const double a11 = w.S.a11[id], a12 = w.S.a12[id], a22 = w.S.a22[id];
  const double p = w.D.d1[id], q = w.D.d2[id];
  const double gp = cg.phi1[id] + p, gq = cg.phi2[id] + q;
  const double Cp = 0.5 * gp * (a22 - a11) - a12 * gq;
  const double Cq = 0.5 * gq * (a11 - a22) - a12 * gp;
  const double ih2 = 1.0 / (g.h * g.h);
  const double i2h = 1.0 / (2.0 * g.h);
  const double cross = a12 * 0.5 * ih2; // 2a12 · (1/(4h²))
  Stencil9 s;
  s.c[1][1] = 2.0 * (a11 + a22) * ih2 - 2.0 * w.rhs[id];
  s.c[1][2] = -a22 * ih2 + Cp * i2h; // east  (i+1, j)
  s.c[1][0] = -a22 * ih2 - Cp * i2h; // west
  s.c[2][1] = -a11 * ih2 + Cq * i2h; // north (i, j+1)
  s.c[0][1] = -a11 * ih2 - Cq * i2h; // south
  s.c[2][2] = cross;                 // (i+1, j+1)
  s.c[0][0] = cross;                 // (i−1, j−1)
  s.c[2][0] = -cross;                // (i−1, j+1)
  s.c[0][2] = -cross;                // (i+1, j−1)
  return s;
}

void check_overlap(const SphereField& u) {
  const double h = u.spec().h;
  const double tol = 10.0 * h * h;
  const double mismatch = overlap_consistency(u, FieldKind::Scalar);
  if (!(mismatch < tol))
    throw InputError("inconsistent-overlap",
                     "charts disagree on the overlap: transition residual " +
                         std::to_string(mismatch) + " exceeds " + std::to_string(tol));
}

struct Assembled {
  ChartWork north, south;
  ResidualStats stats;
};

// Residual/Jacobian data for both charts; throws on non-finite values.
Assembled assemble(const SphereField& u, const KField& Kmu, const ChartGeom& cg) {
  Assembled a;
  assemble_chart(u.spec(), cg, Kmu, ChartId::North, u.chart(ChartId::North), a.north);
  assemble_chart(u.spec(), cg, Kmu, ChartId::South, u.chart(ChartId::South), a.south);
  const ResidualStats sn = chart_stats(u.spec(), cg, a.north);
  const ResidualStats ss = chart_stats(u.spec(), cg, a.south);
  a.stats.finite = sn.finite && ss.finite;
  a.stats.sup_owned = std::max(sn.sup_owned, ss.sup_owned);
  a.stats.rhs_scale = std::max(sn.rhs_scale, ss.rhs_scale);
  a.stats.min_margin = std::min(sn.min_margin, ss.min_margin);
  return a;
}

ResidualReport report_from(const SphereField& u, const Assembled& a, double cone_eps) {
  if (!a.stats.finite)
    throw NumericsError("residual-overflow",
                        "non-finite residual (u out of double exponential range)");
  ResidualReport r;
  r.F = SphereField(u.spec());
  r.F.chart(ChartId::North) = a.north.F;
  r.F.chart(ChartId::South) = a.south.F;
  r.sup_owned = a.stats.sup_owned;
  r.rhs_scale = a.stats.rhs_scale;
  r.min_margin = a.stats.min_margin;
  SphereSchouten ss;
  ss.north = a.north.S;
  ss.south = a.south.S;
  r.cone_fraction = cone_census(u, ss, cone_eps);
  return r;
}

// --- the two-chart linear solve ----------------------------------------------

using SpMat = Eigen::SparseMatrix<double>;
using SpLU = Eigen::SparseLU<SpMat>;

// Interpolation plumbing for the boundary ring of one chart: target points in
// the partner chart and ready-made stencils (geometry only — reusable).
struct BoundaryCoupling {
  std::vector<int> nodes;          // boundary node ids
  std::vector<LagStencil> partner; // stencil in the other chart at x/|x|²
};

BoundaryCoupling boundary_coupling(const GridSpec& g) {
  BoundaryCoupling bc;
  const int n = g.n;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      if (!g.is_boundary(i, j)) continue;
      bc.nodes.push_back(g.idx(i, j));
      bc.partner.push_back(lag_stencil(g, chart_transition_point(g.node(i, j))));
    }
  return bc;
}

struct NewtonWorkspace {
  ChartGeom geom;
  BoundaryCoupling bc;
  explicit NewtonWorkspace(const GridSpec& g)
      : geom(chart_geom(g)), bc(boundary_coupling(g)) {}
};

// Coupled two-chart Newton step. Both charts' exact 9-point linearized rows
// and the cross-chart boundary-ring rows are assembled into ONE sparse system
// solved by SparseLU, so the step is a true Newton direction (no alternation
// error for the 1/h² stencils to amplify). A ring row at node b reads
//   δ_self(b) − I[δ_other](x′) = I[u_other](x′) − u_self(b),
// x′ = x/|x|² in the partner chart, I the 4×4 Lagrange interpolation: after a
// full step the ring is exactly consistent with the partner field, so chart
// drift cannot accumulate along a homotopy. Ring images have |x′| ∈
// [1/(√2·R), 1/R] — always interior to the partner square — so coupling rows
// never reference other ring rows. Returns false on factorization failure.
bool newton_step(const GridSpec& g, const NewtonWorkspace& ws, const Assembled& a,
                 const SphereField& u, SphereField& du) {
  const int N = g.num_nodes();
  const int n = g.n;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(18) * N);
  Eigen::VectorXd rhs(2 * N);
  for (int half = 0; half < 2; ++half) {
    const ChartWork& w = half == 0 ? a.north : a.south;
    const auto& u_self = u.chart(half == 0 ? ChartId::North : ChartId::South);
    const auto& u_other = u.chart(half == 0 ? ChartId::South : ChartId::North);
    const int off = half * N;
    const int off_other = (1 - half) * N;
    for (int j = 1; j < n - 1; ++j)
      for (int i = 1; i < n - 1; ++i) {
        const int id = g.idx(i, j);
        const int row = off + id;
        const Stencil9 s = lin_stencil(g, ws.geom, w, i, j);
        for (int dj = -1; dj <= 1; ++dj)
          for (int di = -1; di <= 1; ++di)
            trip.emplace_back(row, off + g.idx(i + di, j + dj), s.c[dj + 1][di + 1]);
        rhs[row] = -w.F[id];
      }
    for (size_t k = 0; k < ws.bc.nodes.size(); ++k) {
      const int id = ws.bc.nodes[k];
      const int row = off + id;
      const LagStencil& st = ws.bc.partner[k];
      trip.emplace_back(row, row, 1.0);
      for (int b = 0; b < 4; ++b)
        for (int c = 0; c < 4; ++c)
          trip.emplace_back(row, off_other + g.idx(st.i0 + c, st.j0 + b),
                            -st.wx[c] * st.wy[b]);
      rhs[row] = lag_apply(g, u_other, st) - u_self[id];
    }
  }
  SpMat M(2 * N, 2 * N);
  M.setFromTriplets(trip.begin(), trip.end());
  M.makeCompressed();
  SpLU lu;
  lu.compute(M);
  if (lu.info() != Eigen::Success) return false;
  const Eigen::VectorXd d = lu.solve(rhs);
  if (lu.info() != Eigen::Success) return false;

  du = SphereField(g);
  auto& dun = du.chart(ChartId::North);
  auto& dus = du.chart(ChartId::South);
  std::copy(d.data(), d.data() + N, dun.begin());
  std::copy(d.data() + N, d.data() + 2 * N, dus.begin());
  for (int id = 0; id < N; ++id)
    if (!std::isfinite(dun[id]) || !std::isfinite(dus[id])) return false;
  return true;
}

} // namespace

// --- public operations ----------------------------------------------------------

KField homotopy_field(const KField& K, double mu) {
  if (!(mu >= 0.0 && mu <= 1.0)) throw InputError("mu-range", "mu must lie in [0,1]");
  KField km;
  km.c0 = mu * K.c0 + 0.25 * (1.0 - mu);
  km.a = mu * K.a;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) km.B[i][j] = mu * K.B[i][j];
  km.name = "homotopy(" + K.name + ")";
  return km;
}

ResidualReport residual(const SphereField& u, const KField& K, double mu, double cone_eps) {
  check_overlap(u);
  const KField Kmu = homotopy_field(K, mu);
  const ChartGeom cg = chart_geom(u.spec());
  const Assembled a = assemble(u, Kmu, cg);
  return report_from(u, a, cone_eps);
}

SphereField apply_linearized(const SphereField& u, const KField& K, double mu,
                             const SphereField& du, double cone_eps) {
  if (!u.spec().same_as(du.spec()))
    throw InputError("grid-mismatch", "u and du live on different grids");
  const KField Kmu = homotopy_field(K, mu);
  const GridSpec& g = u.spec();
  const ChartGeom cg = chart_geom(g);
  const Assembled a = assemble(u, Kmu, cg);
  if (!a.stats.finite)
    throw NumericsError("residual-overflow", "non-finite state in linearization");
  if (!(a.stats.min_margin >= cone_eps))
    throw DomainError("cone-violation",
                      "refusing to linearize: min cone margin " +
                          std::to_string(a.stats.min_margin) + " below " +
                          std::to_string(cone_eps));
  SphereField out(g);
  const int n = g.n;
  for (ChartId c : {ChartId::North, ChartId::South}) {
    const ChartWork& w = (c == ChartId::North) ? a.north : a.south;
    const std::vector<double>& d = du.chart(c);
    std::vector<double>& o = out.chart(c);
#pragma omp parallel for schedule(static)
    for (int j = 1; j < n - 1; ++j)
      for (int i = 1; i < n - 1; ++i) {
        const Stencil9 s = lin_stencil(g, cg, w, i, j);
        double acc = 0;
        for (int dj = -1; dj <= 1; ++dj)
          for (int di = -1; di <= 1; ++di)
            acc += s.c[dj + 1][di + 1] * d[g.idx(i + di, j + dj)];
        o[g.idx(i, j)] = acc;
      }
  }
  return out;
}

ContinuationState newton_solve(const KField& K, double mu, const SphereField& u0,
                               const SolveOptions& opts) {
  if (!(opts.newton_tol > 0) || !(opts.cone_eps > 0))
    throw InputError("solve-options", "newton_tol and cone_eps must be positive");
  check_overlap(u0);
  const GridSpec g = u0.spec();
  const KField Kmu = homotopy_field(K, mu);
  NewtonWorkspace ws(g);

  ContinuationState st;
  st.mu = mu;
  st.u = u0;

  Assembled a = assemble(st.u, Kmu, ws.geom);
  if (!a.stats.finite)
    throw NumericsError("residual-overflow", "initial guess out of double range");
  if (!(a.stats.min_margin >= opts.cone_eps))
    throw DomainError("cone-violation", "initial guess is not in the cone interior");

  auto finish = [&](bool ok, int iters, const std::string& note) {
    st.converged = ok;
    st.iters = iters;
    st.note = note;
    st.residual_sup = a.stats.sup_owned;
    st.rhs_scale = a.stats.rhs_scale;
    st.tol_used = opts.newton_tol * (1.0 + a.stats.rhs_scale);
    st.min_margin = a.stats.min_margin;
    SphereSchouten ss;
    ss.north = a.north.S;
    ss.south = a.south.S;
    st.cone_fraction = cone_census(st.u, ss, opts.cone_eps);
    st.max_u = st.u.max_owned();
    st.sup_abs_u = st.u.sup_abs_owned();
    return st;
  };

  for (int iter = 0; iter <= opts.max_iters; ++iter) {
    const double tol_eff = opts.newton_tol * (1.0 + a.stats.rhs_scale);
    if (a.stats.sup_owned < tol_eff) return finish(true, iter, "");
    if (iter == opts.max_iters) return finish(false, iter, "iteration-cap");

    SphereField du;
    if (!newton_step(g, ws, a, st.u, du))
      return finish(false, iter, "singular-linearization");

    // Backtracking by halves: accept only a strict residual decrease with the
    // whole iterate inside the cone.
    bool accepted = false;
    for (double t = 1.0; t >= opts.min_step; t *= 0.5) {
      SphereField ut = st.u;
      ut.axpy(t, du);
      Assembled at = assemble(ut, Kmu, ws.geom);
      if (!at.stats.finite) continue;
      if (!(at.stats.min_margin >= opts.cone_eps)) continue;
      if (!(at.stats.sup_owned < a.stats.sup_owned)) continue;
      st.u = std::move(ut);
      a = std::move(at);
      accepted = true;
      break;
    }
    if (!accepted) return finish(false, iter + 1, "damping-underflow");
  }
  return finish(false, opts.max_iters, "iteration-cap"); // unreachable
}

// --- reduced map -----------------------------------------------------------------

Vec3 reduced_map_G(const KField& K, Vec3 xi, const GridSpec& spec) {
  const double r = xi.norm();
  if (!(r < 1.0 - 1e-6))
    throw InputError("reduced-map-domain", "|xi| must stay below 1 - 1e-6");
  SphereQuadrature quad(spec);
  std::function<double(Vec3)> pulled;
  if (r < 1e-14) {
    pulled = [&K](Vec3 z) { return K.eval(z); };
  } else {
    const MobiusSphere psi(normalized(xi), 1.0 / (1.0 - r));
    pulled = [&K, psi](Vec3 z) { return K.eval(psi.apply_inverse(z)); };
  }
  // One K∘ψ⁻¹ sample per node, shared by the three moment integrands.
  std::vector<double> north(spec.num_nodes()), south(spec.num_nodes());
  Vec3 G;
  std::vector<double> pn(spec.num_nodes()), ps(spec.num_nodes());
  std::vector<Vec3> zn(spec.num_nodes()), zs(spec.num_nodes());
#pragma omp parallel for schedule(static)
  for (int j = 0; j < spec.n; ++j)
    for (int i = 0; i < spec.n; ++i) {
      const int id = spec.idx(i, j);
      const Vec2 x = spec.node(i, j);
      zn[id] = stereo_to_sphere(ChartId::North, x);
      zs[id] = stereo_to_sphere(ChartId::South, x);
      pn[id] = pulled(zn[id]);
      ps[id] = pulled(zs[id]);
    }
  for (int comp = 0; comp < 3; ++comp) {
    for (int id = 0; id < spec.num_nodes(); ++id) {
      north[id] = pn[id] * zn[id][comp];
      south[id] = ps[id] * zs[id][comp];
    }
    G[comp] = quad.integrate_charts(north, south);
  }
  return G;
}

ReducedMapSample reduced_map_sample(const KField& K, Vec3 xi, const GridSpec& spec) {
  ReducedMapSample s;
  s.xi = xi;
  s.G = reduced_map_G(K, xi, spec);
  const double step = 1e-5;
  for (int b = 0; b < 3; ++b) {
    Vec3 xp = xi, xm = xi;
    xp[b] += step;
    xm[b] -= step;
    const Vec3 Gp = reduced_map_G(K, xp, spec);
    const Vec3 Gm = reduced_map_G(K, xm, spec);
    for (int a = 0; a < 3; ++a) s.jac[a][b] = (Gp[a] - Gm[a]) / (2.0 * step);
  }
  return s;
}

namespace {

double det3(const double m[3][3]) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

bool solve3(const double m[3][3], const Vec3& b, Vec3& x) {
  const double d = det3(m);
  double scale = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) scale = std::max(scale, std::abs(m[i][j]));
  if (std::abs(d) < 1e-14 * std::max(scale * scale * scale, 1e-300)) return false;
  // Cramer's rule (3×3, conditioning is irrelevant at this size/stakes).
  double mc[3][3];
  for (int col = 0; col < 3; ++col) {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) mc[i][j] = m[i][j];
    for (int i = 0; i < 3; ++i) mc[i][col] = b[i];
    x[col] = det3(mc) / d;
  }
  return true;
}

} // namespace

std::vector<ReducedMapSample> reduced_map_zeros(const KField& K, const GridSpec& spec,
                                                double radius) {
  std::vector<ReducedMapSample> zeros;
  if (K.is_constant()) return zeros; // G ≡ 0: no isolated zeros to report
  const double scale = std::max(K.gradient_scale(), 1e-12);
  const double gtol = 1e-9 * (4.0 * 3.14159265358979323846) * scale;

  // Deterministic seed lattice: center + icosahedron vertices at three radii.
  std::vector<Vec3> seeds;
  seeds.push_back({0, 0, 0});
  const double gr = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> dirs;
  for (double s1 : {-1.0, 1.0})
    for (double s2 : {-1.0, 1.0}) {
      dirs.push_back(normalized({0, s1, s2 * gr}));
      dirs.push_back(normalized({s1, s2 * gr, 0}));
      dirs.push_back(normalized({s1 * gr, 0, s2}));
    }
  for (double rho : {0.25 * radius, 0.55 * radius, 0.85 * radius})
    for (const Vec3& d : dirs) seeds.push_back(rho * d);

  for (const Vec3& seed : seeds) {
    Vec3 xi = seed;
    bool ok = false;
    for (int it = 0; it < 60; ++it) {
      ReducedMapSample s = reduced_map_sample(K, xi, spec);
      if (s.G.norm() < gtol) {
        ok = true;
        break;
      }
      Vec3 dx;
      if (!solve3(s.jac, {-s.G.x, -s.G.y, -s.G.z}, dx)) break;
      if (dx.norm() > 0.25) dx = (0.25 / dx.norm()) * dx; // trust region
      Vec3 nxt = xi + dx;
      if (nxt.norm() > radius) break; // zero outside the ball of interest
      xi = nxt;
    }
    if (!ok || xi.norm() > radius) continue;
    bool dup = false;
    for (const auto& z : zeros)
      if ((z.xi - xi).norm() < 1e-5) dup = true;
    if (dup) continue;
    zeros.push_back(reduced_map_sample(K, xi, spec));
  }
  std::sort(zeros.begin(), zeros.end(), [](const ReducedMapSample& a, const ReducedMapSample& b) {
    return a.xi.norm() < b.xi.norm();
  });
  return zeros;
}

int reduced_map_degree(const KField& K, const GridSpec& spec, double radius) {
  if (K.is_constant())
    throw InputError("reduced-map-degree",
                     "constant curvature: the reduced map vanishes identically "
                     "and its degree is undefined");
  const std::vector<ReducedMapSample> zeros = reduced_map_zeros(K, spec, radius);
  int deg = 0;
  for (const auto& z : zeros) {
    const double d = det3(z.jac);
    double scale = 0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) scale = std::max(scale, std::abs(z.jac[i][j]));
    if (std::abs(d) < 1e-8 * scale * scale * scale)
      throw NumericsError("degenerate-zero",
                          "reduced-map zero with near-singular Jacobian: sign-sum "
                          "degree unreliable");
    deg += d > 0 ? 1 : -1;
  }
  return deg;
}

SphereField bubble_initial_guess(Vec3 xi, const GridSpec& spec) {
  const double r = xi.norm();
  if (!(r < 1.0)) throw InputError("bubble-domain", "|xi| must be below 1");
  if (r < 1e-14) return SphereField(spec); // identity Möbius: u ≡ 0
  auto fn = sphere_mobius_pullback_fn([](Vec3) { return 0.0; }, normalized(xi),
                                      1.0 / (1.0 - r));
  return SphereField::sampled(spec, fn);
}

// --- blow-up diagnostics -----------------------------------------------------------

namespace {

BlowupDiagnostics diagnose_impl(const SphereField& u) {
  BlowupDiagnostics d;
  const GridSpec& g = u.spec();
  d.peak = u.argmax_owned();
  d.peak_height = u.max_owned();

  // Peak census: clusters of owned local maxima within 1 of the global max.
  std::vector<Vec3> tops;
  for (ChartId c : {ChartId::North, ChartId::South}) {
    const std::vector<double>& v = u.chart(c);
    for (int j = 1; j < g.n - 1; ++j)
      for (int i = 1; i < g.n - 1; ++i) {
        const Vec2 x = g.node(i, j);
        if (x.norm() > kOwnedRadius) continue;
        const double val = v[g.idx(i, j)];
        if (val < d.peak_height - 1.0) continue;
        // Strict local max: no higher neighbor AND at least one strictly
        // lower one (so constant plateaus don't register as peaks).
        bool is_max = true, strict = false;
        for (int dj = -1; dj <= 1 && is_max; ++dj)
          for (int di = -1; di <= 1; ++di) {
            if (di == 0 && dj == 0) continue;
            const double nb = v[g.idx(i + di, j + dj)];
            if (nb > val) {
              is_max = false;
              break;
            }
            if (nb < val) strict = true;
          }
        if (is_max && strict) tops.push_back(stereo_to_sphere(c, x));
      }
  }
  std::vector<Vec3> clusters;
  const double sep = 10.0 * g.h;
  for (const Vec3& t : tops) {
    bool merged = false;
    for (const Vec3& c : clusters)
      if (geodesic_distance(t, c) < sep) {
        merged = true;
        break;
      }
    if (!merged) clusters.push_back(t);
  }
  d.peaks_found = std::max<int>(1, static_cast<int>(clusters.size()));
  d.multi_peak = d.peaks_found > 1;

  // Concentration constant: least C with u ≤ −2 ln d_g(·, peak) + C.
  double conc = -std::numeric_limits<double>::infinity();
  for (ChartId c : {ChartId::North, ChartId::South}) {
    const std::vector<double>& v = u.chart(c);
    for (int j = 0; j < g.n; ++j)
      for (int i = 0; i < g.n; ++i) {
        const Vec2 x = g.node(i, j);
        if (x.norm() > kOwnedRadius) continue;
        const double dist = geodesic_distance(stereo_to_sphere(c, x), d.peak);
        if (dist < 1e-12) continue;
        conc = std::max(conc, v[g.idx(i, j)] + 2.0 * std::log(dist));
      }
  }
  d.conc_C = conc;

  // Peak-centered chart: rotate the peak to the north-chart origin (0,0,−1).
  const SphereField v = rotate_field(u, rotation_taking(d.peak, Vec3{0, 0, -1}));
  const std::vector<double>& w = v.chart(ChartId::North);
  const double u0 = v.eval(Vec3{0, 0, -1});

  // Planar decay constant over 0 < |y| ≤ 1/2 (the near-field annulus around
  // the peak; farther out the chart factor, not the decay law, dominates).
  double dec = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i) {
      const double r = g.node(i, j).norm();
      if (r < 1e-12 || r > 0.5) continue;
      dec = std::max(dec, w[g.idx(i, j)] + u0 + 4.0 * std::log(r));
    }
  d.decay_C = dec;

  // Bubble fit of the rescaled conformal-exponent profile over |z| ≤ 10.
  const double lambda = std::exp(0.5 * d.peak_height);
  std::vector<Vec2> zs;
  std::vector<double> ps;
  const double base = u0 + conformal_phi(Vec2{0, 0});
  const int nr = 24, na = 12;
  for (int ir = 1; ir <= nr; ++ir) {
    const double rz = 10.0 * ir / nr;
    for (int ia = 0; ia < na; ++ia) {
      const double th = 2.0 * 3.14159265358979323846 * ia / na;
      const Vec2 z{rz * std::cos(th), rz * std::sin(th)};
      const Vec2 y = (1.0 / lambda) * z;
      const double val = v.eval(stereo_to_sphere(ChartId::North, y)) + conformal_phi(y);
      zs.push_back(z);
      ps.push_back(val - base);
    }
  }
  // Gauss–Newton on (a, x0), model m = −2 ln(1+a²|z−x0|²) + 2 ln(1+a²|x0|²).
  double a = 1.0;
  Vec2 x0{0, 0};
  for (int it = 0; it < 50; ++it) {
    double JTJ[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
    Vec3 JTr{0, 0, 0};
    for (size_t k = 0; k < zs.size(); ++k) {
      const Vec2 dz = zs[k] - x0;
      const double q1 = 1.0 + a * a * dz.norm2();
      const double q0 = 1.0 + a * a * x0.norm2();
      const double m = -2.0 * std::log(q1) + 2.0 * std::log(q0);
      const double res = ps[k] - m;
      // ∂m/∂a and ∂m/∂x₀ of m = −2 ln q1 + 2 ln q0.
      const double dma = -4.0 * a * dz.norm2() / q1 + 4.0 * a * x0.norm2() / q0;
      const Vec3 Jk{dma, 4.0 * a * a * dz.x / q1 + 4.0 * a * a * x0.x / q0,
                    4.0 * a * a * dz.y / q1 + 4.0 * a * a * x0.y / q0};
      for (int r = 0; r < 3; ++r) {
        JTr[r] += Jk[r] * res;
        for (int s = 0; s < 3; ++s) JTJ[r][s] += Jk[r] * Jk[s];
      }
    }
    for (int r = 0; r < 3; ++r) JTJ[r][r] += 1e-12;
    Vec3 dx;
    if (!solve3(JTJ, JTr, dx)) break;
    const double step = std::min(1.0, 0.5 / std::max(1e-12, dx.norm()));
    a += step * dx.x;
    x0.x += step * dx.y;
    x0.y += step * dx.z;
    a = std::clamp(a, 1e-3, 1e3);
    if (dx.norm() < 1e-12) break;
  }
  double ss = 0;
  for (size_t k = 0; k < zs.size(); ++k) {
    const Vec2 dz = zs[k] - x0;
    const double m =
        -2.0 * std::log(1.0 + a * a * dz.norm2()) + 2.0 * std::log(1.0 + a * a * x0.norm2());
    ss += (ps[k] - m) * (ps[k] - m);
  }
  d.bubble_a = a;
  d.bubble_x = x0;
  d.bubble_residual = std::sqrt(ss / zs.size());
  return d;
}

} // namespace

BlowupDiagnostics blowup_diagnose(const SphereField& u) { return diagnose_impl(u); }

// --- homotopy driver ---------------------------------------------------------------

HomotopyRun homotopy_continue(const KField& K, const SolveOptions& opts) {
  HomotopyRun run;
  SphereField bubble(opts.grid); // zero field unless seeded from a reduced-map zero
  if (!K.is_constant()) {
    // Seeding only needs O(h²) zero locations; a coarse quadrature grid keeps
    // the search cheap at solve resolution.
    const GridSpec seed_grid(2.0 * opts.grid.R / 64.0, opts.grid.R);
    const std::vector<ReducedMapSample> zeros = reduced_map_zeros(K, seed_grid);
    if (!zeros.empty()) {
      run.seed_xi = zeros.front().xi; // smallest |ξ|: least-concentrated bubble
      run.seed_from_zero = true;
      bubble = bubble_initial_guess(run.seed_xi, opts.grid);
    }
  }

  // First-stage seed: bubble profile plus the curvature-matched constant.
  // A constant c solves the equation for constant curvature e^{−2c}, so the
  // right vertical placement for stage μ is c = −½·ln K̄ with K̄ the
  // e^{2u}-volume-weighted mean of K_μ over the bubble. (At μ = 0 this gives
  // exactly c = −½·ln(1/4) = ln 2, the known start of the homotopy.)
  SphereQuadrature quad(opts.grid);
  const int N = opts.grid.num_nodes();
  auto seeded = [&](double mu) {
    const KField Kmu = homotopy_field(K, mu);
    std::vector<double> wn(N), ws(N), kn(N), ks(N);
    for (int j = 0; j < opts.grid.n; ++j)
      for (int i = 0; i < opts.grid.n; ++i) {
        const int id = opts.grid.idx(i, j);
        const Vec2 x = opts.grid.node(i, j);
        wn[id] = std::exp(2.0 * bubble.chart(ChartId::North)[id]);
        ws[id] = std::exp(2.0 * bubble.chart(ChartId::South)[id]);
        kn[id] = wn[id] * Kmu.eval(stereo_to_sphere(ChartId::North, x));
        ks[id] = ws[id] * Kmu.eval(stereo_to_sphere(ChartId::South, x));
      }
    const double mass = quad.integrate_charts(wn, ws);
    const double kbar = quad.integrate_charts(kn, ks) / mass;
    SphereField s = bubble;
    if (kbar > 0.0) {
      const double c = -0.5 * std::log(kbar);
      for (ChartId ch : {ChartId::North, ChartId::South})
        for (int id = 0; id < N; ++id) s.chart(ch)[id] += c;
    }
    return s;
  };

  // Resolution trust gate: area-equivalent radius, in grid cells, of the peak
  // half-height set {u > max u − ln 4} on the peak's own chart. A true bubble
  // of scale t has half-height radius ≈ 1/t; the discrete system also carries
  // spurious 2–3-cell bubbles whose truncation error fakes solvability, and
  // those must not be certified as solutions. (Chart-square node count is a
  // proxy: a peak near the chart rim is undercounted by at most √2 in radius.)
  auto peak_cells = [&](const SphereField& s) {
    double best = -std::numeric_limits<double>::infinity();
    ChartId bc = ChartId::North;
    for (ChartId ch : {ChartId::North, ChartId::South}) {
      const auto& v = s.chart(ch);
      for (int j = 0; j < opts.grid.n; ++j)
        for (int i = 0; i < opts.grid.n; ++i) {
          const int id = opts.grid.idx(i, j);
          if (opts.grid.node(i, j).norm() <= 1.0 + 1e-12 && v[id] > best) {
            best = v[id];
            bc = ch;
          }
        }
    }
    const auto& v = s.chart(bc);
    int count = 0;
    for (int id = 0; id < N; ++id)
      if (v[id] > best - std::log(4.0)) ++count;
    return std::sqrt(static_cast<double>(count) / M_PI);
  };

  SphereField u(opts.grid);     // last accepted state
  SphereField carry(opts.grid); // terminal iterate of the latest failed attempt
  bool has_carry = false;
  double accepted_mu = 0.0;
  double step = opts.mu_start;
  while (true) {
    const double mu = std::min(1.0, accepted_mu + step);
    // Candidate starts: the natural one (last accepted state; the seeded field
    // before any acceptance) and, after a failure, the failed attempt's
    // terminal iterate — partway along the concentration direction it often
    // sits far closer to the branch than any fresh seed. Pick by measured
    // residual at this μ. (Terminal iterates are always finite and inside the
    // cone: the line search never accepts anything else.)
    SphereField start = run.path.empty() ? seeded(mu) : u;
    if (has_carry) {
      const double r_start = residual(start, K, mu, opts.cone_eps).sup_owned;
      const double r_carry = residual(carry, K, mu, opts.cone_eps).sup_owned;
      if (r_carry < r_start) start = carry;
    }
    // Continuation stages legitimately travel far along the soft concentration
    // mode in short damped steps (latching the branch near μ ≈ 0 and the first
    // doublings after it routinely need 100+ iterations), so every stage gets
    // the larger budget; opts.max_iters is the cap for standalone solves.
    SolveOptions stage_opts = opts;
    stage_opts.max_iters = std::max(opts.max_iters, opts.latch_iters);
    ContinuationState st = newton_solve(K, mu, start, stage_opts);
    const bool resolved = !st.converged || peak_cells(st.u) >= opts.min_peak_cells;
    HomotopyAttempt at;
    at.mu = mu;
    at.accepted = st.converged && resolved;
    at.iters = st.iters;
    at.residual = st.residual_sup;
    at.max_u = st.max_u;
    at.min_margin = st.min_margin;
    at.note = !resolved ? "under-resolved" : st.note;
    run.attempts.push_back(at);

    if (st.converged && resolved) {
      st.kw = kw_check(st.u);
      u = st.u;
      has_carry = false;
      accepted_mu = mu;
      const int iters = st.iters;
      run.path.push_back(std::move(st));
      if (accepted_mu >= 1.0) {
        run.reached_one = true;
        break;
      }
      if (iters <= 3) step *= 1.5;
      step = std::min(step, 1.0 - accepted_mu);
    } else {
      carry = st.u;
      has_carry = true;
      step *= 0.5;
      if (step < opts.mu_min_step) {
        run.stalled_mu = accepted_mu;
        run.diag = blowup_diagnose(run.path.empty() ? carry : u);
        run.has_diag = true;
        break;
      }
    }
  }
  if (!run.reached_one && !run.has_diag) {
    run.stalled_mu = accepted_mu;
    run.diag = blowup_diagnose(u);
    run.has_diag = true;
  }
  return run;
}

} // namespace sigma2
