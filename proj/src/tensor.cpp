#include "sigma2/tensor.hpp"

#include <cmath>

namespace sigma2 {

EigenPair eigen_sigma(double a11, double a12, double a22, double metric_factor) {
  if (!(metric_factor > 0))
    throw InputError("bad-metric-factor", "metric factor must be positive");
  const double inv = 1.0 / metric_factor;
  EigenPair e;
  kernels::sym_eigen(a11 * inv, a12 * inv, a22 * inv, e.lam1, e.lam2);
  e.sig1 = (a11 + a22) * inv;
  e.sig2 = (a11 * a22 - a12 * a12) * inv * inv;
  return e;
}

ConeStatus cone_check(double lam1, double lam2, double p, double tol) {
  if (!(p >= 1.0 && p <= 2.0)) throw InputError("bad-p", "cone parameter p must lie in [1,2]");
  const double lo = std::min(lam1, lam2), hi = std::max(lam1, lam2);
  ConeStatus s;
  s.m1 = hi - (p - 2.0) * lo;
  s.m2 = lo - (p - 2.0) * hi;
  const double mn = std::min(s.m1, s.m2), mx = std::max(s.m1, s.m2);
  if (mn > tol)
    s.pos = ConePosition::Interior;
  else if (std::fabs(mn) <= tol && mx >= -tol)
    s.pos = ConePosition::Boundary;
  else
    s.pos = ConePosition::Exterior;
  return s;
}

NewtonTransform newton_transform(const Mat2& L) {
  NewtonTransform n;
  n.t0.m[0][0] = n.t0.m[1][1] = 1.0;
  const double tr = L.m[0][0] + L.m[1][1];
  n.t1.m[0][0] = tr - L.m[0][0];
  n.t1.m[0][1] = -L.m[0][1];
  n.t1.m[1][0] = -L.m[1][0];
  n.t1.m[1][1] = tr - L.m[1][1];
  // T₁:Λ = T₁^a_b Λ^b_a
  n.contraction = n.t1.m[0][0] * L.m[0][0] + n.t1.m[0][1] * L.m[1][0] +
                  n.t1.m[1][0] * L.m[0][1] + n.t1.m[1][1] * L.m[1][1];
  n.two_sigma2 = 2.0 * (L.m[0][0] * L.m[1][1] - L.m[0][1] * L.m[1][0]);
  return n;
}

kernels::SchoutenField schouten_flat(const PlanarGrid& g, const std::vector<double>& u) {
  if (static_cast<int>(u.size()) != g.num_nodes())
    throw InputError("bad-field", "field size does not match grid");
  kernels::SchoutenField s;
  kernels::schouten_flat_grid(g, u, s);
  return s;
}

kernels::SchoutenField schouten_sphere_chart(const GridSpec& g, const std::vector<double>& u) {
  if (static_cast<int>(u.size()) != g.num_nodes())
    throw InputError("bad-field", "field size does not match grid");
  kernels::SchoutenField s;
  kernels::schouten_sphere_chart(g, u, s);
  return s;
}

SphereSchouten schouten_sphere(const SphereField& u) {
  SphereSchouten s;
  kernels::schouten_sphere_chart(u.spec(), u.chart(ChartId::North), s.north);
  kernels::schouten_sphere_chart(u.spec(), u.chart(ChartId::South), s.south);
  return s;
}

double cone_census(const GridSpec& g, const std::vector<double>& u,
                   const kernels::SchoutenField& s, double eps) {
  long ok = 0;
  const long total = g.num_nodes();
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i) {
      const int k = g.idx(i, j);
      const double m = std::exp(u[k] + conformal_phi(g.node(i, j)));
      double lo, hi;
      kernels::sym_eigen(s.a11[k], s.a12[k], s.a22[k], lo, hi);
      if (lo >= eps * m) ++ok;
    }
  return static_cast<double>(ok) / static_cast<double>(total);
}

double cone_census(const SphereField& u, const SphereSchouten& s, double eps) {
  const GridSpec& g = u.spec();
  long ok = 0, total = 0;
  for (ChartId c : {ChartId::North, ChartId::South}) {
    const std::vector<double>& uv = u.chart(c);
    const kernels::SchoutenField& sf = (c == ChartId::North) ? s.north : s.south;
    for (int j = 0; j < g.n; ++j)
      for (int i = 0; i < g.n; ++i) {
        if (g.node(i, j).norm2() > 1.0) continue;
        const int k = g.idx(i, j);
        const double m = std::exp(uv[k] + conformal_phi(g.node(i, j)));
        double lo, hi;
        kernels::sym_eigen(sf.a11[k], sf.a12[k], sf.a22[k], lo, hi);
        if (lo >= eps * m) ++ok;
        ++total;
      }
  }
  return static_cast<double>(ok) / static_cast<double>(total);
}

namespace {

struct PointDerivs {
  double u1, u2, u11, u12, u22;
};

PointDerivs fd_derivs(const std::function<double(Vec2)>& u, Vec2 x, double h) {
  const double fpp = u({x.x + h, x.y + h}), fpm = u({x.x + h, x.y - h});
  const double fmp = u({x.x - h, x.y + h}), fmm = u({x.x - h, x.y - h});
  const double fp0 = u({x.x + h, x.y}), fm0 = u({x.x - h, x.y});
  const double f0p = u({x.x, x.y + h}), f0m = u({x.x, x.y - h});
  const double f00 = u(x);
  PointDerivs d;
  d.u1 = (fp0 - fm0) / (2 * h);
  d.u2 = (f0p - f0m) / (2 * h);
  d.u11 = (fp0 - 2 * f00 + fm0) / (h * h);
  d.u22 = (f0p - 2 * f00 + f0m) / (h * h);
  d.u12 = (fpp - fpm - fmp + fmm) / (4 * h * h);
  return d;
}

} // namespace

PointSchouten schouten_flat_at(const std::function<double(Vec2)>& u, Vec2 x, double fd_h) {
  const PointDerivs d = fd_derivs(u, x, fd_h);
  PointSchouten p;
  kernels::schouten_node_flat(d.u1, d.u2, d.u11, d.u12, d.u22, p.a11, p.a12, p.a22);
  p.eig = eigen_sigma(p.a11, p.a12, p.a22, std::exp(u(x)));
  return p;
}

PointSchouten schouten_sphere_at(const std::function<double(Vec2)>& u, Vec2 x, double fd_h) {
  const PointDerivs d = fd_derivs(u, x, fd_h);
  const Vec2 dphi = conformal_phi_grad(x);
  PointSchouten p;
  kernels::schouten_node_round(d.u1, d.u2, d.u11, d.u12, d.u22, dphi.x, dphi.y,
                               conformal_factor(x), p.a11, p.a12, p.a22);
  p.eig = eigen_sigma(p.a11, p.a12, p.a22, std::exp(u(x) + conformal_phi(x)));
  return p;
}

namespace {

// Γ̃^k_{ij} of g_u = e^{u+φ}|dx|², with ∂u from finite differences and ∂φ analytic.
inline Christoffel christoffel_gu(Vec2 x, double du1, double du2) {
  const Vec2 dphi = conformal_phi_grad(x);
  return christoffel_conformal({dphi.x + du1, dphi.y + du2});
}

// Shared per-chart worker for divergence and Codazzi diagnostics.
struct ChartIdentity {
  std::vector<double> div1, div2; // ∇_a T^a_b
  std::vector<double> cz1, cz2;   // ∇₁A_a2 − ∇₂A_a1
};

ChartIdentity chart_identities(const GridSpec& g, const std::vector<double>& u) {
  using kernels::DerivFields;
  kernels::SchoutenField s;
  kernels::schouten_sphere_chart(g, u, s);

  DerivFields du;
  kernels::derivative_fields(u.data(), g.n, g.n, g.h, du);

  const size_t nn = u.size();
  // Normalized endomorphism M = A e^{−(u+φ)} and its Newton transform
  // T = σ₁(M)I − M = [[m22, −m12], [−m12, m11]].
  std::vector<double> t11(nn), t12(nn), t22(nn);
#pragma omp parallel for schedule(static)
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i) {
      const int k = g.idx(i, j);
      const double inv_m = std::exp(-(u[k] + conformal_phi(g.node(i, j))));
      t11[k] = s.a22[k] * inv_m;
      t12[k] = -s.a12[k] * inv_m;
      t22[k] = s.a11[k] * inv_m;
    }

  // Split off the round background, A = B + e^φ I, so the analytically known
  // part is differentiated exactly (∂_c e^φ = φ_c e^φ) instead of by stencil.
  // This makes both identities hold to rounding at the solution u ≡ 0.
  std::vector<double> b11(nn), b22(nn);
#pragma omp parallel for schedule(static)
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i) {
      const int k = g.idx(i, j);
      const double ephi = conformal_factor(g.node(i, j));
      b11[k] = s.a11[k] - ephi;
      b22[k] = s.a22[k] - ephi;
    }

  DerivFields dt11, dt12, dt22, db11, da12, db22;
  kernels::derivative_fields(t11.data(), g.n, g.n, g.h, dt11);
  kernels::derivative_fields(t12.data(), g.n, g.n, g.h, dt12);
  kernels::derivative_fields(t22.data(), g.n, g.n, g.h, dt22);
  kernels::derivative_fields(b11.data(), g.n, g.n, g.h, db11);
  kernels::derivative_fields(s.a12.data(), g.n, g.n, g.h, da12);
  kernels::derivative_fields(b22.data(), g.n, g.n, g.h, db22);

  ChartIdentity out;
  out.div1.assign(nn, 0);
  out.div2.assign(nn, 0);
  out.cz1.assign(nn, 0);
  out.cz2.assign(nn, 0);

#pragma omp parallel for schedule(static)
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i) {
      const int k = g.idx(i, j);
      const Vec2 x = g.node(i, j);
      const Vec2 dphi = conformal_phi_grad(x);
      const double psi1 = dphi.x + du.d1[k], psi2 = dphi.y + du.d2[k];

      // Divergence of the symmetric endomorphism T w.r.t. g_u:
      //   ∇_a T^a_b = ∂_a T^a_b + ψ_c T^c_b − ψ_b σ₁(T)/2
      // (the Christoffel contractions of a conformal metric collapse to the
      //  two ψ terms; σ₁(T) is the plain matrix trace).
      const double trT = t11[k] + t22[k];
      out.div1[k] =
          dt11.d1[k] + dt12.d2[k] + (psi1 * t11[k] + psi2 * t12[k]) - 0.5 * psi1 * trT;
      out.div2[k] =
          dt12.d1[k] + dt22.d2[k] + (psi1 * t12[k] + psi2 * t22[k]) - 0.5 * psi2 * trT;

      // Codazzi residual for the covariant tensor A_ab:
      //   ∇_c A_ab = ∂_c A_ab − Γ̃^d_{ca} A_db − Γ̃^d_{cb} A_ad
      const Christoffel G = christoffel_gu(x, du.d1[k], du.d2[k]);
      const double A[2][2] = {{s.a11[k], s.a12[k]}, {s.a12[k], s.a22[k]}};
      const double ephi = conformal_factor(x);
      const double e1 = dphi.x * ephi, e2 = dphi.y * ephi; // ∂_c e^φ
      const double dA[2][2][2] = {// dA[c][a][b] = ∂_c A_ab = ∂_c B_ab + δ_ab ∂_c e^φ
                                  {{db11.d1[k] + e1, da12.d1[k]}, {da12.d1[k], db22.d1[k] + e1}},
                                  {{db11.d2[k] + e2, da12.d2[k]}, {da12.d2[k], db22.d2[k] + e2}}};
      double nabla[2][2][2];
      for (int c = 0; c < 2; ++c)
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b) {
            double v = dA[c][a][b];
            for (int dd = 0; dd < 2; ++dd)
              v -= G.g[dd][c][a] * A[dd][b] + G.g[dd][c][b] * A[a][dd];
            nabla[c][a][b] = v;
          }
      out.cz1[k] = nabla[0][0][1] - nabla[1][0][0]; // a = 1
      out.cz2[k] = nabla[0][1][1] - nabla[1][1][0]; // a = 2
    }
  return out;
}

double sup_owned_interior(const GridSpec& g, const std::vector<double>& vn,
                          const std::vector<double>& vs) {
  double m = 0;
  for (int j = 1; j < g.n - 1; ++j)
    for (int i = 1; i < g.n - 1; ++i) {
      if (g.node(i, j).norm2() > 1.0) continue;
      const int k = g.idx(i, j);
      m = std::max(m, std::fabs(vn[k]));
      m = std::max(m, std::fabs(vs[k]));
    }
  return m;
}

} // namespace

DivergenceReport divergence_newton(const SphereField& u) {
  const GridSpec& g = u.spec();
  ChartIdentity n = chart_identities(g, u.chart(ChartId::North));
  ChartIdentity s = chart_identities(g, u.chart(ChartId::South));
  DivergenceReport r;
  r.north_b1 = std::move(n.div1);
  r.north_b2 = std::move(n.div2);
  r.south_b1 = std::move(s.div1);
  r.south_b2 = std::move(s.div2);
  r.sup_owned = std::max(sup_owned_interior(g, r.north_b1, r.south_b1),
                         sup_owned_interior(g, r.north_b2, r.south_b2));
  return r;
}

CodazziReport codazzi_residual(const SphereField& u) {
  const GridSpec& g = u.spec();
  ChartIdentity n = chart_identities(g, u.chart(ChartId::North));
  ChartIdentity s = chart_identities(g, u.chart(ChartId::South));
  CodazziReport r;
  r.north_r1 = std::move(n.cz1);
  r.north_r2 = std::move(n.cz2);
  r.south_r1 = std::move(s.cz1);
  r.south_r2 = std::move(s.cz2);
  r.sup_owned = std::max(sup_owned_interior(g, r.north_r1, r.south_r1),
                         sup_owned_interior(g, r.north_r2, r.south_r2));
  return r;
}

} // namespace sigma2
