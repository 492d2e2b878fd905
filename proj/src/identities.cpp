#include "sigma2/identities.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "sigma2/errors.hpp"
#include "sigma2/kernels.hpp"
#include "sigma2/quadrature.hpp"
#include "sigma2/tensor.hpp"

namespace sigma2 {

const char* killing_name(KillingTag tag) {
  switch (tag) {
    case KillingTag::Rot1: return "rot1";
    case KillingTag::Rot2: return "rot2";
    case KillingTag::Rot3: return "rot3";
    case KillingTag::Conf1: return "conf1";
    case KillingTag::Conf2: return "conf2";
    case KillingTag::Conf3: return "conf3";
  }
  return "?";
}

Vec3 killing_eval(KillingTag tag, const Vec3& z) {
  switch (tag) {
    case KillingTag::Rot1: return cross(Vec3{1, 0, 0}, z);
    case KillingTag::Rot2: return cross(Vec3{0, 1, 0}, z);
    case KillingTag::Rot3: return cross(Vec3{0, 0, 1}, z);
    case KillingTag::Conf1: return Vec3{1 - z.x * z.x, -z.x * z.y, -z.x * z.z};
    case KillingTag::Conf2: return Vec3{-z.y * z.x, 1 - z.y * z.y, -z.y * z.z};
    case KillingTag::Conf3: return Vec3{-z.z * z.x, -z.z * z.y, 1 - z.z * z.z};
  }
  return {};
}

Vec2 chart_vector(ChartId chart, Vec2 x, const Vec3& X) {
  // dz(e_k) are orthogonal with |dz(e_k)|² = e^φ, so dz⁻¹ = dzᵀ/e^φ.
  const double d = 1.0 + x.norm2();
  const double zsign = chart == ChartId::North ? 1.0 : -1.0;
  const Vec3 dz1{2.0 * (d - 2.0 * x.x * x.x), -4.0 * x.x * x.y, zsign * 4.0 * x.x};
  const Vec3 dz2{-4.0 * x.x * x.y, 2.0 * (d - 2.0 * x.y * x.y), zsign * 4.0 * x.y};
  // dz1/dz2 are d²·(∂z/∂x_k); v_k = ⟨∂z/∂x_k, X⟩/e^φ = (⟨dz_k, X⟩/d²)·(d²/4).
  return {dot(dz1, X) / 4.0, dot(dz2, X) / 4.0};
}

double KWReport::max_abs() const {
  double m = 0;
  for (double v : integrals) m = std::max(m, std::abs(v));
  return m;
}

KWReport kw_check(const SphereField& u) {
  const GridSpec& g = u.spec();
  const SphereSchouten S = schouten_sphere(u);
  const SphereQuadrature quad(g);

  KWReport rep;
  rep.h = g.h;

  // σ₂ of the conformal metric, per chart, then its chart derivatives.
  kernels::DerivFields dN, dS;
  kernels::derivative_fields(S.north.sig2.data(), g.n, g.n, g.h, dN);
  kernels::derivative_fields(S.south.sig2.data(), g.n, g.n, g.h, dS);

  for (size_t jf = 0; jf < killing_basis.size(); ++jf) {
    const KillingTag tag = killing_basis[jf];
    SphereField xs2(g);
    for (ChartId c : {ChartId::North, ChartId::South}) {
      const kernels::DerivFields& d = c == ChartId::North ? dN : dS;
      std::vector<double>& out = xs2.chart(c);
#pragma omp parallel for schedule(static)
      for (int j = 0; j < g.n; ++j) {
        for (int i = 0; i < g.n; ++i) {
          const int id = g.idx(i, j);
          const Vec2 x = g.node(i, j);
          const Vec3 z = stereo_to_sphere(c, x);
          const Vec2 v = chart_vector(c, x, killing_eval(tag, z));
          out[id] = v.x * d.d1[id] + v.y * d.d2[id];
        }
      }
    }
    rep.integrals[jf] = quad.integrate_weighted_exp(xs2, u);
  }

  // Γ̄₁ sanity: flag if the eigenvalue trace goes negative anywhere.
  for (const kernels::SchoutenField* s : {&S.north, &S.south})
    for (double t : s->sig1)
      if (t < 0.0) {
        rep.cone_warning = true;
        break;
      }
  return rep;
}

KWStudy kw_check_study(const std::function<double(const Vec3&)>& u, GridSpec coarsest,
                       int nlevels) {
  if (nlevels < 2) throw InputError("bad-study", "kw_check_study needs at least 2 levels");
  KWStudy study;
  for (int l = 0; l < nlevels; ++l) {
    const GridSpec g(coarsest.h / double(1 << l), coarsest.R);
    const SphereField uf = SphereField::sampled(g, [&u](Vec3 z) { return u(z); });
    study.levels.push_back(kw_check(uf));
  }

  study.below_floor = true;
  for (const KWReport& r : study.levels)
    if (r.max_abs() >= 1e-12) study.below_floor = false;

  // Least-squares slope of ln E against ln h (order ≈ 2 for smooth fields).
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int n = nlevels;
  for (int l = 0; l < n; ++l) {
    const double x = std::log(study.levels[l].h);
    const double y = std::log(std::max(study.levels[l].max_abs(), 1e-300));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  study.order = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return study;
}

namespace {

// Deterministic quasi-uniform sphere sample (spiral lattice).
std::vector<Vec3> sphere_sample(int count) {
  std::vector<Vec3> pts(count);
  const double ga = 2.0 * M_PI * (std::sqrt(5.0) - 1.0) / 2.0;
  for (int i = 0; i < count; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / count;
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double th = ga * i;
    pts[i] = {rho * std::cos(th), rho * std::sin(th), z};
  }
  return pts;
}

double span_min(const std::vector<std::array<double, 6>>& V, const std::array<double, 6>& c,
                size_t* argmin = nullptr) {
  double best = std::numeric_limits<double>::infinity();
  size_t bi = 0;
  for (size_t i = 0; i < V.size(); ++i) {
    double s = 0;
    for (int j = 0; j < 6; ++j) s += c[j] * V[i][j];
    if (s < best) {
      best = s;
      bi = i;
    }
  }
  if (argmin) *argmin = bi;
  return best;
}

void renormalize(std::array<double, 6>& c) {
  double n2 = 0;
  for (double v : c) n2 += v * v;
  const double n = std::sqrt(n2);
  if (n > 0)
    for (double& v : c) v /= n;
}

} // namespace

ObstructionReport kw_obstruction(const KField& K) {
  constexpr int kSamples = 8000;
  constexpr double kDelta = 1e-8;
  constexpr double kFloor = -1e-10;
  constexpr double kAreaFrac = 0.01;

  ObstructionReport rep;
  rep.delta = kDelta;

  const double scale = K.gradient_scale();
  if (scale == 0.0) return rep; // constant K: X(K) ≡ 0, nothing single-signed

  const std::vector<Vec3> pts = sphere_sample(kSamples);

  // V[i][j] = X_j(K̂)(z_i) with K̂ = K/scale; tangency makes the ambient
  // gradient usable directly.
  std::vector<std::array<double, 6>> V(pts.size());
  for (size_t i = 0; i < pts.size(); ++i) {
    const Vec3 gk = (1.0 / scale) * K.ambient_grad(pts[i]);
    for (int j = 0; j < 6; ++j) V[i][j] = dot(killing_eval(killing_basis[j], pts[i]), gk);
  }

  const auto fraction_above = [&](const std::array<double, 6>& c) {
    size_t cnt = 0;
    for (const auto& row : V) {
      double s = 0;
      for (int j = 0; j < 6; ++j) s += c[j] * row[j];
      if (s > kDelta) ++cnt;
    }
    return double(cnt) / double(V.size());
  };

  // Starts: all signed basis directions plus a fixed batch of random units.
  std::vector<std::array<double, 6>> starts;
  for (int j = 0; j < 6; ++j)
    for (double s : {1.0, -1.0}) {
      std::array<double, 6> c{};
      c[j] = s;
      starts.push_back(c);
    }
  std::mt19937 rng(20250816u);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int k = 0; k < 8; ++k) {
    std::array<double, 6> c{};
    for (double& v : c) v = gauss(rng);
    renormalize(c);
    starts.push_back(c);
  }

  std::array<double, 6> best_c{};
  double best_f = -std::numeric_limits<double>::infinity();
  double best_frac = 0;

  for (const auto& start : starts) {
    std::array<double, 6> c = start;
    // Subgradient ascent on c ↦ min_i Σ_j c_j V_ij over the unit sphere of
    // coefficients: step toward the active (minimizing) row.
    for (int it = 0; it < 300; ++it) {
      size_t imin = 0;
      span_min(V, c, &imin);
      const double step = 0.25 / (1.0 + it / 40.0);
      for (int j = 0; j < 6; ++j) c[j] += step * V[imin][j];
      renormalize(c);
    }
    const double f = span_min(V, c);
    const double frac = fraction_above(c);
    const bool better = (f > best_f) || (f == best_f && frac > best_frac);
    if (better) {
      best_f = f;
      best_frac = frac;
      best_c = c;
    }
  }

  rep.witness = best_c;
  rep.min_directional = best_f;
  rep.positive_fraction = best_frac;
  rep.violated = best_f >= kFloor && best_frac >= kAreaFrac;
  if (!rep.violated) rep.witness = {}; // no certified field; don't suggest one
  return rep;
}

PlanarMoments planar_kw_moments(const PlanarField& u, const std::function<Vec2(Vec2)>& grad_Kt,
                                double r0) {
  const PlanarGrid& g = u.grid;
  if (r0 <= 0) throw InputError("bad-cutoff", "moment cutoff r0 must be positive");
  const double xmax = g.xc(g.nx - 1), ymax = g.yc(g.ny - 1);
  const double reach = std::min(std::min(-g.x0, -g.y0), std::min(xmax, ymax));
  if (r0 > reach)
    throw InputError("cutoff-outside-grid",
                     "moment cutoff r0 exceeds the grid rectangle (reach " + std::to_string(reach) + ")");

  const size_t n = size_t(g.num_nodes());
  std::vector<double> bI1(n, 0.0), bI2(n, 0.0), bJ(n, 0.0), bM(n, 0.0), bY1(n, 0.0), bY2(n, 0.0),
      bY11(n, 0.0), bY12(n, 0.0), bY22(n, 0.0);

#pragma omp parallel for schedule(static)
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const size_t id = size_t(g.idx(i, j));
      const Vec2 y{g.xc(i), g.yc(j)};
      if (y.norm() > r0) continue;
      const double w = std::exp(u.v[id]) * g.h * g.h;
      const Vec2 dk = grad_Kt(y);
      bI1[id] = dk.x * w;
      bI2[id] = dk.y * w;
      bJ[id] = (y.x * dk.x + y.y * dk.y) * w;
      bM[id] = w;
      bY1[id] = y.x * w;
      bY2[id] = y.y * w;
      bY11[id] = y.x * y.x * w;
      bY12[id] = y.x * y.y * w;
      bY22[id] = y.y * y.y * w;
    }
  }

  PlanarMoments m;
  m.r0 = r0;
  m.I1 = kernels::block_sum(bI1);
  m.I2 = kernels::block_sum(bI2);
  m.J = kernels::block_sum(bJ);
  m.M = kernels::block_sum(bM);
  if (m.M <= 0) throw NumericsError("degenerate-mass", "∫ e^u over the cutoff disk is not positive");
  m.mu1 = kernels::block_sum(bY1) / m.M;
  m.mu2 = kernels::block_sum(bY2) / m.M;
  m.mu11 = kernels::block_sum(bY11) / m.M;
  m.mu12 = kernels::block_sum(bY12) / m.M;
  m.mu22 = kernels::block_sum(bY22) / m.M;
  return m;
}

} // namespace sigma2
