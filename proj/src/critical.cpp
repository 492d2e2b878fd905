#include "sigma2/critical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "sigma2/errors.hpp"
#include "sigma2/kernels.hpp"

namespace sigma2 {
namespace {

// Intrinsic gradient norm |∇K|_g at chart point x:  the chart metric is
// e^φ δ, so |∇K|_g = e^{−φ/2} |∂(K∘chart)| = ((1+|x|²)/2)·|∂(K∘chart)|.
double intrinsic_grad_norm(const KField& K, ChartId chart, Vec2 x) {
  const Vec2 g = chart_covariant_grad(K, chart, x);
  return 0.5 * (1.0 + x.norm2()) * g.norm();
}

struct ChartHessian {
  double h11, h12, h22;
};

// Chart-coordinate Hessian of K∘chart by centered differences of the exact
// chart gradient.  Step 1e−6 balances truncation (∝ δ²) against rounding
// (∝ eps/δ); both land near 1e−11 for the O(1) fields handled here.
ChartHessian chart_hessian(const KField& K, ChartId chart, Vec2 x) {
  const double delta = 1e-6;
  const Vec2 gxp = chart_covariant_grad(K, chart, {x.x + delta, x.y});
  const Vec2 gxm = chart_covariant_grad(K, chart, {x.x - delta, x.y});
  const Vec2 gyp = chart_covariant_grad(K, chart, {x.x, x.y + delta});
  const Vec2 gym = chart_covariant_grad(K, chart, {x.x, x.y - delta});
  const double inv = 1.0 / (2.0 * delta);
  ChartHessian H;
  H.h11 = (gxp.x - gxm.x) * inv;
  H.h22 = (gyp.y - gym.y) * inv;
  // Symmetrize the two estimates of the mixed derivative.
  H.h12 = 0.5 * ((gyp.x - gym.x) + (gxp.y - gxm.y)) * inv;
  return H;
}

struct SeedResult {
  bool converged = false;
  Vec2 seed;
  ChartId chart = ChartId::North;
  CriticalPoint point{};
};

// Newton iteration on the chart gradient from one seed, damped by a
// backtracking line search on the intrinsic residual (undamped Newton can
// fall into period-2 cycles when the first step overshoots a saddle).
// Returns false on singular Hessian, line-search failure, or iteration cap.
bool newton_from_seed(const KField& K, ChartId chart, Vec2 x, double tol,
                      CriticalPoint& out) {
  for (int it = 0; it < kCritMaxIter; ++it) {
    const Vec2 g = chart_covariant_grad(K, chart, x);
    const double res = 0.5 * (1.0 + x.norm2()) * g.norm();
    if (res < tol) {
      const ChartHessian H = chart_hessian(K, chart, x);
      const double ephi = conformal_factor(x);
      double lo = 0, hi = 0;
      kernels::sym_eigen(H.h11 / ephi, H.h12 / ephi, H.h22 / ephi, lo, hi);
      out.z = stereo_to_sphere(chart, x);
      out.grad_residual = res;
      out.hess_eig[0] = lo;
      out.hess_eig[1] = hi;
      out.lap_K = lo + hi;
      out.hess_det = lo * hi;
      out.cls = out.lap_K < 0.0 ? CritClass::Minus : CritClass::Plus;
      out.index = (lo < 0.0 ? 1 : 0) + (hi < 0.0 ? 1 : 0);
      return true;
    }
    const ChartHessian H = chart_hessian(K, chart, x);
    const double det = H.h11 * H.h22 - H.h12 * H.h12;
    const double scale = std::abs(H.h11) + std::abs(H.h22) + std::abs(H.h12);
    if (std::abs(det) < 1e-14 * scale * scale || scale == 0.0) return false;
    Vec2 dx{(-H.h22 * g.x + H.h12 * g.y) / det, (H.h12 * g.x - H.h11 * g.y) / det};
    // Trust-region clamp: a unit chart step is already a macroscopic move.
    const double dn = dx.norm();
    if (dn > 1.0) dx = (1.0 / dn) * dx;
    // Armijo backtracking on the intrinsic residual.  The Newton direction
    // is a descent direction for |∇K|² wherever the Hessian is nonsingular,
    // so some step length must pass.
    bool accepted = false;
    for (double t = 1.0; t >= 1.0 / 1024.0; t *= 0.5) {
      const Vec2 xt = x + t * dx;
      if (xt.norm() > kCritEscapeRadius) continue;
      const Vec2 gt = chart_covariant_grad(K, chart, xt);
      const double rt = 0.5 * (1.0 + xt.norm2()) * gt.norm();
      if (rt <= (1.0 - 1e-4 * t) * res) {
        x = xt;
        accepted = true;
        break;
      }
    }
    if (!accepted) return false;
  }
  return false;
}

// Discrete C² scale of K: max over owned nodes of |K| + |∇K|_g + |Δ_g K|.
// Sets the unit for the Morse determinant floor.
double c2_scale(const KField& K, const GridSpec& spec) {
  double m = 0.0;
  for (ChartId chart : {ChartId::North, ChartId::South}) {
    for (int j = 0; j < spec.n; ++j) {
      for (int i = 0; i < spec.n; ++i) {
        const Vec2 x = spec.node(i, j);
        if (x.norm() > 1.0) continue;
        const Vec3 z = stereo_to_sphere(chart, x);
        const double v =
            std::abs(K.eval(z)) + K.sphere_grad(z).norm() + std::abs(K.laplacian(z));
        m = std::max(m, v);
      }
    }
  }
  return m;
}

} // namespace

Vec2 chart_covariant_grad(const KField& K, ChartId chart, Vec2 x) {
  // z(x) = (2x, ±(|x|²−1))/(1+|x|²);  ∂z/∂x_k = dz_k / (1+|x|²)², with the
  // raw vectors dz_k below.  ∂(K∘chart)/∂x_k = ⟨∇̄K(z), ∂z/∂x_k⟩, where the
  // ambient gradient suffices because z stays on the sphere.
  const double d = 1.0 + x.norm2();
  const double zsign = chart == ChartId::North ? 1.0 : -1.0;
  const Vec3 dz1{2.0 * (d - 2.0 * x.x * x.x), -4.0 * x.x * x.y, zsign * 4.0 * x.x};
  const Vec3 dz2{-4.0 * x.x * x.y, 2.0 * (d - 2.0 * x.y * x.y), zsign * 4.0 * x.y};
  const Vec3 g = K.ambient_grad(stereo_to_sphere(chart, x));
  const double inv = 1.0 / (d * d);
  return {dot(dz1, g) * inv, dot(dz2, g) * inv};
}

CriticalCensus find_critical_points(const KField& K, const GridSpec& spec) {
  const double tol = kCritNewtonTol * (1.0 + K.gradient_scale());
  const double merge_radius = 3.0 * spec.h;
  const size_t nn = static_cast<size_t>(spec.n) * spec.n;

  // Exact chart gradient at every node of both charts: used for seeding and
  // afterwards for the sign-change-cell completeness certificate.
  std::vector<double> g1[2], g2[2], gn[2];
  for (ChartId chart : {ChartId::North, ChartId::South}) {
    const int c = chart == ChartId::North ? 0 : 1;
    g1[c].resize(nn);
    g2[c].resize(nn);
    gn[c].resize(nn);
#pragma omp parallel for schedule(static)
    for (int j = 0; j < spec.n; ++j) {
      for (int i = 0; i < spec.n; ++i) {
        const Vec2 x = spec.node(i, j);
        const Vec2 g = chart_covariant_grad(K, chart, x);
        const int id = spec.idx(i, j);
        g1[c][id] = g.x;
        g2[c][id] = g.y;
        gn[c][id] = 0.5 * (1.0 + x.norm2()) * g.norm();
      }
    }
  }

  // ---- seeding: grid-local minima of |∇K|_g over the owned region --------
  std::vector<std::pair<ChartId, Vec2>> seeds;
  for (ChartId chart : {ChartId::North, ChartId::South}) {
    const int c = chart == ChartId::North ? 0 : 1;
    std::vector<std::pair<double, int>> chart_seeds; // (norm, id), for capping
    for (int j = 1; j < spec.n - 1; ++j) {
      for (int i = 1; i < spec.n - 1; ++i) {
        const Vec2 x = spec.node(i, j);
        if (x.norm() > 1.05) continue;
        const double v = gn[c][spec.idx(i, j)];
        bool is_min = true;
        for (int dj = -1; dj <= 1 && is_min; ++dj)
          for (int di = -1; di <= 1; ++di) {
            if (di == 0 && dj == 0) continue;
            if (gn[c][spec.idx(i + di, j + dj)] < v) {
              is_min = false;
              break;
            }
          }
        if (is_min) chart_seeds.emplace_back(v, spec.idx(i, j));
      }
    }
    std::sort(chart_seeds.begin(), chart_seeds.end());
    if (static_cast<int>(chart_seeds.size()) > kCritSeedCap)
      chart_seeds.resize(kCritSeedCap);
    for (const auto& [v, id] : chart_seeds)
      seeds.emplace_back(chart, spec.node(id % spec.n, id / spec.n));
  }

  // ---- seed-parallel Newton, results in per-seed slots --------------------
  std::vector<SeedResult> results(seeds.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t s = 0; s < static_cast<std::ptrdiff_t>(seeds.size()); ++s) {
    SeedResult& r = results[s];
    r.chart = seeds[s].first;
    r.seed = seeds[s].second;
    r.converged = newton_from_seed(K, r.chart, r.seed, tol, r.point);
  }

  // ---- serial merge in deterministic seed order ---------------------------
  CriticalCensus census;
  for (const SeedResult& r : results) {
    if (!r.converged) continue;
    bool merged = false;
    for (CriticalPoint& p : census.points) {
      if (geodesic_distance(p.z, r.point.z) < merge_radius) {
        if (r.point.grad_residual < p.grad_residual) p = r.point;
        merged = true;
        break;
      }
    }
    if (!merged) census.points.push_back(r.point);
  }

  // ---- completeness: every sign-change cell must be covered ---------------
  // Discrete Miranda certificate: one gradient component takes uniform
  // opposite signs on the two x-edges of the cell and the other does so on
  // the two y-edges (either assignment), which brackets a zero inside.
  // Corner-only sign mixing is NOT a certificate — a curved gradient-norm
  // valley crossing the cell diagonally flips both components with no zero.
  const auto opposite_edges = [](double a0, double a1, double b0, double b1) {
    return (a0 < 0.0 && a1 < 0.0 && b0 > 0.0 && b1 > 0.0) ||
           (a0 > 0.0 && a1 > 0.0 && b0 < 0.0 && b1 < 0.0);
  };
  for (ChartId chart : {ChartId::North, ChartId::South}) {
    const int c = chart == ChartId::North ? 0 : 1;
    for (int j = 0; j + 1 < spec.n; ++j) {
      for (int i = 0; i + 1 < spec.n; ++i) {
        const Vec2 center{spec.coord(i) + 0.5 * spec.h, spec.coord(j) + 0.5 * spec.h};
        if (center.norm() > 1.05) continue;
        const int i00 = spec.idx(i, j), i10 = spec.idx(i + 1, j);
        const int i01 = spec.idx(i, j + 1), i11 = spec.idx(i + 1, j + 1);
        const bool direct =
            opposite_edges(g1[c][i00], g1[c][i01], g1[c][i10], g1[c][i11]) &&
            opposite_edges(g2[c][i00], g2[c][i10], g2[c][i01], g2[c][i11]);
        const bool swapped =
            opposite_edges(g2[c][i00], g2[c][i01], g2[c][i10], g2[c][i11]) &&
            opposite_edges(g1[c][i00], g1[c][i10], g1[c][i01], g1[c][i11]);
        if (!direct && !swapped) continue;
        const Vec3 at = stereo_to_sphere(chart, center);
        bool covered = false;
        for (const CriticalPoint& p : census.points)
          if (geodesic_distance(p.z, at) < merge_radius) {
            covered = true;
            break;
          }
        for (const Vec3& u : census.unresolved_at)
          if (geodesic_distance(u, at) < merge_radius) {
            covered = true;
            break;
          }
        if (!covered) {
          census.unresolved = true;
          census.unresolved_at.push_back(at);
        }
      }
    }
  }
  return census;
}

NondegeneracyReport nondegeneracy_check(const KField& K, const GridSpec& spec) {
  NondegeneracyReport rep;
  rep.threshold = 10.0 * spec.h * spec.h;
  rep.min_value = std::numeric_limits<double>::infinity();
  rep.worst = {0, 0, 1};
  for (ChartId chart : {ChartId::North, ChartId::South}) {
    for (int j = 0; j < spec.n; ++j) {
      for (int i = 0; i < spec.n; ++i) {
        const Vec2 x = spec.node(i, j);
        if (x.norm() > 1.0) continue;
        const Vec3 z = stereo_to_sphere(chart, x);
        const double v = K.sphere_grad(z).norm() + std::abs(K.laplacian(z));
        if (v < rep.min_value) {
          rep.min_value = v;
          rep.worst = z;
        }
      }
    }
  }
  rep.pass = rep.min_value >= rep.threshold;
  return rep;
}

DegreeReport degree_report(const KField& K, const GridSpec& spec, bool require_morse) {
  const NondegeneracyReport nd = nondegeneracy_check(K, spec);
  if (!nd.pass) {
    std::ostringstream os;
    os << "field fails the nondegeneracy check: min |grad|+|lap| = " << nd.min_value
       << " < threshold " << nd.threshold << " near (" << nd.worst.x << ", " << nd.worst.y
       << ", " << nd.worst.z << ")";
    throw DomainError("degenerate-field", os.str());
  }

  const CriticalCensus census = find_critical_points(K, spec);
  if (census.unresolved) {
    std::ostringstream os;
    os << census.unresolved_at.size()
       << " sign-change cell(s) not covered by any converged critical point; first at ("
       << census.unresolved_at[0].x << ", " << census.unresolved_at[0].y << ", "
       << census.unresolved_at[0].z << ")";
    throw DomainError("unresolved-critical-region", os.str());
  }
  if (census.points.empty())
    throw DomainError("unresolved-critical-region",
                      "no critical points located; a smooth field on the sphere "
                      "must have at least two");

  DegreeReport rep;
  rep.points = census.points;
  const double floor = kMorseFloorFactor * c2_scale(K, spec);
  rep.min_det_ratio = std::numeric_limits<double>::infinity();
  rep.morse_ok = true;
  for (const CriticalPoint& p : rep.points) {
    const double ratio = std::abs(p.hess_det) / floor;
    rep.min_det_ratio = std::min(rep.min_det_ratio, ratio);
    if (ratio < 1.0) {
      rep.morse_ok = false;
      std::ostringstream os;
      os << "non-Morse critical point at (" << p.z.x << ", " << p.z.y << ", " << p.z.z
         << "): |det Hess| = " << std::abs(p.hess_det) << " below floor " << floor;
      rep.warnings.push_back(os.str());
    }
  }
  if (!rep.morse_ok && require_morse)
    throw DomainError("non-morse-point", rep.warnings.front());

  rep.deg_minus = 0;
  rep.poincare_hopf_total = 0;
  for (const CriticalPoint& p : rep.points) {
    const int sign = p.index % 2 == 0 ? 1 : -1;
    rep.poincare_hopf_total += sign;
    if (p.cls == CritClass::Minus) rep.deg_minus += sign;
  }
  rep.existence_indicator = -1 + rep.deg_minus;
  if (rep.morse_ok && rep.poincare_hopf_total != 2) {
    std::ostringstream os;
    os << "census of " << rep.points.size() << " Morse points sums to "
       << rep.poincare_hopf_total << " instead of 2; a critical point was missed";
    throw DomainError("incomplete-census", os.str());
  }
  return rep;
}

} // namespace sigma2
