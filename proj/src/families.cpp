#include "sigma2/families.hpp"

#include <cmath>
#include <limits>
#include <utility>

#include "sigma2/errors.hpp"

namespace sigma2 {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// κ = 4(2−p)/(p−1) and q = (p−1)/(2−p); note κq = 4 identically.
double kappa_of(double p) { return 4.0 * (2.0 - p) / (p - 1.0); }
double q_of(double p) { return (p - 1.0) / (2.0 - p); }

void require_p_open(double p, double lo, double hi, const char* what) {
  if (!(p > lo) || !(p < hi))
    throw InputError("bad-p", std::string(what) + ": p outside its valid range");
}

} // namespace

// --- Bubbles -----------------------------------------------------------------

double bubble_eval(const Bubble& b, Vec2 x) {
  if (!(b.a > 0)) throw InputError("bad-bubble", "bubble scale a must be positive");
  const Vec2 d = x - b.q;
  return 2.0 * std::log(b.a) - 2.0 * std::log(b.a * b.a + d.norm2()) + std::log(4.0);
}

Vec2 bubble_grad(const Bubble& b, Vec2 x) {
  if (!(b.a > 0)) throw InputError("bad-bubble", "bubble scale a must be positive");
  const Vec2 d = x - b.q;
  const double den = b.a * b.a + d.norm2();
  return {-4.0 * d.x / den, -4.0 * d.y / den};
}

// --- Radial catalog ----------------------------------------------------------

std::string family_tag(RadialFamily f) {
  switch (f) {
    case RadialFamily::GeneralLog: return "a";
    case RadialFamily::PureLog: return "b-log";
    case RadialFamily::Constant: return "b-const";
    case RadialFamily::ShiftedPowerLog: return "c";
    case RadialFamily::InnerPowerCap: return "d";
    case RadialFamily::OuterPowerCap: return "e";
  }
  throw InputError("bad-family", "unknown radial family enumerator");
}

RadialFamily parse_family_tag(const std::string& tag) {
  if (tag == "a") return RadialFamily::GeneralLog;
  if (tag == "b-log") return RadialFamily::PureLog;
  if (tag == "b-const") return RadialFamily::Constant;
  if (tag == "c") return RadialFamily::ShiftedPowerLog;
  if (tag == "d") return RadialFamily::InnerPowerCap;
  if (tag == "e") return RadialFamily::OuterPowerCap;
  throw InputError("bad-family", "unknown radial family tag '" + tag +
                                     "' (expected a, b-log, b-const, c, d, e)");
}

RadialSolution make_radial(RadialFamily f, double p, double C1, double C2) {
  RadialSolution rs;
  rs.family = f;
  rs.p = p;
  rs.C1 = C1;
  rs.C2 = C2;
  rs.rmin = 0.0;
  rs.rmax = kInf;
  switch (f) {
    case RadialFamily::GeneralLog:
      if (std::fabs(p - 1.0) > 1e-12)
        throw InputError("bad-p", "family a (C1 ln r + C2) exists only at p = 1");
      rs.p = 1.0;
      break;
    case RadialFamily::PureLog:
    case RadialFamily::Constant:
      if (!(p >= 1.0) || !(p <= 2.0))
        throw InputError("bad-p", "families b-log/b-const: p must lie in [1,2]");
      if (C2 != 0.0)
        throw InputError("bad-constant",
                         "families b-log/b-const have a single constant C1; C2 must be 0");
      break;
    case RadialFamily::ShiftedPowerLog:
      if (!(p > 1.0) || !(p <= 2.0))
        throw InputError("bad-p", "family c: p must lie in (1,2]");
      if (!(C1 > 0)) throw InputError("bad-constant", "family c requires C1 > 0");
      break;
    case RadialFamily::InnerPowerCap:
      require_p_open(p, 1.0, 2.0, "family d");
      if (!(C1 > 0)) throw InputError("bad-constant", "family d requires C1 > 0");
      rs.rmax = std::pow(C1, -1.0 / q_of(p));
      break;
    case RadialFamily::OuterPowerCap:
      require_p_open(p, 1.0, 2.0, "family e");
      if (!(C1 > 0)) throw InputError("bad-constant", "family e requires C1 > 0");
      rs.rmin = std::pow(C1, -1.0 / q_of(p));
      break;
  }
  return rs;
}

RadialValue radial_eval(const RadialSolution& rs, double r) {
  if (!(r > rs.rmin) || !(r < rs.rmax)) {
    throw DomainError("outside-validity",
                      "r outside the validity interval of family " + family_tag(rs.family));
  }
  RadialValue v;
  switch (rs.family) {
    case RadialFamily::GeneralLog: {
      v.u = rs.C1 * std::log(r) + rs.C2;
      v.du = rs.C1 / r;
      v.ddu = -rs.C1 / (r * r);
      break;
    }
    case RadialFamily::PureLog: {
      v.u = -4.0 * std::log(r) + rs.C1;
      v.du = -4.0 / r;
      v.ddu = 4.0 / (r * r);
      break;
    }
    case RadialFamily::Constant: {
      v.u = rs.C1;
      v.du = 0.0;
      v.ddu = 0.0;
      break;
    }
    case RadialFamily::ShiftedPowerLog: {
      const double pm1 = rs.p - 1.0;
      const double D = std::pow(r, pm1) + rs.C1;
      v.u = -(4.0 / pm1) * std::log(D) + rs.C2;
      v.du = -4.0 * std::pow(r, rs.p - 2.0) / D;
      v.ddu = 4.0 * std::pow(r, rs.p - 3.0) * (std::pow(r, pm1) - (rs.p - 2.0) * rs.C1) / (D * D);
      break;
    }
    case RadialFamily::InnerPowerCap: {
      const double q = q_of(rs.p), kap = kappa_of(rs.p);
      const double rq = std::pow(r, -q);
      const double s = rq - rs.C1; // > 0 on the validity interval
      v.u = kap * std::log(s) + rs.C2;
      v.du = -4.0 * std::pow(r, -q - 1.0) / s;
      v.ddu = 4.0 * std::pow(r, -q - 2.0) * ((q + 1.0) * s - q * rq) / (s * s);
      break;
    }
    case RadialFamily::OuterPowerCap: {
      const double q = q_of(rs.p), kap = kappa_of(rs.p);
      const double rq = std::pow(r, -q);
      const double s = rs.C1 - rq; // > 0 on the validity interval
      v.u = kap * std::log(s) + rs.C2;
      v.du = 4.0 * std::pow(r, -q - 1.0) / s;
      v.ddu = -4.0 * std::pow(r, -q - 2.0) * ((q + 1.0) * s + q * rq) / (s * s);
      break;
    }
  }
  return v;
}

EigenPair radial_eigenvalues(double u, double du, double ddu, double r) {
  if (!(r > 0)) throw InputError("bad-radius", "radial eigenvalues need r > 0");
  const double eu = std::exp(u);
  EigenPair e;
  e.lam1 = (du * du - 4.0 * ddu) / (4.0 * eu);            // radial direction
  e.lam2 = -du * (4.0 + r * du) / (4.0 * r * eu);          // tangential direction
  e.sig1 = e.lam1 + e.lam2;
  e.sig2 = e.lam1 * e.lam2;
  return e;
}

RoleMargins radial_cone_margins(const EigenPair& role_pair, double p) {
  if (!(p >= 1.0) || !(p <= 2.0)) throw InputError("bad-p", "cone margins need p in [1,2]");
  RoleMargins m;
  m.m1 = role_pair.lam2 - (p - 2.0) * role_pair.lam1;
  m.m2 = role_pair.lam1 - (p - 2.0) * role_pair.lam2;
  return m;
}

// --- Planar Möbius inversion ---------------------------------------------------

std::function<double(Vec2)> mobius_invert(std::function<double(Vec2)> u, PlanarMobius m) {
  if (!(m.lambda > 0)) throw InputError("bad-scale", "inversion scale lambda must be positive");
  return [u = std::move(u), m](Vec2 y) -> double {
    const Vec2 d = y - m.x;
    const double r2 = d.norm2();
    if (r2 == 0.0)
      throw DomainError("inversion-center", "planar inversion is singular at its center");
    const double lam2 = m.lambda * m.lambda;
    const Vec2 img = m.x + (lam2 / r2) * d;
    return u(img) - 2.0 * std::log(r2 / lam2); // −4 ln(|y−x|/λ)
  };
}

std::function<double(Vec2)> mobius_invert(const PlanarField& u, PlanarMobius m) {
  auto grid = u.grid;
  auto vals = u.v; // captured by value: the closure outlives the caller's field
  return mobius_invert(
      [grid, vals = std::move(vals)](Vec2 p) { return interp_bicubic(grid, vals, p); }, m);
}

// --- Sphere Möbius maps --------------------------------------------------------

MobiusSphere::MobiusSphere(Vec3 P, double t) : t_(t) {
  if (std::fabs(P.norm() - 1.0) > 1e-8)
    throw InputError("bad-center", "Mobius center P must be a unit vector");
  if (!(t >= 1.0)) throw InputError("bad-scale", "Mobius scale t must be >= 1");
  P_ = normalized(P);
  // Chart with origin at P: the north-type chart maps its origin to (0,0,−1),
  // so rotate P there first. Any rotation doing that gives the same map,
  // because x ↦ t·x commutes with rotations of the chart plane about 0.
  to_chart_ = rotation_taking(P_, Vec3{0, 0, -1});
  from_chart_ = to_chart_.transpose();
}

Vec3 MobiusSphere::apply(Vec3 z) const {
  if (t_ == 1.0) return z;
  const Vec3 w = to_chart_.apply(z);
  if (w.z > 1.0 - 1e-14) return z; // −P is a fixed point (chart infinity)
  const Vec2 x = sphere_to_stereo(ChartId::North, w);
  return from_chart_.apply(stereo_to_sphere(ChartId::North, t_ * x));
}

Vec3 MobiusSphere::apply_inverse(Vec3 z) const {
  if (t_ == 1.0) return z;
  const Vec3 w = to_chart_.apply(z);
  if (w.z > 1.0 - 1e-14) return z;
  const Vec2 x = sphere_to_stereo(ChartId::North, w);
  return from_chart_.apply(stereo_to_sphere(ChartId::North, (1.0 / t_) * x));
}

double MobiusSphere::log_factor(Vec3 z) const {
  // In the P-origin chart, ψ reads x ↦ t·x and ψ*g = c·g with
  //   ln c = 2 ln t + 2 [ ln(1+|x|²) − ln(1+t²|x|²) ].
  // For the far hemisphere switch to s = 1/|x|² to stay finite as x → ∞:
  //   ln c = 2 ln t + 2 [ log1p(s) − ln(s+t²) ].
  if (t_ == 1.0) return 0.0;
  const Vec3 w = to_chart_.apply(z);
  const double t2 = t_ * t_;
  if (w.z <= 0.0) {
    const double r2 = (1.0 + w.z) / (1.0 - w.z); // |x|² ∈ [0,1]
    return 2.0 * std::log(t_) + 2.0 * (std::log1p(r2) - std::log1p(t2 * r2));
  }
  const double s = (1.0 - w.z) / (1.0 + w.z); // 1/|x|² ∈ [0,1)
  return 2.0 * std::log(t_) + 2.0 * (std::log1p(s) - std::log(s + t2));
}

SphereField sphere_mobius_pullback(const SphereField& v, Vec3 P, double t) {
  if (!(t >= 1.0)) throw InputError("bad-scale", "pullback scale t must be >= 1");
  const MobiusSphere psi(P, t);
  if (t == 1.0) return v; // exact identity, no resampling error
  SphereField out(v.spec());
  const GridSpec& g = v.spec();
  for (int cid = 0; cid < 2; ++cid) {
    const ChartId c = cid == 0 ? ChartId::North : ChartId::South;
    auto& vals = out.chart(c);
#pragma omp parallel for schedule(static)
    for (int j = 0; j < g.n; ++j)
      for (int i = 0; i < g.n; ++i) {
        const Vec3 z = stereo_to_sphere(c, g.node(i, j));
        vals[g.idx(i, j)] = v.eval(psi.apply(z)) + psi.log_factor(z);
      }
  }
  return out;
}

std::function<double(Vec3)> sphere_mobius_pullback_fn(std::function<double(Vec3)> v, Vec3 P,
                                                      double t) {
  MobiusSphere psi(P, t);
  return [v = std::move(v), psi](Vec3 z) -> double {
    return v(psi.apply(z)) + psi.log_factor(z);
  };
}

// --- Annulus boundary-value problem -------------------------------------------

RadialSolution annulus_bvp(double p, double a, double b, double alpha, double beta) {
  if (!(p > 1.0) || !(p <= 2.0))
    throw InputError("bad-p", "annulus problem requires p in (1,2]");
  if (!(a > 0) || !(b > a))
    throw InputError("bad-annulus", "annulus radii must satisfy 0 < a < b");

  const double T = -4.0 * std::log(b / a); // β′ of the pure-log solution (negative)
  const double bp = beta - alpha;          // β′
  const double tie = 1e-13 * (1.0 + std::fabs(T));

  RadialSolution rs;
  if (std::fabs(bp) <= tie) {
    rs = make_radial(RadialFamily::Constant, p, alpha, 0.0);
  } else if (std::fabs(bp - T) <= tie) {
    rs = make_radial(RadialFamily::PureLog, p, alpha + 4.0 * std::log(a), 0.0);
  } else if (bp > T && bp < 0.0) {
    // Family c: u = −(4/(p−1)) ln(r^{p−1}+C1) + C2, C1 > 0 exactly on this band.
    const double pm1 = p - 1.0;
    const double delta = -bp; // α − β ∈ (0, 4 ln(b/a))
    const double E = std::exp(pm1 * delta / 4.0);
    const double C1 = (std::pow(b, pm1) - std::pow(a, pm1) * E) / (E - 1.0);
    if (!(C1 > 0) || !std::isfinite(C1))
      throw NumericsError("bvp-roundoff", "family-c constant collapsed under rounding");
    const double C2 = alpha + (4.0 / pm1) * std::log(std::pow(a, pm1) + C1);
    rs = make_radial(RadialFamily::ShiftedPowerLog, p, C1, C2);
  } else if (bp < T) {
    // Steeper decay than the pure log: only the inner power-cap family reaches it.
    if (p == 2.0)
      throw DomainError("unsolvable",
                        "at p = 2 the annulus problem needs 0 <= alpha-beta <= 4 ln(b/a); "
                        "alpha-beta is too large");
    const double q = q_of(p), kap = kappa_of(p);
    const double delta = -bp; // > 4 ln(b/a)
    const double F = std::exp(delta / kap);
    const double aq = std::pow(a, -q), bq = std::pow(b, -q);
    const double C1 = (F * bq - aq) / (F - 1.0);
    if (!(C1 > 0) || !(C1 < bq) || !std::isfinite(C1))
      throw NumericsError("bvp-roundoff", "family-d constant escaped (0, b^{-q})");
    const double C2 = alpha - kap * std::log(aq - C1);
    rs = make_radial(RadialFamily::InnerPowerCap, p, C1, C2);
  } else {
    // bp > 0: increasing data; only the outer power-cap family is increasing.
    if (p == 2.0)
      throw DomainError("unsolvable",
                        "at p = 2 the annulus problem needs 0 <= alpha-beta <= 4 ln(b/a); "
                        "the boundary data increase outward");
    const double q = q_of(p), kap = kappa_of(p);
    const double F = std::exp(-bp / kap); // e^{δ/κ} ∈ (0,1), δ = α−β < 0
    const double aq = std::pow(a, -q), bq = std::pow(b, -q);
    const double C1 = (aq - F * bq) / (1.0 - F);
    if (!(C1 > aq) || !std::isfinite(C1))
      throw NumericsError("bvp-roundoff", "family-e constant escaped (a^{-q}, inf)");
    const double C2 = alpha - kap * std::log(C1 - aq);
    rs = make_radial(RadialFamily::OuterPowerCap, p, C1, C2);
  }

  // Re-verify both endpoints from the closed form before handing the solution out.
  const double ua = radial_eval(rs, a).u;
  const double ub = radial_eval(rs, b).u;
  if (std::fabs(ua - alpha) > 1e-10 * (1.0 + std::fabs(alpha)) ||
      std::fabs(ub - beta) > 1e-10 * (1.0 + std::fabs(beta)))
    throw NumericsError("bvp-closure", "annulus solution failed to reproduce its boundary data");
  return rs;
}

} // namespace sigma2
