#include "sigma2/radial_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sigma2/errors.hpp"

namespace sigma2 {

namespace {

void validate_profile(const RadialProfile& prof, std::size_t min_samples, const char* who) {
  if (prof.r.size() != prof.u.size())
    throw InputError("bad-profile", std::string(who) + ": radii/values length mismatch");
  if (prof.r.size() < min_samples)
    throw InputError("bad-profile", std::string(who) + ": too few samples");
  if (!(prof.r.front() > 0))
    throw InputError("bad-profile", std::string(who) + ": radii must be positive");
  for (std::size_t k = 1; k < prof.r.size(); ++k)
    if (!(prof.r[k] > prof.r[k - 1]))
      throw InputError("bad-profile", std::string(who) + ": radii must be strictly increasing");
}

struct FitEval {
  double J = std::numeric_limits<double>::infinity(); // sum of squared residuals
  double dev = std::numeric_limits<double>::infinity();
  double C2 = 0;
};

// Residual statistics of u ≈ model + C2 with the optimal additive constant.
FitEval eval_shift_fit(const std::vector<double>& model, const std::vector<double>& u) {
  FitEval f;
  double mean = 0;
  for (std::size_t k = 0; k < u.size(); ++k) mean += u[k] - model[k];
  mean /= double(u.size());
  f.C2 = mean;
  f.J = 0;
  f.dev = 0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double e = u[k] - model[k] - mean;
    f.J += e * e;
    f.dev = std::max(f.dev, std::fabs(e));
  }
  return f;
}

// One family's model values at C2 = 0 for a given C1.
void family_model(RadialFamily fam, double p, double C1, const std::vector<double>& r,
                  const std::vector<double>& rpow, std::vector<double>& out) {
  const std::size_t n = r.size();
  out.resize(n);
  switch (fam) {
    case RadialFamily::ShiftedPowerLog: {
      const double c = -4.0 / (p - 1.0);
      for (std::size_t k = 0; k < n; ++k) out[k] = c * std::log(rpow[k] + C1);
      break;
    }
    case RadialFamily::InnerPowerCap: {
      const double kap = 4.0 * (2.0 - p) / (p - 1.0);
      for (std::size_t k = 0; k < n; ++k) out[k] = kap * std::log(rpow[k] - C1);
      break;
    }
    case RadialFamily::OuterPowerCap: {
      const double kap = 4.0 * (2.0 - p) / (p - 1.0);
      for (std::size_t k = 0; k < n; ++k) out[k] = kap * std::log(C1 - rpow[k]);
      break;
    }
    default:
      throw InputError("bad-family", "family_model: family has no C1 search");
  }
}

struct FamilySearch {
  RadialFamily fam;
  double C1 = 0;
  FitEval fit;
};

// Minimize the squared-residual objective over the searchable constant C1,
// reparametrized to s ∈ (0,1) (coarse grid, then golden-section refinement).
FamilySearch search_family(RadialFamily fam, double p, const RadialProfile& prof) {
  const std::size_t n = prof.r.size();
  const double rf = prof.r.front(), rb = prof.r.back();

  // powers of r entering the family formula, and the s ↦ C1 map
  std::vector<double> rpow(n);
  double scale = 0; // reference magnitude for the parametrization
  if (fam == RadialFamily::ShiftedPowerLog) {
    const double e = p - 1.0;
    for (std::size_t k = 0; k < n; ++k) rpow[k] = std::pow(prof.r[k], e);
    scale = std::pow(std::sqrt(rf * rb), e);
  } else {
    const double q = (p - 1.0) / (2.0 - p);
    for (std::size_t k = 0; k < n; ++k) rpow[k] = std::pow(prof.r[k], -q);
    scale = fam == RadialFamily::InnerPowerCap ? std::pow(rb, -q) : std::pow(rf, -q);
  }
  auto c1_of = [&](double s) {
    switch (fam) {
      case RadialFamily::ShiftedPowerLog: return scale * s / (1.0 - s);
      case RadialFamily::InnerPowerCap: return s * scale;  // C1 < rb^{−q}
      default: return scale / s;                           // C1 > rf^{−q} (OuterPowerCap)
    }
  };

  std::vector<double> model;
  auto J_of = [&](double s) {
    family_model(fam, p, c1_of(s), prof.r, rpow, model);
    return eval_shift_fit(model, prof.u).J;
  };

  const int grid = 256;
  double best_s = 0.5, best_J = std::numeric_limits<double>::infinity();
  for (int k = 0; k < grid; ++k) {
    const double s = (k + 0.5) / grid;
    const double J = J_of(s);
    if (J < best_J) {
      best_J = J;
      best_s = s;
    }
  }
  double lo = std::max(5e-4, best_s - 1.5 / grid);
  double hi = std::min(1.0 - 5e-4, best_s + 1.5 / grid);
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = J_of(x1), f2 = J_of(x2);
  for (int it = 0; it < 90; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = J_of(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = J_of(x2);
    }
  }
  const double s = f1 < f2 ? x1 : x2;

  FamilySearch out;
  out.fam = fam;
  out.C1 = c1_of(s);
  family_model(fam, p, out.C1, prof.r, rpow, model);
  out.fit = eval_shift_fit(model, prof.u);
  return out;
}

} // namespace

RadialProfile tabulate_radial(const RadialSolution& rs, const std::vector<double>& radii) {
  RadialProfile prof;
  prof.r = radii;
  prof.u.reserve(radii.size());
  for (double r : radii) prof.u.push_back(radial_eval(rs, r).u);
  return prof;
}

ClassifyResult classify_profile(const RadialProfile& prof, double p) {
  validate_profile(prof, 8, "classify_profile");
  if (!(p > 1.0) || !(p <= 2.0))
    throw InputError("bad-p", "classify_profile requires p in (1,2]");
  const std::size_t n = prof.r.size();

  // constant family: the additive constant is the single parameter
  double cmean = 0;
  for (double v : prof.u) cmean += v;
  cmean /= double(n);
  double cdev = 0;
  for (double v : prof.u) cdev = std::max(cdev, std::fabs(v - cmean));

  // pure log family
  double lmean = 0;
  for (std::size_t k = 0; k < n; ++k) lmean += prof.u[k] + 4.0 * std::log(prof.r[k]);
  lmean /= double(n);
  double ldev = 0;
  for (std::size_t k = 0; k < n; ++k)
    ldev = std::max(ldev, std::fabs(prof.u[k] + 4.0 * std::log(prof.r[k]) - lmean));

  // the simple families win outright when they reproduce the data exactly;
  // this breaks the degeneracy against power families in flat limits
  if (cdev <= 1e-9)
    return {make_radial(RadialFamily::Constant, p, cmean, 0.0), cdev};
  if (ldev <= 1e-9)
    return {make_radial(RadialFamily::PureLog, p, lmean, 0.0), ldev};

  std::vector<FamilySearch> searched;
  searched.push_back(search_family(RadialFamily::ShiftedPowerLog, p, prof));
  if (p < 2.0) {
    searched.push_back(search_family(RadialFamily::InnerPowerCap, p, prof));
    searched.push_back(search_family(RadialFamily::OuterPowerCap, p, prof));
  }

  const FamilySearch* best = &searched[0];
  for (const FamilySearch& fs : searched)
    if (fs.fit.dev < best->fit.dev) best = &fs;

  double overall = std::min({best->fit.dev, cdev, ldev});
  if (overall > 1e-6)
    throw DomainError("not-boundary-radial",
                      "no catalog family fits the samples: not a Gamma_p-boundary radial "
                      "solution (best sup deviation " +
                          std::to_string(overall) + ")");

  if (cdev <= best->fit.dev && cdev <= ldev)
    return {make_radial(RadialFamily::Constant, p, cmean, 0.0), cdev};
  if (ldev <= best->fit.dev)
    return {make_radial(RadialFamily::PureLog, p, lmean, 0.0), ldev};
  return {make_radial(best->fam, p, best->C1, best->fit.C2), best->fit.dev};
}

MonotonicityReport monotonicity_check(const RadialProfile& prof) {
  validate_profile(prof, 2, "monotonicity_check");
  const std::size_t n = prof.r.size();
  MonotonicityReport rep;
  rep.worst_nonincreasing_slack = std::numeric_limits<double>::infinity();
  rep.worst_log_slack = std::numeric_limits<double>::infinity();

  // Over pairs i < j the two slacks are
  //   u_i − u_j                     (>= 0 iff u non-increasing)
  //   (u_j + 4 ln r_j) − (u_i + 4 ln r_i)   (>= 0 iff u + 4 ln r non-decreasing)
  // so running extrema of u and of u + 4 ln r give the worst pair in O(n).
  double run_min_u = prof.u[0], run_min_r = prof.r[0];
  double run_max_b = prof.u[0] + 4.0 * std::log(prof.r[0]), run_max_r = prof.r[0];
  for (std::size_t j = 1; j < n; ++j) {
    const double s1 = run_min_u - prof.u[j];
    if (s1 < rep.worst_nonincreasing_slack) {
      rep.worst_nonincreasing_slack = s1;
      rep.nonincreasing_pair[0] = run_min_r;
      rep.nonincreasing_pair[1] = prof.r[j];
    }
    const double bj = prof.u[j] + 4.0 * std::log(prof.r[j]);
    const double s2 = bj - run_max_b;
    if (s2 < rep.worst_log_slack) {
      rep.worst_log_slack = s2;
      rep.log_pair[0] = run_max_r;
      rep.log_pair[1] = prof.r[j];
    }
    if (prof.u[j] < run_min_u) {
      run_min_u = prof.u[j];
      run_min_r = prof.r[j];
    }
    if (bj > run_max_b) {
      run_max_b = bj;
      run_max_r = prof.r[j];
    }
  }
  rep.nonincreasing_ok = rep.worst_nonincreasing_slack >= -1e-12;
  rep.log_bound_ok = rep.worst_log_slack >= -1e-12;
  return rep;
}

std::string bocher_branch_name(BocherBranch b) {
  switch (b) {
    case BocherBranch::Extendable: return "extendable";
    case BocherBranch::Singular: return "singular";
    case BocherBranch::Undetermined: return "undetermined";
  }
  return "undetermined";
}

BocherReport bocher_analyze(const RadialProfile& prof, double p) {
  validate_profile(prof, 8, "bocher_analyze");
  if (!(p > 1.0) || !(p <= 2.0))
    throw InputError("bad-p", "bocher_analyze requires p in (1,2]");
  if (!(prof.r.front() <= 1e-3))
    throw InputError("radii-too-large",
                     "singularity analysis needs samples down to r <= 1e-3");

  const std::size_t n = prof.r.size();
  const double r0 = prof.r.front();

  // the innermost decade of radii drives the branch decision
  std::size_t decade_end = 0;
  while (decade_end < n && prof.r[decade_end] <= 10.0 * r0) ++decade_end;
  if (decade_end < 3) decade_end = std::min<std::size_t>(8, n);

  std::vector<double> v(decade_end);
  for (std::size_t k = 0; k < decade_end; ++k) v[k] = prof.u[k] + 4.0 * std::log(prof.r[k]);

  double vmin = v[0], vmax = v[0];
  for (double x : v) {
    vmin = std::min(vmin, x);
    vmax = std::max(vmax, x);
  }
  const double osc = vmax - vmin;
  // largest decrease of v with increasing r (v should be non-decreasing for
  // either genuine branch; a big decrease marks oscillation)
  double run_max = v[0], viol = 0;
  for (std::size_t k = 1; k < decade_end; ++k) {
    viol = std::max(viol, run_max - v[k]);
    run_max = std::max(run_max, v[k]);
  }

  BocherReport rep;
  rep.holder_exponent = p < 2.0 ? p - 1.0 : 1.0;

  if (osc <= 1e-4) {
    // u + 4 ln r is Cauchy: singular branch. Extrapolate the limit from three
    // geometrically spaced radii (exact for a pure power-law tail).
    rep.branch = BocherBranch::Singular;
    std::size_t k1 = 1;
    while (k1 < n && prof.r[k1] < 2.0 * r0) ++k1;
    std::size_t k2 = k1 < n ? k1 + 1 : n;
    while (k2 < n && prof.r[k2] < 2.0 * prof.r[k1]) ++k2;
    double a = v[0];
    if (k1 < n && k2 < n) {
      const double x0 = prof.u[k2] + 4.0 * std::log(prof.r[k2]); // farthest
      const double x1 = prof.u[k1] + 4.0 * std::log(prof.r[k1]);
      const double x2 = v[0]; // closest to the singularity
      const double denom = (x2 - x1) - (x1 - x0);
      if (std::fabs(denom) > 1e-13 * (1.0 + std::fabs(x2)))
        a = x2 - (x2 - x1) * (x2 - x1) / denom;
    }
    rep.a = a;
    rep.fit_residual = osc;
    return rep;
  }

  if (viol <= 1e-3) {
    // u + 4 ln r diverges monotonically: u itself extends. Report the Hölder
    // seminorm of w = exp(−(p−1)u/4) near the origin (r <= 1/2), plus the
    // residual of the two-parameter model w ≈ w0 + m·r^γ on the decade.
    rep.branch = BocherBranch::Extendable;
    const double gamma = rep.holder_exponent;
    const double c = -(p - 1.0) / 4.0;
    std::vector<double> w(n);
    for (std::size_t k = 0; k < n; ++k) w[k] = std::exp(c * prof.u[k]);

    std::size_t m_end = 0;
    while (m_end < n && prof.r[m_end] <= 0.5) ++m_end;
    if (m_end < 2) m_end = n;
    double semi = 0;
    for (std::size_t i = 0; i < m_end; ++i)
      for (std::size_t j = i + 1; j < m_end; ++j)
        semi = std::max(semi,
                        std::fabs(w[i] - w[j]) / std::pow(prof.r[j] - prof.r[i], gamma));
    rep.holder_seminorm = semi;

    // least-squares line in the variable t = r^γ
    double st = 0, stt = 0, sw = 0, swt = 0;
    for (std::size_t k = 0; k < decade_end; ++k) {
      const double t = std::pow(prof.r[k], gamma);
      st += t;
      stt += t * t;
      sw += w[k];
      swt += w[k] * t;
    }
    const double nn = double(decade_end);
    const double det = nn * stt - st * st;
    double w0 = sw / nn, slope = 0;
    if (std::fabs(det) > 1e-30) {
      slope = (nn * swt - st * sw) / det;
      w0 = (sw - slope * st) / nn;
    }
    double res = 0;
    for (std::size_t k = 0; k < decade_end; ++k)
      res = std::max(res, std::fabs(w[k] - w0 - slope * std::pow(prof.r[k], gamma)));
    rep.fit_residual = res;
    return rep;
  }

  rep.branch = BocherBranch::Undetermined;
  rep.fit_residual = viol;
  return rep;
}

} // namespace sigma2
