#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "sigma2/families.hpp"
#include "sigma2/radial_lab.hpp"

using namespace sigma2;

namespace {

std::vector<double> log_spaced(double lo, double hi, int count) {
  std::vector<double> r(count);
  for (int k = 0; k < count; ++k) r[k] = lo * std::pow(hi / lo, double(k) / (count - 1));
  return r;
}

RadialProfile profile_of(const std::vector<double>& r, const std::function<double(double)>& f) {
  RadialProfile p;
  p.r = r;
  for (double rk : r) p.u.push_back(f(rk));
  return p;
}

} // namespace

TEST_CASE("classification pinpoints the pinned catalog cases") {
  // u = -4 ln(r+1) is the shifted-power-log family at p = 2 with C1 = 1
  {
    const auto prof =
        profile_of(log_spaced(0.3, 3.0, 60), [](double r) { return -4.0 * std::log(r + 1.0); });
    const ClassifyResult res = classify_profile(prof, 2.0);
    CHECK(res.fit.family == RadialFamily::ShiftedPowerLog);
    CHECK(std::fabs(res.fit.C1 - 1.0) < 1e-6);
    CHECK(std::fabs(res.fit.C2) < 1e-6);
    CHECK(res.deviation < 1e-9);
  }
  // u ≡ 3
  {
    const auto prof = profile_of(log_spaced(0.5, 2.0, 20), [](double) { return 3.0; });
    const ClassifyResult res = classify_profile(prof, 2.0);
    CHECK(res.fit.family == RadialFamily::Constant);
    CHECK(res.fit.C1 == doctest::Approx(3.0).epsilon(1e-14));
  }
  // u = -4 ln r + 0.7
  {
    const auto prof = profile_of(log_spaced(0.5, 2.0, 20),
                                 [](double r) { return -4.0 * std::log(r) + 0.7; });
    const ClassifyResult res = classify_profile(prof, 1.6);
    CHECK(res.fit.family == RadialFamily::PureLog);
    CHECK(res.fit.C1 == doctest::Approx(0.7).epsilon(1e-12));
  }
  // u = r solves nothing on the cone boundary
  {
    const auto prof = profile_of(log_spaced(0.3, 3.0, 40), [](double r) { return r; });
    CHECK_THROWS_AS(classify_profile(prof, 2.0), DomainError);
    try {
      classify_profile(prof, 2.0);
    } catch (const DomainError& e) {
      CHECK(e.kind() == "not-boundary-radial");
    }
  }
  // validation
  RadialProfile tiny;
  tiny.r = {1.0, 2.0};
  tiny.u = {0.0, 0.0};
  CHECK_THROWS_AS(classify_profile(tiny, 2.0), InputError);
  const auto ok = profile_of(log_spaced(0.5, 2.0, 20), [](double) { return 1.0; });
  CHECK_THROWS_AS(classify_profile(ok, 1.0), InputError);
  CHECK_THROWS_AS(classify_profile(ok, 2.3), InputError);
}

TEST_CASE("classification round-trips random catalog members") {
  std::mt19937 rng(4242);
  std::uniform_real_distribution<double> dc1(0.6, 1.8), dc2(-0.5, 0.5), dp(1.3, 1.9);
  std::uniform_int_distribution<int> dfam(0, 4);

  for (int trial = 0; trial < 20; ++trial) {
    const int which = dfam(rng);
    RadialFamily fam;
    double p = dp(rng);
    double C1 = dc1(rng), C2 = dc2(rng);
    switch (which) {
      case 0:
        fam = RadialFamily::Constant;
        C2 = 0.0;
        break;
      case 1:
        fam = RadialFamily::PureLog;
        C2 = 0.0;
        break;
      case 2:
        fam = RadialFamily::ShiftedPowerLog;
        if (trial % 2 == 0) p = 2.0;
        break;
      case 3:
        fam = RadialFamily::InnerPowerCap;
        break;
      default:
        fam = RadialFamily::OuterPowerCap;
        break;
    }
    const RadialSolution truth = make_radial(fam, p, C1, C2);

    double lo = 0.3, hi = 3.0;
    if (fam == RadialFamily::InnerPowerCap) {
      lo = 0.2 * truth.rmax;
      hi = 0.6 * truth.rmax;
    } else if (fam == RadialFamily::OuterPowerCap) {
      lo = 1.5 * truth.rmin;
      hi = 6.0 * truth.rmin;
    }
    const RadialProfile prof = tabulate_radial(truth, log_spaced(lo, hi, 60));
    const ClassifyResult res = classify_profile(prof, p);

    CHECK(res.fit.family == fam);
    CHECK(std::fabs(res.fit.C1 - truth.C1) < 1e-6);
    CHECK(std::fabs(res.fit.C2 - truth.C2) < 1e-6);
    CHECK(res.deviation < 1e-8);
  }
}

TEST_CASE("monotonicity bounds of the p = 2 family") {
  const auto radii = log_spaced(0.2, 4.0, 40);

  // u = -4 ln r: the log-side bound is exactly tight, the decrease side strict
  {
    const auto rep = monotonicity_check(
        profile_of(radii, [](double r) { return -4.0 * std::log(r); }));
    CHECK(rep.nonincreasing_ok);
    CHECK(rep.log_bound_ok);
    CHECK(std::fabs(rep.worst_log_slack) < 1e-12);
    // the tightest decrease is between the closest pair of radii
    CHECK(rep.worst_nonincreasing_slack > 0.25);
  }
  // u = -4 ln(r+1): strictly inside both bounds
  {
    const auto rep = monotonicity_check(
        profile_of(radii, [](double r) { return -4.0 * std::log(r + 1.0); }));
    CHECK(rep.nonincreasing_ok);
    CHECK(rep.log_bound_ok);
    CHECK(rep.worst_nonincreasing_slack > 0.01);
    CHECK(rep.worst_log_slack > 0.01);
  }
  // u = +ln r: increasing, flagged
  {
    const auto rep = monotonicity_check(profile_of(radii, [](double r) { return std::log(r); }));
    CHECK_FALSE(rep.nonincreasing_ok);
    CHECK(rep.worst_nonincreasing_slack < -1.0);
    CHECK(rep.nonincreasing_pair[0] < rep.nonincreasing_pair[1]);
  }
  // every p = 2 catalog family passes at all sampled pairs
  for (const RadialSolution& rs :
       {make_radial(RadialFamily::Constant, 2.0, 0.4, 0.0),
        make_radial(RadialFamily::PureLog, 2.0, -0.3, 0.0),
        make_radial(RadialFamily::ShiftedPowerLog, 2.0, 1.2, 0.3)}) {
    const auto rep = monotonicity_check(tabulate_radial(rs, radii));
    CHECK(rep.nonincreasing_ok);
    CHECK(rep.log_bound_ok);
  }

  RadialProfile one;
  one.r = {1.0};
  one.u = {0.0};
  CHECK_THROWS_AS(monotonicity_check(one), InputError);
}

TEST_CASE("singularity dichotomy at r -> 0") {
  const auto radii = log_spaced(1e-4, 0.5, 80);

  // u = -4 ln r + 5 at p = 2: singular with constant 5
  {
    const auto rep = bocher_analyze(
        profile_of(radii, [](double r) { return -4.0 * std::log(r) + 5.0; }), 2.0);
    CHECK(rep.branch == BocherBranch::Singular);
    CHECK(std::fabs(rep.a - 5.0) < 1e-4);
    CHECK(rep.holder_exponent == doctest::Approx(1.0));
  }
  // same profile read at p = 3/2 (the inner-power-cap family with C1 = 0
  // collapses to -4 ln r + a): singular with a = 7
  {
    const auto rep = bocher_analyze(
        profile_of(radii, [](double r) { return -4.0 * std::log(r) + 7.0; }), 1.5);
    CHECK(rep.branch == BocherBranch::Singular);
    CHECK(std::fabs(rep.a - 7.0) < 1e-3);
    CHECK(rep.holder_exponent == doctest::Approx(0.5));
  }
  // singular with a power-law correction small enough to pass the Cauchy
  // gate: the extrapolation removes the tail (plain v(r_min) would be 3e-6 off)
  {
    const auto rep = bocher_analyze(
        profile_of(radii, [](double r) { return -4.0 * std::log(r) + 2.0 + 0.03 * r; }), 2.0);
    CHECK(rep.branch == BocherBranch::Singular);
    CHECK(std::fabs(rep.a - 2.0) < 1e-6);
  }
  // u ≡ 0: extendable with zero seminorm
  {
    const auto rep = bocher_analyze(profile_of(radii, [](double) { return 0.0; }), 2.0);
    CHECK(rep.branch == BocherBranch::Extendable);
    CHECK(rep.holder_seminorm == doctest::Approx(0.0));
  }
  // the bounded family (c) profile: extendable with a finite positive seminorm
  {
    const RadialSolution rs = make_radial(RadialFamily::ShiftedPowerLog, 1.5, 1.0, 0.3);
    const auto rep = bocher_analyze(tabulate_radial(rs, radii), 1.5);
    CHECK(rep.branch == BocherBranch::Extendable);
    CHECK(rep.holder_exponent == doctest::Approx(0.5));
    CHECK(rep.holder_seminorm > 0.0);
    CHECK(std::isfinite(rep.holder_seminorm));
    // w = exp(-(p-1)u/4) for family (c) is exactly linear in r^{p-1}, so the
    // two-parameter fit on the decade is essentially exact
    CHECK(rep.fit_residual < 1e-10);
  }
  // oscillation fits neither branch
  {
    const auto rep = bocher_analyze(
        profile_of(radii,
                   [](double r) { return -4.0 * std::log(r) + 0.5 * std::sin(3.0 * std::log(r)); }),
        2.0);
    CHECK(rep.branch == BocherBranch::Undetermined);
    CHECK(rep.fit_residual > 0.1);
  }
  // samples must reach small radii
  CHECK_THROWS_AS(
      bocher_analyze(profile_of(log_spaced(0.01, 0.5, 30), [](double) { return 0.0; }), 2.0),
      InputError);

  CHECK(bocher_branch_name(BocherBranch::Singular) == "singular");
  CHECK(bocher_branch_name(BocherBranch::Extendable) == "extendable");
  CHECK(bocher_branch_name(BocherBranch::Undetermined) == "undetermined");
}
