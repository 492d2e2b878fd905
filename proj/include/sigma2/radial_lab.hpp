#pragma once

// Analysis of sampled radial profiles u(r):
//
//   * classify_profile — least-squares identification against the closed-form
//     boundary-of-cone catalog (families b-const, b-log, c, and for p < 2 also
//     d, e). The fit is linear in the additive constant once family and C₁ are
//     fixed, so the search is one-dimensional per family.
//   * monotonicity_check — the two-sided bound satisfied by every p = 2
//     boundary solution: for c < d,  0 ≤ u(c) − u(d) ≤ 4 ln(d/c), i.e. u is
//     non-increasing while u + 4 ln r is non-decreasing.
//   * bocher_analyze — dichotomy at an isolated singularity r → 0: either
//     u + 4 ln r converges (singular branch, u = −4 ln r + a + o(1); a is
//     extrapolated), or u extends continuously; then w = exp(−(p−1)u/4) is
//     Hölder with exponent p−1 (exponent 1 at p = 2) and its seminorm is
//     reported. Profiles that oscillate fit neither branch and come back
//     "undetermined".

#include <string>
#include <vector>

#include "sigma2/families.hpp"

namespace sigma2 {

struct RadialProfile {
  std::vector<double> r; // strictly increasing, > 0
  std::vector<double> u;
};

// Tabulate a closed-form solution into a profile (helper for round-trips).
RadialProfile tabulate_radial(const RadialSolution& rs, const std::vector<double>& radii);

struct ClassifyResult {
  RadialSolution fit;
  double deviation = 0; // sup-norm over the samples
};

// Identify the catalog family that reproduces the samples. Throws InputError
// for malformed profiles (need >= 8 samples, increasing radii) or p outside
// (1,2]; throws DomainError("not-boundary-radial") when no family fits the
// samples below 1e-6 sup-deviation.
ClassifyResult classify_profile(const RadialProfile& prof, double p);

struct MonotonicityReport {
  bool nonincreasing_ok = true; // u(c) >= u(d) whenever c < d
  bool log_bound_ok = true;     // u(c) - u(d) <= 4 ln(d/c)
  // Worst slack of each bound over all sample pairs (negative = violated),
  // with the radii of the offending pair.
  double worst_nonincreasing_slack = 0;
  double worst_log_slack = 0;
  double nonincreasing_pair[2] = {0, 0};
  double log_pair[2] = {0, 0};
};

// Needs >= 2 samples. Violations are reported, never thrown.
MonotonicityReport monotonicity_check(const RadialProfile& prof);

enum class BocherBranch { Extendable, Singular, Undetermined };
std::string bocher_branch_name(BocherBranch b);

struct BocherReport {
  BocherBranch branch = BocherBranch::Undetermined;
  double a = 0;               // singular: extrapolated lim (u + 4 ln r)
  double holder_exponent = 0; // p-1 for p < 2, 1 for p = 2
  double holder_seminorm = 0; // extendable: seminorm of w over r <= 1/2
  double fit_residual = 0;    // branch-specific diagnostic (see .cpp)
};

// Requires samples reaching r <= 1e-3 (InputError otherwise) and p in (1,2].
BocherReport bocher_analyze(const RadialProfile& prof, double p);

} // namespace sigma2
