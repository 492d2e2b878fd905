#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "sigma2/geometry.hpp"
#include "sigma2/grid.hpp"
#include "sigma2/tensor.hpp"

using namespace sigma2;

TEST_CASE("eigenpairs of the metric-normalized 2x2 symmetric matrix") {
  // diag(1,2) with unit metric factor
  EigenPair e = eigen_sigma(1.0, 0.0, 2.0, 1.0);
  CHECK(e.lam1 == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(e.lam2 == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(e.sig1 == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(e.sig2 == doctest::Approx(2.0).epsilon(1e-15));

  // [[a,b],[b,a]] has eigenvalues a -/+ |b|
  e = eigen_sigma(2.0, -0.5, 2.0, 1.0);
  CHECK(e.lam1 == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(e.lam2 == doctest::Approx(2.5).epsilon(1e-14));

  // metric factor divides the eigenvalues, squares into sigma2
  e = eigen_sigma(1.0, 0.0, 2.0, 2.0);
  CHECK(e.lam1 == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(e.lam2 == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(e.sig2 == doctest::Approx(0.5).epsilon(1e-15));

  CHECK_THROWS_AS(eigen_sigma(1.0, 0.0, 1.0, 0.0), InputError);
  CHECK_THROWS_AS(eigen_sigma(1.0, 0.0, 1.0, -1.0), InputError);

  // invariants on random symmetric matrices
  std::mt19937 rng(77);
  std::uniform_real_distribution<double> d(-3.0, 3.0);
  for (int k = 0; k < 100; ++k) {
    const double a = d(rng), b = d(rng), c = d(rng);
    const EigenPair p = eigen_sigma(a, b, c, 1.0);
    CHECK(p.lam1 <= p.lam2);
    CHECK(p.sig1 == doctest::Approx(a + c).epsilon(1e-13));
    CHECK(p.sig2 == doctest::Approx(a * c - b * b).epsilon(1e-12));
    // eigenvalue residual: det(A - lam I) = 0
    for (double lam : {p.lam1, p.lam2}) {
      CHECK(std::fabs((a - lam) * (c - lam) - b * b) < 1e-11);
    }
  }
}

TEST_CASE("cone membership for the (p)-family of Garding cones") {
  // (1,1) sits strictly inside every cone up to p = 2
  ConeStatus s = cone_check(1.0, 1.0, 2.0);
  CHECK(s.pos == ConePosition::Interior);
  CHECK(s.m1 == doctest::Approx(1.0));
  CHECK(s.m2 == doctest::Approx(1.0));

  // (0,3) is on the boundary for p = 2 ...
  s = cone_check(0.0, 3.0, 2.0);
  CHECK(s.pos == ConePosition::Boundary);
  CHECK(s.m1 == doctest::Approx(3.0));
  CHECK(s.m2 == doctest::Approx(0.0));

  // ... and strictly inside for p = 3/2, with margins (3, 1.5)
  s = cone_check(0.0, 3.0, 1.5);
  CHECK(s.pos == ConePosition::Interior);
  CHECK(s.m1 == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(s.m2 == doctest::Approx(1.5).epsilon(1e-14));

  // argument order must not matter
  const ConeStatus swapped = cone_check(3.0, 0.0, 1.5);
  CHECK(swapped.pos == ConePosition::Interior);
  CHECK(swapped.m1 == doctest::Approx(3.0));

  // exterior point
  s = cone_check(-1.0, 3.0, 2.0);
  CHECK(s.pos == ConePosition::Exterior);

  // p = 1 degenerates to the half-plane sigma1 > 0
  s = cone_check(-2.0, 3.0, 1.0);
  CHECK(s.pos == ConePosition::Interior);
  s = cone_check(-3.0, 3.0, 1.0);
  CHECK(s.pos == ConePosition::Boundary);

  // tolerance band around the boundary
  s = cone_check(1e-10, 3.0, 2.0);
  CHECK(s.pos == ConePosition::Boundary);

  CHECK_THROWS_AS(cone_check(1.0, 1.0, 0.5), InputError);
  CHECK_THROWS_AS(cone_check(1.0, 1.0, 2.5), InputError);
}

TEST_CASE("Newton transform: catalogued example and trace identity") {
  Mat2 lam;
  lam.m[0][0] = 1.0;
  lam.m[1][1] = 2.0;
  const NewtonTransform nt = newton_transform(lam);
  CHECK(nt.t1.m[0][0] == doctest::Approx(2.0));
  CHECK(nt.t1.m[1][1] == doctest::Approx(1.0));
  CHECK(nt.t1.m[0][1] == doctest::Approx(0.0));
  CHECK(nt.contraction == doctest::Approx(4.0));  // = 2 sigma2
  CHECK(nt.two_sigma2 == doctest::Approx(4.0));

  std::mt19937 rng(123);
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  for (int k = 0; k < 100; ++k) {
    const double a = d(rng), b = d(rng), c = d(rng);
    Mat2 m;
    m.m[0][0] = a;
    m.m[0][1] = m.m[1][0] = b;
    m.m[1][1] = c;
    const NewtonTransform t = newton_transform(m);
    const double s2 = a * c - b * b;
    CHECK(t.contraction == doctest::Approx(2.0 * s2).epsilon(1e-12));
  }
}

TEST_CASE("flat conformal curvature: constants, the standard bubble, the log annulus") {
  // constant exponent: A = 0 identically, eigenvalues 0 after normalization
  {
    PlanarGrid pg{-1.0, -1.0, 2.0 / 64, 65, 65};
    std::vector<double> u(static_cast<size_t>(pg.nx) * pg.ny, 0.7);
    const auto f = schouten_flat(pg, u);
    for (size_t k = 0; k < f.lam1.size(); ++k) {
      CHECK(std::fabs(f.lam1[k]) < 1e-12);
      CHECK(std::fabs(f.lam2[k]) < 1e-12);
    }
  }

  // the standard bubble u = 2 ln(1/(1+|x|^2)) + ln 4 has lambda = (1,1)
  {
    PlanarGrid pg{-2.0, -2.0, 4.0 / 128, 129, 129};
    std::vector<double> u(static_cast<size_t>(pg.nx) * pg.ny);
    for (int j = 0; j < pg.ny; ++j)
      for (int i = 0; i < pg.nx; ++i) {
        const double x = pg.x0 + i * pg.h, y = pg.y0 + j * pg.h;
        u[static_cast<size_t>(j) * pg.nx + i] = std::log(4.0) - 2.0 * std::log1p(x * x + y * y);
      }
    const auto f = schouten_flat(pg, u);
    double err = 0;
    // skip the boundary ring where one-sided stencils degrade the order
    for (int j = 2; j < pg.ny - 2; ++j)
      for (int i = 2; i < pg.nx - 2; ++i) {
        const size_t k = static_cast<size_t>(j) * pg.nx + i;
        err = std::max(err, std::fabs(f.lam1[k] - 1.0));
        err = std::max(err, std::fabs(f.lam2[k] - 1.0));
      }
    CHECK(err < 5e-3);  // O(h^2) at h = 1/32
  }

  // u = -4 ln|x| away from the origin: both eigenvalues vanish
  {
    PlanarGrid pg{1.0, 1.0, 1.0 / 128, 129, 129};  // patch [1,2]^2, origin excluded
    std::vector<double> u(static_cast<size_t>(pg.nx) * pg.ny);
    for (int j = 0; j < pg.ny; ++j)
      for (int i = 0; i < pg.nx; ++i) {
        const double x = pg.x0 + i * pg.h, y = pg.y0 + j * pg.h;
        u[static_cast<size_t>(j) * pg.nx + i] = -2.0 * std::log(x * x + y * y);
      }
    const auto f = schouten_flat(pg, u);
    double err = 0;
    for (int j = 2; j < pg.ny - 2; ++j)
      for (int i = 2; i < pg.nx - 2; ++i) {
        const size_t k = static_cast<size_t>(j) * pg.nx + i;
        err = std::max(err, std::fabs(f.lam1[k]));
        err = std::max(err, std::fabs(f.lam2[k]));
      }
    CHECK(err < 1e-3);
  }
}

TEST_CASE("pointwise flat curvature probe matches the bubble exactly") {
  auto bubble = [](Vec2 p) {
    return std::log(4.0) - 2.0 * std::log1p(p.x * p.x + p.y * p.y);
  };
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> d(-1.5, 1.5);
  for (int k = 0; k < 25; ++k) {
    const Vec2 x{d(rng), d(rng)};
    const PointSchouten ps = schouten_flat_at(bubble, x, 1e-3);
    CHECK(std::fabs(ps.eig.sig2 - 1.0) < 1e-5);
    CHECK(std::fabs(ps.eig.lam1 - 1.0) < 1e-5);
    CHECK(std::fabs(ps.eig.lam2 - 1.0) < 1e-5);
  }
}

TEST_CASE("spherical conformal curvature: round metric and constant rescalings") {
  const GridSpec g = default_grid();

  // u = 0: the round metric, lambda = (1,1), sigma2 = 1 to rounding
  {
    const SphereField u = SphereField::sampled(g, [](Vec3) { return 0.0; });
    const SphereSchouten s = schouten_sphere(u);
    for (const auto* f : {&s.north, &s.south}) {
      for (size_t k = 0; k < f->lam1.size(); ++k) {
        CHECK(std::fabs(f->lam1[k] - 1.0) < 1e-12);
        CHECK(std::fabs(f->lam2[k] - 1.0) < 1e-12);
        CHECK(std::fabs(f->sig2[k] - 1.0) < 1e-12);
        CHECK(std::fabs(f->a12[k]) < 1e-14);
      }
    }
  }

  // u = c: eigenvalues scale by e^{-c}
  {
    const double c = 0.8;
    const SphereField u = SphereField::sampled(g, [c](Vec3) { return c; });
    const SphereSchouten s = schouten_sphere(u);
    const double want = std::exp(-c);
    for (size_t k = 0; k < s.north.lam1.size(); ++k) {
      CHECK(s.north.lam1[k] == doctest::Approx(want).epsilon(1e-12));
      CHECK(s.north.sig2[k] == doctest::Approx(want * want).epsilon(1e-12));
    }
  }

  // homogeneity on a generic smooth field: lambda(u + c) = e^{-c} lambda(u)
  {
    const double c = -0.35;
    auto base = [](Vec3 z) { return 0.3 * z.x - 0.2 * z.y * z.z + 0.15 * z.z * z.z; };
    const SphereField u = SphereField::sampled(g, base);
    SphereField uc = u;
    uc += c;
    const SphereSchouten s0 = schouten_sphere(u);
    const SphereSchouten s1 = schouten_sphere(uc);
    const double ec = std::exp(-c);
    for (size_t k = 0; k < s0.north.lam1.size(); ++k) {
      CHECK(s1.north.lam1[k] == doctest::Approx(ec * s0.north.lam1[k]).epsilon(1e-11));
      CHECK(s1.north.lam2[k] == doctest::Approx(ec * s0.north.lam2[k]).epsilon(1e-11));
    }
  }
}

TEST_CASE("pointwise spherical probe agrees with the grid kernel") {
  auto uf = [](Vec2 x) { return 0.25 * std::sin(x.x) * std::cos(0.7 * x.y); };
  const GridSpec g = default_grid();
  std::vector<double> u(g.num_nodes());
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i) u[g.idx(i, j)] = uf(g.node(i, j));
  const auto f = schouten_sphere_chart(g, u);
  // compare at interior nodes
  for (int j = 20; j < g.n - 20; j += 17)
    for (int i = 20; i < g.n - 20; i += 17) {
      const PointSchouten ps = schouten_sphere_at(uf, g.node(i, j), 1e-4);
      const size_t k = g.idx(i, j);
      CHECK(ps.eig.lam1 == doctest::Approx(f.lam1[k]).epsilon(5e-4));
      CHECK(ps.eig.lam2 == doctest::Approx(f.lam2[k]).epsilon(5e-4));
    }
}

TEST_CASE("eigenvalue discriminant never goes significantly negative") {
  const GridSpec g = default_grid();
  auto base = [](Vec3 z) { return 0.4 * z.x * z.y + 0.3 * z.z - 0.2 * z.x; };
  const SphereField u = SphereField::sampled(g, base);
  const SphereSchouten s = schouten_sphere(u);
  for (const auto* f : {&s.north, &s.south})
    for (size_t k = 0; k < f->lam1.size(); ++k) CHECK(f->lam2[k] >= f->lam1[k]);
}

TEST_CASE("cone census: round metric is fully interior") {
  const GridSpec g = default_grid();
  const SphereField u = SphereField::sampled(g, [](Vec3) { return 0.0; });
  const double frac = cone_census(u, schouten_sphere(u), 1e-8);
  CHECK(frac == doctest::Approx(1.0));
}

TEST_CASE("divergence of the Newton transform vanishes for solutions of constant curvature") {
  // u = 0 solves the round problem; the identity holds exactly at the discrete
  // level because every derivative stencil acts on constants.
  const GridSpec g = default_grid();
  const SphereField u0 = SphereField::sampled(g, [](Vec3) { return 0.0; });
  const DivergenceReport r0 = divergence_newton(u0);
  CHECK(r0.sup_owned < 1e-12);

  // generic smooth field: residual is O(h^2); check decay across two levels
  auto base = [](Vec3 z) { return 0.3 * z.x - 0.2 * z.y * z.z + 0.15 * z.z * z.z; };
  const GridSpec g1(2.0 * 1.2 / 64, 1.2), g2(2.0 * 1.2 / 128, 1.2);
  const DivergenceReport r1 = divergence_newton(SphereField::sampled(g1, base));
  const DivergenceReport r2 = divergence_newton(SphereField::sampled(g2, base));
  CHECK(r1.sup_owned / r2.sup_owned > 3.0);
}

TEST_CASE("Codazzi symmetry of the covariant derivative of A") {
  const GridSpec g = default_grid();
  const SphereField u0 = SphereField::sampled(g, [](Vec3) { return 0.0; });
  const CodazziReport c0 = codazzi_residual(u0);
  CHECK(c0.sup_owned < 1e-12);

  auto base = [](Vec3 z) { return 0.3 * z.x - 0.2 * z.y * z.z + 0.15 * z.z * z.z; };
  const GridSpec g1(2.0 * 1.2 / 64, 1.2), g2(2.0 * 1.2 / 128, 1.2);
  const CodazziReport c1 = codazzi_residual(SphereField::sampled(g1, base));
  const CodazziReport c2 = codazzi_residual(SphereField::sampled(g2, base));
  CHECK(c1.sup_owned / c2.sup_owned > 3.0);
}
