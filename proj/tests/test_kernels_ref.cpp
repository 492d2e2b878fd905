#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "sigma2/grid.hpp"
#include "sigma2/kernels.hpp"

using namespace sigma2;
namespace K = sigma2::kernels;

namespace {

// smooth but non-symmetric field so stencil bugs cannot cancel
std::vector<double> sample_field(const GridSpec& g, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> amp(-0.4, 0.4), freq(0.5, 2.0), ph(0, 6.28);
  const double a1 = amp(rng), a2 = amp(rng), a3 = amp(rng);
  const double f1 = freq(rng), f2 = freq(rng), p1 = ph(rng), p2 = ph(rng);
  std::vector<double> v(g.num_nodes());
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i) {
      const Vec2 x = g.node(i, j);
      v[g.idx(i, j)] =
          a1 * std::sin(f1 * x.x + p1) + a2 * std::cos(f2 * x.y + p2) + a3 * x.x * x.y;
    }
  return v;
}

}  // namespace

TEST_CASE("serial and parallel derivative kernels agree bitwise") {
  const GridSpec g = default_grid();
  for (unsigned seed : {1u, 2u, 3u}) {
    const std::vector<double> u = sample_field(g, seed);
    K::DerivFields a, b;
    K::derivative_fields(u.data(), g.n, g.n, g.h, a);
    K::serial::derivative_fields(u.data(), g.n, g.n, g.h, b);
    REQUIRE(a.d1.size() == b.d1.size());
    for (size_t k = 0; k < a.d1.size(); ++k) {
      CHECK(a.d1[k] == b.d1[k]);
      CHECK(a.d2[k] == b.d2[k]);
      CHECK(a.d11[k] == b.d11[k]);
      CHECK(a.d22[k] == b.d22[k]);
      CHECK(a.d12[k] == b.d12[k]);
    }
  }
}

TEST_CASE("derivative kernels reproduce analytic derivatives at O(h^2)") {
  // sanity on the stencils themselves (quadratics are exact in the interior)
  const GridSpec g(2.0 * 1.2 / 64, 1.2);
  std::vector<double> u(g.num_nodes());
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i) {
      const Vec2 x = g.node(i, j);
      u[g.idx(i, j)] = 1.5 + 0.3 * x.x - 0.7 * x.y + 0.25 * x.x * x.x +
                       0.4 * x.x * x.y - 0.1 * x.y * x.y;
    }
  K::DerivFields d;
  K::derivative_fields(u.data(), g.n, g.n, g.h, d);
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i) {
      const Vec2 x = g.node(i, j);
      const int k = g.idx(i, j);
      CHECK(d.d1[k] == doctest::Approx(0.3 + 0.5 * x.x + 0.4 * x.y).epsilon(1e-11));
      CHECK(d.d2[k] == doctest::Approx(-0.7 + 0.4 * x.x - 0.2 * x.y).epsilon(1e-11));
      CHECK(d.d11[k] == doctest::Approx(0.5).epsilon(1e-10));
      CHECK(d.d22[k] == doctest::Approx(-0.2).epsilon(1e-10));
      CHECK(d.d12[k] == doctest::Approx(0.4).epsilon(1e-10));
    }
}

TEST_CASE("serial and parallel conformal-curvature kernels agree bitwise") {
  const GridSpec g = default_grid();
  const std::vector<double> u = sample_field(g, 42);
  K::SchoutenField a, b;
  K::schouten_sphere_chart(g, u, a);
  K::serial::schouten_sphere_chart(g, u, b);
  for (size_t k = 0; k < a.a11.size(); ++k) {
    CHECK(a.a11[k] == b.a11[k]);
    CHECK(a.a12[k] == b.a12[k]);
    CHECK(a.a22[k] == b.a22[k]);
    CHECK(a.lam1[k] == b.lam1[k]);
    CHECK(a.lam2[k] == b.lam2[k]);
    CHECK(a.sig1[k] == b.sig1[k]);
    CHECK(a.sig2[k] == b.sig2[k]);
  }

  PlanarGrid pg{-2.0, -2.0, 4.0 / 96, 97, 97};
  std::vector<double> v(static_cast<size_t>(pg.nx) * pg.ny);
  for (int j = 0; j < pg.ny; ++j)
    for (int i = 0; i < pg.nx; ++i) {
      const double x = pg.xc(i), y = pg.yc(j);
      v[pg.idx(i, j)] = 0.3 * std::sin(x + 0.5 * y) + 0.1 * x * x;
    }
  K::SchoutenField fa, fb;
  K::schouten_flat_grid(pg, v, fa);
  K::serial::schouten_flat_grid(pg, v, fb);
  for (size_t k = 0; k < fa.a11.size(); ++k) {
    CHECK(fa.sig2[k] == fb.sig2[k]);
    CHECK(fa.lam1[k] == fb.lam1[k]);
  }
}

TEST_CASE("blocked compensated summation: determinism and accuracy") {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<double> v(200001);
  long double exact = 0;
  for (double& x : v) {
    x = d(rng);
    exact += static_cast<long double>(x);
  }
  const double s1 = K::block_sum(v.data(), v.size());
  const double s2 = K::serial::block_sum(v.data(), v.size());
  CHECK(s1 == s2);  // bitwise, independent of thread count
  CHECK(std::fabs(s1 - static_cast<double>(exact)) < 1e-10);

  // hostile cancellation case: paired (x, -x) of wildly mixed magnitudes
  std::vector<double> w;
  w.reserve(20000);
  for (int k = 0; k < 10000; ++k) {
    const double x = std::ldexp(d(rng), k % 40);
    w.push_back(x);
    w.push_back(-x);
  }
  CHECK(std::fabs(K::block_sum(w.data(), w.size())) < 1e-6);
  CHECK(K::block_sum(w.data(), w.size()) == K::serial::block_sum(w.data(), w.size()));
}
