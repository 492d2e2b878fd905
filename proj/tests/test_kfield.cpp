#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "sigma2/errors.hpp"
#include "sigma2/kfield.hpp"
#include "sigma2/quadrature.hpp"

using namespace sigma2;

namespace {

Vec3 random_unit(std::mt19937& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vec3 v{g(rng), g(rng), g(rng)};
  return normalized(v);
}

// A tangent direction at z.
Vec3 random_tangent(std::mt19937& rng, const Vec3& z) {
  Vec3 v = random_unit(rng);
  Vec3 t = v - dot(v, z) * z;
  if (t.norm() < 1e-6) t = cross(z, Vec3{1, 0, 0});
  return normalized(t);
}

} // namespace

TEST_CASE("mini-language parses the documented spec forms") {
  const KField tilt = parse_kfield("2+z3");
  CHECK(tilt.c0 == 2.0);
  CHECK(tilt.a.z == 1.0);
  CHECK(tilt.eval({0, 0, 1}) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(tilt.eval({0, 0, -1}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_FALSE(tilt.is_constant());

  const KField one = parse_kfield("1");
  CHECK(one.is_constant());
  CHECK(one.eval({0.3, -0.4, std::sqrt(1 - 0.25)}) == 1.0);
  CHECK(parse_kfield("const:0.25").c0 == 0.25);
  CHECK(parse_kfield("const:0.25").is_constant());

  const KField lin = parse_kfield("linear:2,0.6,0,0.8");
  CHECK(lin.eval({1, 0, 0}) == doctest::Approx(2.6).epsilon(1e-15));
  CHECK(lin.eval({0, 0, -1}) == doctest::Approx(1.2).epsilon(1e-15));

  const KField quad = parse_kfield("quadric:0.1");
  std::mt19937 rng(7);
  for (int k = 0; k < 20; ++k) {
    const Vec3 z = random_unit(rng);
    const double want = 1.0 + 0.1 * (z.x * z.x + 1.5 * z.y * z.y + 3.0 * z.z * z.z - 2.0);
    CHECK(quad.eval(z) == doctest::Approx(want).epsilon(1e-14));
  }

  const KField poly = parse_kfield("poly:2;0.1,0,0;0,0,0,0,0,1");
  for (int k = 0; k < 20; ++k) {
    const Vec3 z = random_unit(rng);
    CHECK(poly.eval(z) == doctest::Approx(2.0 + 0.1 * z.x + z.z * z.z).epsilon(1e-14));
  }
  // Off-diagonal upper-triangle entries land symmetrically.
  const KField mixed = parse_kfield("poly:0;0,0,0;0,0.5,0,0,0,0");
  for (int k = 0; k < 10; ++k) {
    const Vec3 z = random_unit(rng);
    CHECK(mixed.eval(z) == doctest::Approx(z.x * z.y).epsilon(1e-14));
  }
}

TEST_CASE("JSON specification round-trips and validates") {
  const char* path = "kfield_test_tmp.json";
  {
    std::ofstream out(path);
    out << R"({"c0": 2.0, "a": [0.1, 0.0, 0.0], "B": [[0,0,0],[0,0,0],[0,0,1.0]]})";
  }
  const KField K = parse_kfield(std::string("json:") + path);
  const KField ref = parse_kfield("poly:2;0.1,0,0;0,0,0,0,0,1");
  std::mt19937 rng(11);
  for (int k = 0; k < 20; ++k) {
    const Vec3 z = random_unit(rng);
    CHECK(K.eval(z) == doctest::Approx(ref.eval(z)).epsilon(1e-15));
  }

  {
    std::ofstream out(path);
    out << R"({"c0": 1.0, "B": [[0,1,0],[0,0,0],[0,0,0]]})"; // asymmetric
  }
  CHECK_THROWS_AS(parse_kfield(std::string("json:") + path), InputError);
  {
    std::ofstream out(path);
    out << R"({"c0": )"; // truncated
  }
  CHECK_THROWS_AS(parse_kfield(std::string("json:") + path), InputError);
  CHECK_THROWS_AS(parse_kfield("json:/no/such/file.json"), InputError);
  std::remove(path);
}

TEST_CASE("malformed specs are rejected") {
  CHECK_THROWS_AS(parse_kfield(""), InputError);
  CHECK_THROWS_AS(parse_kfield("nope:1"), InputError);
  CHECK_THROWS_AS(parse_kfield("linear:1,2"), InputError);
  CHECK_THROWS_AS(parse_kfield("quadric:abc"), InputError);
  CHECK_THROWS_AS(parse_kfield("poly:1;2,3"), InputError);
  CHECK_THROWS_AS(parse_kfield("banana"), InputError);
  CHECK_THROWS_AS(parse_kfield("json:"), InputError);
}

TEST_CASE("tangential gradient: tangency and great-circle directional derivative") {
  std::mt19937 rng(23);
  for (const char* spec : {"2+z3", "quadric:0.1", "poly:2;0.1,0,0;0,0,0,0,0,1",
                           "poly:0.5;0.2,-0.3,0.1;0.4,0.1,-0.2,0.3,0.05,-0.1"}) {
    const KField K = parse_kfield(spec);
    for (int k = 0; k < 50; ++k) {
      const Vec3 z = random_unit(rng);
      const Vec3 g = K.sphere_grad(z);
      CHECK(std::abs(dot(g, z)) <= 1e-13 * (1.0 + g.norm()));

      const Vec3 t = random_tangent(rng, z);
      const double delta = 1e-5;
      const auto on_circle = [&](double th) {
        const Vec3 p = std::cos(th) * z + std::sin(th) * t;
        return K.eval(p);
      };
      const double fd = (on_circle(delta) - on_circle(-delta)) / (2 * delta);
      CHECK(fd == doctest::Approx(dot(g, t)).epsilon(1e-7));
      CHECK(g.norm() <= K.gradient_scale() + 1e-12);
    }
  }
}

TEST_CASE("Laplace-Beltrami: spherical-harmonic eigenvalues and the chart identity") {
  std::mt19937 rng(31);

  // Exact eigenfunction identities of the round Laplacian.
  const KField z3 = parse_kfield("linear:0,0,0,1");
  const KField z1z2 = parse_kfield("poly:0;0,0,0;0,0.5,0,0,0,0");
  const KField z3sq = parse_kfield("poly:0;0,0,0;0,0,0,0,0,1");
  for (int k = 0; k < 50; ++k) {
    const Vec3 z = random_unit(rng);
    CHECK(z3.laplacian(z) == doctest::Approx(-2.0 * z.z).epsilon(1e-13));
    CHECK(z1z2.laplacian(z) == doctest::Approx(-6.0 * z.x * z.y).epsilon(1e-13));
    CHECK(z3sq.laplacian(z) == doctest::Approx(2.0 - 6.0 * z.z * z.z).epsilon(1e-13));
  }

  // Independent oracle: Δ_g K = e^{−φ} (∂₁₁ + ∂₂₂)(K ∘ chart) on either chart.
  const KField K = parse_kfield("poly:0.5;0.2,-0.3,0.1;0.4,0.1,-0.2,0.3,0.05,-0.1");
  std::uniform_real_distribution<double> coord(-1.1, 1.1);
  for (ChartId c : {ChartId::North, ChartId::South}) {
    for (int k = 0; k < 25; ++k) {
      const Vec2 x{coord(rng), coord(rng)};
      const double fd_h = 1e-4;
      const auto chartK = [&](double dx, double dy) {
        return K.eval(stereo_to_sphere(c, {x.x + dx, x.y + dy}));
      };
      const double d11 = (chartK(fd_h, 0) - 2 * chartK(0, 0) + chartK(-fd_h, 0)) / (fd_h * fd_h);
      const double d22 = (chartK(0, fd_h) - 2 * chartK(0, 0) + chartK(0, -fd_h)) / (fd_h * fd_h);
      const double lap_fd = (d11 + d22) / conformal_factor(x);
      const double lap = K.laplacian(stereo_to_sphere(c, x));
      CHECK(lap_fd == doctest::Approx(lap).epsilon(5e-6));
    }
  }
}

TEST_CASE("sphere quadrature reproduces the coordinate-moment integrals") {
  // Absolute tolerances sit ~20x above the measured truncation error at this
  // resolution (the C² partition of unity gives roughly O(h⁴) decay; at
  // n = 96 the worst observed moment error is ≈ 6e−7).
  const GridSpec g(2.0 * 1.2 / 96.0, 1.2);
  const SphereQuadrature quad(g);
  const double fourpi = 4.0 * M_PI;

  CHECK(std::abs(quad.area() - fourpi) < 1e-5);

  const auto integral = [&](const std::function<double(Vec3)>& f) {
    return quad.integrate(SphereField::sampled(g, f));
  };
  // ∫ z_b² = 4π/3, ∫ z_b⁴ = 4π/5, ∫ z_b² z_i² = 4π/15 (b ≠ i), ∫ z_b = 0.
  for (int b = 0; b < 3; ++b) {
    CHECK(std::abs(integral([&](Vec3 z) { return z[b] * z[b]; }) - fourpi / 3.0) < 1e-6);
    CHECK(std::abs(integral([&](Vec3 z) { return z[b] * z[b] * z[b] * z[b]; }) - fourpi / 5.0) <
          1e-6);
    CHECK(std::abs(integral([&](Vec3 z) { return z[b]; })) < 1e-8);
  }
  CHECK(std::abs(integral([](Vec3 z) { return z.x * z.x * z.z * z.z; }) - fourpi / 15.0) < 1e-6);

  // Divergence theorem: ∫ Δ_g K dV = 0 for any quadratic field.
  const KField K = parse_kfield("poly:0.5;0.2,-0.3,0.1;0.4,0.1,-0.2,0.3,0.05,-0.1");
  CHECK(std::abs(integral([&](Vec3 z) { return K.laplacian(z); })) < 1e-5);
}

TEST_CASE("sampling a K field matches pointwise evaluation") {
  const KField K = parse_kfield("quadric:0.2");
  const GridSpec g(2.0 * 1.2 / 16.0, 1.2);
  const SphereField f = sample_kfield(K, g);
  for (ChartId c : {ChartId::North, ChartId::South})
    for (int j = 0; j < g.n; j += 3)
      for (int i = 0; i < g.n; i += 3) {
        const Vec3 z = stereo_to_sphere(c, g.node(i, j));
        CHECK(f.chart(c)[g.idx(i, j)] == doctest::Approx(K.eval(z)).epsilon(1e-15));
      }
}
