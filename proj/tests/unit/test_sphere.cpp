#include <doctest.h>

#include "sphere.hpp"

#include <random>

using namespace symcap;

namespace {

SphereSampler sampler(int dim, std::size_t count = 200000, std::uint64_t seed = 3) {
  return SphereSampler{dim, seed, count, true, 1};
}

}  // namespace

TEST_CASE("ball mean width is exactly 2 with zero variance") {
  for (int n : {1, 2, 3}) {
    const Estimate m = mean_width(unit_ball(n), sampler(2 * n, 20000));
    CHECK(std::abs(m.value - 2.0) <= 1e-12);
    CHECK(m.std_error <= 1e-12);
  }
}

TEST_CASE("planar quadrature against perimeter / pi") {
  CHECK(mean_width_2d(cube(1)) == doctest::Approx(8.0 / kPi).epsilon(1e-12));
  CHECK(mean_width_2d(unit_ball(1)) == doctest::Approx(2.0).epsilon(1e-12));
  // ellipse (2,1): perimeter 4·2·E(√(3)/2) = 9.688448220547675, over π
  CHECK(mean_width_2d(ellipsoid({2.0, 1.0})) == doctest::Approx(3.0839288).epsilon(1e-7));
  // oracle: midpoint rule on h(θ) = √(4cos² + sin²)
  double sum = 0.0;
  const int n = 1 << 20;
  for (int i = 0; i < n; ++i) {
    const double t = 2 * kPi * (i + 0.5) / n;
    sum += std::sqrt(4 * std::cos(t) * std::cos(t) + std::sin(t) * std::sin(t));
  }
  CHECK(mean_width_2d(ellipsoid({2.0, 1.0})) == doctest::Approx(sum * 2 / n).epsilon(1e-11));
  CHECK(integrate_circle([](double t) { return std::cos(t) * std::cos(t); }) == doctest::Approx(kPi));
}

TEST_CASE("Monte Carlo mean width agrees with quadrature") {
  for (const SupportBody& k : {cube(1), ellipsoid({2.0, 1.0}), superellipse(4.0, 1.0)}) {
    CAPTURE(k.label());
    const Estimate m = mean_width(k, sampler(2));
    CHECK(std::abs(m.value - mean_width_2d(k)) <= 4 * m.std_error);
  }
}

TEST_CASE("B2 x B2 mean width against a brute-force oracle") {
  // independent sampler: 2E(|u_x| + |u_y|) for u uniform on S^3
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> g;
  const int n = 2000000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    double a = g(rng), b = g(rng), c = g(rng), d = g(rng);
    const double r = std::sqrt(a * a + b * b + c * c + d * d);
    const double v = 2 * (std::hypot(a, b) + std::hypot(c, d)) / r;
    sum += v;
    sq += v * v;
  }
  const double mean = sum / n;
  const double err = std::sqrt((sq / n - mean * mean) / n);
  CHECK(std::abs(mean - 8.0 / 3.0) <= 4 * err);

  const Estimate m = mean_width(ball_product_body(lagrangian_bidisk_spec()), sampler(4));
  CHECK(std::abs(m.value - 8.0 / 3.0) <= 0.02);
  CHECK(std::abs(m.value - 8.0 / 3.0) <= 4 * m.std_error);
}

TEST_CASE("results are reproducible and independent of the worker count") {
  const SupportBody k = ellipsoid({1.5, 1.0, 0.8, 1.2});
  SphereSampler s = sampler(4, 50000);
  const Estimate a = mean_width(k, s);
  const Estimate b = mean_width(k, s);
  s.workers = 4;
  const Estimate c = mean_width(k, s);
  CHECK(a.value == b.value);
  CHECK(a.value == c.value);
  CHECK(a.std_error == c.std_error);
  CHECK(mean_width(k, s.with_seed(99)).value != a.value);
}

TEST_CASE("mean width is monotone, homogeneous and rotation invariant") {
  const SphereSampler s = sampler(4, 50000);
  const Estimate inner = mean_width(unit_ball(2), s);
  const Estimate outer = mean_width(cube(2), s);
  CHECK(inner.value <= outer.value + 3 * std::hypot(inner.std_error, outer.std_error));

  const SupportBody e = ellipsoid({1.5, 1.0, 0.8, 1.2});
  const Estimate m = mean_width(e, s);
  CHECK(mean_width(scaled(e, 3.0), s).value == doctest::Approx(3 * m.value).epsilon(1e-12));

  const double c = std::cos(0.7), sn = std::sin(0.7);
  Mat rot(2, 2);
  rot << c, -sn, sn, c;
  CHECK(mean_width_2d(linear_image(ellipsoid({2.0, 1.0}), rot)) ==
        doctest::Approx(mean_width_2d(ellipsoid({2.0, 1.0}))).epsilon(1e-10));
}

TEST_CASE("antithetic nodes come in pairs on the unit sphere") {
  const auto nodes = sphere_nodes(sampler(3, 1000));
  REQUIRE(nodes.size() == 1000);
  for (std::size_t i = 0; i < nodes.size(); i += 2) {
    CHECK(nodes[i].norm() == doctest::Approx(1.0));
    CHECK((nodes[i] + nodes[i + 1]).norm() <= 1e-15);
  }
  CHECK_THROWS_AS(sampler(0, 10).validate(), ValidationError);
  CHECK_THROWS_AS(sampler(2, 0).validate(), ValidationError);
}

TEST_CASE("sphere moments of a ball product") {
  // ∫ x_1^2 / |π_0 u| over S^3 for P_L, factor 0 = (x1, x2): E[|π u|]/2
  const Estimate m = sphere_moment(lagrangian_bidisk_spec(), 0, 1, Coordinate::x, sampler(4));
  CHECK(std::abs(m.value - (2.0 / 3.0) / 2.0) <= 4 * m.std_error);
}
