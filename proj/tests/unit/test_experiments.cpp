#include <doctest.h>

#include "experiments.hpp"

#include <random>

using namespace symcap;

namespace {

SphereSampler sampler(int dim, std::size_t count = 200000) { return SphereSampler{dim, 21, count, true, 1}; }

}  // namespace

TEST_CASE("planar criterion") {
  CHECK(green_test(unit_ball(1)).minimal);
  CHECK(green_test(cube(1)).minimal);
  const GreenResult e = green_test(ellipsoid({2.0, 1.0}));
  CHECK_FALSE(e.minimal);
  // oracle: midpoint rule for ∫ √(4cos²θ + sin²θ) cos 2θ dθ
  double sum = 0.0;
  const int n = 1 << 20;
  for (int i = 0; i < n; ++i) {
    const double t = 2 * kPi * (i + 0.5) / n;
    sum += std::sqrt(4 * std::cos(t) * std::cos(t) + std::sin(t) * std::sin(t)) * std::cos(2 * t);
  }
  CHECK(e.i_cos == doctest::Approx(sum * 2 * kPi / n).epsilon(1e-10));
  CHECK(e.i_cos == doctest::Approx(1.5486656).epsilon(1e-7));
  CHECK(std::abs(e.i_sin) < 1e-9);
  CHECK_THROWS_AS(green_test(unit_ball(2)), ValidationError);
}

TEST_CASE("radial profiles") {
  CHECK(RadialProfile::square(1.0).area() == doctest::Approx(4.0).epsilon(1e-10));
  CHECK(RadialProfile::disk(2.0).area() == doctest::Approx(4 * kPi).epsilon(1e-10));
  for (double p : {2.0, 3.0, 8.0, 64.0}) {
    const double r = superellipse_radius(p, 4.0);
    CHECK(RadialProfile::superellipse(p, r).area() == doctest::Approx(4.0).epsilon(1e-8));
    CHECK(RadialProfile::superellipse(p, r).convex());
  }
  CHECK(superellipse_radius(2.0, kPi) == doctest::Approx(1.0));
  CHECK(RadialProfile::square(1.0)(kPi / 4) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("area map from the square to the disk") {
  const AreaMap map(RadialProfile::square(1.0), RadialProfile::disk(2 / std::sqrt(kPi)));
  CHECK(std::abs(map.phi_end() - 2 * kPi) < 1e-10);
  const AreaMapCheck c = check_area_map(map, 500, 3);
  CHECK(c.jacobian_error < 1e-6);
  CHECK(c.boundary_error < 1e-8);
  CHECK(c.points_checked > 400);
  // homogeneity and the corner goes to the circle
  const Eigen::Vector2d z(0.3, -0.2);
  CHECK((map.apply(2.0 * z) - 2.0 * map.apply(z)).norm() < 1e-12);
  CHECK(map.apply(Eigen::Vector2d(1, 1)).norm() == doctest::Approx(2 / std::sqrt(kPi)).epsilon(1e-10));
}

TEST_CASE("area maps invert") {
  const RadialProfile sq = RadialProfile::square(1.0);
  const RadialProfile se = RadialProfile::superellipse(4.0, superellipse_radius(4.0, 4.0));
  const AreaMap fwd(sq, se), back(se, sq);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 50; ++i) {
    const Eigen::Vector2d z(u(rng), u(rng));
    CHECK((back.apply(fwd.apply(z)) - z).norm() < 1e-9);
  }
  CHECK_THROWS_AS(AreaMap(sq, RadialProfile::disk(1.0)), ValidationError);
}

TEST_CASE("squash family decreases from 8/pi to 4/sqrt(pi)") {
  const SquashTable t = squash_family({64, 16, 4, 2});
  CHECK(t.monotone);
  CHECK(t.rows.front().mean_width == doctest::Approx(8 / kPi).epsilon(0.01));
  CHECK(t.rows.back().mean_width == doctest::Approx(4 / std::sqrt(kPi)).epsilon(1e-10));
  CHECK_THROWS_AS(squash_family({1.5}), ValidationError);
}

TEST_CASE("product formula and its calibration") {
  CHECK(product_prefactor(2, 2, Prefactor::printed) == doctest::Approx(1.0 / 8));
  CHECK(product_prefactor(2, 2, Prefactor::calibrated) == doctest::Approx(1.0 / 4));
  // B² × B² with M(B²) = 2: calibrated gives 8/3
  CHECK(product_mean_width(2, 2, 2, 2, Prefactor::calibrated) == doctest::Approx(8.0 / 3));
  CHECK(product_mean_width(2, 2, 2, 2, Prefactor::printed) == doctest::Approx(4.0 / 3));
  // □ × B²: 16/(3π) + 4/3
  CHECK(product_mean_width(8 / kPi, 2, 2, 2, Prefactor::calibrated) == doctest::Approx(16 / (3 * kPi) + 4.0 / 3));

  const ProductCalibration c = calibrate_product(2, 2, sampler(4));
  CHECK(c.exact == doctest::Approx(8.0 / 3));
  CHECK(std::abs(c.oracle.value - c.exact) <= 4 * c.oracle.std_error);
  CHECK(c.ratio == doctest::Approx(2.0).epsilon(0.01));
  const ProductCalibration c24 = calibrate_product(2, 4, sampler(6));
  CHECK(std::abs(c24.oracle.value - c24.exact) <= 4 * c24.oracle.std_error);
  CHECK(c24.ratio == doctest::Approx(2.0).epsilon(0.01));
  CHECK_THROWS_AS(product_prefactor(1, 3, Prefactor::printed), ValidationError);
}

TEST_CASE("rounded product strictly lowers the mean width") {
  const RoundedProductReport r = rounded_product_test(square_times_disk_spec(), 2.0, sampler(4));
  CHECK(r.strict_decrease);
  CHECK(r.formula_consistent);
  CHECK(r.plane_before == doctest::Approx(8 / kPi));
  CHECK(r.plane_after == doctest::Approx(4 / std::sqrt(kPi)));
  CHECK_THROWS_AS(rounded_product_test(lagrangian_bidisk_spec(), 2.0, sampler(4)), ValidationError);
}

TEST_CASE("naive extension probe reports intervals") {
  const ProbeReport r = naive_extension_probe(lagrangian_bidisk_spec(), 1, sampler(4, 5000), ProbeOptions{2.0, 17});
  CHECK(r.projection_error < 1e-12);
  CHECK(r.image_low <= r.image_high);
  CHECK((r.conclusion == "DECREASE" || r.conclusion == "INCREASE" || r.conclusion == "NO_CONCLUSION"));
}

TEST_CASE("polynomial Hamiltonians") {
  std::mt19937_64 rng(4);
  const Polynomial h = Polynomial::random(4, 3, rng);
  CHECK(h.degree() == 3);
  Vec z(4);
  z << 0.3, -0.1, 0.2, 0.5;
  const double eps = 1e-6;
  for (int i = 0; i < 4; ++i) {
    Vec e = Vec::Zero(4);
    e[i] = eps;
    CHECK(h.gradient(z)[i] == doctest::Approx((h.value(z + e) - h.value(z - e)) / (2 * eps)).epsilon(1e-7));
  }
  // flows conserve H and are reversible
  const Vec w = hamiltonian_flow(h, z, 0.05);
  CHECK(h.value(w) == doctest::Approx(h.value(z)).epsilon(1e-10));
  CHECK((hamiltonian_flow(h, w, -0.05) - z).norm() < 1e-10);

  // H = (x² + y²)/2 rotates the plane: X_H = J∇H = (-y, x)
  const Polynomial rot(2, {{{2, 0}, 0.5}, {{0, 2}, 0.5}});
  const Vec p = hamiltonian_flow(rot, vec2(1, 0), kPi / 2);
  CHECK((p - vec2(0, 1)).norm() < 1e-10);
}

TEST_CASE("Hamiltonian flows keep the mean width of toric bodies stationary") {
  FlowOptions o;
  o.hamiltonians = 2;
  const FlowReport f = nonlinear_flow_check(polydisk({1.0, 2.0}), sampler(4, 10000), o);
  CHECK(f.toric);
  CHECK(f.pass);
  const FlowReport g = nonlinear_flow_check(ball_product_body(square_times_disk_spec()), sampler(4, 10000), o);
  CHECK_FALSE(g.toric);
}
