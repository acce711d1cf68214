#include <doctest.h>

#include "capacity.hpp"
#include "steiner.hpp"

using namespace symcap;

TEST_CASE("volume of B + tK by the radial estimator") {
  VolumeOptions o;
  o.method = VolumeMethod::radial;
  o.budget = 100000;
  // square [-1,1]^2 at t = 1: 4 + 8 + π
  const Estimate v = volume_sum_ball(cube(1), 1.0, o);
  CHECK(std::abs(v.value - (12.0 + kPi)) <= 4 * v.std_error + 1e-9);
  CHECK(v.std_error < 0.05);
  // B + tB = (1 + t)B exactly
  const Estimate b = volume_sum_ball(unit_ball(2), 0.5, o);
  CHECK(b.value == doctest::Approx(ball_volume(4) * std::pow(1.5, 4)).epsilon(1e-10));
}

TEST_CASE("box and radial volume estimators agree") {
  VolumeOptions box;
  box.budget = 200000;
  VolumeOptions rad = box;
  rad.method = VolumeMethod::radial;
  const Estimate a = volume_sum_ball(ellipsoid({2.0, 1.0}), 0.7, box);
  const Estimate b = volume_sum_ball(ellipsoid({2.0, 1.0}), 0.7, rad);
  CHECK(agree(a, b, 4.0));
}

TEST_CASE("body volume from the distance oracle") {
  VolumeOptions o;
  o.budget = 50000;
  CHECK(body_volume(cube(1), o).value == doctest::Approx(4.0).epsilon(0.01));
  const Estimate e = body_volume(ellipsoid({2.0, 1.0}), o);
  CHECK(std::abs(e.value - 2 * kPi) <= 4 * e.std_error);
}

TEST_CASE("Steiner fit of the square") {
  SteinerOptions o;
  o.budget = 100000;
  const SteinerFit f = steiner_fit(cube(1), o);
  REQUIRE(f.W.size() == 3);
  // Vol(B + t□) = 4t² + 8t + π
  CHECK(std::abs(f.W[0] - 4.0) <= 4 * f.W_err[0] + 1e-6);
  CHECK(std::abs(f.W[1] - 4.0) <= 4 * f.W_err[1] + 1e-6);
  CHECK(std::abs(f.W[2] - kPi) <= 4 * f.W_err[2] + 1e-6);
  const Estimate m = meanwidth_from_quermass(f);
  CHECK(std::abs(m.value - 8.0 / kPi) <= 4 * m.std_error + 1e-6);
  CHECK(f.volume(1.0) == doctest::Approx(12.0 + kPi).epsilon(0.01));
  CHECK(f.volume_derivative(0.0) == doctest::Approx(8.0).epsilon(0.02));
}

TEST_CASE("Steiner fit reproduces the ball exactly") {
  for (int n : {1, 2}) {
    const SteinerFit f = steiner_fit(unit_ball(n));
    for (std::size_t i = 0; i < f.W.size(); ++i) CHECK(f.W[i] == doctest::Approx(ball_volume(2 * n)).epsilon(1e-9));
    for (double w : f.Wbar) CHECK(w == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(f.residual < 1e-9);
  }
}

TEST_CASE("normalized quermassintegrals form a chain") {
  SteinerOptions o;
  o.budget = 20000;
  for (const SupportBody& k : {cube(2), polydisk({1.0, 2.0}), ellipsoid({2.0, 1.0})}) {
    CAPTURE(k.label());
    const SteinerFit f = steiner_fit(k, o);
    for (std::size_t i = 1; i < f.Wbar.size(); ++i) {
      CHECK(f.Wbar[i - 1] <= f.Wbar[i] + 3 * std::hypot(f.Wbar_err[i - 1], f.Wbar_err[i]));
    }
  }
}

TEST_CASE("quermassintegrals scale with the right powers") {
  SteinerOptions o;
  o.budget = 20000;
  const SteinerFit a = steiner_fit(ellipsoid({2.0, 1.0}), o);
  const SteinerFit b = steiner_fit(scaled(ellipsoid({2.0, 1.0}), 0.5), o);
  // W_i(λK) = λ^{d-i} W_i(K) on common directions
  for (std::size_t i = 0; i < a.W.size(); ++i) {
    CHECK(b.W[i] == doctest::Approx(a.W[i] * std::pow(0.5, 2.0 - i)).epsilon(0.03));
  }
}

TEST_CASE("F and F-tilde on the square") {
  FOptions o;
  o.steiner.budget = 20000;
  CapacityOptions co;
  co.modes = 4;
  co.starts = 2;
  const CapacityFn cap = [co](const SupportBody& k) { return eh_capacity_estimate(k, co).estimate(); };
  const FTable t = f_functions(cube(1), cap, {0.5, 1.0}, o);
  REQUIRE(t.rows.size() == 2);
  for (const auto& r : t.rows) CHECK(r.ordered);
  CHECK(t.derivative_fd.value == doctest::Approx(t.derivative_closed.value).epsilon(0.05));
  // closed form √c - M/2 with c = 4/π on the square
  CHECK(t.derivative_closed.value == doctest::Approx(std::sqrt(4 / kPi) - 4 / kPi).epsilon(0.02));
}

TEST_CASE("invalid Steiner options") {
  SteinerOptions o;
  o.T = -1.0;
  CHECK_THROWS_AS(steiner_fit(cube(1), o), ValidationError);
  o.T = 2.0;
  o.nodes = 2;
  CHECK_THROWS_AS(steiner_fit(cube(1), o), ValidationError);
}
