#include <doctest.h>

#include "symplectic.hpp"

#include <random>

using namespace symcap;

namespace {

SphereSampler sampler(int dim, std::size_t count = 200000) { return SphereSampler{dim, 9, count, true, 1}; }

SymmetricDirection diag_c(double c) {
  Mat C(1, 1), D = Mat::Zero(1, 1);
  C(0, 0) = c;
  return {C, D};
}

}  // namespace

TEST_CASE("symmetric directions lie in sp(2n)") {
  std::mt19937_64 rng(1);
  for (int n : {1, 2, 3}) {
    const SymmetricDirection y = random_direction(n, rng);
    const Mat m = y.assemble();
    const Mat j = symplectic_form(n);
    CHECK((m.transpose() * j + j * m).norm() <= 1e-12);
    CHECK((m - m.transpose()).norm() <= 1e-15);
    CHECK(m.norm() == doctest::Approx(1.0));
    CHECK((SymmetricDirection::from_matrix(m).assemble() - m).norm() <= 1e-15);
  }
  CHECK_THROWS_AS(SymmetricDirection::from_matrix(Mat::Identity(2, 2)), ValidationError);
}

TEST_CASE("the direction basis is orthonormal and coordinates round trip") {
  std::mt19937_64 rng(2);
  const auto basis = direction_basis(2);
  REQUIRE(basis.size() == 6);
  for (std::size_t a = 0; a < basis.size(); ++a) {
    for (std::size_t b = 0; b < basis.size(); ++b) {
      const double ip = (basis[a].assemble().array() * basis[b].assemble().array()).sum();
      CHECK(ip == doctest::Approx(a == b ? 1.0 : 0.0));
    }
  }
  const SymmetricDirection y = random_direction(2, rng);
  CHECK((from_coordinates(2, to_coordinates(y)).assemble() - y.assemble()).norm() <= 1e-14);
}

TEST_CASE("exponentials are symplectic and positive; polar factors recombine") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    const SymmetricDirection y = random_direction(2, rng) * 1.3;
    const Mat s = exp_direction(y);
    CHECK(is_symplectic(s));
    CHECK(Eigen::SelfAdjointEigenSolver<Mat>(s).eigenvalues().minCoeff() > 0);
    CHECK((log_positive(s).assemble() - y.assemble()).norm() <= 1e-9);

    const Mat q = random_unitary(2, rng);
    CHECK(is_symplectic(q));
    CHECK((q.transpose() * q - Mat::Identity(4, 4)).norm() <= 1e-12);
    const PolarFactors f = polar_decompose(q * s);
    CHECK((f.Q * f.S - q * s).norm() <= 1e-9);
    CHECK((f.S - s).norm() <= 1e-8);
    CHECK(is_symplectic(f.Q, 1e-9));
  }
  CHECK_THROWS_AS(polar_decompose(2.0 * Mat::Identity(2, 2)), ValidationError);
}

TEST_CASE("first variation on a rectangle against planar quadrature") {
  // K = [-2,2] x [-1,1], M = 4(a + b)/π, exp(sY) stretches x by e^s and y by e^-s
  Mat a(2, 2);
  a << 2, 0, 0, 1;
  const SupportBody rect = linear_image(cube(1), a);
  const SymmetricDirection y = diag_c(1.0);
  const double exact = 4.0 * (2.0 - 1.0) / kPi;
  const double h = 1e-4;
  const double fd = (mean_width_2d(linear_image(rect, exp_direction(y, h))) -
                     mean_width_2d(linear_image(rect, exp_direction(y, -h)))) /
                    (2 * h);
  CHECK(fd == doctest::Approx(exact).epsilon(1e-6));
  const Estimate f = first_variation(rect, y, sampler(2));
  CHECK(std::abs(f.value - exact) <= 4 * f.std_error);
}

TEST_CASE("first variation is linear in the direction") {
  std::mt19937_64 rng(4);
  const SupportBody k = ellipsoid({1.5, 1.0, 0.8, 1.2});
  const SymmetricDirection y1 = random_direction(2, rng), y2 = random_direction(2, rng);
  const SphereSampler s = sampler(4, 20000);
  const double combo = first_variation(k, y1 * 2.0 + y2 * -0.5, s).value;
  const double parts = 2.0 * first_variation(k, y1, s).value - 0.5 * first_variation(k, y2, s).value;
  CHECK(combo == doctest::Approx(parts).epsilon(1e-10));
}

TEST_CASE("first variation moments agree with the direct estimator") {
  std::mt19937_64 rng(5);
  const BallProductSpec spec = square_times_disk_spec();
  const SupportBody k = ball_product_body(spec);
  const SymmetricDirection y = random_direction(2, rng);
  const Estimate a = first_variation(k, y, sampler(4));
  const Estimate b = first_variation_moments(spec, y, sampler(4));
  CHECK(std::abs(a.value - b.value) <= 4 * std::hypot(a.std_error, b.std_error));
}

TEST_CASE("mean width is invariant under unitary maps") {
  std::mt19937_64 rng(6);
  const SupportBody k = ellipsoid({1.5, 1.0, 0.8, 1.2});
  const SphereSampler s = sampler(4);
  const Estimate m = mean_width(k, s);
  const Estimate mq = mean_width_image(k, random_unitary(2, rng), s);
  CHECK(std::abs(m.value - mq.value) <= 4 * std::hypot(m.std_error, mq.std_error));
}

TEST_CASE("second variation of the disk against planar quadrature") {
  // M(s) = (1/π)∫ √(cosh 2s + sinh 2s cos 2θ) dθ = 2 + 3s²/2 + O(s⁴)
  const SymmetricDirection y = diag_c(1.0);
  const double h = 1e-3;
  const auto m = [&](double s) { return mean_width_2d(linear_image(unit_ball(1), exp_direction(y, s))); };
  CHECK((m(h) - 2 * m(0) + m(-h)) / (h * h) == doctest::Approx(3.0).epsilon(1e-5));
  const SecondVariation v = second_variation(unit_ball(1), y, sampler(2));
  CHECK(std::abs(v.value.value - 3.0) <= 4 * v.value.std_error + 1e-6);
  CHECK(v.value.value == doctest::Approx(3.0).epsilon(0.01));
  CHECK_THROWS_AS(second_variation(unit_ball(1), y, sampler(2), 2.0), ValidationError);
}

TEST_CASE("local minimality verdicts") {
  LocalMinOptions o;
  o.directions = 6;
  const SphereSampler s = sampler(4, 100000);
  CHECK(verify_local_min(lagrangian_bidisk_spec(), s, o).pass);
  const LocalMinVerdict bad = verify_local_min(segments_spec(1.0, 2.0), sampler(2, 100000), o);
  CHECK_FALSE(bad.pass);
  REQUIRE(bad.descent_witness.has_value());
  CHECK(std::abs(bad.descent_witness->first.value) > 5 * bad.descent_witness->first.std_error);
}

TEST_CASE("local search rounds the ellipse") {
  const SearchResult r = local_search(ellipsoid({2.0, 1.0}), diag_c(0.0), sampler(2));
  CHECK(r.trace.back() == doctest::Approx(2 * std::sqrt(2.0)).epsilon(1e-3 / 2.83));
  for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i] <= r.trace[i - 1]);
  // the optimum is the disk of area 2π: exp(Y) maps (2,1) to (√2,√2)
  CHECK(std::abs(std::abs(r.best.C(0, 0)) - std::log(std::sqrt(2.0))) <= 1e-2);
}
