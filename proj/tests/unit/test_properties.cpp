#include <doctest.h>

#include "capacity.hpp"
#include "experiments.hpp"
#include "symplectic.hpp"

#include <random>

using namespace symcap;

namespace {

Vec gaussian(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Vec v(d);
  for (int i = 0; i < d; ++i) v[i] = g(rng);
  return v;
}

Mat random_orthogonal(int d, std::mt19937_64& rng) {
  Mat a(d, d);
  for (int j = 0; j < d; ++j) a.col(j) = gaussian(d, rng);
  return Eigen::HouseholderQR<Mat>(a).householderQ() * Mat::Identity(d, d);
}

// Rotation by θ_j in every (x_j, y_j) plane.
Mat torus(const std::vector<double>& theta) {
  const int n = static_cast<int>(theta.size());
  Mat r = Mat::Zero(2 * n, 2 * n);
  for (int j = 0; j < n; ++j) {
    r(j, j) = r(n + j, n + j) = std::cos(theta[j]);
    r(n + j, j) = std::sin(theta[j]);
    r(j, n + j) = -std::sin(theta[j]);
  }
  return r;
}

SphereSampler sampler(int dim, std::size_t count = 100000) { return SphereSampler{dim, 17, count, true, 1}; }

std::vector<BallProductSpec> catalog_specs() {
  std::vector<BallProductSpec> out;
  for (const auto& e : standard_bodies()) {
    if (e.body.ball_product()) out.push_back(*e.body.ball_product());
  }
  return out;
}

}  // namespace

TEST_CASE("catalog support functions are homogeneous to rounding") {
  std::mt19937_64 rng(1);
  for (const auto& e : standard_bodies()) {
    CAPTURE(e.grammar);
    for (int t = 0; t < 50; ++t) {
      const Vec u = gaussian(e.body.dim(), rng).normalized();
      for (double lambda : {0.5, 2.0, 10.0}) {
        CHECK(std::abs(e.body.support(lambda * u) - lambda * e.body.support(u)) < 1e-12);
      }
    }
  }
}

TEST_CASE("ball product distance vanishes exactly on the product") {
  std::mt19937_64 rng(2);
  for (const auto& spec : catalog_specs()) {
    const SupportBody k = ball_product_body(spec);
    CAPTURE(k.label());
    for (int t = 0; t < 200; ++t) {
      const Vec x = 1.2 * gaussian(k.dim(), rng);
      bool inside = true;
      for (std::size_t l = 0; l < spec.factors(); ++l) {
        double r2 = 0.0;
        for (int c : spec.coordinates(l)) r2 += x[c] * x[c];
        inside = inside && std::sqrt(r2) <= spec.radii[l];
      }
      CHECK((k.distance(x) == 0.0) == inside);
    }
  }
}

TEST_CASE("toric classification matches torus invariance") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> angle(0, 2 * kPi);
  for (const auto& spec : catalog_specs()) {
    const SupportBody k = ball_product_body(spec);
    CAPTURE(k.label());
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
      std::vector<double> theta(spec.n);
      for (auto& a : theta) a = angle(rng);
      const Mat r = torus(theta);
      const Vec u = gaussian(k.dim(), rng);
      worst = std::max(worst, std::abs(k.support(r * u) - k.support(u)));
    }
    CHECK(classify_factors(spec).toric == (worst < 1e-12));
  }
}

TEST_CASE("cond check is symmetric under exchanging I and J") {
  std::vector<BallProductSpec> specs = catalog_specs();
  specs.push_back(segments_spec(1.0, 2.0));
  specs.push_back(segments_spec(2.0, 2.0));
  for (auto spec : specs) {
    const bool before = cond_check(spec);
    std::swap(spec.I, spec.J);
    CHECK(cond_check(spec) == before);
  }
}

TEST_CASE("mean width is additive, rotation invariant and monotone") {
  std::mt19937_64 rng(4);
  const SphereSampler s = sampler(4);
  const SupportBody a = ellipsoid({1.5, 1.0, 0.8, 1.2});
  const SupportBody b = cube(2);
  const Estimate ma = mean_width(a, s), mb = mean_width(b, s), mab = mean_width(minkowski_sum(a, b), s);
  // same nodes: additivity is exact up to rounding
  CHECK(mab.value == doctest::Approx(ma.value + mb.value).epsilon(1e-12));

  for (int t = 0; t < 3; ++t) {
    const Estimate mq = mean_width(linear_image(a, random_orthogonal(4, rng)), s);
    CHECK(std::abs(mq.value - ma.value) <= 3 * std::hypot(mq.std_error, ma.std_error));
  }
  // inclusion checked through support dominance
  const SupportBody small = ellipsoid({1.0, 1.0, 0.8, 1.0});
  for (int t = 0; t < 50; ++t) {
    const Vec u = gaussian(4, rng);
    REQUIRE(small.support(u) <= a.support(u) + 1e-12);
  }
  const Estimate ms = mean_width(small, s);
  CHECK(ms.value <= ma.value + 3 * std::hypot(ms.std_error, ma.std_error));
}

TEST_CASE("exp of random directions is symplectic") {
  std::mt19937_64 rng(5);
  for (int n : {1, 2, 3}) {
    for (int t = 0; t < 10; ++t) CHECK(is_symplectic(exp_direction(random_direction(n, rng), 2.0)));
  }
}

TEST_CASE("toric ball products are stationary in every direction") {
  std::mt19937_64 rng(6);
  const BallProductSpec spec = *polydisk({1.0, 2.0}).ball_product();
  const SupportBody k = ball_product_body(spec);
  for (int t = 0; t < 5; ++t) {
    const Estimate f = first_variation(k, random_direction(2, rng), sampler(4));
    CHECK(std::abs(f.value) <= 3 * f.std_error + 1e-12);
  }
}

TEST_CASE("capacity estimate is monotone under inclusion") {
  CapacityOptions o;
  o.modes = 4;
  o.starts = 3;
  const double inner = eh_capacity_estimate(ellipsoid({1.0, 1.0, 0.8, 1.0}), o).normalized;
  const double outer = eh_capacity_estimate(ellipsoid({1.5, 1.0, 0.8, 1.2}), o).normalized;
  CHECK(inner <= outer + 1e-8);
  CHECK(eh_capacity_estimate(unit_ball(2), o).normalized <= eh_capacity_estimate(cube(2), o).normalized + 1e-8);
}

TEST_CASE("capacity does not increase with the mode count") {
  double last = std::numeric_limits<double>::infinity();
  for (int modes : {2, 4, 8}) {
    CapacityOptions o;
    o.modes = modes;
    o.starts = 3;
    const double c = eh_capacity_estimate(ball_product_body(lagrangian_bidisk_spec()), o).normalized;
    CHECK(c <= last + 1e-10);
    last = c;
  }
  CapacityOptions one;
  one.modes = 1;
  CHECK(eh_capacity_estimate(unit_ball(2), one).raw_cost == doctest::Approx(ball_raw_cost()).epsilon(1e-10));
}

TEST_CASE("green verdict is rotation invariant") {
  for (double angle : {0.3, 1.1, 2.0}) {
    Mat r(2, 2);
    r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
    for (const SupportBody& k : {cube(1), ellipsoid({2.0, 1.0}), unit_ball(1)}) {
      const GreenResult a = green_test(k), b = green_test(linear_image(k, r));
      CHECK(a.minimal == b.minimal);
      CHECK(b.magnitude == doctest::Approx(a.magnitude).epsilon(1e-8));
    }
  }
}

TEST_CASE("sampled support is a lower bound, monotone in the sample") {
  std::mt19937_64 rng(7);
  const SupportBody k = polydisk({1.0, 2.0});
  const auto nodes = sphere_nodes(sampler(4, 2000));
  Mat pts(static_cast<Eigen::Index>(nodes.size()), 4);
  for (std::size_t i = 0; i < nodes.size(); ++i) pts.row(static_cast<Eigen::Index>(i)) = k.gradient(nodes[i]).transpose();
  Mat dirs(4, 50);
  for (int j = 0; j < 50; ++j) dirs.col(j) = gaussian(4, rng).normalized();
  const Vec coarse = sampled_support(pts.topRows(500), dirs);
  const Vec fine = sampled_support(pts, dirs);
  for (int j = 0; j < 50; ++j) {
    CHECK(coarse[j] <= fine[j] + 1e-15);
    CHECK(fine[j] <= k.support(dirs.col(j)) + 1e-12);
  }
}
