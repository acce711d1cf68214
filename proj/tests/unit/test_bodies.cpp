#include <doctest.h>

#include "bodies.hpp"
#include "body_grammar.hpp"

#include <random>

using namespace symcap;

namespace {

Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

Vec gaussian(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Vec v(d);
  for (int i = 0; i < d; ++i) v[i] = g(rng);
  return v;
}

std::vector<SupportBody> zoo() {
  std::vector<SupportBody> out;
  for (const auto& e : standard_bodies()) out.push_back(e.body);
  out.push_back(superellipse(3.0, 1.2));
  out.push_back(parse_body("sum(ball(1), scale(0.5, cube(1)))"));
  out.push_back(parse_body("linimg([[2,1],[0,1]], ellipsoid(2,1))"));
  return out;
}

}  // namespace

TEST_CASE("support values on coordinate directions") {
  const SupportBody cube2 = cube(2);
  CHECK(cube2.support(vec({1, 1, 1, 1})) == doctest::Approx(4.0));
  CHECK(cube2.support(vec({-1, 0, 0, 0})) == doctest::Approx(1.0));

  const SupportBody e = ellipsoid({2.0, 1.0});
  CHECK(e.support(vec({1, 0})) == doctest::Approx(2.0));
  CHECK(e.support(vec({0, 1})) == doctest::Approx(1.0));
  CHECK(e.support(vec({1, 1})) == doctest::Approx(std::sqrt(5.0)));

  // coordinates are (x1, x2, y1, y2); polydisk radius j lives in (x_j, y_j)
  const SupportBody pd = polydisk({1.0, 2.0});
  CHECK(pd.support(vec({1, 0, 0, 0})) == doctest::Approx(1.0));
  CHECK(pd.support(vec({0, 0, 1, 0})) == doctest::Approx(1.0));
  CHECK(pd.support(vec({0, 1, 0, 0})) == doctest::Approx(2.0));
  CHECK(pd.support(vec({0, 0, 0, 1})) == doctest::Approx(2.0));
  CHECK(pd.support(vec({1, 1, 0, 0})) == doctest::Approx(3.0));

  // Lagrangian bidisk: unit disk in x times unit disk in y
  const SupportBody pl = ball_product_body(lagrangian_bidisk_spec());
  CHECK(pl.support(vec({3, 4, 0, 0})) == doctest::Approx(5.0));
  CHECK(pl.support(vec({3, 4, 1, 0})) == doctest::Approx(6.0));
}

TEST_CASE("support is positively homogeneous and subadditive") {
  std::mt19937_64 rng(11);
  for (const auto& k : zoo()) {
    CAPTURE(k.label());
    for (int trial = 0; trial < 20; ++trial) {
      const Vec u = gaussian(k.dim(), rng);
      const Vec v = gaussian(k.dim(), rng);
      CHECK(k.support(2.5 * u) == doctest::Approx(2.5 * k.support(u)).epsilon(1e-12));
      CHECK(k.support(u + v) <= k.support(u) + k.support(v) + 1e-12);
    }
  }
}

TEST_CASE("gradient is the support point") {
  std::mt19937_64 rng(12);
  for (const auto& k : zoo()) {
    CAPTURE(k.label());
    for (int trial = 0; trial < 20; ++trial) {
      const Vec z = gaussian(k.dim(), rng);
      const Vec g = k.gradient(z);
      // Euler relation, and the support point does not beat h in other directions
      CHECK(g.dot(z) == doctest::Approx(k.support(z)).epsilon(1e-9));
      const Vec w = gaussian(k.dim(), rng);
      CHECK(g.dot(w) <= k.support(w) + 1e-9);
      if (k.has_distance()) CHECK(k.distance(g) <= 1e-7);
    }
  }
}

TEST_CASE("gradient matches finite differences") {
  std::mt19937_64 rng(13);
  for (const SupportBody& k : {ellipsoid({1.5, 1.0, 0.8, 1.2}), unit_ball(2), superellipse(4.0, 1.0)}) {
    CAPTURE(k.label());
    const Vec z = gaussian(k.dim(), rng);
    const double h = 1e-6;
    for (int i = 0; i < k.dim(); ++i) {
      Vec e = Vec::Zero(k.dim());
      e[i] = h;
      const double fd = (k.support(z + e) - k.support(z - e)) / (2 * h);
      CHECK(k.gradient(z)[i] == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("Minkowski sums add support functions and keep distances") {
  std::mt19937_64 rng(14);
  const SupportBody a = ellipsoid({2.0, 1.0});
  const SupportBody b = cube(1);
  const SupportBody s = minkowski_sum(a, b);
  const SupportBody r = minkowski_sum(cube(1), scaled(unit_ball(1), 0.5));
  for (int t = 0; t < 20; ++t) {
    const Vec u = gaussian(2, rng);
    CHECK(s.support(u) == doctest::Approx(a.support(u) + b.support(u)));
    const Vec x = 3.0 * gaussian(2, rng);
    // distance to a square rounded by 0.5
    const double dx = std::max(0.0, std::abs(x[0]) - 1.0), dy = std::max(0.0, std::abs(x[1]) - 1.0);
    CHECK(r.distance(x) == doctest::Approx(std::max(0.0, std::hypot(dx, dy) - 0.5)).epsilon(1e-9));
  }
}

TEST_CASE("linear images transform support by the transpose") {
  std::mt19937_64 rng(15);
  Mat a(2, 2);
  a << 2, 1, 0, 1;
  const SupportBody k = ellipsoid({2.0, 1.0});
  const SupportBody img = linear_image(k, a);
  for (int t = 0; t < 10; ++t) {
    const Vec u = gaussian(2, rng);
    CHECK(img.support(u) == doctest::Approx(k.support(a.transpose() * u)));
  }
  CHECK_THROWS_AS(linear_image(k, Mat::Zero(2, 2)), ValidationError);
}

TEST_CASE("closed-form volumes") {
  CHECK(ball_volume(2) == doctest::Approx(kPi));
  CHECK(ball_volume(4) == doctest::Approx(kPi * kPi / 2));
  CHECK(*cube(2).volume() == doctest::Approx(16.0));
  CHECK(*polydisk({1.0, 2.0}).volume() == doctest::Approx(4 * kPi * kPi));
  CHECK(*ball_product_body(lagrangian_bidisk_spec()).volume() == doctest::Approx(kPi * kPi));
}

TEST_CASE("ball product spec validation and predicates") {
  BallProductSpec bad = polydisk({1.0, 2.0}).ball_product().value();
  bad.I[0] = {3};
  CHECK_THROWS_AS(bad.validate(), ValidationError);

  const auto pl = classify_factors(lagrangian_bidisk_spec());
  CHECK(pl.test_family);
  CHECK_FALSE(pl.toric);
  CHECK(classify_factors(*polydisk({1.0, 2.0}).ball_product()).toric);
  CHECK(cond_check(lagrangian_bidisk_spec()));
  CHECK(cond_check(square_times_disk_spec()));
  CHECK_FALSE(cond_check(segments_spec(1.0, 2.0)));
  CHECK(cond_check(segments_spec(1.5, 1.5)));
}

TEST_CASE("grammar parses the catalog and names bad tokens") {
  for (const auto& e : standard_bodies()) {
    CAPTURE(e.grammar);
    const SupportBody k = parse_body(e.grammar);
    CHECK(k.dim() == e.body.dim());
    const Vec u = Vec::Ones(k.dim());
    CHECK(k.support(u) == doctest::Approx(e.body.support(u)));
  }
  CHECK(parse_body(" ball ( 2 ) ").dim() == 4);
  CHECK(parse_body("scale(2, ball(1))").support(vec({1, 0})) == doctest::Approx(2.0));

  try {
    parse_body("sum(ball(1), blob(2))");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("blob") != std::string::npos);
    CHECK(e.line() == 1);
    CHECK(e.column() == 14);
  }
  CHECK_THROWS_AS(parse_body("ball(2"), ParseError);
  CHECK_THROWS_AS(parse_body("ellipsoid()"), ParseError);
  // semantic errors are reported at the offending position too
  CHECK_THROWS_AS(parse_body("sum(ball(1), ball(2))"), ParseError);
  CHECK_THROWS_AS(parse_body("ellipsoid(1,-2)"), ParseError);
  CHECK_THROWS_AS(parse_body("frob"), ParseError);
}
