#include "experiments.hpp"

#include "parallel.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <numeric>
#include <cmath>
#include <sstream>

namespace symcap {

namespace odeint = boost::numeric::odeint;

namespace {

constexpr double kTwoPi = 2.0 * kPi;

double wrap_angle(double theta) {
  double t = std::fmod(theta, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  return t;
}

double angle_gap(double a, double b) {
  const double d = std::abs(wrap_angle(a) - wrap_angle(b));
  return std::min(d, kTwoPi - d);
}

}  // namespace

// --- planar criterion ---------------------------------------------------------

GreenResult green_test(const SupportBody& k) {
  if (k.dim() != 2) throw ValidationError("green_test: body must be planar, got dimension " + std::to_string(k.dim()));
  auto h = [&](double t) { return k.support(vec2(std::cos(t), std::sin(t))); };
  GreenResult r;
  r.i_cos = integrate_circle([&](double t) { return h(t) * std::cos(2.0 * t); });
  r.i_sin = integrate_circle([&](double t) { return h(t) * std::sin(2.0 * t); });
  r.magnitude = std::hypot(r.i_cos, r.i_sin);
  r.minimal = r.magnitude < 1e-6;
  return r;
}

// --- profiles -----------------------------------------------------------------

RadialProfile::RadialProfile(Fn rho, std::vector<double> kinks, std::string label)
    : rho_(std::move(rho)), kinks_(std::move(kinks)), label_(std::move(label)) {
  for (double& k : kinks_) k = wrap_angle(k);
  std::sort(kinks_.begin(), kinks_.end());
  for (int i = 0; i < 64; ++i) {
    const double v = rho_(kTwoPi * i / 64.0);
    if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError("radial profile " + label_ + " must be positive");
  }
}

RadialProfile RadialProfile::disk(double r) {
  if (!(r > 0.0)) throw ValidationError("disk radius must be positive");
  std::ostringstream label;
  label << "disk(" << r << ")";
  return RadialProfile([r](double) { return r; }, {}, label.str());
}

RadialProfile RadialProfile::square(double a) {
  if (!(a > 0.0)) throw ValidationError("square half side must be positive");
  std::ostringstream label;
  label << "square(" << a << ")";
  return RadialProfile([a](double t) { return a / std::max(std::abs(std::cos(t)), std::abs(std::sin(t))); },
                       {kPi / 4, 3 * kPi / 4, 5 * kPi / 4, 7 * kPi / 4}, label.str());
}

RadialProfile RadialProfile::superellipse(double p, double r) {
  if (!(p >= 1.0) || !(r > 0.0)) throw ValidationError("superellipse needs p >= 1 and r > 0");
  std::ostringstream label;
  label << "superellipse(" << p << "," << r << ")";
  return RadialProfile(
      [p, r](double t) {
        const double c = std::abs(std::cos(t)), s = std::abs(std::sin(t));
        const double m = std::max(c, s);
        // factor out the larger coordinate to keep large p finite
        return r / (m * std::pow(std::pow(c / m, p) + std::pow(s / m, p), 1.0 / p));
      },
      {}, label.str());
}

double RadialProfile::derivative(double theta) const {
  const double h = 1e-6;
  for (double k : kinks_) {
    if (angle_gap(theta, k) < 2 * h) {
      const double side = wrap_angle(theta - k) < kPi ? 1.0 : -1.0;
      return side * (rho_(theta + side * h) - rho_(theta)) / h;
    }
  }
  return (rho_(theta + h) - rho_(theta - h)) / (2 * h);
}

double RadialProfile::area() const {
  return 0.5 * integrate_circle([this](double t) { return rho_(t) * rho_(t); });
}

bool RadialProfile::convex(int samples) const {
  if (samples < 8) throw ValidationError("convexity test needs at least 8 samples");
  std::vector<Eigen::Vector2d> pts;
  for (int i = 0; i < samples; ++i) {
    const double t = kTwoPi * i / samples;
    pts.emplace_back(rho_(t) * std::cos(t), rho_(t) * std::sin(t));
  }
  for (int i = 0; i < samples; ++i) {
    const Eigen::Vector2d& a = pts[static_cast<std::size_t>(i)];
    const Eigen::Vector2d& b = pts[static_cast<std::size_t>((i + 1) % samples)];
    const Eigen::Vector2d& c = pts[static_cast<std::size_t>((i + 2) % samples)];
    const Eigen::Vector2d e1 = b - a, e2 = c - b;
    const double cross = e1.x() * e2.y() - e1.y() * e2.x();
    if (cross < -1e-12 * e1.norm() * e2.norm()) return false;
  }
  return true;
}

double superellipse_radius(double p, double area) {
  if (!(p >= 1.0) || !(area > 0.0)) throw ValidationError("superellipse_radius needs p >= 1 and area > 0");
  const double g1 = boost::math::tgamma(1.0 + 1.0 / p);
  return std::sqrt(area * boost::math::tgamma(1.0 + 2.0 / p) / 4.0) / g1;
}

// --- area map -----------------------------------------------------------------

AreaMap::AreaMap(RadialProfile source, RadialProfile target) : src_(std::move(source)), tgt_(std::move(target)) {
  const double as = src_.area(), at = tgt_.area();
  if (std::abs(as - at) > 1e-8 * std::max(1.0, as)) {
    std::ostringstream msg;
    msg.precision(12);
    msg << "area map: source area " << as << " differs from target area " << at;
    throw ValidationError(msg.str());
  }
  std::vector<double> nodes{0.0, kTwoPi};
  for (int i = 1; i < 1024; ++i) nodes.push_back(kTwoPi * i / 1024.0);
  for (double k : src_.kinks()) nodes.push_back(k);
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end(), [](double a, double b) { return b - a < 1e-14; }), nodes.end());
  grid_theta_ = nodes;
  grid_phi_.assign(nodes.size(), 0.0);
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    grid_phi_[i] = integrate(nodes[i - 1], grid_phi_[i - 1], nodes[i], 1e-13);
  }
  phi_end_ = grid_phi_.back();
}

double AreaMap::integrate(double theta0, double phi0, double theta1, double tol) const {
  if (theta1 == theta0) return phi0;
  auto rhs = [this](const double& phi, double& dphi, double theta) {
    const double rs = src_(theta), rt = tgt_(phi);
    dphi = rs * rs / (rt * rt);
  };
  using Stepper = odeint::runge_kutta_dopri5<double, double, double, double, odeint::vector_space_algebra>;
  double phi = phi0;
  const double dt = (theta1 - theta0) / 8.0;
  odeint::integrate_adaptive(odeint::make_controlled<Stepper>(tol, tol), rhs, phi, theta0, theta1, dt);
  if (!std::isfinite(phi)) throw NumericalError("area map: angle ODE diverged");
  return phi;
}

double AreaMap::phi(double theta) const {
  const double turns = std::floor(theta / kTwoPi);
  const double t = theta - turns * kTwoPi;
  auto it = std::upper_bound(grid_theta_.begin(), grid_theta_.end(), t);
  const auto i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, it - grid_theta_.begin() - 1));
  return turns * phi_end_ + integrate(grid_theta_[i], grid_phi_[i], t, 1e-13);
}

Eigen::Vector2d AreaMap::apply(const Eigen::Vector2d& z) const {
  const double r = z.norm();
  if (r == 0.0) return Eigen::Vector2d::Zero();
  const double theta = wrap_angle(std::atan2(z.y(), z.x()));
  const double f = phi(theta);
  const double radius = r * tgt_(f) / src_(theta);
  return {radius * std::cos(f), radius * std::sin(f)};
}

Eigen::Matrix2d AreaMap::jacobian(const Eigen::Vector2d& z, double h) const {
  Eigen::Matrix2d j;
  for (int c = 0; c < 2; ++c) {
    Eigen::Vector2d e = Eigen::Vector2d::Zero();
    e[c] = h;
    j.col(c) = (apply(z + e) - apply(z - e)) / (2.0 * h);
  }
  return j;
}

double AreaMap::kink_distance(double theta) const {
  double d = kPi;
  for (double k : src_.kinks()) d = std::min(d, angle_gap(theta, k));
  if (!tgt_.kinks().empty()) {
    const double f = phi(theta);
    for (double k : tgt_.kinks()) d = std::min(d, angle_gap(f, k));
  }
  return d;
}

AreaMap build_area_map(const RadialProfile& source, const RadialProfile& target) { return AreaMap(source, target); }

AreaMapCheck check_area_map(const AreaMap& map, int points, std::uint64_t seed) {
  if (points < 1) throw ValidationError("check_area_map: need at least one point");
  AreaMapCheck c;
  c.phi_end_error = std::abs(map.phi_end() - kTwoPi);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, kTwoPi), radius(0.2, 2.0);
  const double h = 1e-5;
  while (c.points_checked < points) {
    const double theta = angle(rng), r = radius(rng);
    if (map.kink_distance(theta) < 10.0 * h / r) {
      ++c.points_skipped;
      continue;
    }
    const Eigen::Vector2d z(r * std::cos(theta), r * std::sin(theta));
    c.jacobian_error = std::max(c.jacobian_error, std::abs(map.jacobian(z, h).determinant() - 1.0));
    // boundary ray: T(ρ_s(θ) e^{iθ}) should have radius ρ_t(φ(θ))
    const Eigen::Vector2d b = map.apply(map.source()(theta) / r * z);
    const double f = std::atan2(b.y(), b.x());
    c.boundary_error = std::max(c.boundary_error, std::abs(b.norm() - map.target()(f)));
    ++c.points_checked;
  }
  return c;
}

// --- squash family ------------------------------------------------------------

SquashTable squash_family(const std::vector<double>& ps, double area) {
  SquashTable t;
  for (double p : ps) {
    if (!(p >= 2.0)) throw ValidationError("squash_family: p must be >= 2");
    SquashRow row{p, superellipse_radius(p, area), 0.0};
    row.mean_width = mean_width_2d(superellipse(p, row.radius));
    t.rows.push_back(row);
  }
  std::vector<SquashRow> sorted = t.rows;
  std::sort(sorted.begin(), sorted.end(), [](const SquashRow& a, const SquashRow& b) { return a.p > b.p; });
  t.monotone = true;
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].mean_width > sorted[i - 1].mean_width + 1e-12) t.monotone = false;
  }
  return t;
}

// --- products -----------------------------------------------------------------

double product_prefactor(int d1, int d2, Prefactor mode) {
  if (d1 < 2 || d2 < 2) throw ValidationError("product formula needs factor dimensions >= 2");
  return (mode == Prefactor::printed ? 0.5 : 1.0) / (d1 + d2);
}

double product_mean_width(double m1, int d1, double m2, int d2, double prefactor) {
  if (d1 < 2 || d2 < 2) throw ValidationError("product formula needs factor dimensions >= 2");
  const int d = d1 + d2;
  auto weight = [](int k) { return k * ball_volume(k) / ball_volume(k - 1); };
  return prefactor * ball_volume(d - 1) / ball_volume(d) * (weight(d1) * m1 + weight(d2) * m2);
}

double product_mean_width(double m1, int d1, double m2, int d2, Prefactor mode) {
  return product_mean_width(m1, d1, m2, d2, product_prefactor(d1, d2, mode));
}

SupportBody euclidean_ball(int d, double r) {
  if (d < 1) throw ValidationError("euclidean_ball: dimension must be >= 1");
  if (!(r > 0.0)) throw ValidationError("euclidean_ball: radius must be positive");
  SupportBody::Parts p;
  p.dim = d;
  p.support = [r](const Vec& u) { return r * u.norm(); };
  p.gradient = [r](const Vec& z) -> Vec {
    const double n = z.norm();
    return n > 0.0 ? Vec(r * z / n) : Vec(Vec::Zero(z.size()));
  };
  p.distance = [r](const Vec& x) { return std::max(0.0, x.norm() - r); };
  p.volume = ball_volume(d) * std::pow(r, d);
  p.radius_bound = r;
  std::ostringstream label;
  label << "ball" << d << "(" << r << ")";
  p.label = label.str();
  return SupportBody(std::move(p));
}

ProductCalibration calibrate_product(int d1, int d2, const SphereSampler& s) {
  if (s.dim != d1 + d2) throw ValidationError("calibrate_product: sampler dimension must be d1 + d2");
  ProductCalibration c;
  c.d1 = d1;
  c.d2 = d2;
  c.printed = product_prefactor(d1, d2, Prefactor::printed);
  c.oracle = integrate(s, [d1](const Vec& u) { return 2.0 * (u.head(d1).norm() + u.tail(u.size() - d1).norm()); });
  // E|π_1 u| = Γ(d/2) Γ((d1+1)/2) / (Γ(d1/2) Γ((d+1)/2)) for u uniform on S^{d-1}
  auto moment = [d = d1 + d2](int k) {
    return std::exp(std::lgamma(d / 2.0) + std::lgamma((k + 1) / 2.0) - std::lgamma(k / 2.0) - std::lgamma((d + 1) / 2.0));
  };
  c.exact = 2.0 * (moment(d1) + moment(d2));
  const double unit = product_mean_width(2.0, d1, 2.0, d2, 1.0);
  c.implied = {c.oracle.value / unit, c.oracle.std_error / unit, c.oracle.count};
  c.ratio = c.implied.value / c.printed;
  return c;
}

// --- rounded product ----------------------------------------------------------

namespace {

struct SquarePair {
  int index = 0;          // 1-based i
  std::size_t fx = 0, fy = 0;  // factors {x_i} and {y_i}
};

std::optional<SquarePair> find_square_pair(const BallProductSpec& spec) {
  for (int i = 1; i <= spec.n; ++i) {
    std::optional<std::size_t> fx, fy;
    for (std::size_t l = 0; l < spec.factors(); ++l) {
      if (spec.I[l] == std::vector<int>{i} && spec.J[l].empty()) fx = l;
      if (spec.J[l] == std::vector<int>{i} && spec.I[l].empty()) fy = l;
    }
    if (fx && fy && spec.radii[*fx] == spec.radii[*fy]) return SquarePair{i, *fx, *fy};
  }
  return std::nullopt;
}

}  // namespace

RoundedProductReport rounded_product_test(const BallProductSpec& spec, double p, const SphereSampler& s) {
  spec.validate();
  if (s.dim != 2 * spec.n) throw ValidationError("rounded_product_test: sampler dimension mismatch");
  if (!(p >= 2.0)) throw ValidationError("rounded_product_test: p must be >= 2");
  const auto pair = find_square_pair(spec);
  if (!pair) throw ValidationError("rounded_product_test: spec has no pair of 1-dimensional factors forming a square");
  const SupportBody original = ball_product_body(spec);
  const int n = spec.n;
  const double rho = spec.radii[pair->fx];
  const SupportBody rounded_plane = superellipse(p, rho * superellipse_radius(p, 4.0));

  std::vector<ProductBlock> blocks;
  blocks.push_back({{pair->index - 1, n + pair->index - 1}, rounded_plane});
  for (std::size_t l = 0; l < spec.factors(); ++l) {
    if (l == pair->fx || l == pair->fy) continue;
    const auto coords = spec.coordinates(l);
    blocks.push_back({coords, euclidean_ball(static_cast<int>(coords.size()), spec.radii[l])});
  }
  std::ostringstream label;
  label << "rounded(" << original.label() << ", p=" << p << ")";
  const SupportBody rounded = coordinate_product(2 * n, blocks, label.str());

  RoundedProductReport r;
  r.label = original.label();
  r.index = pair->index;
  r.rho = rho;
  r.p = p;
  r.plane_before = rho * 8.0 / kPi;
  r.plane_after = mean_width_2d(rounded_plane);

  const Mat v = draw_values(s, 2, [&](const Vec& u, std::span<double> out) {
    out[0] = 2.0 * original.support(u);
    out[1] = 2.0 * rounded.support(u);
  });
  auto mean_of = [](const Vec& x) { return estimate_mean(std::span<const double>(x.data(), static_cast<std::size_t>(x.size()))); };
  r.before = mean_of(v.col(0));
  r.after = mean_of(v.col(1));
  r.difference = mean_of(v.col(1) - v.col(0));
  const double plane_change = r.plane_after - r.plane_before;
  r.formula_difference = n >= 2 ? product_mean_width(plane_change, 2, 0.0, 2 * n - 2, Prefactor::calibrated) : plane_change;
  r.strict_decrease = r.after.value + 3.0 * r.after.std_error < r.before.value - 3.0 * r.before.std_error;
  r.formula_consistent = std::abs(r.difference.value - r.formula_difference) <= 3.0 * r.difference.std_error + 1e-12;
  return r;
}

// --- naive extension probe ----------------------------------------------------

ProbeReport naive_extension_probe(const BallProductSpec& spec, int index, const SphereSampler& s,
                                  const ProbeOptions& opt) {
  spec.validate();
  const int n = spec.n;
  if (s.dim != 2 * n) throw ValidationError("naive_extension_probe: sampler dimension mismatch");
  if (index < 1 || index > n) throw ValidationError("naive_extension_probe: index out of range");
  if (opt.grid < 3) throw ValidationError("naive_extension_probe: grid must be >= 3");
  std::size_t lx = 0, ly = 0;
  for (std::size_t l = 0; l < spec.factors(); ++l) {
    if (std::find(spec.I[l].begin(), spec.I[l].end(), index) != spec.I[l].end()) lx = l;
    if (std::find(spec.J[l].begin(), spec.J[l].end(), index) != spec.J[l].end()) ly = l;
  }
  if (lx == ly) {
    throw ValidationError("naive_extension_probe: x_" + std::to_string(index) + " and y_" + std::to_string(index) +
                          " lie in the same factor");
  }
  const double rho = spec.radii[lx];
  if (spec.radii[ly] != rho) throw ValidationError("naive_extension_probe: the two factors have different radii");

  const SupportBody body = ball_product_body(spec);
  const int cx = index - 1, cy = n + index - 1;
  ProbeReport r;
  r.label = body.label();
  r.index = index;
  r.p = opt.p;

  for (int k = 0; k < 256; ++k) {
    const double t = kTwoPi * k / 256.0;
    Vec u = Vec::Zero(2 * n);
    u[cx] = std::cos(t);
    u[cy] = std::sin(t);
    r.projection_error = std::max(r.projection_error, std::abs(body.support(u) - rho * (std::abs(u[cx]) + std::abs(u[cy]))));
  }

  const double rp = rho * superellipse_radius(opt.p, 4.0);
  const AreaMap map(RadialProfile::square(rho), RadialProfile::superellipse(opt.p, rp));
  const int fine = 2 * opt.grid - 1;
  Mat image(fine * fine, 2);
  Vec sa(fine * fine), sb(fine * fine);
  std::vector<char> coarse(static_cast<std::size_t>(fine * fine));
  for (int i = 0; i < fine; ++i) {
    for (int j = 0; j < fine; ++j) {
      const double a = -rho + 2.0 * rho * i / (fine - 1), b = -rho + 2.0 * rho * j / (fine - 1);
      const int k = i * fine + j;
      image.row(k) = map.apply({a, b}).transpose();
      sa[k] = std::sqrt(std::max(0.0, rho * rho - a * a));
      sb[k] = std::sqrt(std::max(0.0, rho * rho - b * b));
      coarse[static_cast<std::size_t>(k)] = i % 2 == 0 && j % 2 == 0;
    }
  }
  std::vector<int> rest_x, rest_y;
  for (int c : spec.coordinates(lx)) if (c != cx) rest_x.push_back(c);
  for (int c : spec.coordinates(ly)) if (c != cy) rest_y.push_back(c);
  std::vector<std::vector<int>> others;
  std::vector<double> other_radii;
  for (std::size_t l = 0; l < spec.factors(); ++l) {
    if (l == lx || l == ly) continue;
    others.push_back(spec.coordinates(l));
    other_radii.push_back(spec.radii[l]);
  }
  auto norm_of = [](const Vec& u, const std::vector<int>& cs) {
    double q = 0.0;
    for (int c : cs) q += u[c] * u[c];
    return std::sqrt(q);
  };
  // (fine, coarse) image support in direction u
  auto image_support = [&](const Vec& u) {
    double base = 0.0;
    for (std::size_t m = 0; m < others.size(); ++m) base += other_radii[m] * norm_of(u, others[m]);
    const double alpha = norm_of(u, rest_x), beta = norm_of(u, rest_y);
    double best_fine = -std::numeric_limits<double>::infinity(), best_coarse = best_fine;
    for (Eigen::Index k = 0; k < image.rows(); ++k) {
      const double v = image(k, 0) * u[cx] + image(k, 1) * u[cy] + alpha * sa[k] + beta * sb[k];
      best_fine = std::max(best_fine, v);
      if (coarse[static_cast<std::size_t>(k)]) best_coarse = std::max(best_coarse, v);
    }
    return std::pair{base + best_fine, base + best_coarse};
  };

  const SupportBody plane = superellipse(opt.p, rp);
  for (int k = 0; k < 64; ++k) {
    const double t = kTwoPi * k / 64.0;
    Vec u = Vec::Zero(2 * n);
    u[cx] = std::cos(t);
    u[cy] = std::sin(t);
    r.inplane_error = std::max(r.inplane_error, std::abs(image_support(u).first - plane.support(vec2(u[cx], u[cy]))));
  }

  const Mat v = draw_values(s, 3, [&](const Vec& u, std::span<double> out) {
    const auto [f, c] = image_support(u);
    out[0] = 2.0 * f;
    out[1] = 2.0 * c;
    out[2] = 2.0 * body.support(u);
  });
  auto mean_of = [](const Vec& x) { return estimate_mean(std::span<const double>(x.data(), static_cast<std::size_t>(x.size()))); };
  r.image = mean_of(v.col(0));
  r.original = mean_of(v.col(2));
  r.difference = mean_of(v.col(0) - v.col(2));
  r.grid_gap = (v.col(0) - v.col(1)).mean();
  // The grid supremum only underestimates; the coarse-to-fine gain bounds
  // the remaining gap of the fine grid.
  r.image_low = r.image.value - 3.0 * r.image.std_error;
  r.image_high = r.image.value + 3.0 * r.image.std_error + r.grid_gap;
  r.original_low = r.original.value - 3.0 * r.original.std_error;
  r.original_high = r.original.value + 3.0 * r.original.std_error;
  if (r.image_high < r.original_low) {
    r.conclusion = "DECREASE";
  } else if (r.image_low > r.original_high) {
    r.conclusion = "INCREASE";
  } else {
    r.conclusion = "NO_CONCLUSION";
  }
  return r;
}

// --- Hamiltonian flows --------------------------------------------------------

Polynomial::Polynomial(int dim, std::vector<Term> terms) : dim_(dim), terms_(std::move(terms)) {
  if (dim < 1) throw ValidationError("polynomial: dimension must be >= 1");
  for (const auto& t : terms_) {
    if (static_cast<int>(t.exponents.size()) != dim) throw ValidationError("polynomial: exponent vector has wrong length");
    for (int e : t.exponents) {
      if (e < 0) throw ValidationError("polynomial: negative exponent");
    }
    degree_ = std::max(degree_, std::accumulate(t.exponents.begin(), t.exponents.end(), 0));
  }
}

Polynomial Polynomial::random(int dim, int max_degree, std::mt19937_64& rng) {
  if (max_degree < 1) throw ValidationError("polynomial: degree must be >= 1");
  std::normal_distribution<double> normal;
  std::vector<Term> terms;
  std::vector<int> e(static_cast<std::size_t>(dim), 0);
  // enumerate exponent vectors with 1 <= |e| <= max_degree
  std::function<void(int, int)> rec = [&](int pos, int left) {
    if (pos == dim) {
      if (left < max_degree) terms.push_back({e, normal(rng)});
      return;
    }
    for (int k = 0; k <= left; ++k) {
      e[static_cast<std::size_t>(pos)] = k;
      rec(pos + 1, left - k);
    }
    e[static_cast<std::size_t>(pos)] = 0;
  };
  rec(0, max_degree);
  return Polynomial(dim, std::move(terms));
}

int Polynomial::degree() const { return degree_; }

namespace {

// powers[i][k] = z_i^k for k <= max_exponent
std::vector<std::vector<double>> power_table(const Vec& z, int max_exponent) {
  std::vector<std::vector<double>> pw(static_cast<std::size_t>(z.size()), std::vector<double>(static_cast<std::size_t>(max_exponent) + 1, 1.0));
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    auto& row = pw[static_cast<std::size_t>(i)];
    for (int k = 1; k <= max_exponent; ++k) row[static_cast<std::size_t>(k)] = row[static_cast<std::size_t>(k) - 1] * z[i];
  }
  return pw;
}

}  // namespace

double Polynomial::value(const Vec& z) const {
  if (z.size() != dim_) throw ValidationError("polynomial: argument has wrong dimension");
  const auto pw = power_table(z, degree());
  double v = 0.0;
  for (const auto& t : terms_) {
    double m = t.coeff;
    for (int i = 0; i < dim_; ++i) m *= pw[static_cast<std::size_t>(i)][static_cast<std::size_t>(t.exponents[static_cast<std::size_t>(i)])];
    v += m;
  }
  return v;
}

Vec Polynomial::gradient(const Vec& z) const {
  if (z.size() != dim_) throw ValidationError("polynomial: argument has wrong dimension");
  const auto pw = power_table(z, degree());
  Vec g = Vec::Zero(dim_);
  for (const auto& t : terms_) {
    for (int i = 0; i < dim_; ++i) {
      const int ei = t.exponents[static_cast<std::size_t>(i)];
      if (ei == 0) continue;
      double m = t.coeff * ei;
      for (int j = 0; j < dim_; ++j) {
        const int e = t.exponents[static_cast<std::size_t>(j)] - (j == i ? 1 : 0);
        m *= pw[static_cast<std::size_t>(j)][static_cast<std::size_t>(e)];
      }
      g[i] += m;
    }
  }
  return g;
}

std::string Polynomial::describe() const {
  std::ostringstream out;
  out.precision(4);
  out << "degree " << degree() << ", " << terms_.size() << " terms";
  return out.str();
}

Vec hamiltonian_field(const Polynomial& h, const Vec& z) {
  if (h.dim() != z.size() || z.size() % 2 != 0) throw ValidationError("hamiltonian_field: dimension mismatch");
  const Vec g = h.gradient(z);
  const Eigen::Index n = z.size() / 2;
  Vec out(z.size());
  out.head(n) = -g.tail(n);
  out.tail(n) = g.head(n);
  return out;
}

Vec hamiltonian_flow(const Polynomial& h, const Vec& z0, double t) {
  if (t == 0.0) return z0;
  using State = std::vector<double>;
  State z(z0.data(), z0.data() + z0.size());
  auto rhs = [&h](const State& x, State& dx, double) {
    const Vec f = hamiltonian_field(h, Eigen::Map<const Vec>(x.data(), static_cast<Eigen::Index>(x.size())));
    dx.assign(f.data(), f.data() + f.size());
  };
  odeint::integrate_adaptive(odeint::make_controlled<odeint::runge_kutta_dopri5<State>>(1e-13, 1e-13), rhs, z, 0.0, t,
                             t / 4.0);
  Vec out = Eigen::Map<const Vec>(z.data(), static_cast<Eigen::Index>(z.size()));
  if (!out.allFinite()) throw NumericalError("hamiltonian_flow: integration failed");
  return out;
}

Vec sampled_support(const Mat& points, const Mat& nodes) {
  if (points.cols() != nodes.rows()) throw ValidationError("sampled_support: dimension mismatch");
  if (points.rows() == 0) throw ValidationError("sampled_support: empty point set");
  Vec out(nodes.cols());
  constexpr Eigen::Index kBlock = 512;
  for (Eigen::Index c = 0; c < nodes.cols(); c += kBlock) {
    const Eigen::Index w = std::min(kBlock, nodes.cols() - c);
    const Mat dots = points * nodes.middleCols(c, w);
    out.segment(c, w) = dots.colwise().maxCoeff().transpose();
  }
  return out;
}

FlowReport nonlinear_flow_check(const SupportBody& k, const std::vector<Polynomial>& hamiltonians,
                                const SphereSampler& s, double t) {
  if (s.dim != k.dim()) throw ValidationError("nonlinear_flow_check: sampler dimension mismatch");
  if (!s.antithetic) throw ValidationError("nonlinear_flow_check: sampler must be antithetic");
  if (!(t > 0.0)) throw ValidationError("nonlinear_flow_check: t must be positive");
  FlowReport rep;
  rep.label = k.label();
  rep.t = t;
  rep.toric = k.ball_product() && classify_factors(*k.ball_product()).toric;

  const auto nodes = sphere_nodes(s);
  const auto count = static_cast<Eigen::Index>(nodes.size());
  Mat u(k.dim(), count), base(count, k.dim());
  for (Eigen::Index i = 0; i < count; ++i) {
    u.col(i) = nodes[static_cast<std::size_t>(i)];
    base.row(i) = k.gradient(nodes[static_cast<std::size_t>(i)]).transpose();
  }
  // Every flowed point moves by at most t, so only points within 2t of the
  // unperturbed maximum can attain the maximum after the flow.
  std::vector<std::vector<Eigen::Index>> candidates(static_cast<std::size_t>(count));
  constexpr Eigen::Index kBlock = 512;
  for (Eigen::Index c = 0; c < count; c += kBlock) {
    const Eigen::Index w = std::min(kBlock, count - c);
    const Mat dots = base * u.middleCols(c, w);
    for (Eigen::Index j = 0; j < w; ++j) {
      const double top = dots.col(j).maxCoeff();
      auto& list = candidates[static_cast<std::size_t>(c + j)];
      for (Eigen::Index i = 0; i < count; ++i) {
        if (dots(i, j) >= top - 2.0 * t) list.push_back(i);
      }
    }
  }
  auto support_after = [&](const Mat& pts) {
    Vec out(count);
    for (Eigen::Index j = 0; j < count; ++j) {
      double best = -std::numeric_limits<double>::infinity();
      for (Eigen::Index i : candidates[static_cast<std::size_t>(j)]) best = std::max(best, pts.row(i).dot(u.col(j)));
      out[j] = best;
    }
    return out;
  };
  int index = 0;
  for (const auto& h : hamiltonians) {
    if (h.dim() != k.dim()) throw ValidationError("nonlinear_flow_check: Hamiltonian dimension mismatch");
    // Keep the displacement of every sample point below t so that each node's
    // maximizer stays its own support point.
    double speed = 0.0;
    for (Eigen::Index i = 0; i < count; ++i) speed = std::max(speed, hamiltonian_field(h, base.row(i).transpose()).norm());
    const double step = t / std::max(1.0, speed);
    Mat plus(count, k.dim()), minus(count, k.dim());
    for_each_chunk(static_cast<std::size_t>(count), s.workers, [&](std::size_t i) {
      const auto r = static_cast<Eigen::Index>(i);
      plus.row(r) = hamiltonian_flow(h, base.row(r).transpose(), step).transpose();
      minus.row(r) = hamiltonian_flow(h, base.row(r).transpose(), -step).transpose();
    });
    const Vec hp = support_after(plus), hm = support_after(minus);
    // nodes come in antithetic pairs (u, -u)
    std::vector<double> pair(static_cast<std::size_t>(count / 2));
    for (std::size_t i = 0; i < pair.size(); ++i) {
      const auto a = static_cast<Eigen::Index>(2 * i), b = a + 1;
      pair[i] = (hp[a] + hp[b] - hm[a] - hm[b]) / (2.0 * step);
    }
    FlowRow row;
    row.hamiltonian = index++;
    row.description = h.describe();
    row.step = step;
    row.derivative = estimate_mean(pair);
    row.zero = std::abs(row.derivative.value) <= 3.0 * row.derivative.std_error;
    rep.rows.push_back(row);
  }
  rep.pass = true;
  if (rep.toric) {
    for (const auto& r : rep.rows) rep.pass = rep.pass && r.zero;
  }
  return rep;
}

FlowReport nonlinear_flow_check(const SupportBody& k, const SphereSampler& s, const FlowOptions& opt) {
  if (opt.hamiltonians < 1) throw ValidationError("nonlinear_flow_check: need at least one Hamiltonian");
  std::seed_seq seq{static_cast<std::uint32_t>(s.seed), static_cast<std::uint32_t>(s.seed >> 32), 0xf10cu};
  std::mt19937_64 rng(seq);
  std::vector<Polynomial> hs;
  for (int i = 0; i < opt.hamiltonians; ++i) hs.push_back(Polynomial::random(k.dim(), opt.degree, rng));
  return nonlinear_flow_check(k, hs, s, opt.t);
}

}  // namespace symcap
