#include "bodies.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace symcap {

namespace {

std::string join(const std::vector<double>& xs) {
  std::ostringstream out;
  for (std::size_t i = 0; i < xs.size(); ++i) out << (i ? "," : "") << xs[i];
  return out.str();
}

std::string join_sets(const std::vector<std::vector<int>>& sets) {
  std::ostringstream out;
  out << '[';
  for (std::size_t l = 0; l < sets.size(); ++l) {
    out << (l ? "," : "") << '[';
    for (std::size_t i = 0; i < sets[l].size(); ++i) out << (i ? "," : "") << sets[l][i];
    out << ']';
  }
  out << ']';
  return out.str();
}

std::string spec_label(const BallProductSpec& s) {
  return "ballproduct(rho=[" + join(s.radii) + "], I=" + join_sets(s.I) + ", J=" + join_sets(s.J) + ")";
}

void require_positive(double v, const std::string& what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(what + " must be positive and finite");
}

// Partition check for one family (I or J) of index sets.
void check_partition(const std::vector<std::vector<int>>& family, int n, const char* name) {
  std::vector<int> owner(static_cast<std::size_t>(n) + 1, -1);
  for (std::size_t l = 0; l < family.size(); ++l) {
    for (int i : family[l]) {
      if (i < 1 || i > n) {
        throw ValidationError(std::string("index ") + std::to_string(i) + " in " + name + "_" +
                              std::to_string(l + 1) + " is outside {1.." + std::to_string(n) + "}");
      }
      if (owner[static_cast<std::size_t>(i)] >= 0) {
        throw ValidationError(std::string("index ") + std::to_string(i) + " appears in both " + name + "_" +
                              std::to_string(owner[static_cast<std::size_t>(i)] + 1) + " and " + name + "_" +
                              std::to_string(l + 1));
      }
      owner[static_cast<std::size_t>(i)] = static_cast<int>(l);
    }
  }
  for (int i = 1; i <= n; ++i) {
    if (owner[static_cast<std::size_t>(i)] < 0) {
      throw ValidationError(std::string("index ") + std::to_string(i) + " is missing from " + name);
    }
  }
}

}  // namespace

// --- BallProductSpec ----------------------------------------------------------

std::vector<int> BallProductSpec::coordinates(std::size_t l) const {
  std::vector<int> c;
  c.reserve(I[l].size() + J[l].size());
  for (int i : I[l]) c.push_back(i - 1);
  for (int j : J[l]) c.push_back(n + j - 1);
  return c;
}

void BallProductSpec::validate() const {
  if (n < 1) throw ValidationError("ball product needs n >= 1");
  if (radii.empty()) throw ValidationError("ball product needs at least one factor");
  if (I.size() != radii.size() || J.size() != radii.size()) {
    throw ValidationError("ball product: rho, I and J must have the same number of factors");
  }
  for (std::size_t l = 0; l < radii.size(); ++l) {
    require_positive(radii[l], "radius rho_" + std::to_string(l + 1));
    if (I[l].empty() && J[l].empty()) {
      throw ValidationError("factor " + std::to_string(l + 1) + " has both I and J empty");
    }
  }
  check_partition(I, n, "I");
  check_partition(J, n, "J");
}

// --- SupportBody --------------------------------------------------------------

SupportBody::SupportBody(Parts parts) : parts_(std::make_shared<const Parts>(std::move(parts))) {
  if (parts_->dim < 1) throw ValidationError("body dimension must be positive");
  if (!parts_->support || !parts_->gradient) throw ValidationError("body needs support and gradient");
}

double SupportBody::distance(const Vec& x) const {
  if (!parts_->distance) throw ValidationError("body " + label() + " has no distance oracle");
  return parts_->distance(x);
}

SupportBody SupportBody::relabeled(std::string label) const {
  Parts p = *parts_;
  p.label = std::move(label);
  return SupportBody(std::move(p));
}

double ball_volume(int d) {
  if (d < 1) throw ValidationError("ball_volume needs d >= 1");
  return std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

// --- ball products ------------------------------------------------------------

SupportBody ball_product_body(const BallProductSpec& spec) {
  spec.validate();
  const int dim = 2 * spec.n;
  std::vector<std::vector<int>> coords(spec.factors());
  for (std::size_t l = 0; l < spec.factors(); ++l) coords[l] = spec.coordinates(l);
  const std::vector<double> rho = spec.radii;

  auto factor_norm = [](const Vec& v, const std::vector<int>& c) {
    double s = 0.0;
    for (int i : c) s += v[i] * v[i];
    return std::sqrt(s);
  };

  SupportBody::Parts p;
  p.dim = dim;
  p.support = [=](const Vec& u) {
    double h = 0.0;
    for (std::size_t l = 0; l < coords.size(); ++l) h += rho[l] * factor_norm(u, coords[l]);
    return h;
  };
  p.gradient = [=](const Vec& z) {
    Vec g = Vec::Zero(z.size());
    for (std::size_t l = 0; l < coords.size(); ++l) {
      const double r = factor_norm(z, coords[l]);
      if (r == 0.0) continue;  // nonsmooth point: omit the factor
      for (int i : coords[l]) g[i] = rho[l] * z[i] / r;
    }
    return g;
  };
  p.distance = [=](const Vec& x) {
    double s = 0.0;
    for (std::size_t l = 0; l < coords.size(); ++l) {
      const double excess = std::max(0.0, factor_norm(x, coords[l]) - rho[l]);
      s += excess * excess;
    }
    return std::sqrt(s);
  };
  double vol = 1.0;
  double r2 = 0.0;
  for (std::size_t l = 0; l < coords.size(); ++l) {
    const int m = spec.factor_dim(l);
    vol *= ball_volume(m) * std::pow(rho[l], m);
    r2 += rho[l] * rho[l];
  }
  p.volume = vol;
  p.radius_bound = std::sqrt(r2);
  p.label = spec_label(spec);
  p.ball_product = spec;
  return SupportBody(std::move(p));
}

namespace {

BallProductSpec full_ball_spec(int n, double radius) {
  BallProductSpec s;
  s.n = n;
  s.radii = {radius};
  std::vector<int> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), 1);
  s.I = {all};
  s.J = {all};
  return s;
}

}  // namespace

SupportBody unit_ball(int n) { return ball(n, 1.0); }

SupportBody ball(int n, double radius) {
  require_positive(radius, "ball radius");
  if (n < 1) throw ValidationError("ball(n) needs n >= 1");
  auto b = ball_product_body(full_ball_spec(n, radius));
  std::ostringstream label;
  if (radius == 1.0) {
    label << "ball(" << n << ")";
  } else {
    label << "scale(" << radius << ",ball(" << n << "))";
  }
  return b.relabeled(label.str());
}

SupportBody cube(int n) {
  if (n < 1) throw ValidationError("cube(n) needs n >= 1");
  BallProductSpec s;
  s.n = n;
  for (int i = 1; i <= n; ++i) {
    s.radii.push_back(1.0);
    s.I.push_back({i});
    s.J.push_back({});
  }
  for (int j = 1; j <= n; ++j) {
    s.radii.push_back(1.0);
    s.I.push_back({});
    s.J.push_back({j});
  }
  return ball_product_body(s).relabeled("cube(" + std::to_string(n) + ")");
}

SupportBody polydisk(const std::vector<double>& radii) {
  if (radii.empty()) throw ValidationError("polydisk needs at least one radius");
  BallProductSpec s;
  s.n = static_cast<int>(radii.size());
  for (std::size_t j = 0; j < radii.size(); ++j) {
    require_positive(radii[j], "polydisk radius " + std::to_string(j + 1));
    const int idx = static_cast<int>(j) + 1;
    s.radii.push_back(radii[j]);
    s.I.push_back({idx});
    s.J.push_back({idx});
  }
  return ball_product_body(s).relabeled("polydisk(" + join(radii) + ")");
}

SupportBody ellipsoid(const std::vector<double>& semi_axes) {
  if (semi_axes.empty()) throw ValidationError("ellipsoid needs at least one semi-axis");
  for (std::size_t i = 0; i < semi_axes.size(); ++i) {
    require_positive(semi_axes[i], "ellipsoid semi-axis " + std::to_string(i + 1));
  }
  const Vec a = Eigen::Map<const Vec>(semi_axes.data(), static_cast<Eigen::Index>(semi_axes.size()));
  const Vec a2 = a.array().square();

  SupportBody::Parts p;
  p.dim = static_cast<int>(a.size());
  p.support = [a](const Vec& u) { return a.cwiseProduct(u).norm(); };
  p.gradient = [a, a2](const Vec& z) -> Vec {
    const double r = a.cwiseProduct(z).norm();
    if (r == 0.0) return Vec::Zero(z.size());
    return a2.cwiseProduct(z) / r;
  };
  p.distance = [a, a2](const Vec& x) {
    if (x.cwiseQuotient(a).squaredNorm() <= 1.0) return 0.0;
    // Closest boundary point y_i = a_i^2 x_i / (a_i^2 + lambda); solve the
    // secular equation sum (a_i x_i / (a_i^2 + lambda))^2 = 1 for lambda > 0.
    auto secular = [&](double lambda) {
      return (a.cwiseProduct(x).array() / (a2.array() + lambda)).square().sum() - 1.0;
    };
    double hi = a.maxCoeff() * x.norm();
    boost::uintmax_t iters = 200;
    const auto [lo_root, hi_root] = boost::math::tools::toms748_solve(
        secular, 0.0, hi, boost::math::tools::eps_tolerance<double>(52), iters);
    const double lambda = 0.5 * (lo_root + hi_root);
    const Vec y = (a2.array() * x.array() / (a2.array() + lambda)).matrix();
    return (x - y).norm();
  };
  p.volume = ball_volume(p.dim) * a.prod();
  p.radius_bound = a.maxCoeff();
  p.label = "ellipsoid(" + join(semi_axes) + ")";
  return SupportBody(std::move(p));
}

SupportBody superellipse(double pexp, double r) {
  if (!(pexp >= 1.0)) throw ValidationError("superellipse exponent p must be >= 1");
  require_positive(r, "superellipse radius");
  const bool pinf = std::isinf(pexp);
  // Dual exponent q with 1/p + 1/q = 1; q = inf for p = 1.
  const double q = pexp == 1.0 ? std::numeric_limits<double>::infinity() : (pinf ? 1.0 : pexp / (pexp - 1.0));

  auto qnorm = [q](double x, double y) {
    x = std::abs(x);
    y = std::abs(y);
    if (std::isinf(q)) return std::max(x, y);
    if (q == 1.0) return x + y;
    const double m = std::max(x, y);
    if (m == 0.0) return 0.0;
    return m * std::pow(std::pow(x / m, q) + std::pow(y / m, q), 1.0 / q);
  };

  SupportBody::Parts p;
  p.dim = 2;
  p.support = [=](const Vec& u) { return r * qnorm(u[0], u[1]); };
  p.gradient = [=](const Vec& z) -> Vec {
    Vec g = Vec::Zero(2);
    const double nq = qnorm(z[0], z[1]);
    if (nq == 0.0) return g;
    if (std::isinf(q)) {
      const int i = std::abs(z[0]) >= std::abs(z[1]) ? 0 : 1;
      g[i] = r * (z[i] > 0 ? 1.0 : -1.0);
      return g;
    }
    for (int i = 0; i < 2; ++i) {
      const double s = z[i] > 0 ? 1.0 : (z[i] < 0 ? -1.0 : 0.0);
      g[i] = r * s * std::pow(std::abs(z[i]) / nq, q - 1.0);
    }
    return g;
  };
  if (pinf) {
    p.volume = 4.0 * r * r;
  } else {
    const double g1 = std::tgamma(1.0 + 1.0 / pexp);
    p.volume = 4.0 * r * r * g1 * g1 / std::tgamma(1.0 + 2.0 / pexp);
  }
  p.radius_bound = pinf ? r * std::sqrt(2.0) : r * std::max(1.0, std::pow(2.0, 0.5 - 1.0 / pexp));
  std::ostringstream label;
  label << "superellipse(" << pexp << "," << r << ")";
  p.label = label.str();
  return SupportBody(std::move(p));
}

SupportBody coordinate_product(int dim, const std::vector<ProductBlock>& blocks, std::string label) {
  std::vector<int> seen(static_cast<std::size_t>(std::max(dim, 0)), 0);
  for (const auto& b : blocks) {
    if (static_cast<int>(b.coords.size()) != b.body.dim()) {
      throw ValidationError("product block " + b.body.label() + " has mismatched coordinate count");
    }
    for (int c : b.coords) {
      if (c < 0 || c >= dim) throw ValidationError("product coordinate " + std::to_string(c) + " out of range");
      if (seen[static_cast<std::size_t>(c)]++) {
        throw ValidationError("product coordinate " + std::to_string(c) + " used twice");
      }
    }
  }
  for (int c = 0; c < dim; ++c) {
    if (!seen[static_cast<std::size_t>(c)]) throw ValidationError("product leaves coordinate " + std::to_string(c) + " unused");
  }

  auto gather = [](const Vec& v, const std::vector<int>& c) {
    Vec out(static_cast<Eigen::Index>(c.size()));
    for (std::size_t i = 0; i < c.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[c[i]];
    return out;
  };

  SupportBody::Parts p;
  p.dim = dim;
  p.support = [=](const Vec& u) {
    double h = 0.0;
    for (const auto& b : blocks) h += b.body.support(gather(u, b.coords));
    return h;
  };
  p.gradient = [=](const Vec& z) {
    Vec g = Vec::Zero(z.size());
    for (const auto& b : blocks) {
      const Vec gb = b.body.gradient(gather(z, b.coords));
      for (std::size_t i = 0; i < b.coords.size(); ++i) g[b.coords[i]] = gb[static_cast<Eigen::Index>(i)];
    }
    return g;
  };
  const bool all_distance = std::all_of(blocks.begin(), blocks.end(), [](const auto& b) { return b.body.has_distance(); });
  if (all_distance) {
    p.distance = [=](const Vec& x) {
      double s = 0.0;
      for (const auto& b : blocks) {
        const double d = b.body.distance(gather(x, b.coords));
        s += d * d;
      }
      return std::sqrt(s);
    };
  }
  const bool all_volume = std::all_of(blocks.begin(), blocks.end(), [](const auto& b) { return b.body.volume().has_value(); });
  if (all_volume) {
    double v = 1.0;
    for (const auto& b : blocks) v *= *b.body.volume();
    p.volume = v;
  }
  double r2 = 0.0;
  for (const auto& b : blocks) r2 += b.body.radius_bound() * b.body.radius_bound();
  p.radius_bound = std::sqrt(r2);
  if (label.empty()) {
    label = "product(";
    for (std::size_t i = 0; i < blocks.size(); ++i) label += (i ? "," : "") + blocks[i].body.label();
    label += ")";
  }
  p.label = std::move(label);
  return SupportBody(std::move(p));
}

std::optional<double> euclidean_ball_radius(const SupportBody& k) {
  const auto& bp = k.ball_product();
  if (!bp || bp->radii.size() != 1) return std::nullopt;
  return bp->radii[0];
}

SupportBody minkowski_sum(const SupportBody& a, const SupportBody& b) {
  if (a.dim() != b.dim()) {
    throw ValidationError("minkowski_sum: dimension mismatch (" + std::to_string(a.dim()) + " vs " +
                          std::to_string(b.dim()) + ")");
  }
  SupportBody::Parts p;
  p.dim = a.dim();
  p.support = [a, b](const Vec& u) { return a.support(u) + b.support(u); };
  p.gradient = [a, b](const Vec& z) -> Vec { return a.gradient(z) + b.gradient(z); };
  p.radius_bound = a.radius_bound() + b.radius_bound();
  // dist(x, K + rB) = max(0, dist(x, K) - r)
  auto with_ball = [&p](const SupportBody& k, double r) {
    if (k.has_distance()) p.distance = [k, r](const Vec& x) { return std::max(0.0, k.distance(x) - r); };
  };
  if (auto r = euclidean_ball_radius(b)) {
    with_ball(a, *r);
  } else if (auto r2 = euclidean_ball_radius(a)) {
    with_ball(b, *r2);
  }
  p.label = "sum(" + a.label() + "," + b.label() + ")";
  return SupportBody(std::move(p));
}

SupportBody scaled(const SupportBody& k, double factor) {
  require_positive(factor, "scale factor");
  SupportBody::Parts p;
  p.dim = k.dim();
  p.support = [k, factor](const Vec& u) { return factor * k.support(u); };
  p.gradient = [k, factor](const Vec& z) -> Vec { return factor * k.gradient(z); };
  if (k.has_distance()) {
    p.distance = [k, factor](const Vec& x) { return factor * k.distance(x / factor); };
  }
  if (k.volume()) p.volume = *k.volume() * std::pow(factor, k.dim());
  p.radius_bound = factor * k.radius_bound();
  if (k.ball_product()) {
    BallProductSpec s = *k.ball_product();
    for (double& r : s.radii) r *= factor;
    p.ball_product = s;
  }
  std::ostringstream label;
  label << "scale(" << factor << "," << k.label() << ")";
  p.label = label.str();
  return SupportBody(std::move(p));
}

SupportBody linear_image(const SupportBody& k, const Mat& a) {
  if (a.rows() != k.dim() || a.cols() != k.dim()) {
    throw ValidationError("linear_image: matrix must be " + std::to_string(k.dim()) + "x" + std::to_string(k.dim()));
  }
  Eigen::JacobiSVD<Mat> svd(a);
  const auto& sv = svd.singularValues();
  if (!(sv.minCoeff() > 1e-12 * sv.maxCoeff()) || !std::isfinite(sv.maxCoeff())) {
    throw ValidationError("linear_image: matrix is singular (determinant below tolerance)");
  }
  const Mat at = a.transpose();
  SupportBody::Parts p;
  p.dim = k.dim();
  p.support = [k, at](const Vec& u) { return k.support(at * u); };
  p.gradient = [k, a, at](const Vec& z) -> Vec { return a * k.gradient(at * z); };
  if (k.volume()) p.volume = *k.volume() * std::abs(a.determinant());
  p.radius_bound = sv.maxCoeff() * k.radius_bound();
  std::ostringstream label;
  label << "linimg([";
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    label << (r ? "," : "") << '[';
    for (Eigen::Index c = 0; c < a.cols(); ++c) label << (c ? "," : "") << a(r, c);
    label << ']';
  }
  label << "]," << k.label() << ")";
  p.label = label.str();
  return SupportBody(std::move(p));
}

// --- standard specs ----------------------------------------------------------

BallProductSpec lagrangian_bidisk_spec() {
  return BallProductSpec{2, {1.0, 1.0}, {{1, 2}, {}}, {{}, {1, 2}}};
}

BallProductSpec square_spec(double rho) { return BallProductSpec{1, {rho, rho}, {{1}, {}}, {{}, {1}}}; }

BallProductSpec segments_spec(double rho_e, double rho_f) {
  return BallProductSpec{1, {rho_e, rho_f}, {{1}, {}}, {{}, {1}}};
}

BallProductSpec square_times_disk_spec() {
  return BallProductSpec{2, {1.0, 1.0, 1.0}, {{1}, {}, {2}}, {{}, {1}, {2}}};
}

// --- predicates ----------------------------------------------------------------

bool cond_check(const BallProductSpec& spec) {
  spec.validate();
  for (std::size_t l = 0; l < spec.factors(); ++l) {
    const std::set<int> il(spec.I[l].begin(), spec.I[l].end());
    for (std::size_t m = 0; m < spec.factors(); ++m) {
      const bool meets = std::any_of(spec.J[m].begin(), spec.J[m].end(), [&](int j) { return il.count(j) > 0; });
      if (!meets) continue;
      if (spec.factor_dim(l) != spec.factor_dim(m) || spec.radii[l] != spec.radii[m]) return false;
    }
  }
  return true;
}

FactorClassification classify_factors(const BallProductSpec& spec) {
  spec.validate();
  FactorClassification out;
  out.symplectic.resize(spec.factors());
  for (std::size_t l = 0; l < spec.factors(); ++l) {
    const std::set<int> il(spec.I[l].begin(), spec.I[l].end());
    const std::set<int> jl(spec.J[l].begin(), spec.J[l].end());
    out.symplectic[l] = il == jl;
  }
  out.toric = std::all_of(out.symplectic.begin(), out.symplectic.end(), [](bool s) { return s; });
  out.test_family = cond_check(spec) && !out.toric;
  return out;
}

std::vector<CatalogEntry> standard_bodies() {
  std::vector<CatalogEntry> out;
  auto add = [&](SupportBody b) { out.push_back({b.label(), std::move(b)}); };
  add(unit_ball(1));
  add(unit_ball(2));
  add(cube(1));
  add(cube(2));
  add(ellipsoid({2.0, 1.0}));
  add(ellipsoid({1.5, 1.0, 0.8, 1.2}));
  add(polydisk({1.0, 2.0}));
  add(ball_product_body(lagrangian_bidisk_spec()));
  add(ball_product_body(square_times_disk_spec()));
  add(ball_product_body(segments_spec(1.0, 2.0)));
  return out;
}

}  // namespace symcap
