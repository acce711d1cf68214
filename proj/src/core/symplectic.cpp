#include "symplectic.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <limits>

namespace symcap {

Mat symplectic_form(int n) {
  Mat j = Mat::Zero(2 * n, 2 * n);
  j.topRightCorner(n, n) = -Mat::Identity(n, n);
  j.bottomLeftCorner(n, n) = Mat::Identity(n, n);
  return j;
}

Mat SymmetricDirection::assemble() const {
  const int m = n();
  Mat y(2 * m, 2 * m);
  y << C, D, D, -C;
  return y;
}

void SymmetricDirection::validate() const {
  if (C.rows() != C.cols() || D.rows() != D.cols() || C.rows() != D.rows() || C.rows() < 1) {
    throw ValidationError("symmetric direction: C and D must be square of equal size");
  }
  const double scale = std::max(1.0, std::max(C.norm(), D.norm()));
  if ((C - C.transpose()).norm() > 1e-12 * scale || (D - D.transpose()).norm() > 1e-12 * scale) {
    throw ValidationError("symmetric direction: C and D must be symmetric");
  }
}

SymmetricDirection SymmetricDirection::from_matrix(const Mat& y, double tol) {
  if (y.rows() != y.cols() || y.rows() % 2 != 0) throw ValidationError("direction matrix must be 2n x 2n");
  const Eigen::Index n = y.rows() / 2;
  SymmetricDirection d{y.topLeftCorner(n, n), y.topRightCorner(n, n)};
  d.C = 0.5 * (d.C + d.C.transpose()).eval();
  d.D = 0.5 * (d.D + d.D.transpose()).eval();
  if ((d.assemble() - y).norm() > tol * std::max(1.0, y.norm())) {
    throw ValidationError("matrix is not of the form [[C, D], [D, -C]] with C, D symmetric");
  }
  return d;
}

std::vector<SymmetricDirection> direction_basis(int n) {
  if (n < 1) throw ValidationError("direction_basis: n must be >= 1");
  std::vector<SymmetricDirection> basis;
  const Mat zero = Mat::Zero(n, n);
  for (int block = 0; block < 2; ++block) {
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        Mat e = zero;
        e(i, j) = e(j, i) = 1.0;
        SymmetricDirection d = block == 0 ? SymmetricDirection{e, zero} : SymmetricDirection{zero, e};
        basis.push_back(d * (1.0 / d.assemble().norm()));
      }
    }
  }
  return basis;
}

Vec to_coordinates(const SymmetricDirection& y) {
  const auto basis = direction_basis(y.n());
  const Mat m = y.assemble();
  Vec c(static_cast<Eigen::Index>(basis.size()));
  for (std::size_t i = 0; i < basis.size(); ++i) c[static_cast<Eigen::Index>(i)] = basis[i].assemble().cwiseProduct(m).sum();
  return c;
}

SymmetricDirection from_coordinates(int n, const Vec& coords) {
  const auto basis = direction_basis(n);
  if (coords.size() != static_cast<Eigen::Index>(basis.size())) {
    throw ValidationError("direction coordinates: expected " + std::to_string(basis.size()) + " entries");
  }
  SymmetricDirection y{Mat::Zero(n, n), Mat::Zero(n, n)};
  for (std::size_t i = 0; i < basis.size(); ++i) y = y + basis[i] * coords[static_cast<Eigen::Index>(i)];
  return y;
}

SymmetricDirection random_direction(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  SymmetricDirection y{Mat::Zero(n, n), Mat::Zero(n, n)};
  for (Mat* m : {&y.C, &y.D}) {
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) (*m)(i, j) = (*m)(j, i) = normal(rng);
    }
  }
  return y * (1.0 / y.assemble().norm());
}

Mat random_unitary(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Mat a = Mat::Zero(n, n), b = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a(i, j) = normal(rng);
    for (int j = i; j < n; ++j) b(i, j) = b(j, i) = normal(rng);
  }
  a = (a - a.transpose()).eval();
  Mat w(2 * n, 2 * n);
  w << a, -b, b, a;
  return w.exp();
}

double symplectic_defect(const Mat& p) {
  const Mat j = symplectic_form(static_cast<int>(p.rows() / 2));
  return (p.transpose() * j * p - j).norm();
}

bool is_symplectic(const Mat& p, double tol) {
  return p.rows() == p.cols() && p.rows() % 2 == 0 && symplectic_defect(p) <= tol * std::max(1.0, p.squaredNorm());
}

Mat exp_direction(const SymmetricDirection& y, double s) {
  y.validate();
  const Mat m = s * y.assemble();
  const double norm = m.operatorNorm();
  if (!std::isfinite(norm) || norm > 700.0) {
    throw NumericalError("exp_direction: |s|·‖Y‖ = " + std::to_string(norm) + " overflows the exponential");
  }
  Mat e = m.exp();
  return 0.5 * (e + e.transpose());
}

PolarFactors polar_decompose(const Mat& p) {
  if (!is_symplectic(p, 1e-8)) throw ValidationError("polar_decompose: matrix is not symplectic");
  Eigen::SelfAdjointEigenSolver<Mat> eig(p.transpose() * p);
  const Vec lam = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Mat& v = eig.eigenvectors();
  PolarFactors f;
  f.S = v * lam.asDiagonal() * v.transpose();
  f.Q = p * (v * lam.cwiseInverse().asDiagonal() * v.transpose());
  return f;
}

SymmetricDirection log_positive(const Mat& s) {
  Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (s + s.transpose()));
  if (!(eig.eigenvalues().minCoeff() > 0.0)) throw ValidationError("log_positive: matrix is not positive definite");
  const Mat& v = eig.eigenvectors();
  const Mat l = v * eig.eigenvalues().array().log().matrix().asDiagonal() * v.transpose();
  return SymmetricDirection::from_matrix(l, 1e-6);
}

Estimate mean_width_image(const SupportBody& k, const Mat& p, const SphereSampler& s) {
  if (p.rows() != k.dim() || p.cols() != k.dim() || s.dim != k.dim()) {
    throw ValidationError("mean_width_image: dimension mismatch");
  }
  const Mat pt = p.transpose();
  return integrate(s, [&](const Vec& u) { return 2.0 * k.support(pt * u); });
}

Estimate first_variation(const SupportBody& k, const SymmetricDirection& y, const SphereSampler& s) {
  y.validate();
  if (2 * y.n() != k.dim() || s.dim != k.dim()) throw ValidationError("first_variation: dimension mismatch");
  const Mat m = y.assemble();
  // Each antithetic pair averages this with its value at -u.
  return integrate(s, [&](const Vec& u) { return 2.0 * k.gradient(u).dot(m * u); });
}

namespace {

// 2 Σ_l ρ_l Σ_{c in factor l} diag_c u_c² / |π_l u|.
Estimate diagonal_moment_sum(const BallProductSpec& spec, const Vec& diag, const SphereSampler& s) {
  spec.validate();
  if (s.dim != 2 * spec.n) throw ValidationError("moment sum: sampler dimension mismatch");
  std::vector<std::vector<int>> coords;
  for (std::size_t l = 0; l < spec.factors(); ++l) coords.push_back(spec.coordinates(l));
  return integrate(s, [&](const Vec& u) {
    double total = 0.0;
    for (std::size_t l = 0; l < coords.size(); ++l) {
      double q = 0.0, w = 0.0;
      for (int c : coords[l]) {
        q += u[c] * u[c];
        w += diag[c] * u[c] * u[c];
      }
      if (q > 0.0) total += spec.radii[l] * w / std::sqrt(q);
    }
    return 2.0 * total;
  });
}

}  // namespace

Estimate first_variation_moments(const BallProductSpec& spec, const SymmetricDirection& y, const SphereSampler& s) {
  y.validate();
  if (y.n() != spec.n) throw ValidationError("first_variation_moments: dimension mismatch");
  return diagonal_moment_sum(spec, y.assemble().diagonal(), s);
}

SecondVariation second_variation(const SupportBody& k, const SymmetricDirection& y, const SphereSampler& s,
                                 double h) {
  y.validate();
  if (2 * y.n() != k.dim() || s.dim != k.dim()) throw ValidationError("second_variation: dimension mismatch");
  if (!(h > 0.0) || h * y.assemble().operatorNorm() > 1.0) {
    throw ValidationError("second_variation: step must satisfy 0 < h·‖Y‖ <= 1");
  }
  const double steps[5] = {-h, -0.5 * h, 0.0, 0.5 * h, h};
  std::vector<Mat> maps;
  for (double t : steps) maps.push_back(exp_direction(y, t));
  const Mat v = draw_values(s, 5, [&](const Vec& u, std::span<double> out) {
    for (int i = 0; i < 5; ++i) out[static_cast<std::size_t>(i)] = 2.0 * k.support(maps[static_cast<std::size_t>(i)] * u);
  });
  const double f0 = v.col(2).mean();
  const double noise = 64.0 * std::numeric_limits<double>::epsilon() * std::abs(f0) / (h * h);
  if (noise > 1e-6 * std::max(1.0, std::abs(f0))) {
    throw NumericalError("second_variation: step " + std::to_string(h) + " is too small; rounding noise " +
                         std::to_string(noise) + " dominates");
  }
  const Vec coarse = (v.col(4) - 2.0 * v.col(2) + v.col(0)) / (h * h);
  const Vec fine = (v.col(3) - 2.0 * v.col(2) + v.col(1)) / (0.25 * h * h);
  const Vec rich = (4.0 * fine - coarse) / 3.0;
  SecondVariation out;
  out.step = h;
  const Estimate mc = estimate_mean(std::span<const double>(rich.data(), static_cast<std::size_t>(rich.size())));
  out.mc_error = mc.std_error;
  out.truncation = std::abs(fine.mean() - coarse.mean()) / 3.0;
  out.value = {mc.value, std::hypot(out.mc_error, out.truncation), mc.count};
  if (const auto& spec = k.ball_product()) {
    const Mat y2 = y.assemble() * y.assemble();
    out.sign_term = diagonal_moment_sum(*spec, y2.diagonal(), s);
  }
  return out;
}

namespace {

DirectionCheck check_direction(const SupportBody& k, const SymmetricDirection& y, const SphereSampler& s,
                               double step) {
  DirectionCheck c{y, first_variation(k, y, s), second_variation(k, y, s, step), false};
  c.pass = std::abs(c.first.value) <= 3.0 * c.first.std_error + 1e-12 && c.second.value.value > 0.0;
  return c;
}

}  // namespace

LocalMinVerdict verify_local_min(const BallProductSpec& spec, const SphereSampler& s, const LocalMinOptions& opt) {
  spec.validate();
  if (opt.directions < 1) throw ValidationError("verify_local_min: need at least one direction");
  const SupportBody k = ball_product_body(spec);
  LocalMinVerdict out;
  out.label = k.label();
  out.cond = cond_check(spec);
  std::seed_seq seq{static_cast<std::uint32_t>(s.seed), static_cast<std::uint32_t>(s.seed >> 32), 0x10ca1u};
  std::mt19937_64 rng(seq);
  out.pass = true;
  for (int i = 0; i < opt.directions; ++i) {
    out.directions.push_back(check_direction(k, random_direction(spec.n, rng), s, opt.step));
    out.pass = out.pass && out.directions.back().pass;
  }
  if (!out.cond) {
    double best_ratio = 0.0;
    for (const auto& e : direction_basis(spec.n)) {
      const Estimate f = first_variation(k, e, s);
      const double ratio = std::abs(f.value) / std::max(f.std_error, 1e-300);
      if (ratio > best_ratio) {
        best_ratio = ratio;
        // Orient the witness so that moving along it lowers M.
        const SymmetricDirection down = f.value > 0.0 ? e * -1.0 : e;
        if (ratio > 5.0) out.descent_witness = check_direction(k, down, s, opt.step);
      }
    }
    if (out.descent_witness) out.pass = false;
  }
  return out;
}

SearchResult local_search(const SupportBody& k, const SymmetricDirection& start, const SphereSampler& s,
                          const SearchOptions& opt) {
  start.validate();
  if (2 * start.n() != k.dim()) throw ValidationError("local_search: start has wrong dimension");
  if (opt.steps < 0) throw ValidationError("local_search: negative step count");
  const auto basis = direction_basis(start.n());
  Mat p = exp_direction(start);
  Estimate cur = mean_width_image(k, p, s);
  SearchResult out;
  out.trace.push_back(cur.value);
  out.trace_error.push_back(cur.std_error);
  double alpha = opt.initial_step;
  for (int step = 0; step < opt.steps; ++step) {
    const SupportBody image = linear_image(k, p);
    Vec g(static_cast<Eigen::Index>(basis.size()));
    for (std::size_t i = 0; i < basis.size(); ++i) g[static_cast<Eigen::Index>(i)] = first_variation(image, basis[i], s).value;
    const double gnorm = g.norm();
    if (gnorm < opt.gradient_tol) break;
    const SymmetricDirection grad = from_coordinates(start.n(), g);
    alpha = std::min(2.0 * alpha, 4.0 * opt.initial_step);
    bool accepted = false;
    for (int bt = 0; bt < 40 && !accepted; ++bt, alpha *= 0.5) {
      const Mat next = exp_direction(grad, -alpha) * p;
      const Estimate val = mean_width_image(k, next, s);
      if (val.value < cur.value - 1e-4 * alpha * gnorm * gnorm) {
        p = next;
        cur = val;
        accepted = true;
      }
    }
    if (!accepted) {
      out.stopped_early = true;
      break;
    }
    alpha *= 2.0;  // undo the halving applied on acceptance
    const double size = log_positive(polar_decompose(p).S).assemble().norm();
    if (size > opt.max_norm) {
      throw NumericalError("local_search: iterate left the region ‖log S‖ <= " + std::to_string(opt.max_norm) +
                           " (reached " + std::to_string(size) + ")");
    }
    out.trace.push_back(cur.value);
    out.trace_error.push_back(cur.std_error);
  }
  out.best = log_positive(polar_decompose(p).S);
  return out;
}

}  // namespace symcap
