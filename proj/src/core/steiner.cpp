#include "steiner.hpp"

#include "parallel.hpp"

#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <limits>
#include <random>

namespace symcap {

namespace {

double binomial(int d, int i) {
  double b = 1.0;
  for (int j = 1; j <= i; ++j) b = b * (d - i + j) / j;
  return b;
}

double sum_ball_distance(const SupportBody& k, double t, const Vec& x) {
  if (t == 0.0) return x.norm();
  return t * k.distance(x / t);
}

Estimate box_volume(const SupportBody& k, double t, const VolumeOptions& opt) {
  const int d = k.dim();
  const double half = 1.0 + t * k.radius_bound();
  const double box = std::pow(2.0 * half, d);
  // Keep relative error roughly flat in t: the hit fraction shrinks roughly
  // like ((1+t)/(1+tR))^d.
  const double growth = std::pow(half / (1.0 + t), d);
  const auto n = static_cast<std::size_t>(std::ceil(static_cast<double>(opt.budget) * std::max(1.0, growth)));
  constexpr std::size_t kChunk = 8192;
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<std::size_t> hits(chunks, 0);
  for_each_chunk(chunks, opt.workers, [&](std::size_t c) {
    std::seed_seq seq{static_cast<std::uint32_t>(opt.seed), static_cast<std::uint32_t>(opt.seed >> 32),
                      static_cast<std::uint32_t>(c), 0xb0c5u};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> unif(-half, half);
    Vec x(d);
    const std::size_t end = std::min(n, (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) {
      for (int j = 0; j < d; ++j) x[j] = unif(rng);
      if (sum_ball_distance(k, t, x) <= 1.0) ++hits[c];
    }
  });
  std::size_t total = 0;
  for (auto h : hits) total += h;
  const double p = static_cast<double>(total) / static_cast<double>(n);
  return {box * p, box * std::sqrt(p * (1.0 - p) / static_cast<double>(n)), n};
}

}  // namespace

double radial_sum_ball(const SupportBody& k, double t, const Vec& u) {
  if (t == 0.0) return 1.0;
  auto g = [&](double r) { return sum_ball_distance(k, t, r * u) - 1.0; };
  const double lo = 1.0;
  double hi = 1.0 + t * k.radius_bound();
  const double glo = g(lo);
  if (glo >= 0.0) return lo;
  double ghi = g(hi);
  while (ghi < 0.0) {
    hi *= 2.0;
    ghi = g(hi);
  }
  if (ghi == 0.0) return hi;
  boost::uintmax_t iters = 100;
  const auto [a, b] = boost::math::tools::toms748_solve(g, lo, hi, glo, ghi,
                                                        boost::math::tools::eps_tolerance<double>(50), iters);
  return 0.5 * (a + b);
}

Estimate volume_sum_ball(const SupportBody& k, double t, const VolumeOptions& opt) {
  if (!k.has_distance()) throw ValidationError("volume_sum_ball: body " + k.label() + " has no distance oracle");
  if (!(t >= 0.0)) throw ValidationError("volume_sum_ball: t must be >= 0");
  if (opt.budget == 0) throw ValidationError("volume_sum_ball: zero budget");
  if (opt.method == VolumeMethod::box) return box_volume(k, t, opt);
  const double kappa = ball_volume(k.dim());
  const SphereSampler s{k.dim(), opt.seed, opt.budget, true, opt.workers};
  return integrate(s, [&](const Vec& u) { return kappa * std::pow(radial_sum_ball(k, t, u), k.dim()); });
}

Estimate body_volume(const SupportBody& k, const VolumeOptions& opt) {
  if (!k.has_distance()) throw ValidationError("body_volume: body " + k.label() + " has no distance oracle");
  if (opt.budget == 0) throw ValidationError("body_volume: zero budget");
  const double kappa = ball_volume(k.dim());
  const SphereSampler s{k.dim(), opt.seed, opt.budget, true, opt.workers};
  return integrate(s, [&](const Vec& u) {
    double lo = 0.0, hi = k.radius_bound();
    if (k.distance(hi * u) == 0.0) return kappa * std::pow(hi, k.dim());
    while (hi - lo > 1e-12 * hi) {
      const double mid = 0.5 * (lo + hi);
      (k.distance(mid * u) > 0.0 ? hi : lo) = mid;
    }
    return kappa * std::pow(0.5 * (lo + hi), k.dim());
  });
}

double SteinerFit::volume(double t) const {
  double v = 0.0;
  for (std::size_t i = coeffs.size(); i-- > 0;) v = v * t + coeffs[i];
  return v;
}

double SteinerFit::volume_derivative(double t) const {
  double v = 0.0;
  for (std::size_t i = coeffs.size(); i-- > 1;) v = v * t + static_cast<double>(i) * coeffs[i];
  return v;
}

double SteinerFit::volume_error(double t) const {
  Vec p(static_cast<Eigen::Index>(coeffs.size()));
  double tp = 1.0;
  for (Eigen::Index i = 0; i < p.size(); ++i, tp *= t) p[i] = tp;
  return std::sqrt(std::max(0.0, p.dot(coeff_cov * p)));
}

SteinerFit steiner_fit(const SupportBody& k, const SteinerOptions& opt) {
  if (!k.has_distance()) throw ValidationError("steiner_fit: body " + k.label() + " has no distance oracle");
  const int d = k.dim();
  const std::size_t m = opt.nodes ? opt.nodes : static_cast<std::size_t>(d + 5);
  if (m < static_cast<std::size_t>(d + 1)) {
    throw ValidationError("steiner_fit: need at least " + std::to_string(d + 1) + " nodes for degree " +
                          std::to_string(d));
  }
  if (!(opt.T > 0.0)) throw ValidationError("steiner_fit: T must be positive");

  SteinerFit fit;
  fit.dim = d;
  fit.T = opt.T;
  fit.label = k.label();
  fit.seed = opt.seed;
  fit.budget = opt.budget;
  for (std::size_t j = 0; j < m; ++j) {
    fit.nodes.push_back(0.5 * opt.T * (1.0 - std::cos((2.0 * j + 1.0) * kPi / (2.0 * m))));
  }

  // Vandermonde in s = t / T.
  Mat vand(static_cast<Eigen::Index>(m), d + 1);
  for (std::size_t j = 0; j < m; ++j) {
    const double s = fit.nodes[j] / opt.T;
    double p = 1.0;
    for (int c = 0; c <= d; ++c, p *= s) vand(static_cast<Eigen::Index>(j), c) = p;
  }
  Eigen::JacobiSVD<Mat> svd(vand, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  fit.condition = sv.maxCoeff() / sv.minCoeff();
  if (!(fit.condition <= opt.max_condition)) {
    throw NumericalError("steiner_fit: Vandermonde condition " + std::to_string(fit.condition) +
                         " exceeds threshold; use more nodes or a larger budget, or lower the degree");
  }
  const Mat pinv = svd.solve(Mat::Identity(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m)));

  const double kappa = ball_volume(d);
  const SphereSampler sampler{d, opt.seed, opt.budget, true, opt.workers};
  const Mat vols = draw_values(sampler, m, [&](const Vec& u, std::span<double> out) {
    for (std::size_t j = 0; j < m; ++j) out[j] = kappa * std::pow(radial_sum_ball(k, fit.nodes[j], u), d);
  });
  const auto draws = static_cast<double>(vols.rows());

  // Per-draw coefficients in t (unscaled).
  Mat coef = vols * pinv.transpose();
  for (int c = 0; c <= d; ++c) coef.col(c) /= std::pow(opt.T, c);
  const Vec mean = coef.colwise().mean();
  const Mat centered = coef.rowwise() - mean.transpose();
  fit.coeff_cov = (centered.transpose() * centered) / (draws * std::max(1.0, draws - 1.0));
  // Rounding floor of the least-squares solve; dominates only when the
  // sampling variance vanishes (K a ball).
  const double scale = (mean.array() * Eigen::pow(opt.T, Eigen::ArrayXd::LinSpaced(d + 1, 0, d))).matrix().norm();
  for (int c = 0; c <= d; ++c) {
    const double r = 64.0 * std::numeric_limits<double>::epsilon() * fit.condition * scale / std::pow(opt.T, c);
    fit.coeff_cov(c, c) += r * r;
  }

  const Vec vmean = vols.colwise().mean();
  for (std::size_t j = 0; j < m; ++j) {
    const auto col = vols.col(static_cast<Eigen::Index>(j));
    const double var = (col.array() - vmean[static_cast<Eigen::Index>(j)]).square().sum() / std::max(1.0, draws - 1.0);
    fit.volumes.push_back({vmean[static_cast<Eigen::Index>(j)], std::sqrt(var / draws), sampler.nodes()});
  }

  for (int c = 0; c <= d; ++c) {
    fit.coeffs.push_back(mean[c]);
    fit.coeff_err.push_back(std::sqrt(std::max(0.0, fit.coeff_cov(c, c))));
  }
  double misfit = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const double r = fit.volume(fit.nodes[j]) - vmean[static_cast<Eigen::Index>(j)];
    misfit += r * r;
  }
  fit.residual = std::sqrt(misfit) / vmean.norm();

  for (int i = 0; i <= d; ++i) {
    const double b = binomial(d, i);
    fit.W.push_back(fit.coeffs[static_cast<std::size_t>(d - i)] / b);
    fit.W_err.push_back(fit.coeff_err[static_cast<std::size_t>(d - i)] / b);
  }
  for (int i = 0; i < d; ++i) {
    const double ratio = std::max(0.0, fit.W[static_cast<std::size_t>(i)] / kappa);
    const double e = 1.0 / (d - i);
    const double wbar = std::pow(ratio, e);
    fit.Wbar.push_back(wbar);
    const double rel = fit.W[static_cast<std::size_t>(i)] > 0.0
                           ? fit.W_err[static_cast<std::size_t>(i)] / fit.W[static_cast<std::size_t>(i)]
                           : 0.0;
    fit.Wbar_err.push_back(wbar * e * rel);
  }
  return fit;
}

Estimate meanwidth_from_quermass(const SteinerFit& fit) {
  const double kappa = ball_volume(fit.dim);
  const auto i = static_cast<std::size_t>(fit.dim - 1);
  return {2.0 * fit.W[i] / kappa, 2.0 * fit.W_err[i] / kappa, fit.budget};
}

FTable f_functions(const SupportBody& k, const CapacityFn& capacity, const std::vector<double>& t_grid,
                   const FOptions& opt) {
  const int d = k.dim();
  const double kappa = ball_volume(d);
  const SteinerFit fit = steiner_fit(k, opt.steiner);

  FTable table;
  table.label = k.label();
  table.capacity_k = capacity(k);
  table.mean_width_fit = meanwidth_from_quermass(fit);
  const double sc = std::sqrt(table.capacity_k.value);
  const double sc_err = table.capacity_k.std_error / (2.0 * std::max(sc, 1e-300));
  table.derivative_closed = {sc - 0.5 * table.mean_width_fit.value,
                             std::hypot(sc_err, 0.5 * table.mean_width_fit.std_error), fit.budget};

  // Direct route: F̃ from radial volumes at t = h and 2h on common directions,
  // Richardson-combined forward differences. Errors by linearization per draw.
  const double h = opt.fd_step;
  table.fd_step = h;
  const SphereSampler sampler{d, opt.steiner.seed ^ 0x9e3779b97f4a7c15ULL, opt.steiner.budget, true,
                              opt.steiner.workers};
  const Mat vols = draw_values(sampler, 2, [&](const Vec& u, std::span<double> out) {
    out[0] = kappa * std::pow(radial_sum_ball(k, h, u), d);
    out[1] = kappa * std::pow(radial_sum_ball(k, 2.0 * h, u), d);
  });
  const double v1 = vols.col(0).mean();
  const double v2 = vols.col(1).mean();
  auto ftilde = [&](double t, double v) { return (1.0 + t * sc) / std::pow(v / kappa, 1.0 / d); };
  const double f1 = ftilde(h, v1);
  const double f2 = ftilde(2.0 * h, v2);
  const double rich = 2.0 * (f1 - 1.0) / h - (f2 - 1.0) / (2.0 * h);
  // dF̃/dV = -F̃ / (d V)
  const double a = 2.0 / h * (-f1 / (d * v1));
  const double b = -1.0 / (2.0 * h) * (-f2 / (d * v2));
  const Vec z = a * vols.col(0) + b * vols.col(1);
  const double zvar = (z.array() - z.mean()).square().sum() / std::max(1.0, z.size() - 1.0);
  // d/d(sqrt c) of the Richardson combination is 2 - 1 = 1 at first order.
  table.derivative_fd = {rich, std::hypot(std::sqrt(zvar / z.size()), sc_err), sampler.nodes()};

  for (double t : t_grid) {
    FRow row;
    row.t = t;
    const double v = fit.volume(t);
    const double v_err = fit.volume_error(t);
    const double denom = std::pow(v / kappa, 1.0 / d);
    const double denom_rel = v_err / (d * v);
    if (t == 0.0) {
      row.capacity = {1.0, 0.0, 0};
    } else {
      row.capacity = capacity(minkowski_sum(unit_ball(d / 2), scaled(k, t)));
    }
    const double sct = std::sqrt(row.capacity.value);
    const double sct_err = row.capacity.std_error / (2.0 * std::max(sct, 1e-300));
    row.F = sct / denom;
    row.F_err = row.F * std::hypot(sct_err / sct, denom_rel);
    row.Ftilde = (1.0 + t * sc) / denom;
    row.Ftilde_err = std::hypot(t * sc_err / denom, row.Ftilde * denom_rel);
    // F - F̃ = (√c_t - 1 - t√c) / denom: the volume error does not move the sign.
    const double gap = sct - 1.0 - t * sc;
    row.ordered = gap >= -3.0 * std::hypot(sct_err, t * sc_err);
    table.rows.push_back(row);
  }
  return table;
}

std::vector<ScanRow> quermass_capacity_scan(const std::vector<SupportBody>& bodies, const CapacityFn& capacity,
                                            const SteinerOptions& opt) {
  std::vector<ScanRow> rows;
  for (const auto& k : bodies) {
    ScanRow row;
    row.label = k.label();
    row.capacity = capacity(k);
    row.fit = steiner_fit(k, opt);
    const int d = k.dim();
    for (int i = 0; i < d; ++i) {
      const double w = row.fit.Wbar[static_cast<std::size_t>(i)];
      const double e = row.fit.Wbar_err[static_cast<std::size_t>(i)];
      row.wbar_sq.push_back(w * w);
      row.wbar_sq_err.push_back(2.0 * w * e);
    }
    for (int i = 1; i < d; ++i) {
      const auto a = static_cast<std::size_t>(i - 1);
      const auto b = static_cast<std::size_t>(i);
      row.chain_ok.push_back(row.fit.Wbar[a] <=
                             row.fit.Wbar[b] + 3.0 * std::hypot(row.fit.Wbar_err[a], row.fit.Wbar_err[b]));
    }
    for (int i = 0; i < d; ++i) {
      const auto j = static_cast<std::size_t>(i);
      row.capacity_below.push_back(row.capacity.value <=
                                   row.wbar_sq[j] + 3.0 * std::hypot(row.capacity.std_error, row.wbar_sq_err[j]));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace symcap
