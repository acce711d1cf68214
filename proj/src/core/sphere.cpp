#include "sphere.hpp"

#include "parallel.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <random>

namespace symcap {

namespace {

// Welford accumulator with Chan's merge.
struct Moments {
  double n = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    n += 1.0;
    const double d = x - mean;
    mean += d / n;
    m2 += d * (x - mean);
  }
  void merge(const Moments& o) {
    if (o.n == 0.0) return;
    if (n == 0.0) {
      *this = o;
      return;
    }
    const double total = n + o.n;
    const double d = o.mean - mean;
    mean += d * o.n / total;
    m2 += o.m2 + d * d * n * o.n / total;
    n = total;
  }
  Estimate estimate(std::uint64_t count) const {
    const double var = n > 1.0 ? std::max(0.0, m2 / (n - 1.0)) : 0.0;
    return {mean, n > 0.0 ? std::sqrt(var / n) : 0.0, count};
  }
};

std::size_t chunk_count(const SphereSampler& s) {
  return (s.draws() + SphereSampler::kChunk - 1) / SphereSampler::kChunk;
}

}  // namespace

void SphereSampler::validate() const {
  if (dim < 1) throw ValidationError("sphere sampler needs dim >= 1");
  if (count == 0) throw ValidationError("sphere sampler needs a positive sample count");
}

std::vector<Vec> sphere_chunk(const SphereSampler& s, std::size_t chunk) {
  const std::size_t begin = chunk * SphereSampler::kChunk;
  const std::size_t end = std::min(s.draws(), begin + SphereSampler::kChunk);
  std::seed_seq seq{static_cast<std::uint32_t>(s.seed), static_cast<std::uint32_t>(s.seed >> 32),
                    static_cast<std::uint32_t>(chunk), static_cast<std::uint32_t>(chunk >> 32), 0x5e7du};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> gauss;
  std::vector<Vec> out;
  out.reserve(end > begin ? end - begin : 0);
  for (std::size_t i = begin; i < end; ++i) {
    Vec u(s.dim);
    double r = 0.0;
    do {
      for (int d = 0; d < s.dim; ++d) u[d] = gauss(rng);
      r = u.norm();
    } while (r == 0.0);
    out.push_back(u / r);
  }
  return out;
}

std::vector<Vec> sphere_nodes(const SphereSampler& s) {
  s.validate();
  std::vector<Vec> out;
  out.reserve(s.nodes());
  for (std::size_t c = 0; c < chunk_count(s); ++c) {
    for (auto& u : sphere_chunk(s, c)) {
      out.push_back(u);
      if (s.antithetic) out.push_back(-u);
    }
  }
  return out;
}

std::vector<Estimate> integrate_many(const SphereSampler& s, std::size_t k, const VectorIntegrand& f) {
  s.validate();
  const std::size_t chunks = chunk_count(s);
  std::vector<std::vector<Moments>> partial(chunks, std::vector<Moments>(k));
  for_each_chunk(chunks, s.workers, [&](std::size_t c) {
    std::vector<double> a(k), b(k);
    auto& acc = partial[c];
    for (const Vec& u : sphere_chunk(s, c)) {
      f(u, a);
      if (s.antithetic) {
        f(-u, b);
        for (std::size_t j = 0; j < k; ++j) acc[j].add(0.5 * (a[j] + b[j]));
      } else {
        for (std::size_t j = 0; j < k; ++j) acc[j].add(a[j]);
      }
    }
  });
  std::vector<Moments> total(k);
  for (const auto& p : partial) {
    for (std::size_t j = 0; j < k; ++j) total[j].merge(p[j]);
  }
  std::vector<Estimate> out;
  out.reserve(k);
  for (const auto& m : total) out.push_back(m.estimate(s.nodes()));
  return out;
}

Mat draw_values(const SphereSampler& s, std::size_t k, const VectorIntegrand& f) {
  s.validate();
  const std::size_t chunks = chunk_count(s);
  Mat out(static_cast<Eigen::Index>(s.draws()), static_cast<Eigen::Index>(k));
  for_each_chunk(chunks, s.workers, [&](std::size_t c) {
    std::vector<double> a(k), b(k);
    auto row = static_cast<Eigen::Index>(c * SphereSampler::kChunk);
    for (const Vec& u : sphere_chunk(s, c)) {
      f(u, a);
      if (s.antithetic) f(-u, b);
      for (std::size_t j = 0; j < k; ++j) {
        out(row, static_cast<Eigen::Index>(j)) = s.antithetic ? 0.5 * (a[j] + b[j]) : a[j];
      }
      ++row;
    }
  });
  return out;
}

Estimate integrate(const SphereSampler& s, const std::function<double(const Vec&)>& f) {
  return integrate_many(s, 1, [&](const Vec& u, std::span<double> out) { out[0] = f(u); })[0];
}

Estimate estimate_mean(std::span<const double> values) {
  Moments m;
  for (double v : values) m.add(v);
  return m.estimate(values.size());
}

Estimate mean_width(const SupportBody& k, const SphereSampler& s) {
  if (k.dim() != s.dim) {
    throw ValidationError("mean_width: body dimension " + std::to_string(k.dim()) + " != sampler dimension " +
                          std::to_string(s.dim));
  }
  return integrate(s, [&](const Vec& u) { return 2.0 * k.support(u); });
}

double integrate_circle(const std::function<double(double)>& g) {
  // Sub-arcs at multiples of π/4 put the kinks of axis-aligned polygons on
  // interval ends.
  double total = 0.0;
  for (int j = 0; j < 8; ++j) {
    const double a = j * kPi / 4.0;
    const double b = (j + 1) * kPi / 4.0;
    double err = 0.0;
    total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, a, b, 18, 1e-13, &err);
    (void)err;
  }
  return total;
}

double mean_width_2d(const SupportBody& k) {
  if (k.dim() != 2) throw ValidationError("mean_width_2d needs a planar body, got dimension " + std::to_string(k.dim()));
  Vec u(2);
  const double total = integrate_circle([&](double t) {
    u << std::cos(t), std::sin(t);
    return k.support(u);
  });
  return total / kPi;
}

Estimate sphere_moment(const BallProductSpec& spec, std::size_t factor, int r, Coordinate kind,
                       const SphereSampler& s) {
  spec.validate();
  if (factor >= spec.factors()) throw ValidationError("sphere_moment: factor index out of range");
  if (r < 1 || r > spec.n) throw ValidationError("sphere_moment: coordinate index " + std::to_string(r) + " out of range");
  const int c = kind == Coordinate::x ? r - 1 : spec.n + r - 1;
  return sphere_cross_moment(spec, factor, c, c, s);
}

Estimate sphere_cross_moment(const BallProductSpec& spec, std::size_t factor, int coord_a, int coord_b,
                             const SphereSampler& s) {
  spec.validate();
  if (s.dim != 2 * spec.n) throw ValidationError("sphere_moment: sampler dimension mismatch");
  const std::vector<int> coords = spec.coordinates(factor);
  return integrate(s, [&](const Vec& u) {
    double q = 0.0;
    for (int c : coords) q += u[c] * u[c];
    return q > 0.0 ? u[coord_a] * u[coord_b] / std::sqrt(q) : 0.0;
  });
}

double support_sampled(std::span<const Vec> points, const Vec& u) {
  if (points.empty()) throw ValidationError("support_sampled: empty point set");
  double best = -std::numeric_limits<double>::infinity();
  for (const Vec& p : points) best = std::max(best, p.dot(u));
  return best;
}

}  // namespace symcap
