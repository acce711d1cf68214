#pragma once

#include "bodies.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace symcap {

// Uniform nodes on S^{dim-1} from normalized Gaussian vectors. Node i is a
// pure function of (seed, i / kChunk); with antithetic pairing nodes come as
// (u, -u) and every estimate averages over the pair first.
struct SphereSampler {
  static constexpr std::size_t kChunk = 2048;  // primary draws per RNG stream

  int dim = 2;
  std::uint64_t seed = 1;
  std::size_t count = 200000;
  bool antithetic = true;
  int workers = 1;

  void validate() const;
  // Independent draws (pairs when antithetic).
  std::size_t draws() const { return antithetic ? (count + 1) / 2 : count; }
  std::size_t nodes() const { return antithetic ? 2 * draws() : count; }
  SphereSampler with_seed(std::uint64_t s) const {
    SphereSampler c = *this;
    c.seed = s;
    return c;
  }
};

// Primary draws of chunk c (without antithetic partners).
std::vector<Vec> sphere_chunk(const SphereSampler& s, std::size_t chunk);
// All nodes in order; antithetic partners follow their primary node.
std::vector<Vec> sphere_nodes(const SphereSampler& s);

// Integrand writing k values for node u into out.
using VectorIntegrand = std::function<void(const Vec& u, std::span<double> out)>;

// Integrals of k functions against sigma using the same nodes (common random
// numbers). Reduction order is fixed, so results do not depend on workers.
std::vector<Estimate> integrate_many(const SphereSampler& s, std::size_t k, const VectorIntegrand& f);
Estimate integrate(const SphereSampler& s, const std::function<double(const Vec&)>& f);
// Per-draw values (rows; pair-averaged when antithetic), for estimators that
// need covariances or nonlinear post-processing.
Mat draw_values(const SphereSampler& s, std::size_t k, const VectorIntegrand& f);

// Mean of per-draw values with its standard error.
Estimate estimate_mean(std::span<const double> values);

// M(K) = ∫ (h(u) + h(-u)) dσ.
Estimate mean_width(const SupportBody& k, const SphereSampler& s);

// Deterministic planar mean width (1/π)∫ h(θ) dθ, adaptive Gauss–Kronrod.
double mean_width_2d(const SupportBody& k);
// ∫_0^{2π} g(θ) dθ by adaptive Gauss–Kronrod on the eight arcs between
// multiples of π/4.
double integrate_circle(const std::function<double(double)>& g);

enum class Coordinate { x, y };

// ∫ coord_r^2 / |π_l u| dσ for factor l (0-based) and coordinate index r
// (1-based, as in I and J).
Estimate sphere_moment(const BallProductSpec& spec, std::size_t factor, int r, Coordinate kind,
                       const SphereSampler& s);
// ∫ a b / |π_l u| dσ for arbitrary 0-based ambient coordinates a, b.
Estimate sphere_cross_moment(const BallProductSpec& spec, std::size_t factor, int coord_a, int coord_b,
                             const SphereSampler& s);

// max_p <p, u>: a lower bound for the support of conv(points).
double support_sampled(std::span<const Vec> points, const Vec& u);

}  // namespace symcap
