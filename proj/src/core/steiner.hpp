#pragma once

#include "bodies.hpp"
#include "sphere.hpp"

#include <functional>
#include <string>
#include <vector>

namespace symcap {

enum class VolumeMethod {
  box,     // hit-or-miss in the box [-(1+tR), 1+tR]^d
  radial,  // κ_d E_σ[ρ(u)^d] with the radial function from a root solve
};

struct VolumeOptions {
  std::uint64_t seed = 1;
  std::size_t budget = 200000;
  VolumeMethod method = VolumeMethod::box;
  int workers = 1;
};

// Volume(B^d + tK) for t >= 0. Requires a distance oracle on K.
Estimate volume_sum_ball(const SupportBody& k, double t, const VolumeOptions& opt = {});

// Vol(K) = κ E[ρ_K(u)^d] with the radial function found by bisection on the
// distance oracle; K must contain the origin in its interior.
Estimate body_volume(const SupportBody& k, const VolumeOptions& opt = {});

// Radial function of B^d + tK: the r > 0 with dist(r u, tK) = 1, |u| = 1.
double radial_sum_ball(const SupportBody& k, double t, const Vec& u);

struct SteinerOptions {
  double T = 2.0;               // fit interval [0, T]
  std::size_t nodes = 0;        // Chebyshev nodes; 0 means 2n + 5 (d + 5)
  std::size_t budget = 40000;   // directions for the radial volume estimator
  std::uint64_t seed = 1;
  int workers = 1;
  double max_condition = 1e8;   // of the scaled Vandermonde system
};

// Least-squares Steiner polynomial Volume(B^d + tK) = Σ_k c_k t^k, with
// W_i = c_{d-i} / binom(d, i). Error bars come from the per-direction spread of
// the fitted coefficients: all nodes share the same directions.
struct SteinerFit {
  int dim = 0;
  double T = 0.0;
  std::string label;
  std::vector<double> coeffs;  // ascending in t
  std::vector<double> coeff_err;
  Mat coeff_cov;
  std::vector<double> W;  // W_0 .. W_d
  std::vector<double> W_err;
  std::vector<double> Wbar;  // W̄_0 .. W̄_{d-1}
  std::vector<double> Wbar_err;
  std::vector<double> nodes;
  std::vector<Estimate> volumes;  // per node
  double residual = 0.0;          // relative RMS misfit at the nodes
  double condition = 0.0;
  std::uint64_t seed = 0;
  std::size_t budget = 0;

  double volume(double t) const;
  double volume_error(double t) const;
  double volume_derivative(double t) const;
};

SteinerFit steiner_fit(const SupportBody& k, const SteinerOptions& opt = {});

// 2 W_{d-1} / κ_d.
Estimate meanwidth_from_quermass(const SteinerFit& fit);

// Normalized capacity estimate of a body (value and error bar).
using CapacityFn = std::function<Estimate(const SupportBody&)>;

struct FRow {
  double t = 0.0;
  Estimate capacity;  // c(B + tK)
  double F = 0.0, F_err = 0.0;
  double Ftilde = 0.0, Ftilde_err = 0.0;
  bool ordered = false;  // F̃ <= F within 3 combined errors
};

struct FTable {
  std::string label;
  Estimate capacity_k;   // c(K)
  Estimate mean_width_fit;
  Estimate derivative_closed;  // √c(K) - M/2 from the Steiner fit
  Estimate derivative_fd;      // Richardson forward differences of F̃ from direct volumes
  double fd_step = 0.0;
  std::vector<FRow> rows;
};

struct FOptions {
  SteinerOptions steiner;
  double fd_step = 1e-3;
};

FTable f_functions(const SupportBody& k, const CapacityFn& capacity, const std::vector<double>& t_grid,
                   const FOptions& opt = {});

struct ScanRow {
  std::string label;
  Estimate capacity;
  SteinerFit fit;
  std::vector<double> wbar_sq;      // (W̄_i)^2, i = 0..d-1
  std::vector<double> wbar_sq_err;
  std::vector<bool> chain_ok;       // W̄_{i-1} <= W̄_i within 3 errors, i = 1..d-1
  std::vector<bool> capacity_below; // c <= (W̄_i)^2 within 3 errors
};

std::vector<ScanRow> quermass_capacity_scan(const std::vector<SupportBody>& bodies, const CapacityFn& capacity,
                                            const SteinerOptions& opt = {});

}  // namespace symcap
