#pragma once

#include "bodies.hpp"
#include "sphere.hpp"

#include <Eigen/Dense>

#include <functional>
#include <random>
#include <string>
#include <vector>

namespace symcap {

// --- planar criterion ---------------------------------------------------------

struct GreenResult {
  double i_cos = 0.0;  // ∫ h(θ) cos 2θ dθ
  double i_sin = 0.0;  // ∫ h(θ) sin 2θ dθ
  double magnitude = 0.0;
  bool minimal = false;  // magnitude < 1e-6
};

GreenResult green_test(const SupportBody& k);

// --- star-shaped planar profiles and the area map ---------------------------

class RadialProfile {
 public:
  using Fn = std::function<double(double)>;

  RadialProfile(Fn rho, std::vector<double> kinks, std::string label);

  static RadialProfile disk(double r);
  static RadialProfile square(double half_side);  // [-a, a]^2
  static RadialProfile superellipse(double p, double r);

  double operator()(double theta) const { return rho_(theta); }
  // Central difference, one-sided next to kinks.
  double derivative(double theta) const;
  double area() const;  // ½ ∫ ρ² dθ
  // Angles in [0, 2π) where ρ fails to be smooth.
  const std::vector<double>& kinks() const { return kinks_; }
  const std::string& label() const { return label_; }
  // Turn test on the boundary polygon through `samples` points.
  bool convex(int samples = 4096) const;

 private:
  Fn rho_;
  std::vector<double> kinks_;
  std::string label_;
};

// r with Area{|x|^p + |y|^p <= r^p} = area.
double superellipse_radius(double p, double area);

// Positively 1-homogeneous, area-preserving plane map carrying the source
// body onto the target body: T(r, θ) = (r ρ_t(φ(θ)) / ρ_s(θ), φ(θ)) in polar
// coordinates, where φ' = ρ_s(θ)² / ρ_t(φ)² and φ(0) = 0.
class AreaMap {
 public:
  AreaMap(RadialProfile source, RadialProfile target);

  const RadialProfile& source() const { return src_; }
  const RadialProfile& target() const { return tgt_; }

  double phi(double theta) const;
  double phi_end() const { return phi_end_; }  // φ(2π) as integrated
  Eigen::Vector2d apply(const Eigen::Vector2d& z) const;
  Eigen::Matrix2d jacobian(const Eigen::Vector2d& z, double h = 1e-5) const;
  // Distance of the angle θ (or its image φ(θ)) to the nearest kink.
  double kink_distance(double theta) const;

 private:
  double integrate(double theta0, double phi0, double theta1, double tol) const;

  RadialProfile src_, tgt_;
  std::vector<double> grid_theta_, grid_phi_;
  double phi_end_ = 0.0;
};

AreaMap build_area_map(const RadialProfile& source, const RadialProfile& target);

struct AreaMapCheck {
  double phi_end_error = 0.0;   // |φ(2π) - 2π|
  double jacobian_error = 0.0;  // max |det DT - 1| over checked points
  double boundary_error = 0.0;  // max distance of T(∂source) from ∂target
  int points_checked = 0;
  int points_skipped = 0;  // too close to a kink ray for finite differences
};

AreaMapCheck check_area_map(const AreaMap& map, int points, std::uint64_t seed);

// --- superellipse squashing -------------------------------------------------

struct SquashRow {
  double p = 0.0;
  double radius = 0.0;  // r_p for the requested area
  double mean_width = 0.0;
};

struct SquashTable {
  std::vector<SquashRow> rows;  // in the order requested
  bool monotone = false;        // M nonincreasing as p decreases
};

SquashTable squash_family(const std::vector<double>& ps, double area = 4.0);

// --- mean width of products -------------------------------------------------

enum class Prefactor { printed, calibrated };

// printed: 1/(2(d1+d2)); calibrated: 1/(d1+d2), the value the B^{d1}×B^{d2}
// oracle forces.
double product_prefactor(int d1, int d2, Prefactor mode);
double product_mean_width(double m1, int d1, double m2, int d2, double prefactor);
double product_mean_width(double m1, int d1, double m2, int d2, Prefactor mode);

struct ProductCalibration {
  int d1 = 0, d2 = 0;
  Estimate oracle;             // Monte Carlo M(B^{d1} × B^{d2})
  double exact = 0.0;          // 2 E(|π_1 u| + |π_2 u|) from Beta moments
  double printed = 0.0;        // prefactor as printed
  Estimate implied;            // prefactor that reproduces the oracle
  double ratio = 0.0;          // implied / printed
};

ProductCalibration calibrate_product(int d1, int d2, const SphereSampler& s);

// Euclidean ball of radius r in R^d (any d >= 1).
SupportBody euclidean_ball(int d, double r);

// --- test-family experiments ------------------------------------------------

struct RoundedProductReport {
  std::string label;
  int index = 0;     // i such that ρ(I_e × I_f) sits in the (x_i, y_i) plane
  double rho = 0.0;
  double p = 0.0;
  double plane_before = 0.0;  // M(ρ□)
  double plane_after = 0.0;   // M(ρ K_p)
  Estimate before, after;
  Estimate difference;        // paired after - before
  double formula_difference = 0.0;
  bool strict_decrease = false;     // 3σ intervals disjoint, after below
  bool formula_consistent = false;  // |difference - formula| <= 3σ
};

// Replaces the square formed by a pair of 1-dimensional factors with the
// area-equal superellipse ρ K_p and compares mean widths.
RoundedProductReport rounded_product_test(const BallProductSpec& spec, double p, const SphereSampler& s);

struct ProbeOptions {
  double p = 2.0;
  int grid = 33;  // coarse grid per side; the fine grid has 2·grid - 1
};

struct ProbeReport {
  std::string label;
  int index = 0;
  double p = 0.0;
  double projection_error = 0.0;  // max |h(u) - ρ(|u_x| + |u_y|)| in the plane
  double inplane_error = 0.0;     // max |h_image(u) - h_{ρK_p}(u)| in the plane
  Estimate original, image;
  double grid_gap = 0.0;          // mean width gained from coarse to fine grid
  Estimate difference;            // paired image - original
  double image_low = 0.0, image_high = 0.0;
  double original_low = 0.0, original_high = 0.0;
  std::string conclusion;  // DECREASE, INCREASE or NO_CONCLUSION
};

// Applies the square-to-superellipse area map in the (x_i, y_i) coordinates
// of a body whose x_i and y_i lie in different factors, and estimates the
// mean width of the image from its support function, a supremum over the
// fiber parameters (x_i, y_i) evaluated on nested grids.
ProbeReport naive_extension_probe(const BallProductSpec& spec, int index, const SphereSampler& s,
                                  const ProbeOptions& opt = {});

// --- Hamiltonian flows ------------------------------------------------------

class Polynomial {
 public:
  struct Term {
    std::vector<int> exponents;
    double coeff = 0.0;
  };

  Polynomial(int dim, std::vector<Term> terms);
  // Gaussian coefficients on every monomial of degree 1..max_degree.
  static Polynomial random(int dim, int max_degree, std::mt19937_64& rng);

  int dim() const { return dim_; }
  int degree() const;
  double value(const Vec& z) const;
  Vec gradient(const Vec& z) const;
  std::string describe() const;

 private:
  int dim_;
  int degree_ = 0;
  std::vector<Term> terms_;
};

// X_H = J ∇H.
Vec hamiltonian_field(const Polynomial& h, const Vec& z);
// Time-t flow of X_H by adaptive Runge–Kutta; t may be negative.
Vec hamiltonian_flow(const Polynomial& h, const Vec& z0, double t);

// max_j <p_j, u> for every node u; points are rows, nodes are columns. A lower bound for the
// support of conv(points).
Vec sampled_support(const Mat& points, const Mat& nodes);

struct FlowRow {
  int hamiltonian = 0;
  std::string description;
  double step = 0.0;    // time step actually used
  Estimate derivative;  // d/dt M̂(φ^t K) at 0
  bool zero = false;    // within 3σ of 0
};

struct FlowReport {
  std::string label;
  bool toric = false;
  double t = 0.0;
  std::vector<FlowRow> rows;
  bool pass = false;  // toric: every row zero; otherwise report only
};

struct FlowOptions {
  int hamiltonians = 5;
  int degree = 4;
  double t = 1e-4;  // bound on the displacement of boundary points
};

// Central difference in t of the sampled-support mean width of φ^t(K); the
// boundary sample is the set of support points of the sphere nodes, shared by
// both time steps.
FlowReport nonlinear_flow_check(const SupportBody& k, const std::vector<Polynomial>& hamiltonians,
                                const SphereSampler& s, double t = 1e-4);
// Random Hamiltonians seeded from the sampler seed.
FlowReport nonlinear_flow_check(const SupportBody& k, const SphereSampler& s, const FlowOptions& opt = {});

}  // namespace symcap
