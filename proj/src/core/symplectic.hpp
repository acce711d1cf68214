#pragma once

#include "bodies.hpp"
#include "sphere.hpp"

#include <random>
#include <vector>

namespace symcap {

// J = [[0, -I], [I, 0]] on R^{2n} with coordinates (x, y).
Mat symplectic_form(int n);

// Y = [[C, D], [D, -C]] with C, D symmetric: the symmetric part of sp(2n).
struct SymmetricDirection {
  Mat C;
  Mat D;

  int n() const { return static_cast<int>(C.rows()); }
  Mat assemble() const;
  void validate() const;
  // Inverse of assemble; throws if y is not of this form.
  static SymmetricDirection from_matrix(const Mat& y, double tol = 1e-9);

  SymmetricDirection operator*(double s) const { return {s * C, s * D}; }
  SymmetricDirection operator+(const SymmetricDirection& o) const { return {C + o.C, D + o.D}; }
};

// Orthonormal basis (Frobenius norm of Y) of the n(n+1)-dimensional space of
// symmetric directions: diagonal and off-diagonal units of C, then of D.
std::vector<SymmetricDirection> direction_basis(int n);
Vec to_coordinates(const SymmetricDirection& y);
SymmetricDirection from_coordinates(int n, const Vec& coords);

// Gaussian upper triangles of C and D, scaled so that ‖Y‖_F = 1.
SymmetricDirection random_direction(int n, std::mt19937_64& rng);
// Random element of U(n) = O(2n) ∩ Sp(2n), as [[A, -B], [B, A]].
Mat random_unitary(int n, std::mt19937_64& rng);

double symplectic_defect(const Mat& p);  // ‖PᵀJP - J‖_F
bool is_symplectic(const Mat& p, double tol = 1e-10);

// exp(sY); symmetric positive definite and symplectic.
Mat exp_direction(const SymmetricDirection& y, double s = 1.0);

struct PolarFactors {
  Mat Q;  // orthogonal symplectic
  Mat S;  // symmetric positive definite symplectic, (PᵀP)^{1/2}
};
PolarFactors polar_decompose(const Mat& p);
// Logarithm of a symmetric positive definite symplectic matrix.
SymmetricDirection log_positive(const Mat& s);

// M(PK) = ∫ (h_K(Pᵀu) + h_K(-Pᵀu)) dσ on the sampler's nodes.
Estimate mean_width_image(const SupportBody& k, const Mat& p, const SphereSampler& s);

// d/ds M(exp(sY)K) at s = 0 from the integrand ⟨∇h(u), Yu⟩ + ⟨∇h(-u), -Yu⟩.
Estimate first_variation(const SupportBody& k, const SymmetricDirection& y, const SphereSampler& s);
// Same quantity for a ball product from its diagonal moments: only the c_rr
// entries of C contribute.
Estimate first_variation_moments(const BallProductSpec& spec, const SymmetricDirection& y, const SphereSampler& s);

struct SecondVariation {
  Estimate value;         // f''(0); std_error combines MC and truncation error
  double mc_error = 0.0;
  double truncation = 0.0;
  double step = 0.0;
  // ∫⟨∇H(u), Y²u⟩ part of f''(0) from the L = C² + D² diagonal moments
  // (ball products only); nonnegative by construction.
  std::optional<Estimate> sign_term;
};

// Central second differences at steps h and h/2 on common nodes, combined by
// Richardson extrapolation. Throws NumericalError when rounding noise at this
// step would dominate the estimate.
SecondVariation second_variation(const SupportBody& k, const SymmetricDirection& y, const SphereSampler& s,
                                 double h = 0.05);

struct DirectionCheck {
  SymmetricDirection direction;
  Estimate first;
  SecondVariation second;
  bool pass = false;  // |f'| <= 3σ and f'' > 0
};

struct LocalMinVerdict {
  std::string label;
  bool cond = false;
  bool pass = false;
  std::vector<DirectionCheck> directions;
  // For cond-violating specs: the basis direction with the largest |f'|/σ,
  // reported when that ratio exceeds 5.
  std::optional<DirectionCheck> descent_witness;
};

struct LocalMinOptions {
  int directions = 20;
  double step = 0.05;
};

LocalMinVerdict verify_local_min(const BallProductSpec& spec, const SphereSampler& s,
                                 const LocalMinOptions& opt = {});

struct SearchOptions {
  int steps = 60;
  double initial_step = 0.25;
  double max_norm = 8.0;      // divergence guard on ‖log S‖_F
  double gradient_tol = 1e-7;
};

struct SearchResult {
  SymmetricDirection best;          // log of the positive polar factor
  std::vector<double> trace;        // M after each accepted step, starting value first
  std::vector<double> trace_error;  // std errors of the trace values
  bool stopped_early = false;       // no further decrease found
};

// Descent on P ↦ M(PK) over Sp(2n) starting from exp(start): P ← exp(-αG)P
// with G the first variation gradient of PK in basis coordinates, and
// backtracking so that every accepted step lowers M on the fixed nodes.
SearchResult local_search(const SupportBody& k, const SymmetricDirection& start, const SphereSampler& s,
                          const SearchOptions& opt = {});

}  // namespace symcap
