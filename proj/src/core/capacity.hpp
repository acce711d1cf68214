#pragma once

#include "bodies.hpp"

#include <optional>
#include <vector>

namespace symcap {

// Truncated Fourier loop z(t) = Σ_{k=1..K} a_k cos kt + b_k sin kt in R^{2n}.
// There is no constant term, so ∫ z dt = 0 holds identically.
struct LoopPath {
  Mat a;  // 2n x K, column k-1 holds a_k
  Mat b;

  LoopPath() = default;
  LoopPath(int dim, int modes) : a(Mat::Zero(dim, modes)), b(Mat::Zero(dim, modes)) {}

  int dim() const { return static_cast<int>(a.rows()); }
  int modes() const { return static_cast<int>(a.cols()); }
  Vec position(double t) const;
  Vec velocity(double t) const;
  // Same loop traversed backwards: z(-t).
  LoopPath reversed() const;
  LoopPath with_modes(int modes) const;  // zero-pads or truncates
};

// Jz for the standard complex structure, z = (x, y) -> (-y, x).
Vec apply_j(const Vec& z);

// ∫_0^{2π} <J z, ż> dt = Σ_k 2πk <J a_k, b_k>.
double loop_action(const LoopPath& z);
// Same integral by the trapezoid rule (independent route).
double loop_action_quadrature(const LoopPath& z, std::size_t nodes);
// ∫_0^{2π} h_K(ż) dt by the trapezoid rule; nodes = 0 means max(32K, 256).
double loop_cost(const SupportBody& k, const LoopPath& z, std::size_t nodes = 0);

// Minimal cost 2√π of the unit ball (circle of action 2).
double ball_raw_cost();

struct CapacityOptions {
  int modes = 8;
  int starts = 8;
  std::uint64_t seed = 1;
  std::size_t nodes = 0;  // quadrature nodes; 0 means max(32 * modes, 256)
  int max_outer = 25;
  int max_inner = 200;
  std::optional<Mat> start_map;  // applied to every start's coefficients
  bool require_convergence = false;
  int workers = 1;  // starts run in parallel
};

struct CapacityResult {
  double raw_cost = 0.0;    // min ∫ h_K(ż) over feasible loops found
  double raw = 0.0;         // (raw_cost / 2)^2
  double normalized = 0.0;  // raw / π, so the unit ball gives 1
  double error = 0.0;       // quadrature-resolution error bar on normalized
  bool converged = false;
  int modes = 0;
  int starts = 0;
  LoopPath best;
  std::vector<double> start_costs;

  Estimate estimate() const { return {normalized, error, static_cast<std::uint64_t>(starts)}; }
};

// Upper-bound estimate of c_EH(K) from the loop minimization over
// action-normalized truncated loops, by an augmented Lagrangian on
// (action - 2). Mode levels 1, 2, 4, ..., K are solved in turn, each warm
// started from the previous level, so raising K never raises the result.
CapacityResult eh_capacity_estimate(const SupportBody& k, const CapacityOptions& opt = {});

// Loop-based sanity inequalities over a set of bodies.
struct InequalityRow {
  std::string label;
  Estimate capacity;
  Estimate mean_width;
  double ao_bound = 0.0;  // M^2 / 4
  double ao_bound_err = 0.0;
  bool ao_ok = false;
  std::optional<Estimate> volume_ratio;  // (Vol/κ)^{1/2n}
  std::optional<bool> viterbo_ok;        // c^{1/2} <= volume ratio
};

struct SuperadditivityRow {
  std::string left, right;
  double lhs = 0.0;  // √c(K1+K2)
  double rhs = 0.0;  // √c(K1) + √c(K2)
  double tolerance = 0.0;
  bool ok = false;
};

struct InequalityReport {
  std::vector<InequalityRow> bodies;
  std::vector<SuperadditivityRow> pairs;
};

struct InequalityOptions {
  CapacityOptions capacity;
  std::uint64_t seed = 1;
  std::size_t samples = 200000;
  std::size_t volume_budget = 100000;
  int workers = 1;
};

InequalityReport inequality_suite(const std::vector<SupportBody>& bodies,
                                  const std::vector<std::pair<SupportBody, SupportBody>>& pairs,
                                  const InequalityOptions& opt = {});

}  // namespace symcap
