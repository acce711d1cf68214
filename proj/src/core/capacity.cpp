#include "capacity.hpp"

#include "optim.hpp"
#include "parallel.hpp"
#include "sphere.hpp"
#include "steiner.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace symcap {

Vec apply_j(const Vec& z) {
  const Eigen::Index n = z.size() / 2;
  Vec out(z.size());
  out.head(n) = -z.tail(n);
  out.tail(n) = z.head(n);
  return out;
}

Vec LoopPath::position(double t) const {
  Vec z = Vec::Zero(dim());
  for (int k = 1; k <= modes(); ++k) z += a.col(k - 1) * std::cos(k * t) + b.col(k - 1) * std::sin(k * t);
  return z;
}

Vec LoopPath::velocity(double t) const {
  Vec v = Vec::Zero(dim());
  for (int k = 1; k <= modes(); ++k) v += k * (b.col(k - 1) * std::cos(k * t) - a.col(k - 1) * std::sin(k * t));
  return v;
}

LoopPath LoopPath::reversed() const {
  LoopPath r = *this;
  r.b = -b;
  return r;
}

LoopPath LoopPath::with_modes(int m) const {
  LoopPath r(dim(), m);
  const int keep = std::min(m, modes());
  r.a.leftCols(keep) = a.leftCols(keep);
  r.b.leftCols(keep) = b.leftCols(keep);
  return r;
}

double loop_action(const LoopPath& z) {
  double s = 0.0;
  for (int k = 1; k <= z.modes(); ++k) s += 2.0 * kPi * k * apply_j(z.a.col(k - 1)).dot(z.b.col(k - 1));
  return s;
}

double loop_action_quadrature(const LoopPath& z, std::size_t nodes) {
  if (nodes == 0) throw ValidationError("loop_action_quadrature: zero nodes");
  double s = 0.0;
  for (std::size_t j = 0; j < nodes; ++j) {
    const double t = 2.0 * kPi * static_cast<double>(j) / static_cast<double>(nodes);
    s += apply_j(z.position(t)).dot(z.velocity(t));
  }
  return s * 2.0 * kPi / static_cast<double>(nodes);
}

namespace {

std::size_t default_nodes(int modes) { return static_cast<std::size_t>(std::max(32 * modes, 256)); }

// Trapezoid nodes with cached trigonometric tables. The parameter vector
// packs [a_1, b_1, a_2, b_2, ...], each block of length dim.
class LoopProblem {
 public:
  LoopProblem(const SupportBody& k, int modes, std::size_t nodes)
      : body_(k), dim_(k.dim()), modes_(modes), nodes_(nodes), cos_(nodes, modes), sin_(nodes, modes) {
    for (std::size_t j = 0; j < nodes; ++j) {
      const double t = 2.0 * kPi * static_cast<double>(j) / static_cast<double>(nodes);
      for (int m = 1; m <= modes; ++m) {
        cos_(static_cast<Eigen::Index>(j), m - 1) = std::cos(m * t);
        sin_(static_cast<Eigen::Index>(j), m - 1) = std::sin(m * t);
      }
    }
  }

  Eigen::Index size() const { return 2 * dim_ * modes_; }

  Vec pack(const LoopPath& z) const {
    Vec x(size());
    for (int m = 0; m < modes_; ++m) {
      x.segment(2 * m * dim_, dim_) = z.a.col(m);
      x.segment((2 * m + 1) * dim_, dim_) = z.b.col(m);
    }
    return x;
  }

  LoopPath unpack(const Vec& x) const {
    LoopPath z(dim_, modes_);
    for (int m = 0; m < modes_; ++m) {
      z.a.col(m) = x.segment(2 * m * dim_, dim_);
      z.b.col(m) = x.segment((2 * m + 1) * dim_, dim_);
    }
    return z;
  }

  double cost(const Vec& x, Vec* grad) const {
    const double w = 2.0 * kPi / static_cast<double>(nodes_);
    if (grad) grad->setZero(size());
    double total = 0.0;
    Vec v(dim_);
    for (std::size_t j = 0; j < nodes_; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      v.setZero();
      for (int m = 0; m < modes_; ++m) {
        const double k = m + 1;
        v += k * (cos_(jj, m) * x.segment((2 * m + 1) * dim_, dim_) - sin_(jj, m) * x.segment(2 * m * dim_, dim_));
      }
      total += body_.support(v);
      if (grad) {
        const Vec g = body_.gradient(v);
        for (int m = 0; m < modes_; ++m) {
          const double k = m + 1;
          grad->segment(2 * m * dim_, dim_) -= (w * k * sin_(jj, m)) * g;
          grad->segment((2 * m + 1) * dim_, dim_) += (w * k * cos_(jj, m)) * g;
        }
      }
    }
    return w * total;
  }

  double action(const Vec& x, Vec* grad) const {
    double s = 0.0;
    if (grad) grad->setZero(size());
    for (int m = 0; m < modes_; ++m) {
      const double k = m + 1;
      const Vec a = x.segment(2 * m * dim_, dim_);
      const Vec b = x.segment((2 * m + 1) * dim_, dim_);
      s += 2.0 * kPi * k * apply_j(a).dot(b);
      if (grad) {
        grad->segment(2 * m * dim_, dim_) = -2.0 * kPi * k * apply_j(b);
        grad->segment((2 * m + 1) * dim_, dim_) = 2.0 * kPi * k * apply_j(a);
      }
    }
    return s;
  }

 private:
  const SupportBody& body_;
  Eigen::Index dim_;
  int modes_;
  std::size_t nodes_;
  Mat cos_, sin_;
};

struct LevelResult {
  Vec x;
  double cost = 0.0;
  bool converged = false;
};

// Rescales onto the constraint surface; requires positive action.
bool project(const LoopProblem& prob, Vec& x) {
  const double act = prob.action(x, nullptr);
  if (!(act > 0.0) || !std::isfinite(act)) return false;
  x *= std::sqrt(2.0 / act);
  return true;
}

LevelResult solve_level(const LoopProblem& prob, Vec x, const CapacityOptions& opt) {
  LevelResult best;
  if (!project(prob, x)) throw NumericalError("capacity: start loop has nonpositive action");
  best.x = x;
  best.cost = prob.cost(x, nullptr);

  double lambda = 0.0;
  double mu = 10.0;
  double prev_violation = std::numeric_limits<double>::infinity();
  double prev_cost = best.cost;
  for (int outer = 0; outer < opt.max_outer; ++outer) {
    Objective lagrangian = [&](const Vec& y, Vec& g) {
      Vec gc, ga;
      const double c = prob.cost(y, &gc);
      const double viol = prob.action(y, &ga) - 2.0;
      g = gc + (mu * viol - lambda) * ga;
      return c - lambda * viol + 0.5 * mu * viol * viol;
    };
    DescentOptions dopt;
    dopt.max_iterations = opt.max_inner;
    const DescentResult r = minimize_descent(lagrangian, x, dopt);
    x = r.x;
    const double viol = prob.action(x, nullptr) - 2.0;
    Vec feasible = x;
    if (project(prob, feasible)) {
      const double c = prob.cost(feasible, nullptr);
      if (c < best.cost) {
        best.cost = c;
        best.x = feasible;
      }
      if (std::abs(viol) < 1e-9 && std::abs(c - prev_cost) < 1e-10 * std::max(1.0, c)) {
        best.converged = true;
        break;
      }
      prev_cost = c;
    }
    lambda -= mu * viol;
    if (std::abs(viol) > 0.25 * prev_violation) mu = std::min(mu * 10.0, 1e8);
    prev_violation = std::abs(viol);
  }
  return best;
}

struct StartResult {
  LoopPath loop;
  double cost = 0.0;
  bool converged = false;
};

LoopPath start_loop(int dim, int start, const CapacityOptions& opt) {
  const int n = dim / 2;
  const double r = 1.0 / std::sqrt(kPi);
  LoopPath z(dim, 1);
  z.a(start % n, 0) = r;
  z.b(n + start % n, 0) = r;
  if (start >= n) {
    std::seed_seq seq{static_cast<std::uint32_t>(opt.seed), static_cast<std::uint32_t>(opt.seed >> 32),
                      static_cast<std::uint32_t>(start), 0xca9au};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal(0.0, 0.3 * r);
    for (Eigen::Index i = 0; i < dim; ++i) {
      z.a(i, 0) += normal(rng);
      z.b(i, 0) += normal(rng);
    }
    if (loop_action(z) <= 0.0) z.b = -z.b;
  }
  if (opt.start_map) {
    z.a = *opt.start_map * z.a;
    z.b = *opt.start_map * z.b;
  }
  return z;
}

StartResult run_start(const SupportBody& k, int start, std::size_t nodes, const CapacityOptions& opt) {
  LoopPath z = start_loop(k.dim(), start, opt);
  StartResult out;
  int level = 1;
  for (;;) {
    level = std::min(level, opt.modes);
    const LoopProblem prob(k, level, nodes);
    const LevelResult r = solve_level(prob, prob.pack(z.with_modes(level)), opt);
    z = prob.unpack(r.x);
    out.cost = r.cost;
    out.converged = r.converged;
    if (level == opt.modes) break;
    level *= 2;
  }
  out.loop = z;
  return out;
}

}  // namespace

double loop_cost(const SupportBody& k, const LoopPath& z, std::size_t nodes) {
  if (k.dim() != z.dim()) throw ValidationError("loop_cost: body and loop dimensions differ");
  if (nodes == 0) nodes = default_nodes(z.modes());
  const LoopProblem prob(k, z.modes(), nodes);
  return prob.cost(prob.pack(z), nullptr);
}

double ball_raw_cost() { return 2.0 * std::sqrt(kPi); }

CapacityResult eh_capacity_estimate(const SupportBody& k, const CapacityOptions& opt) {
  if (k.dim() % 2 != 0) throw ValidationError("capacity: body dimension must be even");
  if (opt.modes < 1) throw ValidationError("capacity: modes must be >= 1");
  if (opt.starts < 1) throw ValidationError("capacity: starts must be >= 1");
  if (opt.start_map && (opt.start_map->rows() != k.dim() || opt.start_map->cols() != k.dim())) {
    throw ValidationError("capacity: start map has wrong shape");
  }
  const std::size_t nodes = opt.nodes ? opt.nodes : default_nodes(opt.modes);

  std::vector<StartResult> results(static_cast<std::size_t>(opt.starts));
  for_each_chunk(results.size(), opt.workers, [&](std::size_t s) {
    results[s] = run_start(k, static_cast<int>(s), nodes, opt);
  });

  CapacityResult out;
  out.modes = opt.modes;
  out.starts = opt.starts;
  std::size_t best = 0;
  for (std::size_t s = 0; s < results.size(); ++s) {
    out.start_costs.push_back(results[s].cost);
    if (results[s].cost < results[best].cost) best = s;
  }
  out.best = results[best].loop;
  out.raw_cost = results[best].cost;
  out.converged = results[best].converged;
  out.raw = 0.25 * out.raw_cost * out.raw_cost;
  out.normalized = out.raw / kPi;
  // Resolution check: the same loop at four times the nodes.
  const double fine = loop_cost(k, out.best, 4 * nodes);
  out.error = 0.5 * out.raw_cost * std::abs(fine - out.raw_cost) / kPi;
  if (opt.require_convergence && !out.converged) {
    throw NumericalError("capacity: optimizer did not converge; best value " + std::to_string(out.normalized));
  }
  return out;
}

InequalityReport inequality_suite(const std::vector<SupportBody>& bodies,
                                  const std::vector<std::pair<SupportBody, SupportBody>>& pairs,
                                  const InequalityOptions& opt) {
  InequalityReport rep;
  auto capacity = [&](const SupportBody& k) { return eh_capacity_estimate(k, opt.capacity).estimate(); };
  for (const auto& k : bodies) {
    InequalityRow row;
    row.label = k.label();
    row.capacity = capacity(k);
    row.mean_width = mean_width(k, SphereSampler{k.dim(), opt.seed, opt.samples, true, opt.workers});
    const double m = row.mean_width.value;
    row.ao_bound = 0.25 * m * m;
    row.ao_bound_err = 0.5 * m * row.mean_width.std_error;
    row.ao_ok = row.capacity.value <= row.ao_bound + 3.0 * std::hypot(row.capacity.std_error, row.ao_bound_err);
    const int d = k.dim();
    std::optional<Estimate> vol;
    if (k.volume()) {
      vol = Estimate{*k.volume(), 0.0, 0};
    } else if (k.has_distance()) {
      vol = body_volume(k, VolumeOptions{opt.seed, opt.volume_budget, VolumeMethod::radial, opt.workers});
    }
    if (vol) {
      const double ratio = vol->value > 0.0 ? vol->value / ball_volume(d) : 0.0;
      const double term = std::pow(ratio, 1.0 / d);
      const double term_err = term / d * vol->std_error / vol->value;
      row.volume_ratio = Estimate{term, term_err, vol->count};
      const double root_c = std::sqrt(row.capacity.value);
      const double root_err = 0.5 * row.capacity.std_error / std::max(root_c, 1e-300);
      row.viterbo_ok = root_c <= term + 3.0 * std::hypot(root_err, term_err);
    }
    rep.bodies.push_back(std::move(row));
  }
  for (const auto& [k1, k2] : pairs) {
    SuperadditivityRow row;
    row.left = k1.label();
    row.right = k2.label();
    const Estimate c1 = capacity(k1), c2 = capacity(k2), c12 = capacity(minkowski_sum(k1, k2));
    row.lhs = std::sqrt(c12.value);
    row.rhs = std::sqrt(c1.value) + std::sqrt(c2.value);
    auto root_err = [](const Estimate& e) { return 0.5 * e.std_error / std::max(std::sqrt(e.value), 1e-300); };
    row.tolerance = 3.0 * std::sqrt(std::pow(root_err(c12), 2) + std::pow(root_err(c1), 2) + std::pow(root_err(c2), 2));
    row.ok = row.lhs >= row.rhs - row.tolerance;
    rep.pairs.push_back(std::move(row));
  }
  return rep;
}

}  // namespace symcap
