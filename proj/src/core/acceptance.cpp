#include "acceptance.hpp"

#include "body_grammar.hpp"
#include "capacity.hpp"
#include "experiments.hpp"
#include "sphere.hpp"
#include "steiner.hpp"
#include "symplectic.hpp"

#include <cmath>
#include <sstream>

namespace symcap {

namespace {

constexpr std::size_t kSamples = 200000;

class Checker {
 public:
  Checker(int id, std::string title, std::uint64_t seed) : seed_(seed) {
    result_.id = id;
    result_.title = std::move(title);
    result_.pass = true;
  }

  void check(const std::string& body, const std::string& parameter, double value, double err, bool ok,
             std::size_t budget = 0) {
    result_.records.push_back({"criterion" + std::to_string(result_.id), body, parameter, value, err,
                               ok ? "PASS" : "FAIL", seed_, budget});
    result_.pass = result_.pass && ok;
  }

  void note(const std::string& body, const std::string& parameter, double value, double err,
            const std::string& verdict, std::size_t budget = 0) {
    result_.records.push_back(
        {"criterion" + std::to_string(result_.id), body, parameter, value, err, verdict, seed_, budget});
  }

  CriterionResult take() { return std::move(result_); }

 private:
  std::uint64_t seed_;
  CriterionResult result_;
};

SphereSampler sampler(int dim, std::uint64_t seed, int workers, std::size_t count = kSamples) {
  return SphereSampler{dim, seed, count, true, workers};
}

CapacityFn capacity_fn(std::uint64_t seed, int workers) {
  return [seed, workers](const SupportBody& k) {
    CapacityOptions o;
    o.seed = seed;
    o.workers = workers;
    return eh_capacity_estimate(k, o).estimate();
  };
}

double combined(double a, double b) { return std::hypot(a, b); }

CriterionResult c1(const AcceptanceOptions& o) {
  Checker c(1, "mean width of balls and the square", o.seed);
  for (int n : {1, 2}) {
    const SupportBody b = unit_ball(n);
    const Estimate m = mean_width(b, sampler(2 * n, o.seed, o.workers));
    c.check(b.label(), "M - 2 (antithetic)", m.value - 2.0, m.std_error,
            std::abs(m.value - 2.0) <= 1e-12 && m.std_error <= 1e-12, kSamples);
  }
  const SupportBody sq = cube(1);
  const double q = mean_width_2d(sq);
  c.check(sq.label(), "M - 8/pi (quadrature)", q - 8.0 / kPi, 0.0, std::abs(q - 8.0 / kPi) <= 1e-9);
  const Estimate m = mean_width(sq, sampler(2, o.seed, o.workers));
  c.check(sq.label(), "M - 8/pi (Monte Carlo)", m.value - 8.0 / kPi, m.std_error, std::abs(m.value - 8.0 / kPi) <= 0.01,
          kSamples);
  return c.take();
}

CriterionResult c2(const AcceptanceOptions& o) {
  Checker c(2, "mean width of B2 x B2", o.seed);
  for (const SupportBody& b : {ball_product_body(lagrangian_bidisk_spec()), polydisk({1.0, 1.0})}) {
    const Estimate m = mean_width(b, sampler(4, o.seed, o.workers));
    c.check(b.label(), "M - 8/3", m.value - 8.0 / 3.0, m.std_error, std::abs(m.value - 8.0 / 3.0) <= 0.02, kSamples);
  }
  return c.take();
}

SteinerOptions steiner_options(const AcceptanceOptions& o) {
  SteinerOptions s;
  s.seed = o.seed;
  s.workers = o.workers;
  return s;
}

CriterionResult c3(const AcceptanceOptions& o) {
  Checker c(3, "Steiner fit", o.seed);
  const SteinerOptions so = steiner_options(o);
  for (int n : {1, 2}) {
    const SupportBody b = unit_ball(n);
    const SteinerFit fit = steiner_fit(b, so);
    const double kappa = ball_volume(2 * n);
    for (std::size_t i = 0; i < fit.W.size(); ++i) {
      const double rel = fit.W[i] / kappa - 1.0;
      c.check(b.label(), "W_" + std::to_string(i) + "/kappa - 1", rel, fit.W_err[i] / kappa, std::abs(rel) <= 0.02,
              so.budget);
    }
  }
  std::vector<SupportBody> products{polydisk({1.0, 2.0}), ball_product_body(lagrangian_bidisk_spec()),
                                    ball_product_body(square_times_disk_spec()),
                                    ball_product_body(segments_spec(1.0, 2.0))};
  std::vector<SupportBody> all{unit_ball(1), unit_ball(2)};
  all.insert(all.end(), products.begin(), products.end());
  for (const auto& b : all) {
    const SteinerFit fit = steiner_fit(b, so);
    if (b.volume() && std::find_if(products.begin(), products.end(),
                                   [&](const SupportBody& p) { return p.label() == b.label(); }) != products.end()) {
      const double rel = fit.W[0] / *b.volume() - 1.0;
      c.check(b.label(), "W_0/Vol - 1", rel, fit.W_err[0] / *b.volume(), std::abs(rel) <= 0.02, so.budget);
    }
    const Estimate mq = meanwidth_from_quermass(fit);
    const Estimate mc = mean_width(b, sampler(b.dim(), o.seed, o.workers));
    const double tol = 3.0 * combined(mq.std_error, mc.std_error);
    c.check(b.label(), "2W_{d-1}/kappa - M", mq.value - mc.value, combined(mq.std_error, mc.std_error),
            std::abs(mq.value - mc.value) <= tol, so.budget);
  }
  return c.take();
}

CriterionResult c4(const AcceptanceOptions& o) {
  Checker c(4, "quermassintegral chain", o.seed);
  const SteinerOptions so = steiner_options(o);
  for (const auto& entry : standard_bodies()) {
    const SteinerFit fit = steiner_fit(entry.body, so);
    bool ok = true;
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < fit.Wbar.size(); ++i) {
      const double gap = fit.Wbar[i - 1] - fit.Wbar[i];
      const double tol = 3.0 * combined(fit.Wbar_err[i - 1], fit.Wbar_err[i]);
      ok = ok && gap <= tol;
      worst = std::max(worst, gap - tol);
    }
    c.check(entry.body.label(), "max(Wbar_{i-1} - Wbar_i - 3 err)", worst, 0.0, ok, so.budget);
  }
  return c.take();
}

CriterionResult c5(const AcceptanceOptions& o) {
  Checker c(5, "capacity estimator calibration", o.seed);
  CapacityOptions co;
  co.seed = o.seed;
  co.workers = o.workers;
  const CapacityResult b2 = eh_capacity_estimate(unit_ball(2), co);
  const double rel = b2.raw_cost / ball_raw_cost() - 1.0;
  c.check(unit_ball(2).label(), "raw cost/(2 sqrt pi) - 1", rel, 0.0, std::abs(rel) <= 0.01);
  c.check(unit_ball(2).label(), "c - 1", b2.normalized - 1.0, b2.error, std::abs(b2.normalized - 1.0) <= 1e-9);
  const CapacityResult pd = eh_capacity_estimate(polydisk({1.0, 2.0}), co);
  c.check("polydisk(1,2)", "c - 1", pd.normalized - 1.0, pd.error, std::abs(pd.normalized - 1.0) <= 0.05);
  for (double r : {0.5, 2.0}) {
    const CapacityResult rb = eh_capacity_estimate(ball(2, r), co);
    const double d = rb.normalized / (r * r) - 1.0;
    std::ostringstream label;
    label << "ball(2) radius " << r;
    c.check(label.str(), "c/r^2 - 1", d, rb.error, std::abs(d) <= 1e-6);
  }
  return c.take();
}

CriterionResult c6(const AcceptanceOptions& o) {
  Checker c(6, "capacity inequalities", o.seed);
  InequalityOptions io;
  io.seed = o.seed;
  io.workers = o.workers;
  io.capacity.seed = o.seed;
  io.capacity.workers = o.workers;
  std::vector<SupportBody> bodies;
  for (const auto& e : standard_bodies()) bodies.push_back(e.body);
  bodies.push_back(minkowski_sum(unit_ball(2), scaled(cube(2), 0.1)));
  const std::vector<std::pair<SupportBody, SupportBody>> pairs{
      {unit_ball(2), polydisk({1.0, 2.0})},
      {unit_ball(2), ellipsoid({1.5, 1.0, 0.8, 1.2})},
      {polydisk({1.0, 2.0}), ellipsoid({1.5, 1.0, 0.8, 1.2})},
      {unit_ball(1), ellipsoid({2.0, 1.0})},
      {ellipsoid({2.0, 1.0}), ellipsoid({1.0, 3.0})},
      {unit_ball(2), ball_product_body(lagrangian_bidisk_spec())},
  };
  const InequalityReport rep = inequality_suite(bodies, pairs, io);
  for (const auto& row : rep.bodies) {
    const double err = combined(row.capacity.std_error, row.ao_bound_err);
    c.check(row.label, "c - M^2/4", row.capacity.value - row.ao_bound, err, row.ao_ok, io.samples);
    if (row.viterbo_ok && row.label.rfind("sum(", 0) == 0) {
      c.check(row.label, "sqrt(c) - (Vol/kappa)^(1/2n)", std::sqrt(row.capacity.value) - row.volume_ratio->value,
              row.volume_ratio->std_error, *row.viterbo_ok, io.volume_budget);
    }
  }
  const double ball_gap = rep.bodies[1].capacity.value - rep.bodies[1].ao_bound;
  c.check(rep.bodies[1].label, "c - M^2/4 (equality)", ball_gap, 0.0, std::abs(ball_gap) <= 1e-9);
  int held = 0;
  for (const auto& p : rep.pairs) {
    const bool ok = p.ok;
    held += ok ? 1 : 0;
    c.note(p.left + " + " + p.right, "sqrt c(K1+K2) - sqrt c(K1) - sqrt c(K2)", p.lhs - p.rhs, p.tolerance / 3.0,
           ok ? "HOLDS" : "VIOLATED");
  }
  c.check("pairs", "superadditive pairs", held, 0.0, held >= 5);
  return c.take();
}

CriterionResult c7(const AcceptanceOptions& o) {
  Checker c(7, "F and F-tilde", o.seed);
  std::vector<double> grid;
  for (int i = 1; i <= 10; ++i) grid.push_back(0.2 * i);
  FOptions fo;
  fo.steiner = steiner_options(o);
  fo.steiner.budget = 100000;
  const SupportBody sq = cube(1);
  const FTable t = f_functions(sq, capacity_fn(o.seed, o.workers), grid, fo);
  for (const auto& r : t.rows) {
    std::ostringstream p;
    p << "Ftilde - F at t=" << r.t;
    c.check(sq.label(), p.str(), r.Ftilde - r.F, combined(r.F_err, r.Ftilde_err), r.ordered, fo.steiner.budget);
  }
  const double rel = t.derivative_fd.value / t.derivative_closed.value - 1.0;
  c.check(sq.label(), "Ftilde'(0) finite difference / closed form - 1", rel, 0.0, std::abs(rel) <= 0.02,
          fo.steiner.budget);
  return c.take();
}

CriterionResult c8(const AcceptanceOptions& o) {
  Checker c(8, "local minimality over Sp(2n)", o.seed);
  const std::pair<BallProductSpec, bool> cases[] = {
      {lagrangian_bidisk_spec(), true}, {square_times_disk_spec(), true}, {segments_spec(1.0, 2.0), false}};
  for (const auto& [spec, expect_pass] : cases) {
    const LocalMinVerdict v = verify_local_min(spec, sampler(2 * spec.n, o.seed, o.workers));
    double worst = 0.0;
    for (const auto& d : v.directions) worst = std::max(worst, std::abs(d.first.value) / std::max(d.first.std_error, 1e-300));
    if (expect_pass) {
      c.check(v.label, "max |f'|/sigma over 20 directions", worst, 0.0, v.pass, kSamples);
    } else {
      const double ratio = v.descent_witness
                               ? std::abs(v.descent_witness->first.value) / v.descent_witness->first.std_error
                               : 0.0;
      c.check(v.label, "descent witness |f'|/sigma", ratio, 0.0, !v.pass && ratio > 5.0, kSamples);
    }
  }
  return c.take();
}

CriterionResult c9(const AcceptanceOptions& o) {
  Checker c(9, "planar criterion and local search", o.seed);
  const std::pair<SupportBody, bool> cases[] = {{unit_ball(1), true}, {cube(1), true}, {ellipsoid({2.0, 1.0}), false}};
  for (const auto& [b, minimal] : cases) {
    const GreenResult g = green_test(b);
    c.check(b.label(), "|(I_cos, I_sin)|", g.magnitude, 0.0, g.minimal == minimal);
  }
  const SearchResult r = local_search(ellipsoid({2.0, 1.0}), SymmetricDirection{Mat::Zero(1, 1), Mat::Zero(1, 1)},
                                      sampler(2, o.seed, o.workers));
  const double gap = r.trace.back() - 2.0 * std::sqrt(2.0);
  c.check("ellipsoid(2,1)", "local search M - 2 sqrt 2", gap, r.trace_error.back(), std::abs(gap) <= 1e-3, kSamples);
  return c.take();
}

CriterionResult c10(const AcceptanceOptions& o) {
  Checker c(10, "area map and squash family", o.seed);
  const RadialProfile square = RadialProfile::square(1.0);
  for (const RadialProfile& target :
       {RadialProfile::disk(2.0 / std::sqrt(kPi)), RadialProfile::superellipse(4.0, superellipse_radius(4.0, 4.0))}) {
    const AreaMapCheck chk = check_area_map(AreaMap(square, target), 1000, o.seed);
    c.check(target.label(), "|phi(2 pi) - 2 pi|", chk.phi_end_error, 0.0, chk.phi_end_error <= 1e-6);
    c.check(target.label(), "max |det DT - 1| at 1000 points", chk.jacobian_error, 0.0, chk.jacobian_error <= 1e-6);
  }
  const SquashTable t = squash_family({64, 32, 16, 8, 4, 3, 2});
  c.check("squash family", "monotone in p", t.monotone ? 1.0 : 0.0, 0.0, t.monotone);
  const double hi = t.rows.front().mean_width / (8.0 / kPi) - 1.0;
  const double lo = t.rows.back().mean_width / (4.0 / std::sqrt(kPi)) - 1.0;
  c.check("superellipse p=64", "M/(8/pi) - 1", hi, 0.0, std::abs(hi) <= 0.01);
  c.check("superellipse p=2", "M/(4/sqrt pi) - 1", lo, 0.0, std::abs(lo) <= 0.01);
  return c.take();
}

CriterionResult c11(const AcceptanceOptions& o) {
  Checker c(11, "rounded product", o.seed);
  const RoundedProductReport r = rounded_product_test(square_times_disk_spec(), 2.0, sampler(4, o.seed, o.workers));
  c.check(r.label, "M(after) - M(before)", r.difference.value, r.difference.std_error, r.strict_decrease, kSamples);
  c.check(r.label, "difference - formula", r.difference.value - r.formula_difference, r.difference.std_error,
          r.formula_consistent, kSamples);
  return c.take();
}

CriterionResult c12(const AcceptanceOptions& o) {
  Checker c(12, "nonlinear flow", o.seed);
  const std::size_t budget = 20000;
  const FlowReport f = nonlinear_flow_check(polydisk({1.0, 2.0}), sampler(4, o.seed, o.workers, budget));
  for (const auto& r : f.rows) {
    c.check(f.label, "dM/dt, Hamiltonian " + std::to_string(r.hamiltonian), r.derivative.value, r.derivative.std_error,
            r.zero, budget);
  }
  return c.take();
}

CriterionResult c13(const AcceptanceOptions& o) {
  Checker c(13, "product formula calibration", o.seed);
  const ProductCalibration cal = calibrate_product(2, 2, sampler(4, o.seed, o.workers));
  c.check("ball2 x ball2", "oracle M - Beta-moment value", cal.oracle.value - cal.exact, cal.oracle.std_error,
          std::abs(cal.oracle.value - cal.exact) <= 3.0 * cal.oracle.std_error, kSamples);
  c.note("ball2 x ball2", "calibrated prefactor / printed prefactor", cal.ratio, cal.implied.std_error / cal.printed,
         "DISCREPANCY", kSamples);
  const double printed = product_mean_width(2.0, 2, 2.0, 2, Prefactor::printed);
  c.note("ball2 x ball2", "formula with printed prefactor", printed, 0.0, "RECORDED");
  const std::pair<SupportBody, double> cases[] = {{ball_product_body(lagrangian_bidisk_spec()), 2.0},
                                                  {ball_product_body(square_times_disk_spec()), 8.0 / kPi}};
  for (const auto& [b, m1] : cases) {
    const double f = product_mean_width(m1, 2, 2.0, 2, Prefactor::calibrated);
    const Estimate m = mean_width(b, sampler(4, o.seed, o.workers));
    c.check(b.label(), "calibrated formula - M (Monte Carlo)", f - m.value, m.std_error,
            std::abs(f - m.value) <= 3.0 * m.std_error, kSamples);
  }
  return c.take();
}

}  // namespace

CriterionResult acceptance_check(int id, const AcceptanceOptions& opt) {
  switch (id) {
    case 1: return c1(opt);
    case 2: return c2(opt);
    case 3: return c3(opt);
    case 4: return c4(opt);
    case 5: return c5(opt);
    case 6: return c6(opt);
    case 7: return c7(opt);
    case 8: return c8(opt);
    case 9: return c9(opt);
    case 10: return c10(opt);
    case 11: return c11(opt);
    case 12: return c12(opt);
    case 13: return c13(opt);
    default: throw ValidationError("acceptance criterion " + std::to_string(id) + " does not exist");
  }
}

std::vector<CriterionResult> acceptance_checks(const AcceptanceOptions& opt,
                                               const std::function<void(const CriterionResult&)>& progress) {
  std::vector<CriterionResult> out;
  for (int id = 1; id <= kAcceptanceCriteria; ++id) {
    out.push_back(acceptance_check(id, opt));
    if (progress) progress(out.back());
  }
  return out;
}

}  // namespace symcap
