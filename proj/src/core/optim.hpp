#pragma once

#include "common.hpp"

#include <deque>
#include <functional>

namespace symcap {

// value(x, grad) returns f(x) and writes ∇f(x) into grad.
using Objective = std::function<double(const Vec& x, Vec& grad)>;

struct DescentOptions {
  int max_iterations = 200;
  int memory = 8;
  double gradient_tol = 1e-9;
  double value_tol = 1e-14;  // relative decrease below which we stop
};

struct DescentResult {
  Vec x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Limited-memory quasi-Newton descent with Armijo backtracking; falls back to
// steepest descent whenever the quasi-Newton direction is not a descent
// direction. Every accepted step strictly decreases f.
inline DescentResult minimize_descent(const Objective& f, Vec x, const DescentOptions& opt = {}) {
  Vec g(x.size());
  double fx = f(x, g);
  std::deque<std::pair<Vec, Vec>> history;  // (s, y)
  DescentResult out;
  Vec g_new(x.size());
  for (int it = 0; it < opt.max_iterations; ++it) {
    out.iterations = it + 1;
    if (g.norm() <= opt.gradient_tol * std::max(1.0, std::abs(fx))) {
      out.converged = true;
      break;
    }
    // two-loop recursion
    Vec q = g;
    std::vector<double> alpha(history.size());
    for (std::size_t i = history.size(); i-- > 0;) {
      const auto& [s, y] = history[i];
      alpha[i] = s.dot(q) / y.dot(s);
      q -= alpha[i] * y;
    }
    if (!history.empty()) {
      const auto& [s, y] = history.back();
      q *= s.dot(y) / y.dot(y);
    }
    for (std::size_t i = 0; i < history.size(); ++i) {
      const auto& [s, y] = history[i];
      const double beta = y.dot(q) / y.dot(s);
      q += (alpha[i] - beta) * s;
    }
    Vec dir = -q;
    double slope = dir.dot(g);
    if (!(slope < 0.0)) {
      history.clear();
      dir = -g;
      slope = -g.squaredNorm();
    }
    double step = 1.0;
    if (history.empty()) step = std::min(1.0, 1.0 / std::max(g.norm(), 1e-300)) * std::max(1e-3, x.norm());
    Vec x_new;
    double f_new = fx;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      x_new = x + step * dir;
      f_new = f(x_new, g_new);
      if (std::isfinite(f_new) && f_new <= fx + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      out.converged = true;  // no further decrease available at this resolution
      break;
    }
    Vec s = x_new - x;
    Vec y = g_new - g;
    if (s.dot(y) > 1e-12 * s.norm() * y.norm()) {
      history.emplace_back(std::move(s), std::move(y));
      if (static_cast<int>(history.size()) > opt.memory) history.pop_front();
    }
    const double decrease = fx - f_new;
    x = std::move(x_new);
    g = g_new;
    fx = f_new;
    if (decrease <= opt.value_tol * std::max(1.0, std::abs(fx))) {
      out.converged = true;
      break;
    }
  }
  out.x = std::move(x);
  out.value = fx;
  return out;
}

}  // namespace symcap
