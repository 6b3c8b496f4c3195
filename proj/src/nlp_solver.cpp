#include "evasion/nlp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "evasion/errors.hpp"

namespace evasion {
namespace {

constexpr double kArmijo = 1e-4;
constexpr double kBacktrack = 0.5;
constexpr double kMinScale = 1e-10;
constexpr double kMaxScale = 1e10;

double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::BudgetExhausted: return "budget_exhausted";
    case SolveStatus::NoImprovement: return "no_improvement";
  }
  return "?";
}

void central_difference_gradient(const Objective& objective, std::span<const double> x,
                                 std::span<double> grad) {
  std::vector<double> probe(x.begin(), x.end());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double h = 1e-6 * std::max(1.0, std::abs(x[i]));
    probe[i] = x[i] + h;
    const double up = objective(probe);
    probe[i] = x[i] - h;
    const double down = objective(probe);
    probe[i] = x[i];
    grad[i] = (up - down) / (2.0 * h);
  }
}

SolveResult minimize_box(const Objective& objective, const GradientFn& gradient,
                         std::span<const double> x0, std::span<const double> lower,
                         std::span<const double> upper, const Budget& budget) {
  const std::size_t n = x0.size();
  if (lower.size() != n || upper.size() != n) throw Error("bound dimensions do not match x0");
  for (std::size_t i = 0; i < n; ++i)
    if (!(lower[i] <= x0[i] && x0[i] <= upper[i])) throw Error("x0 lies outside the bounds");

  SolveResult result;
  int& evals = result.evaluations;
  auto f = [&](std::span<const double> x) {
    ++evals;
    return objective(x);
  };

  std::vector<double> x(x0.begin(), x0.end());
  double fx = f(x);
  if (!std::isfinite(fx)) throw NonFiniteObjective("objective is not finite at the initial point");
  const double f0 = fx;

  double min_range = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) min_range = std::min(min_range, upper[i] - lower[i]);
  const double first_move = std::isfinite(min_range) && min_range > 0 ? 0.5 * min_range : 1.0;

  std::vector<double> g(n), g_prev(n), x_prev(n), scale(n, 0.0), d(n), trial(n);
  double global_scale = 0.0;
  bool have_prev = false;
  bool converged = false;

  while (result.iterations < budget.max_iterations) {
    if (gradient) {
      gradient(x, g);
    } else {
      if (evals + 2 * static_cast<int>(n) > budget.max_function_evaluations) break;
      central_difference_gradient(f, x, g);
    }
    if (std::any_of(g.begin(), g.end(), [](double v) { return !std::isfinite(v); })) break;

    double pg = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool pinned = (x[i] <= lower[i] && g[i] > 0) || (x[i] >= upper[i] && g[i] < 0);
      if (!pinned) pg = std::max(pg, std::abs(g[i]));
    }
    if (pg < budget.optimality_tolerance) {
      converged = true;
      break;
    }
    ++result.iterations;

    if (have_prev) {
      double ss = 0.0, sy = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double s = x[i] - x_prev[i];
        const double y = g[i] - g_prev[i];
        ss += s * s;
        sy += s * y;
        if (s != 0.0 && s * y > 0.0) scale[i] = std::clamp(s / y, kMinScale, kMaxScale);
      }
      if (sy > 0.0) global_scale = std::clamp(ss / sy, kMinScale, kMaxScale);
    } else {
      global_scale = first_move / inf_norm(g);
    }
    for (std::size_t i = 0; i < n; ++i) d[i] = -(scale[i] > 0.0 ? scale[i] : global_scale) * g[i];
    // Curvature picked up across a penalty edge can stall the step; restart from steepest descent.
    double reach = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      reach = std::max(reach, std::abs(std::clamp(x[i] + d[i], lower[i], upper[i]) - x[i]));
    if (have_prev && reach < budget.step_tolerance) {
      std::fill(scale.begin(), scale.end(), 0.0);
      global_scale = first_move / inf_norm(g);
      for (std::size_t i = 0; i < n; ++i) d[i] = -global_scale * g[i];
    }

    bool accepted = false;
    bool out_of_evals = false;
    double f_new = fx;
    double step_norm = 0.0;
    for (double alpha = 1.0;; alpha *= kBacktrack) {
      double slope = 0.0;
      step_norm = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        trial[i] = std::clamp(x[i] + alpha * d[i], lower[i], upper[i]);
        slope += g[i] * (trial[i] - x[i]);
        step_norm = std::max(step_norm, std::abs(trial[i] - x[i]));
      }
      if (step_norm == 0.0 || alpha < 1e-12) break;
      if (evals >= budget.max_function_evaluations) {
        out_of_evals = true;
        break;
      }
      f_new = f(trial);
      // Differencing across the penalty edge yields huge slopes; never demand more than a
      // relative decrease.
      const double demand = std::max(slope, -(std::abs(fx) + 1.0));
      if (std::isfinite(f_new) && f_new <= fx + kArmijo * demand) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // A failed line search short of the budget means no descent is left at this precision.
      converged = !out_of_evals;
      break;
    }

    x_prev = x;
    g_prev = g;
    have_prev = true;
    x = trial;
    fx = f_new;
    if (step_norm < budget.step_tolerance) {
      converged = true;
      break;
    }
  }

  result.x_star = std::move(x);
  result.f_star = fx;
  if (converged && !(fx == f0 && result.iterations > 0))
    result.status = SolveStatus::Converged;
  else if (fx < f0)
    result.status = SolveStatus::BudgetExhausted;
  else
    result.status = SolveStatus::NoImprovement;
  return result;
}

}  // namespace evasion
