#pragma once

#include <functional>
#include <span>
#include <vector>

namespace evasion {

/// Hard limits for one solve. Defaults mirror a small embedded planner.
struct Budget {
  int max_iterations = 10;
  int max_function_evaluations = 100;
  double step_tolerance = 1e-3;
  double optimality_tolerance = 1e-3;
};

enum class SolveStatus { Converged, BudgetExhausted, NoImprovement };

const char* to_string(SolveStatus status);

struct SolveResult {
  std::vector<double> x_star;
  double f_star = 0.0;
  SolveStatus status = SolveStatus::NoImprovement;
  int iterations = 0;
  int evaluations = 0;
};

using Objective = std::function<double(std::span<const double>)>;
using GradientFn = std::function<void(std::span<const double>, std::span<double>)>;

/// Projected diagonal quasi-Newton descent with Armijo backtracking on [lower, upper].
/// Without `gradient`, central differences are used and their evaluations count against the
/// budget. The result is the best point seen and is never worse than x0.
/// Throws NonFiniteObjective if f(x0) is not finite.
SolveResult minimize_box(const Objective& objective, const GradientFn& gradient,
                         std::span<const double> x0, std::span<const double> lower,
                         std::span<const double> upper, const Budget& budget);

/// Central difference with step 1e-6 max(1, |x_i|).
void central_difference_gradient(const Objective& objective, std::span<const double> x,
                                 std::span<double> grad);

}  // namespace evasion
