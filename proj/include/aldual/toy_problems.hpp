#pragma once

#include <string>
#include <vector>

#include "aldual/problem.hpp"

namespace aldual {

/// min θ² s.t. 1 − θ ≤ 0 on [−3, 3]. Optimum θ* = 1, λ* = 2, p(u) = (1 − u)².
ConstrainedProblem make_toy_qp();

/// min sin(3θ) + θ²/4 s.t. cos(θ) − 0.5 ≤ 0 on [−3, 3]. Has a positive
/// duality gap for the standard Lagrangian.
ConstrainedProblem make_nonconvex_1d();

/// min −θ² with no constraints on [−1, 1]; θ = 0 is a stationary maximizer.
ConstrainedProblem make_concave_1d();

/// "toy-qp", "nonconvex-1d" or "concave-1d"; throws ProblemError otherwise.
ConstrainedProblem builtin_problem(const std::string& id);

std::vector<std::string> builtin_problem_ids();

}  // namespace aldual
