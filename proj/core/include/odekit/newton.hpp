#pragma once

#include "odekit/linalg.hpp"
#include "odekit/types.hpp"

#include <cmath>
#include <functional>
#include <string>

namespace odekit {

enum class Damping { None, ArmijoBacktrack };

struct NewtonOptions {
  int max_it = 10;
  double abs_tol = -1.0;  // negative: 1e-12 * sqrt(n)
  double rel_tol = 1e-8;
  double step_tol = 1e-12;
  Damping damping = Damping::None;
};

enum class NewtonReason { AbsTol, RelTol, StepTol, MaxIt, LinearFailure, NonFinite };
std::string to_string(NewtonReason r);

struct NewtonReport {
  bool converged = false;
  int iterations = 0;  // equals the number of linear solves
  double initial_residual_norm = 0.0;
  double final_residual_norm = 0.0;
  NewtonReason reason = NewtonReason::MaxIt;
  std::vector<double> residual_history;
};

struct NewtonResult {
  Vector x;
  NewtonReport report;
};

NewtonResult newton_solve(const VectorMap& residual, const std::function<Matrix(const Vector&)>& jacobian,
                          const Vector& x0, const NewtonOptions& opts = {});

}  // namespace odekit
