#pragma once

#include "odekit/solve.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace odekit {

enum class TrajectoryPolicy { StoreAll, Binomial };

struct TrajectoryRecord {
  long step = 0;
  double t = 0.0;
  Vector u;
  std::optional<Vector> udot;
  StageData stage_data;  // the step that produced this state; empty for step 0
};

/** @brief Advances one step of size dt from a record. Must be deterministic. */
using Replayer = std::function<TrajectoryRecord(const TrajectoryRecord& from, double dt)>;

class Trajectory {
 public:
  explicit Trajectory(TrajectoryPolicy policy = TrajectoryPolicy::StoreAll, std::size_t max_checkpoints = 0);

  /** @brief Steps must arrive in order 0, 1, 2, ... */
  void set(long step, double t, const Vector& u, const std::optional<Vector>& udot, const StageData& sd);
  TrajectoryRecord get(long step, const Replayer& replay);

  TrajectoryPolicy policy() const { return policy_; }
  long last_step() const { return static_cast<long>(times_.size()) - 1; }
  std::size_t retained() const { return stored_.size(); }
  std::size_t max_retained() const { return max_retained_; }
  long recomputations() const { return recomputations_; }
  const std::vector<double>& times() const { return times_; }
  /** @brief The exact step size that took state `step` to `step + 1`. */
  double dt(long step) const { return dts_.at(static_cast<std::size_t>(step + 1)); }

  /** @brief Writes retained states: int64 step, double t, int64 n, n doubles, little-endian. */
  void spill(const std::string& path) const;
  static std::vector<TrajectoryRecord> read_spill(const std::string& path);

 private:
  void store(TrajectoryRecord r);
  void thin();

  TrajectoryPolicy policy_;
  std::size_t capacity_;
  std::size_t stride_ = 1;
  std::map<long, TrajectoryRecord> stored_;
  std::vector<double> times_;
  std::vector<double> dts_;
  std::size_t max_retained_ = 0;
  long recomputations_ = 0;
};

/** @brief Replays steps with the same kernels the forward solve used. */
Replayer make_replayer(const Problem& p, const Scheme& scheme);

struct CostIntegrand {
  std::size_t ncost = 1;
  std::function<Vector(double, const Vector&)> r;
  std::function<Matrix(double, const Vector&)> drdu;  // ncost x n
  std::function<Matrix(double, const Vector&)> drdp;  // ncost x np
};

struct AdjointState {
  std::vector<Vector> lambda;
  std::vector<Vector> mu;
  std::optional<Vector> cost_integral;  // accumulated during the backward sweep
};

AdjointState adjoint_solve(const Problem& p, const Scheme& scheme, Trajectory& traj, const AdjointState& terminal,
                           const CostIntegrand* integrand = nullptr);

enum class SeedMode { Parameters, InitialConditions };

struct ForwardSensitivity {
  Matrix S;
  Matrix quadrature_sensitivity;  // ncost x columns of S
  Vector cost_integral;
};

/** @brief Runs the forward solve and propagates S alongside it. */
ForwardSensitivity forward_solve(const Problem& p, const Vector& u0, const Scheme& scheme, const SolveOptions& opts,
                                 const Matrix& S0, SeedMode mode, const CostIntegrand* integrand = nullptr,
                                 SolveResult* result = nullptr, Trajectory* traj = nullptr);

Vector total_derivative(const Vector& phi_u, const Vector& phi_p, const ForwardSensitivity& S,
                        std::size_t cost_index = 0);

/** @brief Fixed-step solve recording a trajectory, the usual first phase of an adjoint run. */
SolveResult record_forward(const Problem& p, const Vector& u0, const Scheme& scheme, const SolveOptions& opts,
                           Trajectory& traj);

}  // namespace odekit
