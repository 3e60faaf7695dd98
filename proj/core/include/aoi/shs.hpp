#pragma once

// Stationary analysis of piecewise-linear stochastic hybrid systems (SHS)
// with a finite discrete state space and binary reset maps.
//
// In discrete state q the age row x grows as dx/dt = b_q. A transition l
// moves q_l -> q'_l at rate lambda_l and resets x to x * A_l. The average
// age is sum_q v_q[0] where (pi, v) is the stationary fixed point of
//
//   pi_q * sum_{l out of q} lambda_l = sum_{l into q} lambda_l * pi_{q_l}
//   v_q  * sum_{l out of q} lambda_l = b_q * pi_q + sum_{l into q} lambda_l * v_{q_l} * A_l

#include <cstddef>
#include <span>
#include <vector>

namespace aoi::shs {

inline constexpr double kBalanceTolerance = 1e-12;
inline constexpr double kAgeTolerance = 1e-10;
// Entries of v below this value are treated as a genuine negative solution
// rather than round-off.
inline constexpr double kNegativeThreshold = -1e-9;

/// Square matrix A applied on the right of the age row (x' = x * A).
/// Entries are stored as ints so that malformed (non-binary) maps can be
/// represented and rejected by validate_spec().
class ResetMap {
 public:
  ResetMap() = default;
  explicit ResetMap(std::size_t dim) : dim_(dim), entries_(dim * dim, 0) {}

  static ResetMap identity(std::size_t dim);

  std::size_t dim() const noexcept { return dim_; }
  int operator()(std::size_t row, std::size_t col) const { return entries_[row * dim_ + col]; }
  int& operator()(std::size_t row, std::size_t col) { return entries_[row * dim_ + col]; }

  friend bool operator==(const ResetMap&, const ResetMap&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<int> entries_;
};

struct Transition {
  std::size_t from = 0;
  std::size_t to = 0;
  double rate = 0.0;  // events per unit time
  ResetMap reset;
};

/// Self-transitions and parallel transitions between the same pair of
/// states are both allowed.
struct ShsSpec {
  std::size_t num_states = 0;
  std::size_t age_dim = 0;
  std::vector<Transition> transitions;
  std::vector<std::vector<int>> drifts;  // num_states rows of length age_dim
};

struct AgeSolution {
  std::vector<double> pi;
  std::vector<std::vector<double>> v;  // v[q][j] = E[x_j * 1{q(t) = q}]
  double delta = 0.0;
};

/// Throws aoi::Error (NonBinaryReset, NonPositiveRate, DanglingState,
/// UnreachableState, InvalidParams) if the spec is malformed or some state
/// cannot be reached from state 0.
void validate_spec(const ShsSpec& spec);

/// Solves the global balance equations with the normalization sum(pi) = 1.
/// Throws NotErgodic if the system has no unique solution.
std::vector<double> stationary_distribution(const ShsSpec& spec);

/// Solves the stationary correlation equations for v given pi. Age
/// components that can never become non-zero in a state (no drift and no
/// reset feeding them) are fixed to 0, which keeps the system square and
/// small. Throws UnstableSystem if the system is singular or the solution
/// has entries below kNegativeThreshold.
AgeSolution solve_age(const ShsSpec& spec, std::span<const double> pi);

/// Convenience: stationary_distribution() followed by solve_age().
AgeSolution solve(const ShsSpec& spec);

/// Sum over states of the first age component.
double average_age(const AgeSolution& solution);

/// Largest absolute violation of the balance equations and of the
/// normalization constraint.
double balance_residual(const ShsSpec& spec, std::span<const double> pi);

/// Largest absolute violation of the correlation equations over every
/// (state, component) pair.
double age_residual(const ShsSpec& spec, const AgeSolution& solution);

}  // namespace aoi::shs
