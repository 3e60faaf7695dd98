#pragma once

// Age of one focal source sharing an FCFS M/M/1/m blocking queue with a
// Poisson stream of competing updates.
//
// Two independent routes compute the blocking-system age:
//  * age_blocking() builds the full hybrid system and solves it with the
//    generic engine in shs.hpp;
//  * age_blocking_recursive() uses the telescoped sums of the correlation
//    equations and an O(m) recursion for the diagonal terms v[k][k].
// age_limit() extrapolates the recursive route to the unbounded queue.

#include <cstddef>
#include <vector>

#include "aoi/shs.hpp"

namespace aoi::mm1 {

// Buffer size above which the recursive route refuses to run from
// age_limit(); the diagonal coefficients grow roughly like 2^m.
inline constexpr std::size_t kMaxRecursiveBuffer = 900;
// Largest buffer the CLI will hand to the generic engine.
inline constexpr std::size_t kMaxGenericBuffer = 50;

struct Mm1Params {
  double mu = 1.0;         // service rate
  double rho_i = 0.0;      // focal source load lambda_i / mu
  double rho_other = 0.0;  // load of all other sources
  std::size_t m = 1;       // system capacity (in service + waiting)

  double rho() const noexcept { return rho_i + rho_other; }
  double lambda_i() const noexcept { return rho_i * mu; }
  double lambda_other() const noexcept { return rho_other * mu; }
  double lambda() const noexcept { return rho() * mu; }

  /// Throws InvalidParams unless mu > 0, rho_i > 0, rho_other >= 0, m >= 1.
  void validate() const;
};

/// Builds the (m+1)-state blocking system with age rows of length m+1.
/// Zero-rate transitions (rho_other == 0) are omitted.
shs::ShsSpec build_shs(const Mm1Params& params);

/// Truncated geometric distribution of the number of updates in system.
std::vector<double> stationary_mm1(double rho, std::size_t m);

/// Expansion of the diagonal term v[k][k] in terms of v[0][0]:
///   v[k][k] = e * v[0][0] - f,
/// with c[j-1] holding the coefficient c_{j,k}, j = 1..k.
struct CoeffTable {
  std::size_t k = 0;
  std::vector<double> c;
  double e = 1.0;
  double f = 0.0;
};

/// Materializes c_{j,k} from c_{k,k} = 1, c_{k+1,k} = 0 and
///   c_{j-1,k} = (1 + rho) c_{j,k} - rho_other c_{j+1,k},
/// then forms e and f from them. O(k); intended for inspection and tests.
CoeffTable coeff_table(const Mm1Params& params, std::size_t k);

/// Blocking-system age through the generic hybrid-system engine.
double age_blocking(const Mm1Params& params);

/// Same, but also returns the full stationary solution.
shs::AgeSolution solve_blocking(const Mm1Params& params);

/// sum_{k=0}^{m-1} v[k][k]; equals 1 / lambda_i for the blocking system.
double diagonal_sum(const shs::AgeSolution& solution);

struct RecursiveAge {
  double v00 = 0.0;
  double delta = 0.0;
};

/// Blocking-system age through the O(m) recursion. Throws Overflow if the
/// diagonal coefficients leave the double range.
RecursiveAge solve_blocking_recursive(const Mm1Params& params);
double age_blocking_recursive(const Mm1Params& params);

/// v[k][k] for k = 0..m-1 reconstructed from the recursion. Subject to
/// cancellation for large m; meant for checking small systems.
std::vector<double> recursive_diagonal(const Mm1Params& params);

struct LimitResult {
  double delta = 0.0;
  std::size_t m = 0;  // buffer size at which the schedule stopped
};

/// Age in the unbounded FCFS queue: evaluates the recursive route at
/// m = 32, 64, 128, ... (capped at kMaxRecursiveBuffer) and stops at the
/// first m with |age(2m) - age(m)| < tol * age(m). params.m is ignored.
/// Throws Unstable if rho >= 1 and NoConvergence if the cap is reached.
LimitResult age_limit(const Mm1Params& params, double tol);

}  // namespace aoi::mm1
