#pragma once

// Closed-form average age of source i in a FCFS M/M/1 queue shared with
// Poisson competing traffic. Loads are offered loads (rate / mu).

namespace aoi::closed_form {

// Below this competing load the root switches to its analytic limit.
inline constexpr double kZeroLoad = 1e-12;

/// Smaller root E of rho_other * E^2 - (1 + rho) * E + 1 = 0, where rho is
/// the total load. Lies in [1/(1+rho), 1]; equals 1/(1+rho) as
/// rho_other -> 0. Throws OutOfDomain unless 0 <= rho_other <= rho < 1.
double load_root(double rho, double rho_other);

/// Average age of source i:
///   (1/mu) [ (1-rho) / ((rho - rho_other E)(1 - rho E)) + 1/(1-rho) + rho_other/rho_i ]
/// with rho = rho_i + rho_other and E = load_root(rho, rho_other).
double average_age_source(double mu, double rho_i, double rho_other);

/// Single-source M/M/1 FCFS age (1/mu)(1 + 1/rho + rho^2/(1-rho)).
double single_source_age(double mu, double rho);

}  // namespace aoi::closed_form
