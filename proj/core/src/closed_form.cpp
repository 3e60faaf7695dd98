#include "aoi/closed_form.hpp"

#include <cmath>
#include <string>

#include "aoi/error.hpp"

namespace aoi::closed_form {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(Errc::OutOfDomain, what);
}

}  // namespace

double load_root(double rho, double rho_other) {
  require(std::isfinite(rho) && std::isfinite(rho_other), "loads must be finite");
  require(rho_other >= 0.0, "competing load must be non-negative");
  require(rho_other <= rho, "competing load exceeds total load");
  require(rho < 1.0, "total load must be below 1");

  const double b = 1.0 + rho;
  if (rho_other <= kZeroLoad) return 1.0 / b;

  // (1 + rho)^2 - 4 rho_other rewritten as (1 - rho)^2 + 4 (rho - rho_other):
  // same value, no cancellation when rho_other is close to its maximum.
  double disc = (1.0 - rho) * (1.0 - rho) + 4.0 * (rho - rho_other);
  if (disc < 0.0 && disc > -1e-15) disc = 0.0;
  require(disc >= 0.0, "negative discriminant");
  // Rationalized form of (b - sqrt(disc)) / (2 rho_other); avoids
  // cancellation for small rho_other.
  return 2.0 / (b + std::sqrt(disc));
}

double average_age_source(double mu, double rho_i, double rho_other) {
  require(mu > 0.0 && std::isfinite(mu), "service rate must be positive");
  require(rho_i > 0.0, "focal load must be positive");
  require(rho_other >= 0.0, "competing load must be non-negative");
  const double rho = rho_i + rho_other;
  require(rho < 1.0, "total load must be below 1");

  const double e = load_root(rho, rho_other);
  const double first = (1.0 - rho) / ((rho - rho_other * e) * (1.0 - rho * e));
  return (first + 1.0 / (1.0 - rho) + rho_other / rho_i) / mu;
}

double single_source_age(double mu, double rho) {
  require(mu > 0.0 && std::isfinite(mu), "service rate must be positive");
  require(rho > 0.0 && rho < 1.0, "load must lie in (0, 1)");
  return (1.0 + 1.0 / rho + rho * rho / (1.0 - rho)) / mu;
}

}  // namespace aoi::closed_form
