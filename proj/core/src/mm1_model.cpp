#include "aoi/mm1_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "aoi/error.hpp"

namespace aoi::mm1 {

namespace {

// Arrival of the focal source into state k: keep x_0..x_{k-1}, the new
// update starts with x_k = 0.
shs::ResetMap focal_arrival(std::size_t dim, std::size_t k) {
  shs::ResetMap a(dim);
  for (std::size_t j = 0; j < k; ++j) a(j, j) = 1;
  return a;
}

// Arrival of a competing update into state k: as above, plus x_k = x_{k-1}
// so that its departure leaves the focal age unchanged.
shs::ResetMap other_arrival(std::size_t dim, std::size_t k) {
  shs::ResetMap a = focal_arrival(dim, k);
  a(k - 1, k) = 1;
  return a;
}

// Departure from k+1 into k: x_j <- x_{j+1} for j = 0..k.
shs::ResetMap departure(std::size_t dim, std::size_t k) {
  shs::ResetMap a(dim);
  for (std::size_t j = 0; j <= k; ++j) a(j + 1, j) = 1;
  return a;
}

// Diagonal expansion coefficients e_k, f_k for k = 0..m-1.
struct DiagonalCoefficients {
  std::vector<double> e;
  std::vector<double> f;
};

DiagonalCoefficients diagonal_coefficients(const Mm1Params& p, const std::vector<double>& pi) {
  const double growth = 1.0 + p.rho();
  DiagonalCoefficients d;
  d.e.resize(p.m);
  d.f.resize(p.m);
  d.e[0] = 1.0;
  d.f[0] = 0.0;
  if (p.m > 1) {
    d.e[1] = p.rho();
    d.f[1] = pi[0] / p.mu;
  }
  for (std::size_t k = 2; k < p.m; ++k) {
    d.e[k] = growth * d.e[k - 1] - p.rho_other * d.e[k - 2];
    d.f[k] = growth * d.f[k - 1] - p.rho_other * d.f[k - 2] + pi[k - 1] / p.mu;
    if (!std::isfinite(d.e[k]) || !std::isfinite(d.f[k])) {
      throw Error(Errc::Overflow, "diagonal coefficients overflow at k = " + std::to_string(k));
    }
  }
  return d;
}

}  // namespace

void Mm1Params::validate() const {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw Error(Errc::InvalidParams, "mu must be positive");
  if (!(rho_i > 0.0) || !std::isfinite(rho_i)) {
    throw Error(Errc::InvalidParams, "rho_i must be positive");
  }
  if (!(rho_other >= 0.0) || !std::isfinite(rho_other)) {
    throw Error(Errc::InvalidParams, "rho_other must be non-negative");
  }
  if (m < 1) throw Error(Errc::InvalidParams, "buffer size m must be at least 1");
}

shs::ShsSpec build_shs(const Mm1Params& params) {
  params.validate();
  const std::size_t dim = params.m + 1;
  shs::ShsSpec spec;
  spec.num_states = params.m + 1;
  spec.age_dim = dim;
  spec.drifts.assign(spec.num_states, std::vector<int>(dim, 0));
  for (std::size_t k = 0; k <= params.m; ++k) {
    std::fill_n(spec.drifts[k].begin(), k + 1, 1);
  }
  for (std::size_t k = 0; k < params.m; ++k) {
    spec.transitions.push_back({k, k + 1, params.lambda_i(), focal_arrival(dim, k + 1)});
    if (params.rho_other > 0.0) {
      spec.transitions.push_back({k, k + 1, params.lambda_other(), other_arrival(dim, k + 1)});
    }
    spec.transitions.push_back({k + 1, k, params.mu, departure(dim, k)});
  }
  return spec;
}

std::vector<double> stationary_mm1(double rho, std::size_t m) {
  if (!(rho >= 0.0) || !std::isfinite(rho)) throw Error(Errc::InvalidParams, "rho must be >= 0");
  if (m < 1) throw Error(Errc::InvalidParams, "buffer size m must be at least 1");
  std::vector<double> pi(m + 1);
  if (rho == 1.0) {
    std::fill(pi.begin(), pi.end(), 1.0 / static_cast<double>(m + 1));
    return pi;
  }
  // Weights proportional to rho^k, anchored at the heavier end.
  double total = 0.0;
  for (std::size_t k = 0; k <= m; ++k) {
    pi[k] = rho < 1.0 ? std::pow(rho, static_cast<double>(k))
                      : std::pow(1.0 / rho, static_cast<double>(m - k));
    total += pi[k];
  }
  for (double& p : pi) p /= total;
  return pi;
}

CoeffTable coeff_table(const Mm1Params& params, std::size_t k) {
  params.validate();
  if (k > params.m) throw Error(Errc::InvalidParams, "k must not exceed m");
  CoeffTable table;
  table.k = k;
  if (k == 0) return table;

  const double growth = 1.0 + params.rho();
  // c[j - 1] = c_{j,k}; c_{k,k} = 1 and c_{k+1,k} = 0.
  table.c.assign(k, 0.0);
  table.c[k - 1] = 1.0;
  for (std::size_t j = k - 1; j >= 1; --j) {
    const double next = table.c[j];
    const double next2 = j + 1 < k ? table.c[j + 1] : 0.0;
    table.c[j - 1] = growth * next - params.rho_other * next2;
  }
  const double c2 = k >= 2 ? table.c[1] : 0.0;
  table.e = table.c[0] * params.rho() - c2 * params.rho_other;

  const auto pi = stationary_mm1(params.rho(), params.m);
  table.f = 0.0;
  for (std::size_t j = 1; j <= k; ++j) table.f += table.c[j - 1] * pi[j - 1] / params.mu;
  return table;
}

shs::AgeSolution solve_blocking(const Mm1Params& params) {
  return shs::solve(build_shs(params));
}

double age_blocking(const Mm1Params& params) { return solve_blocking(params).delta; }

double diagonal_sum(const shs::AgeSolution& solution) {
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < solution.v.size(); ++k) sum += solution.v[k][k];
  return sum;
}

RecursiveAge solve_blocking_recursive(const Mm1Params& params) {
  params.validate();
  const auto pi = stationary_mm1(params.rho(), params.m);
  const auto d = diagonal_coefficients(params, pi);

  double sum_e = 0.0;
  double sum_f = 0.0;
  for (std::size_t k = 0; k < params.m; ++k) {
    sum_e += d.e[k];
    sum_f += d.f[k];
  }
  if (!std::isfinite(sum_e) || !std::isfinite(sum_f)) {
    throw Error(Errc::Overflow, "diagonal coefficient sums overflow");
  }

  // sum_{k<m} v[k][k] = 1 / lambda_i pins down v[0][0].
  RecursiveAge out;
  out.v00 = (1.0 / params.lambda_i() + sum_f) / sum_e;

  // sum_{k>=1} v[k][0] = (1/mu) sum_k (k+1) pi_k + (lambda_other / mu) / lambda_i
  double occupancy = 0.0;
  for (std::size_t k = 0; k <= params.m; ++k) occupancy += static_cast<double>(k + 1) * pi[k];
  out.delta = out.v00 + occupancy / params.mu + params.rho_other / params.lambda_i();
  return out;
}

double age_blocking_recursive(const Mm1Params& params) {
  return solve_blocking_recursive(params).delta;
}

std::vector<double> recursive_diagonal(const Mm1Params& params) {
  const auto solved = solve_blocking_recursive(params);
  const auto pi = stationary_mm1(params.rho(), params.m);
  const auto d = diagonal_coefficients(params, pi);
  std::vector<double> diag(params.m);
  for (std::size_t k = 0; k < params.m; ++k) diag[k] = d.e[k] * solved.v00 - d.f[k];
  return diag;
}

LimitResult age_limit(const Mm1Params& params, double tol) {
  Mm1Params p = params;
  p.m = 1;
  p.validate();
  if (p.rho() >= 1.0) {
    throw Error(Errc::Unstable, "total load " + std::to_string(p.rho()) + " is not below 1");
  }
  if (!(tol > 0.0)) throw Error(Errc::InvalidParams, "tolerance must be positive");

  p.m = 32;
  double current = age_blocking_recursive(p);
  while (p.m < kMaxRecursiveBuffer) {
    Mm1Params next = p;
    next.m = std::min(2 * p.m, kMaxRecursiveBuffer);
    const double refined = age_blocking_recursive(next);
    if (std::abs(refined - current) < tol * current) return {current, p.m};
    p = next;
    current = refined;
  }
  throw Error(Errc::NoConvergence,
              "no convergence to relative tolerance " + std::to_string(tol) + " by m = " +
                  std::to_string(kMaxRecursiveBuffer));
}

}  // namespace aoi::mm1
