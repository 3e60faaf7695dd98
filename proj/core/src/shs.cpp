#include "aoi/shs.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <queue>
#include <string>

#include "aoi/error.hpp"

namespace aoi::shs {

namespace {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

std::vector<double> outgoing_rates(const ShsSpec& spec) {
  std::vector<double> out(spec.num_states, 0.0);
  for (const auto& t : spec.transitions) out[t.from] += t.rate;
  return out;
}

// Solves A x = b with sparse LU plus one step of iterative refinement.
// Returns false if the factorization fails.
bool sparse_solve(const SparseMatrix& a, const Eigen::VectorXd& b, Eigen::VectorXd& x) {
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(a);
  lu.factorize(a);
  if (lu.info() != Eigen::Success) return false;
  x = lu.solve(b);
  if (lu.info() != Eigen::Success || !x.allFinite()) return false;
  const Eigen::VectorXd r = b - a * x;
  const Eigen::VectorXd dx = lu.solve(r);
  if (dx.allFinite()) x += dx;
  return x.allFinite();
}

// (state, component) pairs that can hold a non-zero expectation: seeded by
// the drifts and closed under the reset maps.
std::vector<std::vector<char>> active_components(const ShsSpec& spec) {
  const std::size_t n = spec.age_dim;
  std::vector<std::vector<char>> active(spec.num_states, std::vector<char>(n, 0));
  std::queue<std::pair<std::size_t, std::size_t>> work;
  for (std::size_t q = 0; q < spec.num_states; ++q) {
    for (std::size_t j = 0; j < n; ++j) {
      if (spec.drifts[q][j] != 0) {
        active[q][j] = 1;
        work.emplace(q, j);
      }
    }
  }
  std::vector<std::vector<std::size_t>> outgoing(spec.num_states);
  for (std::size_t l = 0; l < spec.transitions.size(); ++l) {
    outgoing[spec.transitions[l].from].push_back(l);
  }
  while (!work.empty()) {
    const auto [q, r] = work.front();
    work.pop();
    for (std::size_t l : outgoing[q]) {
      const auto& t = spec.transitions[l];
      for (std::size_t c = 0; c < n; ++c) {
        if (t.reset(r, c) != 0 && !active[t.to][c]) {
          active[t.to][c] = 1;
          work.emplace(t.to, c);
        }
      }
    }
  }
  return active;
}

}  // namespace

ResetMap ResetMap::identity(std::size_t dim) {
  ResetMap a(dim);
  for (std::size_t i = 0; i < dim; ++i) a(i, i) = 1;
  return a;
}

void validate_spec(const ShsSpec& spec) {
  if (spec.num_states == 0) throw Error(Errc::InvalidParams, "spec has no states");
  if (spec.age_dim == 0) throw Error(Errc::InvalidParams, "age row has zero length");
  if (spec.drifts.size() != spec.num_states) {
    throw Error(Errc::InvalidParams, "expected one drift row per state");
  }
  for (const auto& row : spec.drifts) {
    if (row.size() != spec.age_dim) throw Error(Errc::InvalidParams, "drift row has wrong length");
    for (int b : row) {
      if (b != 0 && b != 1) throw Error(Errc::InvalidParams, "drift entries must be 0 or 1");
    }
  }

  std::vector<std::vector<std::size_t>> adjacency(spec.num_states);
  for (std::size_t l = 0; l < spec.transitions.size(); ++l) {
    const auto& t = spec.transitions[l];
    const std::string tag = "transition " + std::to_string(l);
    if (t.from >= spec.num_states || t.to >= spec.num_states) {
      throw Error(Errc::DanglingState, tag + " references a state outside 0.." +
                                           std::to_string(spec.num_states - 1));
    }
    if (!(t.rate > 0.0) || !std::isfinite(t.rate)) {
      throw Error(Errc::NonPositiveRate, tag + " has rate " + std::to_string(t.rate));
    }
    if (t.reset.dim() != spec.age_dim) {
      throw Error(Errc::NonBinaryReset, tag + " reset map is not age_dim x age_dim");
    }
    for (std::size_t r = 0; r < spec.age_dim; ++r) {
      for (std::size_t c = 0; c < spec.age_dim; ++c) {
        const int a = t.reset(r, c);
        if (a != 0 && a != 1) throw Error(Errc::NonBinaryReset, tag + " reset map is not binary");
      }
    }
    adjacency[t.from].push_back(t.to);
  }

  std::vector<char> seen(spec.num_states, 0);
  std::vector<std::size_t> stack{0};
  seen[0] = 1;
  while (!stack.empty()) {
    const std::size_t q = stack.back();
    stack.pop_back();
    for (std::size_t next : adjacency[q]) {
      if (!seen[next]) {
        seen[next] = 1;
        stack.push_back(next);
      }
    }
  }
  for (std::size_t q = 0; q < spec.num_states; ++q) {
    if (!seen[q]) {
      throw Error(Errc::UnreachableState, "state " + std::to_string(q) + " is unreachable from state 0");
    }
  }
}

std::vector<double> stationary_distribution(const ShsSpec& spec) {
  validate_spec(spec);
  const auto n = static_cast<Eigen::Index>(spec.num_states);
  const std::vector<double> out = outgoing_rates(spec);

  // Row q holds the balance equation of state q; the last row is replaced
  // by the normalization constraint.
  std::vector<Triplet> triplets;
  triplets.reserve(spec.transitions.size() * 2 + spec.num_states);
  const Eigen::Index norm_row = n - 1;
  for (Eigen::Index q = 0; q < norm_row; ++q) {
    triplets.emplace_back(q, q, out[q]);
  }
  for (const auto& t : spec.transitions) {
    const auto to = static_cast<Eigen::Index>(t.to);
    if (to != norm_row) triplets.emplace_back(to, static_cast<Eigen::Index>(t.from), -t.rate);
  }
  for (Eigen::Index q = 0; q < n; ++q) triplets.emplace_back(norm_row, q, 1.0);

  SparseMatrix a(n, n);
  a.setFromTriplets(triplets.begin(), triplets.end());
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b(norm_row) = 1.0;

  Eigen::VectorXd x;
  if (!sparse_solve(a, b, x)) throw Error(Errc::NotErgodic, "balance equations are singular");

  std::vector<double> pi(spec.num_states);
  for (Eigen::Index q = 0; q < n; ++q) {
    if (x(q) < -kBalanceTolerance) {
      throw Error(Errc::NotErgodic, "balance solution has a negative probability");
    }
    pi[q] = std::max(0.0, x(q));
  }
  return pi;
}

AgeSolution solve_age(const ShsSpec& spec, std::span<const double> pi) {
  validate_spec(spec);
  if (pi.size() != spec.num_states) {
    throw Error(Errc::InvalidParams, "stationary row has wrong length");
  }
  const std::size_t n = spec.age_dim;
  const std::vector<double> out = outgoing_rates(spec);
  const auto active = active_components(spec);

  std::vector<std::vector<Eigen::Index>> index(spec.num_states, std::vector<Eigen::Index>(n, -1));
  Eigen::Index unknowns = 0;
  for (std::size_t q = 0; q < spec.num_states; ++q) {
    for (std::size_t j = 0; j < n; ++j) {
      if (active[q][j]) index[q][j] = unknowns++;
    }
  }

  AgeSolution solution;
  solution.pi.assign(pi.begin(), pi.end());
  solution.v.assign(spec.num_states, std::vector<double>(n, 0.0));
  if (unknowns == 0) return solution;

  std::vector<Triplet> triplets;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(unknowns);
  for (std::size_t q = 0; q < spec.num_states; ++q) {
    for (std::size_t j = 0; j < n; ++j) {
      const Eigen::Index row = index[q][j];
      if (row < 0) continue;
      triplets.emplace_back(row, row, out[q]);
      b(row) = spec.drifts[q][j] * pi[q];
    }
  }
  for (const auto& t : spec.transitions) {
    for (std::size_t r = 0; r < n; ++r) {
      const Eigen::Index col = index[t.from][r];
      if (col < 0) continue;
      for (std::size_t c = 0; c < n; ++c) {
        if (t.reset(r, c) != 0) triplets.emplace_back(index[t.to][c], col, -t.rate);
      }
    }
  }

  SparseMatrix a(unknowns, unknowns);
  a.setFromTriplets(triplets.begin(), triplets.end());
  Eigen::VectorXd x;
  if (!sparse_solve(a, b, x)) {
    throw Error(Errc::UnstableSystem, "correlation equations are singular");
  }

  for (std::size_t q = 0; q < spec.num_states; ++q) {
    for (std::size_t j = 0; j < n; ++j) {
      const Eigen::Index k = index[q][j];
      if (k < 0) continue;
      if (x(k) < kNegativeThreshold) {
        throw Error(Errc::UnstableSystem,
                    "no non-negative solution (v[" + std::to_string(q) + "][" + std::to_string(j) +
                        "] = " + std::to_string(x(k)) + ")");
      }
      solution.v[q][j] = x(k);
    }
  }
  solution.delta = average_age(solution);
  return solution;
}

AgeSolution solve(const ShsSpec& spec) {
  const auto pi = stationary_distribution(spec);
  return solve_age(spec, pi);
}

double average_age(const AgeSolution& solution) {
  double delta = 0.0;
  for (const auto& row : solution.v) {
    if (!row.empty()) delta += row[0];
  }
  return delta;
}

double balance_residual(const ShsSpec& spec, std::span<const double> pi) {
  std::vector<double> net(spec.num_states, 0.0);
  for (const auto& t : spec.transitions) {
    net[t.from] += t.rate * pi[t.from];
    net[t.to] -= t.rate * pi[t.from];
  }
  double worst = 0.0;
  double total = 0.0;
  for (std::size_t q = 0; q < spec.num_states; ++q) {
    worst = std::max(worst, std::abs(net[q]));
    total += pi[q];
  }
  return std::max(worst, std::abs(total - 1.0));
}

double age_residual(const ShsSpec& spec, const AgeSolution& solution) {
  const std::size_t n = spec.age_dim;
  const std::vector<double> out = outgoing_rates(spec);
  std::vector<std::vector<double>> residual(spec.num_states, std::vector<double>(n, 0.0));
  for (std::size_t q = 0; q < spec.num_states; ++q) {
    for (std::size_t j = 0; j < n; ++j) {
      residual[q][j] = out[q] * solution.v[q][j] - spec.drifts[q][j] * solution.pi[q];
    }
  }
  for (const auto& t : spec.transitions) {
    const auto& src = solution.v[t.from];
    for (std::size_t r = 0; r < n; ++r) {
      if (src[r] == 0.0) continue;
      for (std::size_t c = 0; c < n; ++c) {
        if (t.reset(r, c) != 0) residual[t.to][c] -= t.rate * src[r];
      }
    }
  }
  double worst = 0.0;
  for (const auto& row : residual) {
    for (double r : row) worst = std::max(worst, std::abs(r));
  }
  return worst;
}

}  // namespace aoi::shs
