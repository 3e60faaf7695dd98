#pragma once

// Command-line front end for the aoi tool. run() is the whole program; the
// sweep helpers are exposed so tests can inspect the rows directly.
//
// Exit codes: 0 success, 1 domain or solver failure, 2 usage error.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace aoi::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Console format: 10 significant digits.
std::string format_number(double value);

/// CSV format: shortest decimal with at least 10 significant digits that
/// reads back to the same double.
std::string format_csv_number(double value);

/// Evenly spaced grid step, 2*step, ... strictly below `upper`, each value
/// rounded to 12 decimals so that e.g. 3 * 0.1 prints as 0.3.
std::vector<double> open_grid(double step, double upper = 1.0);

struct Fig4Options {
  double mu = 1.0;
  std::vector<double> rho2{0.1, 0.3, 0.5};
  double rho1_step = 0.02;
  std::uint64_t events = 1'000'000;
  double warmup = 0.1;
  std::size_t batches = 30;
  std::uint64_t seed = 1;
  unsigned threads = 0;  // 0: hardware concurrency
};

struct Fig4Row {
  double rho1 = 0.0;
  double rho2 = 0.0;
  double delta1_closed = 0.0;
  double delta1_sim = 0.0;
  double delta1_sim_se = 0.0;
};

struct Fig4Result {
  std::vector<Fig4Row> rows;  // grid order: rho2 outer, rho1 inner
  std::size_t omitted = 0;    // infeasible grid points (rho1 + rho2 >= 1)
};

Fig4Result fig4_rows(const Fig4Options& options);

struct ContourOptions {
  double mu = 1.0;
  std::vector<double> rho_total = open_grid(0.02);
  std::vector<double> split = open_grid(0.1);  // share of the total offered by source 1
};

struct ContourRow {
  double rho1 = 0.0;
  double rho2 = 0.0;
  double delta1 = 0.0;
  double delta2 = 0.0;
  double sum = 0.0;
};

std::vector<ContourRow> contour_rows(const ContourOptions& options);

void write_fig4_csv(std::ostream& os, const std::vector<Fig4Row>& rows);
void write_contour_csv(std::ostream& os, const std::vector<ContourRow>& rows);

/// Derives the seed for sweep point `index` from the base seed.
std::uint64_t point_seed(std::uint64_t base, std::uint64_t index);

/// Parses AOI_SEED; nullopt if unset, throws std::invalid_argument if it is
/// not a decimal 64-bit unsigned integer.
std::optional<std::uint64_t> seed_from_env();

}  // namespace aoi::cli
