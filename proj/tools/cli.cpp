#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <system_error>
#include <thread>

#include "aoi/closed_form.hpp"
#include "aoi/error.hpp"
#include "aoi/mm1_model.hpp"
#include "aoi/queue_sim.hpp"

namespace aoi::cli {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

double round12(double x) { return std::round(x * 1e12) / 1e12; }

std::uint64_t to_event_count(double events) {
  if (!(events >= 1.0) || events != std::floor(events) || events > 1e18) {
    throw UsageError("--events must be a positive integer (e.g. 1e7)");
  }
  return static_cast<std::uint64_t>(events);
}

// Evaluates fn(0..n-1) on up to `threads` workers; fn writes to its own slot.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  {
    std::vector<std::jthread> workers;
    workers.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < n && !failed; i = next++) {
          try {
            fn(i);
          } catch (...) {
            if (!failed.exchange(true)) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

std::ostream& open_output(const std::string& path, std::ofstream& file, std::ostream& fallback) {
  if (path.empty() || path == "-") return fallback;
  file.open(path, std::ios::out | std::ios::trunc);
  if (!file) throw std::runtime_error("cannot open " + path + " for writing");
  return file;
}

void apply_env_seed(std::uint64_t& seed) {
  try {
    if (auto env = seed_from_env()) seed = *env;
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

// ---- age -------------------------------------------------------------------

struct AgeArgs {
  double mu = 1.0;
  std::vector<double> loads;
  std::size_t source = 1;
  bool all = false;
};

void cmd_age(const AgeArgs& a, std::ostream& out) {
  if (a.source < 1 || a.source > a.loads.size()) {
    throw UsageError("--source must lie in 1.." + std::to_string(a.loads.size()));
  }
  const double total = std::accumulate(a.loads.begin(), a.loads.end(), 0.0);
  auto age_of = [&](std::size_t i) {
    return closed_form::average_age_source(a.mu, a.loads[i], total - a.loads[i]);
  };
  if (!a.all) {
    out << format_number(age_of(a.source - 1)) << '\n';
    return;
  }
  out << "source,load,delta\n";
  for (std::size_t i = 0; i < a.loads.size(); ++i) {
    out << (i + 1) << ',' << format_number(a.loads[i]) << ',' << format_number(age_of(i)) << '\n';
  }
}

// ---- solve -----------------------------------------------------------------

struct SolveArgs {
  double mu = 1.0;
  double rho_i = 0.0;
  double rho_other = 0.0;
  std::size_t m = 0;
  std::string engine = "recursive";
};

void cmd_solve(const SolveArgs& a, std::ostream& out) {
  mm1::Mm1Params p{a.mu, a.rho_i, a.rho_other, a.m};
  if (a.engine == "generic") {
    if (a.m > mm1::kMaxGenericBuffer) {
      throw UsageError("the generic engine is limited to m <= " + std::to_string(mm1::kMaxGenericBuffer) +
                       "; use --engine recursive");
    }
    out << format_number(mm1::age_blocking(p)) << '\n';
  } else {
    out << format_number(mm1::age_blocking_recursive(p)) << '\n';
  }
}

// ---- sim -------------------------------------------------------------------

struct SimArgs {
  double mu = 1.0;
  std::vector<double> lambdas;
  std::size_t buffer = 0;
  double events = 1e6;
  double warmup = 0.1;
  std::size_t batches = 30;
  std::uint64_t seed = 1;
  std::string csv;
};

void cmd_sim(SimArgs a, std::ostream& out) {
  apply_env_seed(a.seed);
  sim::SimConfig config;
  config.mu = a.mu;
  config.lambdas = a.lambdas;
  if (a.buffer > 0) config.buffer = a.buffer;
  config.num_events = to_event_count(a.events);
  config.warmup_fraction = a.warmup;
  config.batches = a.batches;
  config.seed = a.seed;

  const auto est = sim::simulate(config);
  for (std::size_t i = 0; i < est.mean_age.size(); ++i) {
    out << "source " << (i + 1) << ": " << format_number(est.mean_age[i]) << " +/- "
        << format_number(est.std_error[i]) << '\n';
  }
  out << "events: " << est.events << ", measured time: " << format_number(est.horizon) << '\n';

  if (!a.csv.empty()) {
    std::ofstream file;
    std::ostream& os = open_output(a.csv, file, out);
    os << "source,lambda,mean_age,std_error\n";
    for (std::size_t i = 0; i < est.mean_age.size(); ++i) {
      os << (i + 1) << ',' << format_csv_number(a.lambdas[i]) << ',' << format_csv_number(est.mean_age[i]) << ','
         << format_csv_number(est.std_error[i]) << '\n';
    }
  }
}

// ---- fig4 / contour --------------------------------------------------------

struct Fig4Args {
  Fig4Options options;
  double events = 1e6;
  std::string out;
};

void cmd_fig4(Fig4Args a, std::ostream& out, std::ostream& err) {
  apply_env_seed(a.options.seed);
  a.options.events = to_event_count(a.events);
  if (!(a.options.rho1_step > 0.0 && a.options.rho1_step < 1.0)) {
    throw UsageError("--rho1-step must lie in (0, 1)");
  }
  for (double r : a.options.rho2) {
    if (!(r >= 0.0 && r < 1.0)) throw UsageError("--rho2 values must lie in [0, 1)");
  }
  const auto result = fig4_rows(a.options);
  if (result.omitted > 0) err << "omitted " << result.omitted << " infeasible grid points\n";
  std::ofstream file;
  write_fig4_csv(open_output(a.out, file, out), result.rows);
}

struct ContourArgs {
  ContourOptions options;
  std::string out;
};

void cmd_contour(const ContourArgs& a, std::ostream& out) {
  for (double r : a.options.rho_total) {
    if (!(r > 0.0 && r < 1.0)) throw UsageError("--rho-total values must lie in (0, 1)");
  }
  for (double s : a.options.split) {
    if (!(s > 0.0 && s < 1.0)) throw UsageError("--split values must lie in (0, 1)");
  }
  std::ofstream file;
  write_contour_csv(open_output(a.out, file, out), contour_rows(a.options));
}

}  // namespace

std::string format_number(double value) {
  if (!std::isfinite(value)) return std::isnan(value) ? "nan" : (value > 0 ? "inf" : "-inf");
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 10);
  return std::string(buf, res.ptr);
}

std::string format_csv_number(double value) {
  if (!std::isfinite(value)) return format_number(value);
  char buf[64];
  for (int precision = 10; precision <= 17; ++precision) {
    const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, precision);
    double back = 0.0;
    std::from_chars(buf, res.ptr, back);
    if (back == value || precision == 17) return std::string(buf, res.ptr);
  }
  return {};
}

std::vector<double> open_grid(double step, double upper) {
  std::vector<double> grid;
  for (int k = 1;; ++k) {
    const double x = round12(k * step);
    if (x >= upper - 1e-12) break;
    grid.push_back(x);
  }
  return grid;
}

std::uint64_t point_seed(std::uint64_t base, std::uint64_t index) {
  // splitmix64 finalizer over base + index.
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::optional<std::uint64_t> seed_from_env() {
  const char* raw = std::getenv("AOI_SEED");
  if (raw == nullptr) return std::nullopt;
  const std::string text(raw);
  std::uint64_t seed = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), seed);
  if (text.empty() || res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw std::invalid_argument("AOI_SEED must be a decimal 64-bit unsigned integer, got '" + text + "'");
  }
  return seed;
}

Fig4Result fig4_rows(const Fig4Options& options) {
  Fig4Result result;
  for (double rho2 : options.rho2) {
    for (double rho1 : open_grid(options.rho1_step)) {
      if (rho1 + rho2 >= 1.0) {
        ++result.omitted;
        continue;
      }
      result.rows.push_back({rho1, rho2, 0.0, 0.0, 0.0});
    }
  }

  parallel_for(result.rows.size(), options.threads, [&](std::size_t r) {
    Fig4Row& row = result.rows[r];
    row.delta1_closed = closed_form::average_age_source(options.mu, row.rho1, row.rho2);

    sim::SimConfig config;
    config.mu = options.mu;
    config.lambdas = {row.rho1 * options.mu};
    if (row.rho2 > 0.0) config.lambdas.push_back(row.rho2 * options.mu);
    config.num_events = options.events;
    config.warmup_fraction = options.warmup;
    config.batches = options.batches;
    config.seed = point_seed(options.seed, r);
    const auto est = sim::simulate(config);
    row.delta1_sim = est.mean_age[0];
    row.delta1_sim_se = est.std_error[0];
  });
  return result;
}

std::vector<ContourRow> contour_rows(const ContourOptions& options) {
  std::vector<ContourRow> rows;
  rows.reserve(options.rho_total.size() * options.split.size());
  for (double total : options.rho_total) {
    for (double share : options.split) {
      ContourRow row;
      row.rho1 = round12(share * total);
      row.rho2 = round12(total - row.rho1);
      row.delta1 = closed_form::average_age_source(options.mu, row.rho1, row.rho2);
      row.delta2 = closed_form::average_age_source(options.mu, row.rho2, row.rho1);
      row.sum = row.delta1 + row.delta2;
      rows.push_back(row);
    }
  }
  return rows;
}

void write_fig4_csv(std::ostream& os, const std::vector<Fig4Row>& rows) {
  os << "rho1,rho2,delta1_closed,delta1_sim,delta1_sim_se\n";
  for (const auto& r : rows) {
    os << format_csv_number(r.rho1) << ',' << format_csv_number(r.rho2) << ',' << format_csv_number(r.delta1_closed) << ','
       << format_csv_number(r.delta1_sim) << ',' << format_csv_number(r.delta1_sim_se) << '\n';
  }
}

void write_contour_csv(std::ostream& os, const std::vector<ContourRow>& rows) {
  os << "rho1,rho2,delta1,delta2,sum\n";
  for (const auto& r : rows) {
    os << format_csv_number(r.rho1) << ',' << format_csv_number(r.rho2) << ',' << format_csv_number(r.delta1) << ','
       << format_csv_number(r.delta2) << ',' << format_csv_number(r.sum) << '\n';
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Average age of information for Poisson sources sharing an FCFS M/M/1 queue", "aoi"};
  app.require_subcommand(1);

  AgeArgs age;
  auto* age_cmd = app.add_subcommand("age", "Closed-form average age of each source");
  age_cmd->add_option("--mu", age.mu, "Service rate")->capture_default_str();
  age_cmd->add_option("--loads", age.loads, "Comma-separated offered loads rho_1,...,rho_N")
      ->required()
      ->delimiter(',');
  age_cmd->add_option("--source", age.source, "1-based index of the focal source")->capture_default_str();
  age_cmd->add_flag("--all", age.all, "Print every source");

  SolveArgs solve;
  auto* solve_cmd = app.add_subcommand("solve", "Average age in the M/M/1/m blocking system");
  solve_cmd->add_option("--mu", solve.mu, "Service rate")->capture_default_str();
  solve_cmd->add_option("--rho-i", solve.rho_i, "Load of the focal source")->required();
  solve_cmd->add_option("--rho-other", solve.rho_other, "Load of all other sources")->capture_default_str();
  solve_cmd->add_option("--m", solve.m, "System capacity")->required()->check(CLI::PositiveNumber);
  solve_cmd->add_option("--engine", solve.engine, "generic | recursive")
      ->check(CLI::IsMember({"generic", "recursive"}))
      ->capture_default_str();

  SimArgs simargs;
  auto* sim_cmd = app.add_subcommand("sim", "Discrete-event simulation of the shared FCFS queue");
  sim_cmd->add_option("--mu", simargs.mu, "Service rate")->capture_default_str();
  sim_cmd->add_option("--lambdas", simargs.lambdas, "Comma-separated arrival rates")->required()->delimiter(',');
  sim_cmd->add_option("--buffer", simargs.buffer, "System capacity m (0 or absent: unbounded)");
  sim_cmd->add_option("--events", simargs.events, "Departures to simulate, warmup included")
      ->capture_default_str();
  sim_cmd->add_option("--warmup", simargs.warmup, "Fraction of departures discarded")->capture_default_str();
  sim_cmd->add_option("--batches", simargs.batches, "Batches for batch-means errors")->capture_default_str();
  sim_cmd->add_option("--seed", simargs.seed, "Generator seed (AOI_SEED overrides)")->capture_default_str();
  sim_cmd->add_option("--csv", simargs.csv, "Write one row per source to this file");

  Fig4Args fig4;
  auto* fig4_cmd = app.add_subcommand("fig4", "CSV of source-1 age vs rho1: closed form and simulation");
  fig4_cmd->add_option("--mu", fig4.options.mu, "Service rate")->capture_default_str();
  fig4_cmd->add_option("--rho2", fig4.options.rho2, "Comma-separated loads of source 2")->delimiter(',');
  fig4_cmd->add_option("--rho1-step", fig4.options.rho1_step, "Spacing of the rho1 grid")->capture_default_str();
  fig4_cmd->add_option("--events", fig4.events, "Departures per simulated point")->capture_default_str();
  fig4_cmd->add_option("--warmup", fig4.options.warmup, "Fraction of departures discarded")->capture_default_str();
  fig4_cmd->add_option("--batches", fig4.options.batches, "Batches for batch-means errors")->capture_default_str();
  fig4_cmd->add_option("--seed", fig4.options.seed, "Base seed (AOI_SEED overrides)")->capture_default_str();
  fig4_cmd->add_option("--threads", fig4.options.threads, "Worker threads (0: all cores)")->capture_default_str();
  fig4_cmd->add_option("--out", fig4.out, "Output file (default: stdout)");

  ContourArgs contour;
  auto* contour_cmd = app.add_subcommand("contour", "CSV of both sources' ages over total load and split");
  contour_cmd->add_option("--mu", contour.options.mu, "Service rate")->capture_default_str();
  contour_cmd->add_option("--rho-total", contour.options.rho_total, "Comma-separated total loads")
      ->delimiter(',');
  contour_cmd->add_option("--split", contour.options.split, "Comma-separated shares of source 1")
      ->delimiter(',');
  contour_cmd->add_option("--out", contour.out, "Output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == static_cast<int>(CLI::ExitCodes::Success) ? kExitOk : kExitUsage;
  }

  try {
    if (*age_cmd) cmd_age(age, out);
    else if (*solve_cmd) cmd_solve(solve, out);
    else if (*sim_cmd) cmd_sim(simargs, out);
    else if (*fig4_cmd) cmd_fig4(fig4, out, err);
    else if (*contour_cmd) cmd_contour(contour, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace aoi::cli
