#pragma once

// Event-driven simulation of N Poisson update sources sharing one FCFS
// exponential server, with either an unbounded FIFO or a blocking buffer
// of capacity m (arrivals that find m updates in system are discarded).
//
// Random numbers: std::mt19937_64 seeded with SimConfig::seed. A uniform
// U in [0, 1) is formed from the top 53 bits of one draw, exponential
// variates are -log1p(-U) / rate, and the arriving source is chosen by
// comparing a second uniform against the cumulative rate shares. Runs are
// bit-reproducible for a given (config, build).

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

namespace aoi::sim {

inline constexpr std::uint64_t kMinEvents = 10'000;

struct SimConfig {
  double mu = 1.0;
  std::vector<double> lambdas;          // per-source arrival rates
  std::optional<std::size_t> buffer;    // nullopt: unbounded queue
  std::uint64_t num_events = 1'000'000;  // departures to simulate, warmup included
  double warmup_fraction = 0.1;
  std::uint64_t seed = 1;
  std::size_t batches = 30;

  /// Throws DegenerateConfig on malformed settings and UnstableLoad for an
  /// unbounded queue with total load >= 1.
  void validate() const;
};

struct AgeEstimate {
  std::vector<double> mean_age;   // per source, time-average after warmup
  std::vector<double> std_error;  // batch-means standard error
  double horizon = 0.0;           // measured simulated time
  std::uint64_t events = 0;       // departures processed, warmup included
  std::uint64_t blocked = 0;      // arrivals discarded at a full buffer

  // occupancy[k]: fraction of measured time with k updates in system.
  std::vector<double> occupancy;
  std::vector<double> occupancy_se;

  // Little's law ingredients, all over the measured interval.
  double mean_in_system = 0.0;     // time-average number in system
  double mean_in_system_se = 0.0;
  double throughput = 0.0;         // departures per unit time
  double mean_system_time = 0.0;   // average sojourn of departed updates
  // Batch means of (number in system) - (departures x sojourn) / time.
  double little_gap = 0.0;
  double little_gap_se = 0.0;
};

/// Delivery seen by an observer: the update of `source` generated at
/// `generated` reaches the monitor at `delivered`.
struct Delivery {
  std::size_t source = 0;
  double generated = 0.0;
  double delivered = 0.0;
};
using DeliveryObserver = std::function<void(const Delivery&)>;

/// Seedable uniform and exponential variates, see the header comment.
class VariateSource {
 public:
  explicit VariateSource(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double exponential(double rate);

 private:
  std::mt19937_64 engine_;
};

/// Runs one replication. Every source starts with a delivered update of
/// age 0 at t = 0; statistics cover departures after the warmup fraction.
AgeEstimate simulate(const SimConfig& config, const DeliveryObserver& observer = {});

/// Time-weighted occupancy distribution of a blocking system (k = 0..m).
/// Throws DegenerateConfig for an unbounded buffer.
std::vector<double> simulate_blocking_occupancy(const SimConfig& config);

}  // namespace aoi::sim
