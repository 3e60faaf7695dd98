#include "aoi/queue_sim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <string>

#include "aoi/error.hpp"

namespace aoi::sim {

namespace {

struct Pending {
  double generated;
  std::size_t source;
};

// Accumulators over one batch of departures.
struct Batch {
  double time = 0.0;
  std::vector<double> age_area;
  std::vector<double> occupancy_time;
  double number_area = 0.0;
  double sojourn = 0.0;
};

struct MeanAndError {
  double mean = 0.0;
  double se = 0.0;
};

MeanAndError batch_mean(const std::vector<double>& values) {
  const auto b = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / b;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (b - 1.0) / b)};
}

}  // namespace

double VariateSource::exponential(double rate) { return -std::log1p(-uniform()) / rate; }

void SimConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(Errc::DegenerateConfig, what); };
  if (!(mu > 0.0) || !std::isfinite(mu)) fail("service rate must be positive");
  if (lambdas.empty()) fail("at least one source is required");
  for (double l : lambdas) {
    if (!(l > 0.0) || !std::isfinite(l)) fail("every arrival rate must be positive");
  }
  if (num_events < kMinEvents) fail("at least " + std::to_string(kMinEvents) + " events are required");
  if (!(warmup_fraction >= 0.0 && warmup_fraction < 1.0)) fail("warmup fraction must lie in [0, 1)");
  if (batches < 2) fail("at least two batches are required");
  if (buffer && *buffer < 1) fail("buffer capacity must be at least 1");
  const auto warmup = static_cast<std::uint64_t>(std::floor(warmup_fraction * static_cast<double>(num_events)));
  if (num_events - warmup < batches) fail("fewer measured departures than batches");

  if (!buffer) {
    const double rho = std::accumulate(lambdas.begin(), lambdas.end(), 0.0) / mu;
    if (rho >= 1.0) {
      throw Error(Errc::UnstableLoad, "unbounded queue with load " + std::to_string(rho));
    }
  }
}

AgeEstimate simulate(const SimConfig& config, const DeliveryObserver& observer) {
  config.validate();
  const std::size_t sources = config.lambdas.size();
  const double lambda = std::accumulate(config.lambdas.begin(), config.lambdas.end(), 0.0);
  std::vector<double> cumulative_share(sources);
  {
    double acc = 0.0;
    for (std::size_t i = 0; i < sources; ++i) {
      acc += config.lambdas[i];
      cumulative_share[i] = acc / lambda;
    }
    cumulative_share.back() = 1.0;
  }

  const auto warmup =
      static_cast<std::uint64_t>(std::floor(config.warmup_fraction * static_cast<double>(config.num_events)));
  const std::uint64_t measured = config.num_events - warmup;
  const std::uint64_t batch_size = measured / config.batches;

  VariateSource rng(config.seed);
  std::deque<Pending> queue;
  std::vector<double> last_generated(sources, 0.0);  // u_i(t)
  double now = 0.0;
  double next_arrival = rng.exponential(lambda);
  double next_departure = std::numeric_limits<double>::infinity();
  std::uint64_t departures = 0;
  std::uint64_t blocked = 0;
  bool measuring = warmup == 0;

  std::vector<Batch> closed;
  closed.reserve(config.batches);
  auto fresh_batch = [&] {
    Batch b;
    b.age_area.assign(sources, 0.0);
    b.occupancy_time.assign(config.buffer ? *config.buffer + 1 : 1, 0.0);
    return b;
  };
  Batch current = fresh_batch();

  auto advance = [&](double to) {
    if (measuring) {
      const double dt = to - now;
      for (std::size_t i = 0; i < sources; ++i) {
        current.age_area[i] += dt * 0.5 * ((now - last_generated[i]) + (to - last_generated[i]));
      }
      const std::size_t n = queue.size();
      if (n >= current.occupancy_time.size()) current.occupancy_time.resize(n + 1, 0.0);
      current.occupancy_time[n] += dt;
      current.number_area += static_cast<double>(n) * dt;
      current.time += dt;
    }
    now = to;
  };

  while (departures < config.num_events) {
    if (next_arrival < next_departure) {
      advance(next_arrival);
      std::size_t source = 0;
      if (sources > 1) {
        const double u = rng.uniform();
        source = static_cast<std::size_t>(
            std::upper_bound(cumulative_share.begin(), cumulative_share.end(), u) - cumulative_share.begin());
        source = std::min(source, sources - 1);
      }
      if (config.buffer && queue.size() >= *config.buffer) {
        ++blocked;
      } else {
        queue.push_back({now, source});
        if (queue.size() == 1) next_departure = now + rng.exponential(config.mu);
      }
      next_arrival = now + rng.exponential(lambda);
      continue;
    }

    advance(next_departure);
    const Pending done = queue.front();
    queue.pop_front();
    last_generated[done.source] = done.generated;
    ++departures;
    if (measuring) current.sojourn += now - done.generated;
    if (observer) observer(Delivery{done.source, done.generated, now});
    next_departure = queue.empty() ? std::numeric_limits<double>::infinity()
                                   : now + rng.exponential(config.mu);

    if (!measuring) {
      measuring = departures == warmup;
      continue;
    }
    const std::uint64_t in_batch = departures - warmup;
    const bool last = closed.size() + 1 == config.batches;
    if ((!last && in_batch == (closed.size() + 1) * batch_size) || departures == config.num_events) {
      closed.push_back(std::move(current));
      current = fresh_batch();
    }
  }

  AgeEstimate est;
  est.events = departures;
  est.blocked = blocked;

  std::size_t states = 0;
  for (const auto& b : closed) {
    est.horizon += b.time;
    states = std::max(states, b.occupancy_time.size());
  }

  std::vector<double> per_batch(closed.size());
  auto summarize = [&](auto&& value_of) {
    for (std::size_t b = 0; b < closed.size(); ++b) per_batch[b] = value_of(closed[b]);
    return batch_mean(per_batch);
  };

  est.mean_age.resize(sources);
  est.std_error.resize(sources);
  for (std::size_t i = 0; i < sources; ++i) {
    double area = 0.0;
    for (const auto& b : closed) area += b.age_area[i];
    est.mean_age[i] = area / est.horizon;
    est.std_error[i] = summarize([i](const Batch& b) { return b.age_area[i] / b.time; }).se;
  }

  est.occupancy.assign(states, 0.0);
  est.occupancy_se.assign(states, 0.0);
  for (std::size_t k = 0; k < states; ++k) {
    auto share = [k](const Batch& b) {
      return k < b.occupancy_time.size() ? b.occupancy_time[k] / b.time : 0.0;
    };
    double total = 0.0;
    for (const auto& b : closed) total += k < b.occupancy_time.size() ? b.occupancy_time[k] : 0.0;
    est.occupancy[k] = total / est.horizon;
    est.occupancy_se[k] = summarize(share).se;
  }

  double number_area = 0.0;
  double sojourn = 0.0;
  for (const auto& b : closed) {
    number_area += b.number_area;
    sojourn += b.sojourn;
  }
  est.mean_in_system = number_area / est.horizon;
  est.mean_in_system_se = summarize([](const Batch& b) { return b.number_area / b.time; }).se;
  est.throughput = static_cast<double>(measured) / est.horizon;
  est.mean_system_time = sojourn / static_cast<double>(measured);
  const auto gap = summarize([](const Batch& b) { return (b.number_area - b.sojourn) / b.time; });
  est.little_gap = gap.mean;
  est.little_gap_se = gap.se;
  return est;
}

std::vector<double> simulate_blocking_occupancy(const SimConfig& config) {
  if (!config.buffer) {
    throw Error(Errc::DegenerateConfig, "occupancy of the blocking system needs a finite buffer");
  }
  auto occupancy = simulate(config).occupancy;
  occupancy.resize(*config.buffer + 1, 0.0);
  return occupancy;
}

}  // namespace aoi::sim
