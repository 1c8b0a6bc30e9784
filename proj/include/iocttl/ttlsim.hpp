#pragma once

#include <cstdint>
#include <vector>

#include "iocttl/trace.hpp"

namespace iocttl {

// ---------------------------------------------------------------------------
// Policy
// ---------------------------------------------------------------------------

enum class ResetMode { with_reset, without_reset };

// What happens to an evicted IOC when its next sighting arrives.
enum class RearmMode { miss_reactivates, evict_forever };

// Sightings dated before the IOC creation are retrospective log matches.
enum class PreCreationMode { exclude, count_as_miss, count_as_hit };

struct PolicyConfig {
  std::int64_t ttl_days = 0;
  ResetMode reset_mode = ResetMode::with_reset;
  RearmMode rearm_mode = RearmMode::miss_reactivates;
  PreCreationMode pre_creation_mode = PreCreationMode::exclude;
  bool clip_to_window = false;

  // rearm is meaningless without resets; without_reset forces evict_forever
  RearmMode effective_rearm() const {
    return reset_mode == ResetMode::without_reset ? RearmMode::evict_forever
                                                  : rearm_mode;
  }
};

struct IocSimResult {
  std::int64_t n_mon_days = 0;  // union of monitoring windows, clipped if asked
  std::int64_t n_hits = 0;
  std::int64_t n_misses = 0;
  std::int64_t delta_t = 0;  // unclipped monitoring beyond the base TTL

  friend bool operator==(const IocSimResult&, const IocSimResult&) = default;
};

struct SimAggregate {
  std::int64_t n_mon = 0;
  std::int64_t n_miss = 0;
  std::int64_t n_hit = 0;

  friend bool operator==(const SimAggregate&, const SimAggregate&) = default;
};

// Half-open day interval [start, end).
struct DayInterval {
  Day start = 0;
  Day end = 0;

  Day length() const { return end - start; }
  friend bool operator==(const DayInterval&, const DayInterval&) = default;
};

// ---------------------------------------------------------------------------
// Per-IOC kernel
// ---------------------------------------------------------------------------
//
// Monitoring covers the half-open day window [r, r+T), with r starting at the
// creation day. T=1 monitors the reset day only; T=0 never monitors.
// A sighting on day d is a hit iff d falls inside the current window. Under
// with_reset every hit moves r to d; under miss_reactivates a missed sighting
// also moves r to d (the alert re-arms monitoring, the sighting itself stays
// a miss). Same-day bursts share one classification and at most one reset.
// Pre-creation sightings never touch the window dynamics: they are excluded,
// counted as misses, or counted as hits (hit requires T >= 1) per policy.

IocSimResult simulate_ioc(const IocTimeline& timeline,
                          const PolicyConfig& policy, Day window_start = 0,
                          Day window_end = 0);

// The merged monitoring windows the kernel sums over, unclipped.
std::vector<DayInterval> monitored_intervals(const IocTimeline& timeline,
                                             const PolicyConfig& policy);

// ---------------------------------------------------------------------------
// Trace-level aggregation
// ---------------------------------------------------------------------------
//
// Adds T monitoring days for each of the (population - timelines) IOCs that
// never produced a sighting row; those have no creation anchor and are never
// window-clipped. The parallel path partitions timelines across OpenMP
// threads; integer accumulation makes the result identical to the serial
// reference for every schedule.

SimAggregate simulate_trace(const SightingTrace& trace,
                            const PolicyConfig& policy);
SimAggregate simulate_trace_serial(const SightingTrace& trace,
                                   const PolicyConfig& policy);

// ---------------------------------------------------------------------------
// TTL selectors
// ---------------------------------------------------------------------------

enum class BoundMode { creation_to_last, first_to_last };

// Largest observed per-IOC span; a TTL of bound+1 covers every sighting of
// every IOC under half-open windows.
Day deterministic_upper_bound(const SightingTrace& trace, BoundMode mode);

// Smallest sample x with P(sample <= x) >= t; t=1 degenerates to the max.
Day quantile_ttl(std::vector<Day> gap_samples, double t);

enum class PoissonDeltaForm { printed, expected_resets };

// Extra monitoring from resets under a Poisson sighting stream:
//   printed          T * exp(lambda*T) / 2
//   expected_resets  (T/2) * (exp(lambda*T) - 1)
double expected_extra_monitoring_poisson(double lambda_per_day, double ttl_days,
                                         PoissonDeltaForm form);

}  // namespace iocttl
