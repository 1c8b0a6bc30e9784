#pragma once

#include <cstdint>
#include <vector>

#include "iocttl/trace.hpp"

namespace iocttl {

struct Observation {
  double duration = 0.0;
  bool censored = false;
};

// Product-limit estimate. `times` lists every distinct observation time;
// survival only steps down where events occur. With no censoring the CDF
// view reproduces the empirical CDF exactly.
struct SurvivalCurve {
  std::vector<double> times;
  std::vector<double> survival;
  std::vector<std::int64_t> at_risk;
  std::vector<std::int64_t> events;
  bool no_events = false;

  // P(duration <= t) at each step point
  std::vector<double> cdf() const;
  double survival_at(double t) const;
};

SurvivalCurve km_estimate(const std::vector<Observation>& observations);

// Replaces the creation date of every trace-start-censored IOC with its
// first sighting minus the trace duration, so the adjusted time to first
// sighting becomes exactly the trace duration. Censored IOCs with no
// sightings are left alone and counted.
struct AdjustResult {
  SightingTrace trace;
  std::int64_t n_adjusted = 0;
  std::int64_t n_censored_without_sightings = 0;
};

AdjustResult shift_heuristic_adjust(const SightingTrace& trace);

}  // namespace iocttl
