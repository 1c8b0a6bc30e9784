#include "iocttl/ttlsim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace iocttl {

namespace {

struct WindowWalk {
  std::int64_t hits = 0;
  std::int64_t misses = 0;
  std::int64_t unclipped = 0;
  std::int64_t clipped = 0;
};

// Walks the reset sequence once and merges the windows on the fly. Window
// starts are nondecreasing (resets only move to later sighting days), so a
// streaming merge is enough.
template <typename EmitInterval>
WindowWalk walk_windows(const IocTimeline& tl, const PolicyConfig& policy,
                        Day clip_lo, Day clip_hi, EmitInterval&& emit) {
  WindowWalk w;
  const std::int64_t T = policy.ttl_days;
  const RearmMode rearm = policy.effective_rearm();

  std::size_t i = 0;
  // pre-creation sightings: accounting only, no window effects
  for (; i < tl.sighting_days.size() && tl.sighting_days[i] < tl.creation_day;
       ++i) {
    const std::int64_t m = tl.day_multiplicity[i];
    switch (policy.pre_creation_mode) {
      case PreCreationMode::exclude:
        break;
      case PreCreationMode::count_as_miss:
        w.misses += m;
        break;
      case PreCreationMode::count_as_hit:
        // as if sighted on the creation day, which is monitored iff T >= 1
        (T >= 1 ? w.hits : w.misses) += m;
        break;
    }
  }

  if (T == 0) {
    for (; i < tl.sighting_days.size(); ++i) w.misses += tl.day_multiplicity[i];
    return w;
  }

  Day r = tl.creation_day;          // current window start
  Day merged_lo = tl.creation_day;  // merged run of overlapping windows
  Day merged_hi = tl.creation_day + T;
  auto flush = [&](Day lo, Day hi) {
    w.unclipped += hi - lo;
    const Day a = std::max(lo, clip_lo);
    const Day b = std::min(hi, clip_hi);
    if (b > a) w.clipped += b - a;
    emit(DayInterval{lo, hi});
  };

  for (; i < tl.sighting_days.size(); ++i) {
    const Day d = tl.sighting_days[i];
    const std::int64_t m = tl.day_multiplicity[i];
    const bool in_window = d < r + T;  // d >= r always holds
    bool rearm_window = false;
    if (in_window) {
      w.hits += m;
      rearm_window = policy.reset_mode == ResetMode::with_reset;
    } else {
      w.misses += m;
      rearm_window = rearm == RearmMode::miss_reactivates;
    }
    if (rearm_window && d != r) {
      if (d <= merged_hi) {
        merged_hi = d + T;
      } else {
        flush(merged_lo, merged_hi);
        merged_lo = d;
        merged_hi = d + T;
      }
      r = d;
    }
  }
  flush(merged_lo, merged_hi);
  return w;
}

SimAggregate accumulate(const SightingTrace& trace, const PolicyConfig& policy,
                        bool parallel) {
  if (trace.total_ioc_population <= 0)
    throw DataError("cannot simulate an empty trace");

  const auto n = trace.timelines.size();
  std::int64_t mon = 0, hit = 0, miss = 0;

  if (parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static) reduction(+ : mon, hit, miss)
    for (std::size_t idx = 0; idx < n; ++idx) {
      const IocSimResult r = simulate_ioc(trace.timelines[idx], policy,
                                          trace.window_start, trace.window_end);
      mon += r.n_mon_days;
      hit += r.n_hits;
      miss += r.n_misses;
    }
#else
    parallel = false;
#endif
  }
  if (!parallel) {
    for (std::size_t idx = 0; idx < n; ++idx) {
      const IocSimResult r = simulate_ioc(trace.timelines[idx], policy,
                                          trace.window_start, trace.window_end);
      mon += r.n_mon_days;
      hit += r.n_hits;
      miss += r.n_misses;
    }
  }

  // IOCs with no sightings at all each cost exactly T monitoring days
  const std::int64_t unseen =
      trace.total_ioc_population - static_cast<std::int64_t>(n);
  mon += policy.ttl_days * unseen;

  return SimAggregate{mon, miss, hit};
}

}  // namespace

IocSimResult simulate_ioc(const IocTimeline& timeline,
                          const PolicyConfig& policy, Day window_start,
                          Day window_end) {
  if (policy.ttl_days < 0) throw DataError("ttl_days must be nonnegative");

  const Day clip_lo = policy.clip_to_window
                          ? window_start
                          : std::numeric_limits<Day>::min() / 4;
  const Day clip_hi = policy.clip_to_window
                          ? window_end + 1
                          : std::numeric_limits<Day>::max() / 4;

  const WindowWalk w = walk_windows(timeline, policy, clip_lo, clip_hi,
                                    [](const DayInterval&) {});
  IocSimResult res;
  res.n_hits = w.hits;
  res.n_misses = w.misses;
  res.n_mon_days = policy.clip_to_window ? w.clipped : w.unclipped;
  res.delta_t = policy.ttl_days == 0 ? 0 : w.unclipped - policy.ttl_days;
  return res;
}

std::vector<DayInterval> monitored_intervals(const IocTimeline& timeline,
                                             const PolicyConfig& policy) {
  if (policy.ttl_days < 0) throw DataError("ttl_days must be nonnegative");
  std::vector<DayInterval> intervals;
  if (policy.ttl_days == 0) return intervals;
  walk_windows(timeline, policy, std::numeric_limits<Day>::min() / 4,
               std::numeric_limits<Day>::max() / 4,
               [&](const DayInterval& iv) { intervals.push_back(iv); });
  return intervals;
}

SimAggregate simulate_trace(const SightingTrace& trace,
                            const PolicyConfig& policy) {
  return accumulate(trace, policy, true);
}

SimAggregate simulate_trace_serial(const SightingTrace& trace,
                                   const PolicyConfig& policy) {
  return accumulate(trace, policy, false);
}

Day deterministic_upper_bound(const SightingTrace& trace, BoundMode mode) {
  bool any = false;
  Day best = 0;
  for (const auto& tl : trace.timelines) {
    if (!tl.has_sightings()) continue;
    const Day span = mode == BoundMode::creation_to_last
                         ? tl.last_sighting_day() - tl.creation_day
                         : tl.last_sighting_day() - tl.first_sighting_day();
    best = any ? std::max(best, span) : span;
    any = true;
  }
  if (!any)
    throw DataError("deterministic bound needs at least one sighting");
  return std::max<Day>(best, 0);
}

Day quantile_ttl(std::vector<Day> gap_samples, double t) {
  if (gap_samples.empty())
    throw DataError("quantile TTL needs a nonempty sample set");
  if (t < 0.0 || t > 1.0)
    throw DataError("target hit ratio must lie in [0, 1]");
  std::sort(gap_samples.begin(), gap_samples.end());
  const auto n = gap_samples.size();
  for (std::size_t i = 0; i < n; ++i) {
    // advance to the last duplicate so the counted fraction is P(X <= x)
    if (i + 1 < n && gap_samples[i + 1] == gap_samples[i]) continue;
    if (static_cast<double>(i + 1) >= t * static_cast<double>(n))
      return gap_samples[i];
  }
  return gap_samples.back();
}

double expected_extra_monitoring_poisson(double lambda_per_day,
                                         double ttl_days,
                                         PoissonDeltaForm form) {
  if (lambda_per_day < 0.0 || ttl_days < 0.0)
    throw DataError("rate and TTL must be nonnegative");
  const double grow = std::exp(lambda_per_day * ttl_days);
  if (form == PoissonDeltaForm::printed) return ttl_days * grow / 2.0;
  return ttl_days / 2.0 * (grow - 1.0);
}

}  // namespace iocttl
