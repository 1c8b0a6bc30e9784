#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "iocttl/trace.hpp"
#include "iocttl/ttlsim.hpp"

namespace iocttl {

// ---------------------------------------------------------------------------
// Cost model
// ---------------------------------------------------------------------------

struct CostParams {
  double c_mon = 1.0;   // per monitored IOC per day
  double c_miss = 1.0;  // per missed sighting

  double ratio() const { return c_mon / c_miss; }
};

// Exact nonnegative rational, used for threshold ratios so boundary cases
// stay decidable. Comparison cross-multiplies in 128-bit.
struct Ratio {
  std::int64_t num = 0;
  std::int64_t den = 1;

  double value() const {
    return static_cast<double>(num) / static_cast<double>(den);
  }
  // Table-style "1:n" rendering of the reciprocal, comma-grouped.
  std::string one_to_string() const;

  friend bool operator<(const Ratio& a, const Ratio& b) {
    return static_cast<__int128>(a.num) * b.den <
           static_cast<__int128>(b.num) * a.den;
  }
  friend bool operator==(const Ratio& a, const Ratio& b) {
    return static_cast<__int128>(a.num) * b.den ==
           static_cast<__int128>(b.num) * a.den;
  }
};

// Sampled g(T) = N_mon and h(T) = N_miss over an ascending TTL grid.
struct SweepCurves {
  std::vector<std::int64_t> t_grid;
  std::vector<std::int64_t> g;  // nondecreasing
  std::vector<std::int64_t> h;  // nonincreasing
  PolicyConfig policy;          // ttl_days field unused
  std::int64_t population = 0;

  std::int64_t t_max() const { return t_grid.back(); }
  std::size_t size() const { return t_grid.size(); }
};

struct ThresholdPair {
  Ratio r_lower;              // below: always monitor (T* = t_max)
  Ratio r_upper;              // at or above: never monitor (T* = 0)
  std::int64_t t_max = 0;
  bool degenerate = false;    // constant h: monitoring never pays
};

struct ThresholdEstimate {
  double r_lower = 0.0;
  double r_upper = 0.0;
  std::int64_t t_max = 0;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

// One simulate_trace per grid point. Grid must be ascending with >= 2 points;
// starting at 0 keeps the threshold programs applicable. Grid points fan out
// across OpenMP threads; each point is summed serially, so results do not
// depend on the partitioning.
SweepCurves sweep(const SightingTrace& trace, const PolicyConfig& base_policy,
                  const std::vector<std::int64_t>& t_grid);
SweepCurves sweep_serial(const SightingTrace& trace,
                         const PolicyConfig& base_policy,
                         const std::vector<std::int64_t>& t_grid);

std::vector<std::int64_t> default_grid(std::int64_t t_max, std::int64_t step);

std::vector<double> total_cost(const SweepCurves& curves,
                               const CostParams& params);

// Grid point minimizing R*g + h; ties go to the smallest T.
std::int64_t optimal_ttl(const SweepCurves& curves, double ratio);
inline std::int64_t optimal_ttl(const SweepCurves& curves,
                                const CostParams& params) {
  return optimal_ttl(curves, params.ratio());
}

// Closed-form regime bounds over the grid:
//   r_upper = max over T with g(T)>0 of (h(0) - h(T)) / g(T)
//   r_lower = min over T != t_max with g(t_max) > g(T) of
//             (h(T) - h(t_max)) / (g(t_max) - g(T))
// For R >= r_upper the optimum is T=0; for R < r_lower it is t_max.
ThresholdPair thresholds(const SweepCurves& curves);

// Cuts the grid at the first point reaching the final miss count. Beyond
// that point larger TTLs only add monitoring, so the always-monitor regime
// would never materialize (r_lower = 0). Constant-h curves pass unchanged.
SweepCurves trim_to_coverage(const SweepCurves& curves);

// Verification oracle: scans optimal_ttl over a ratio grid. Errors if a
// transition falls outside the grid, telling the caller to widen it.
ThresholdEstimate brute_force_thresholds(const SweepCurves& curves,
                                         const std::vector<double>& r_grid);

std::vector<double> log_spaced(double lo, double hi, std::size_t n);

// Back-of-the-envelope bounds from summary statistics alone:
//   r_upper ~ n_sightings / (n_iocs_total * duration)
//   r_lower ~ 1 / n_iocs_total
struct BallparkThresholds {
  Ratio r_lower;
  Ratio r_upper;
};

BallparkThresholds ballpark_thresholds(const SummaryStats& stats);

}  // namespace iocttl
