#include "iocttl/costopt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace iocttl {

namespace {

void validate_curves(const SweepCurves& curves) {
  if (curves.size() < 2 || curves.g.size() != curves.size() ||
      curves.h.size() != curves.size())
    throw DataError("sweep curves need matching g/h over >= 2 grid points");
  for (std::size_t j = 1; j < curves.size(); ++j) {
    if (curves.t_grid[j] <= curves.t_grid[j - 1])
      throw DataError("sweep grid must be strictly ascending");
    if (curves.g[j] < curves.g[j - 1])
      throw DataError("g(T) must be nondecreasing");
    if (curves.h[j] > curves.h[j - 1])
      throw DataError("h(T) must be nonincreasing");
  }
}

SweepCurves run_sweep(const SightingTrace& trace,
                      const PolicyConfig& base_policy,
                      const std::vector<std::int64_t>& t_grid,
                      bool use_threads) {
  if (t_grid.size() < 2)
    throw DataError("sweep grid needs at least 2 TTL values");
  for (std::size_t j = 0; j < t_grid.size(); ++j) {
    if (t_grid[j] < 0) throw DataError("sweep grid TTLs must be nonnegative");
    if (j > 0 && t_grid[j] <= t_grid[j - 1])
      throw DataError("sweep grid must be strictly ascending");
  }

  SweepCurves curves;
  curves.t_grid = t_grid;
  curves.g.assign(t_grid.size(), 0);
  curves.h.assign(t_grid.size(), 0);
  curves.policy = base_policy;
  curves.population = trace.total_ioc_population;

  const auto n = t_grid.size();
  // grid points are independent; each one is summed serially inside
#pragma omp parallel for schedule(dynamic) if (use_threads)
  for (std::size_t j = 0; j < n; ++j) {
    PolicyConfig p = base_policy;
    p.ttl_days = t_grid[j];
    const SimAggregate agg = simulate_trace_serial(trace, p);
    curves.g[j] = agg.n_mon;
    curves.h[j] = agg.n_miss;
  }
  return curves;
}

}  // namespace

std::string Ratio::one_to_string() const {
  if (num <= 0) return "0";
  const __int128 rounded =
      (static_cast<__int128>(den) * 2 + num) / (static_cast<__int128>(num) * 2);
  std::string digits;
  __int128 v = rounded;
  if (v == 0) digits = "0";
  while (v > 0) {
    digits.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  std::reverse(digits.begin(), digits.end());
  std::string grouped;
  const std::size_t n = digits.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0 && (n - i) % 3 == 0) grouped.push_back(',');
    grouped.push_back(digits[i]);
  }
  return "1:" + grouped;
}

SweepCurves sweep(const SightingTrace& trace, const PolicyConfig& base_policy,
                  const std::vector<std::int64_t>& t_grid) {
  return run_sweep(trace, base_policy, t_grid, true);
}

SweepCurves sweep_serial(const SightingTrace& trace,
                         const PolicyConfig& base_policy,
                         const std::vector<std::int64_t>& t_grid) {
  return run_sweep(trace, base_policy, t_grid, false);
}

std::vector<std::int64_t> default_grid(std::int64_t t_max, std::int64_t step) {
  if (t_max < 1) throw DataError("grid maximum must be at least 1");
  if (step < 1) throw DataError("grid step must be at least 1");
  std::vector<std::int64_t> grid;
  for (std::int64_t t = 0; t < t_max; t += step) grid.push_back(t);
  grid.push_back(t_max);
  return grid;
}

std::vector<double> total_cost(const SweepCurves& curves,
                               const CostParams& params) {
  if (!(params.c_mon >= 0.0) || !(params.c_miss >= 0.0))
    throw DataError("cost parameters must be nonnegative");
  std::vector<double> cost(curves.size());
  for (std::size_t j = 0; j < curves.size(); ++j)
    cost[j] = params.c_mon * static_cast<double>(curves.g[j]) +
              params.c_miss * static_cast<double>(curves.h[j]);
  return cost;
}

std::int64_t optimal_ttl(const SweepCurves& curves, double ratio) {
  if (!(ratio > 0.0)) throw DataError("cost ratio must be positive");
  if (curves.size() == 0) throw DataError("empty sweep curves");
  std::size_t best = 0;
  double best_cost = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < curves.size(); ++j) {
    const double cost = ratio * static_cast<double>(curves.g[j]) +
                        static_cast<double>(curves.h[j]);
    if (cost < best_cost) {  // strict: ties keep the smaller T
      best_cost = cost;
      best = j;
    }
  }
  return curves.t_grid[best];
}

ThresholdPair thresholds(const SweepCurves& curves) {
  validate_curves(curves);
  if (curves.t_grid.front() != 0)
    throw DataError("threshold programs need a grid starting at T=0");

  ThresholdPair out;
  out.t_max = curves.t_max();

  const std::int64_t h0 = curves.h.front();
  const std::int64_t h_end = curves.h.back();
  const std::int64_t g_end = curves.g.back();

  bool h_constant = true;
  bool any_g = false;
  for (std::size_t j = 0; j < curves.size(); ++j) {
    if (curves.h[j] != h0) h_constant = false;
    if (curves.g[j] > 0) any_g = true;
  }
  if (!any_g)
    throw DataError("threshold programs need g(T) > 0 somewhere on the grid");
  if (h_constant) {
    out.r_lower = Ratio{0, 1};
    out.r_upper = Ratio{0, 1};
    out.degenerate = true;
    return out;
  }

  // smallest R making T*=0 optimal: sup of improving ratios
  Ratio r_upper{0, 1};
  for (std::size_t j = 0; j < curves.size(); ++j) {
    if (curves.g[j] <= 0) continue;
    const Ratio cand{h0 - curves.h[j], curves.g[j]};
    if (r_upper < cand) r_upper = cand;
  }
  out.r_upper = r_upper;

  // largest R keeping T*=t_max optimal: inf over alternatives
  bool have_lower = false;
  Ratio r_lower{0, 1};
  for (std::size_t j = 0; j + 1 < curves.size(); ++j) {
    if (g_end <= curves.g[j]) continue;  // no monitoring tradeoff, skip
    const Ratio cand{curves.h[j] - h_end, g_end - curves.g[j]};
    if (!have_lower || cand < r_lower) {
      r_lower = cand;
      have_lower = true;
    }
  }
  out.r_lower = have_lower ? r_lower : Ratio{0, 1};
  return out;
}

SweepCurves trim_to_coverage(const SweepCurves& curves) {
  validate_curves(curves);
  const std::int64_t h_end = curves.h.back();
  std::size_t cut = 0;
  while (curves.h[cut] != h_end) ++cut;
  if (cut < 1) return curves;  // constant h, nothing to trim
  SweepCurves out = curves;
  out.t_grid.resize(cut + 1);
  out.g.resize(cut + 1);
  out.h.resize(cut + 1);
  return out;
}

ThresholdEstimate brute_force_thresholds(const SweepCurves& curves,
                                         const std::vector<double>& r_grid) {
  validate_curves(curves);
  if (r_grid.size() < 2) throw DataError("ratio grid needs >= 2 points");
  for (std::size_t i = 1; i < r_grid.size(); ++i)
    if (r_grid[i] <= r_grid[i - 1])
      throw DataError("ratio grid must be strictly ascending");

  const std::int64_t t_max = curves.t_max();
  ThresholdEstimate est;
  est.t_max = t_max;

  if (optimal_ttl(curves, r_grid.front()) != t_max)
    throw DataError(
        "always-monitor regime not reached at the smallest ratio; widen the "
        "ratio grid downward");
  if (optimal_ttl(curves, r_grid.back()) != 0)
    throw DataError(
        "never-monitor regime not reached at the largest ratio; widen the "
        "ratio grid upward");

  bool upper_found = false;
  for (const double r : r_grid) {
    const std::int64_t t_star = optimal_ttl(curves, r);
    if (t_star == t_max) est.r_lower = r;
    if (!upper_found && t_star == 0) {
      est.r_upper = r;
      upper_found = true;
    }
  }
  return est;
}

std::vector<double> log_spaced(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0) || !(hi > lo) || n < 2)
    throw DataError("log grid needs 0 < lo < hi and n >= 2");
  std::vector<double> grid(n);
  const double step = std::log(hi / lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i)
    grid[i] = lo * std::exp(step * static_cast<double>(i));
  grid.back() = hi;
  return grid;
}

BallparkThresholds ballpark_thresholds(const SummaryStats& stats) {
  if (stats.n_sightings <= 0 || stats.n_iocs_total <= 0 ||
      stats.trace_duration_days <= 0)
    throw DataError("ballpark thresholds need positive summary statistics");
  const __int128 denom = static_cast<__int128>(stats.n_iocs_total) *
                         stats.trace_duration_days;
  if (denom > std::numeric_limits<std::int64_t>::max())
    throw DataError("population * duration overflows the ratio range");
  BallparkThresholds out;
  out.r_upper = Ratio{stats.n_sightings, static_cast<std::int64_t>(denom)};
  out.r_lower = Ratio{1, stats.n_iocs_total};
  return out;
}

}  // namespace iocttl
