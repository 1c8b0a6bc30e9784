// Compares the serial and OpenMP sweep paths on a synthetic trace and checks
// that both produce identical curves.
//
//   bench_sweep [n_grid_points] [duration_days] [creation_rate]

#include <chrono>
#include <cstdio>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "iocttl/costopt.hpp"
#include "iocttl/synthgen.hpp"

using namespace iocttl;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

int main(int argc, char** argv) {
  const std::int64_t n_grid = argc > 1 ? std::atoll(argv[1]) : 256;
  const Day duration = argc > 2 ? std::atoll(argv[2]) : 724;
  const double rate = argc > 3 ? std::atof(argv[3]) : 120.0;

  SynthConfig cfg;
  cfg.seed = 7;
  cfg.duration_days = duration;
  cfg.ioc_creation_rate = rate;
  cfg.gap_model.kind = GapModel::Kind::poisson;
  cfg.gap_model.rate = 0.02;
  cfg.zero_sighting_fraction = 0.5;

  const auto t_gen = Clock::now();
  const auto trace = generate(cfg);
  std::printf("trace: %lld sighted IOCs, population %lld, %lld days (%.2fs)\n",
              static_cast<long long>(trace.n_timelines()),
              static_cast<long long>(trace.total_ioc_population),
              static_cast<long long>(trace.duration_days()),
              seconds_since(t_gen));

  PolicyConfig policy;
  policy.reset_mode = ResetMode::with_reset;
  policy.rearm_mode = RearmMode::miss_reactivates;
  const auto grid = default_grid(duration, std::max<Day>(1, duration / n_grid));
  std::printf("grid: %zu TTL points\n", grid.size());

  const auto t_serial = Clock::now();
  const auto serial = sweep_serial(trace, policy, grid);
  const double serial_s = seconds_since(t_serial);

  const auto t_par = Clock::now();
  const auto parallel = sweep(trace, policy, grid);
  const double par_s = seconds_since(t_par);

  const bool identical = serial.g == parallel.g && serial.h == parallel.h;
#ifdef _OPENMP
  const int threads = omp_get_max_threads();
#else
  const int threads = 1;
#endif
  std::printf("serial   : %8.3f s\n", serial_s);
  std::printf("parallel : %8.3f s  (%d threads, speedup %.2fx)\n", par_s,
              threads, serial_s / par_s);
  std::printf("curves identical: %s\n", identical ? "yes" : "NO");
  return identical ? 0 : 1;
}
