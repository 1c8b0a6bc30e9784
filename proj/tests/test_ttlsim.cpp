#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "iocttl/ttlsim.hpp"
#include "support/day_by_day.hpp"
#include "support/random_traces.hpp"

using namespace iocttl;

namespace {

IocTimeline make_timeline(Day creation, const std::vector<Day>& days,
                          IocType type = IocType::domain) {
  IocTimeline tl;
  tl.ioc_id = "x";
  tl.type = type;
  tl.creation_day = creation;
  for (Day d : days)
    tl.sightings.push_back(Sighting{d * kSecondsPerDay, "e1"});
  tl.finalize();
  return tl;
}

SightingTrace single_ioc_trace(Day creation, const std::vector<Day>& days,
                               std::int64_t population) {
  SightingTrace trace;
  trace.timelines.push_back(make_timeline(creation, days));
  trace.window_start = 0;
  trace.window_end = 50;
  trace.total_ioc_population = population;
  return trace;
}

PolicyConfig policy(std::int64_t t, ResetMode reset, RearmMode rearm,
                    PreCreationMode pre = PreCreationMode::exclude,
                    bool clip = false) {
  return PolicyConfig{t, reset, rearm, pre, clip};
}

}  // namespace

TEST_CASE("golden hand trace: with reset, evict forever") {
  const auto tl = make_timeline(0, {2, 6, 20});
  const auto r = simulate_ioc(
      tl, policy(5, ResetMode::with_reset, RearmMode::evict_forever));
  // windows [0,5) u [2,7) u [6,11)
  CHECK(r.n_mon_days == 11);
  CHECK(r.delta_t == 6);
  CHECK(r.n_hits == 2);
  CHECK(r.n_misses == 1);
}

TEST_CASE("golden hand trace: without reset") {
  const auto tl = make_timeline(0, {2, 6, 20});
  const auto r = simulate_ioc(
      tl, policy(5, ResetMode::without_reset, RearmMode::miss_reactivates));
  CHECK(r.n_mon_days == 5);
  CHECK(r.delta_t == 0);
  CHECK(r.n_hits == 1);
  CHECK(r.n_misses == 2);
}

TEST_CASE("golden hand trace: miss reactivates") {
  const auto tl = make_timeline(0, {2, 6, 20});
  const auto r = simulate_ioc(
      tl, policy(5, ResetMode::with_reset, RearmMode::miss_reactivates));
  // windows [0,5) u [2,7) u [6,11) u [20,25): the miss at 20 re-arms
  CHECK(r.n_mon_days == 16);
  CHECK(r.delta_t == 11);
  CHECK(r.n_hits == 2);
  CHECK(r.n_misses == 1);
}

TEST_CASE("T=0 monitors nothing and misses everything") {
  const auto tl = make_timeline(3, {3, 5, 5, 9});
  for (const auto pre : {PreCreationMode::exclude, PreCreationMode::count_as_miss,
                         PreCreationMode::count_as_hit}) {
    const auto r = simulate_ioc(
        tl, policy(0, ResetMode::with_reset, RearmMode::miss_reactivates, pre));
    CHECK(r.n_mon_days == 0);
    CHECK(r.delta_t == 0);
    CHECK(r.n_hits == 0);
    CHECK(r.n_misses == 4);
  }
}

TEST_CASE("pre-creation sightings follow the policy mode") {
  const auto tl = make_timeline(10, {9, 9, 12});
  auto p = policy(5, ResetMode::with_reset, RearmMode::evict_forever);

  p.pre_creation_mode = PreCreationMode::exclude;
  auto r = simulate_ioc(tl, p);
  CHECK(r.n_hits == 1);  // day 12 inside [10,15)
  CHECK(r.n_misses == 0);
  CHECK(r.n_mon_days == 5 + 2);  // [10,15) u [12,17)

  p.pre_creation_mode = PreCreationMode::count_as_miss;
  r = simulate_ioc(tl, p);
  CHECK(r.n_hits == 1);
  CHECK(r.n_misses == 2);

  p.pre_creation_mode = PreCreationMode::count_as_hit;
  r = simulate_ioc(tl, p);
  CHECK(r.n_hits == 3);
  CHECK(r.n_misses == 0);
}

TEST_CASE("same-day burst classifies once and resets once") {
  const auto tl = make_timeline(0, {4, 4, 4});
  const auto r = simulate_ioc(
      tl, policy(5, ResetMode::with_reset, RearmMode::evict_forever));
  CHECK(r.n_hits == 3);
  CHECK(r.n_mon_days == 9);  // [0,5) u [4,9)
}

TEST_CASE("clip to window bounds the billed days") {
  auto trace = single_ioc_trace(0, {2, 6, 20}, 1);
  trace.window_end = 8;
  auto p = policy(5, ResetMode::with_reset, RearmMode::evict_forever);
  p.clip_to_window = true;
  // unclipped union is [0,11); clipped to [0,8] gives 9 days
  const auto r =
      simulate_ioc(trace.timelines[0], p, trace.window_start, trace.window_end);
  CHECK(r.n_mon_days == 9);
  CHECK(r.delta_t == 6);  // delta stays the unclipped extension
}

TEST_CASE("negative creation days monitor before the window") {
  const auto tl = make_timeline(-624, {100});
  auto p = policy(725, ResetMode::without_reset, RearmMode::evict_forever);
  auto r = simulate_ioc(tl, p, 0, 724);
  CHECK(r.n_mon_days == 725);
  CHECK(r.n_hits == 1);
  p.clip_to_window = true;
  r = simulate_ioc(tl, p, 0, 724);
  CHECK(r.n_mon_days == 101);  // [-624,101) clipped to [0,724]
}

TEST_CASE("trace aggregate adds the zero-sighting population") {
  const auto trace = single_ioc_trace(0, {2, 6, 20}, 10);
  const auto agg = simulate_trace(
      trace, policy(5, ResetMode::with_reset, RearmMode::evict_forever));
  CHECK(agg.n_mon == 11 + 9 * 5);
  CHECK(agg.n_miss == 1);
  CHECK(agg.n_hit == 2);
}

TEST_CASE("without reset bills exactly T per IOC") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 20; ++i) {
    const auto trace = testing::random_small_trace(rng);
    const auto p =
        policy(9, ResetMode::without_reset, RearmMode::evict_forever);
    const auto agg = simulate_trace(trace, p);
    CHECK(agg.n_mon == 9 * trace.total_ioc_population);
  }
}

TEST_CASE("a TTL one beyond the deterministic bound covers everything") {
  const auto trace = single_ioc_trace(0, {2, 6, 20}, 1);
  const Day bound = deterministic_upper_bound(trace, BoundMode::creation_to_last);
  CHECK(bound == 20);
  const auto agg = simulate_trace(
      trace,
      policy(bound + 1, ResetMode::with_reset, RearmMode::evict_forever));
  CHECK(agg.n_miss == 0);
}

TEST_CASE("simulate_trace rejects an empty trace") {
  SightingTrace empty;
  CHECK_THROWS_AS(
      simulate_trace(empty, policy(5, ResetMode::with_reset,
                                   RearmMode::evict_forever)),
      DataError);
}

TEST_CASE("interval kernel matches the day-by-day reference") {
  std::mt19937_64 rng(42);
  int checked = 0;
  for (int i = 0; i < 100; ++i) {
    const auto trace = testing::random_small_trace(rng);
    for (const auto reset : {ResetMode::with_reset, ResetMode::without_reset}) {
      for (const auto rearm :
           {RearmMode::miss_reactivates, RearmMode::evict_forever}) {
        for (const auto pre :
             {PreCreationMode::exclude, PreCreationMode::count_as_miss,
              PreCreationMode::count_as_hit}) {
          for (const bool clip : {false, true}) {
            for (const std::int64_t t : {0, 1, 3, 10, 60}) {
              const auto p = policy(t, reset, rearm, pre, clip);
              for (const auto& tl : trace.timelines) {
                const auto fast = simulate_ioc(tl, p, trace.window_start,
                                               trace.window_end);
                const auto slow = testing::day_by_day_simulate_ioc(
                    tl, p, trace.window_start, trace.window_end);
                REQUIRE(fast == slow);
                ++checked;
              }
            }
          }
        }
      }
    }
  }
  CHECK(checked > 0);
}

TEST_CASE("monotonicity of monitoring and misses in T") {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 30; ++i) {
    const auto trace = testing::random_small_trace(rng);
    for (const auto reset : {ResetMode::with_reset, ResetMode::without_reset}) {
      for (const auto rearm :
           {RearmMode::miss_reactivates, RearmMode::evict_forever}) {
        std::int64_t prev_mon = -1, prev_miss = -1;
        bool first = true;
        for (std::int64_t t = 0; t <= 55; t += 5) {
          const auto agg = simulate_trace(trace, policy(t, reset, rearm));
          if (!first) {
            REQUIRE(agg.n_mon >= prev_mon);
            REQUIRE(agg.n_miss <= prev_miss);
          }
          prev_mon = agg.n_mon;
          prev_miss = agg.n_miss;
          first = false;
        }
      }
    }
  }
}

TEST_CASE("hit/miss accounting covers every accounted sighting") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 50; ++i) {
    const auto trace = testing::random_small_trace(rng);
    std::int64_t total = 0, pre = 0;
    for (const auto& tl : trace.timelines) {
      total += tl.n_sightings();
      for (const auto& s : tl.sightings)
        if (s.day() < tl.creation_day) ++pre;
    }
    const auto p_ex = policy(7, ResetMode::with_reset, RearmMode::evict_forever,
                             PreCreationMode::exclude);
    const auto agg_ex = simulate_trace(trace, p_ex);
    CHECK(agg_ex.n_hit + agg_ex.n_miss == total - pre);
    const auto p_miss = policy(7, ResetMode::with_reset,
                               RearmMode::evict_forever,
                               PreCreationMode::count_as_miss);
    const auto agg_miss = simulate_trace(trace, p_miss);
    CHECK(agg_miss.n_hit + agg_miss.n_miss == total);
  }
}

TEST_CASE("parallel and serial trace sums are identical") {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 10; ++i) {
    const auto trace = testing::random_small_trace(rng, 10, 40);
    for (const std::int64_t t : {0, 3, 17}) {
      const auto p = policy(t, ResetMode::with_reset,
                            RearmMode::miss_reactivates);
      CHECK(simulate_trace(trace, p) == simulate_trace_serial(trace, p));
    }
  }
}

TEST_CASE("monitored intervals sum to the monitoring days") {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 40; ++i) {
    const auto trace = testing::random_small_trace(rng);
    const auto p = policy(6, ResetMode::with_reset, RearmMode::miss_reactivates);
    for (const auto& tl : trace.timelines) {
      std::int64_t total = 0;
      Day prev_end = std::numeric_limits<Day>::min();
      for (const auto& iv : monitored_intervals(tl, p)) {
        REQUIRE(iv.start >= prev_end);  // disjoint, ascending
        total += iv.length();
        prev_end = iv.end;
      }
      CHECK(total == simulate_ioc(tl, p).n_mon_days);
    }
  }
}

TEST_CASE("deterministic upper bound modes") {
  SightingTrace trace;
  trace.timelines.push_back(make_timeline(0, {700}));
  trace.timelines.push_back(make_timeline(10, {12, 30}));
  trace.window_start = 0;
  trace.window_end = 700;
  trace.total_ioc_population = 2;
  CHECK(deterministic_upper_bound(trace, BoundMode::creation_to_last) == 700);
  CHECK(deterministic_upper_bound(trace, BoundMode::first_to_last) == 18);

  SightingTrace singles;
  singles.timelines.push_back(make_timeline(0, {5}));
  singles.total_ioc_population = 1;
  CHECK(deterministic_upper_bound(singles, BoundMode::first_to_last) == 0);

  SightingTrace none;
  none.timelines.push_back(IocTimeline{"z", IocType::url, 0, {}, {}, {}});
  none.total_ioc_population = 1;
  CHECK_THROWS_AS(deterministic_upper_bound(none, BoundMode::creation_to_last),
                  DataError);
}

TEST_CASE("quantile TTL picks the right order statistic") {
  std::vector<Day> samples;
  for (Day d = 1; d <= 10; ++d) samples.push_back(d);
  CHECK(quantile_ttl(samples, 0.9) == 9);
  CHECK(quantile_ttl(samples, 1.0) == 10);
  CHECK(quantile_ttl(samples, 0.0) == 1);
  CHECK(quantile_ttl({4, 4, 4}, 0.5) == 4);
  CHECK_THROWS_AS(quantile_ttl({}, 0.5), DataError);
  CHECK_THROWS_AS(quantile_ttl({1}, 1.5), DataError);
}

TEST_CASE("poisson extra-monitoring estimates") {
  using doctest::Approx;
  CHECK(expected_extra_monitoring_poisson(0.0, 10.0,
                                          PoissonDeltaForm::printed) ==
        Approx(5.0));
  CHECK(expected_extra_monitoring_poisson(0.0, 10.0,
                                          PoissonDeltaForm::expected_resets) ==
        Approx(0.0));
  CHECK(expected_extra_monitoring_poisson(0.1, 10.0,
                                          PoissonDeltaForm::printed) ==
        Approx(10.0 * std::exp(1.0) / 2.0));
}
