#include "iocttl/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <json.hpp>

namespace iocttl {

namespace {

// 53-bit uniform in [0, 1); the bit layout is pinned by mt19937_64 itself
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double sample_exponential(std::mt19937_64& rng, double rate) {
  return -std::log(1.0 - uniform01(rng)) / rate;
}

double sample_pareto(std::mt19937_64& rng, double alpha, double k) {
  return k * std::pow(1.0 - uniform01(rng), -1.0 / alpha);
}

std::int64_t sample_burst_size(std::mt19937_64& rng, const BurstModel& burst) {
  if (burst.kind == BurstModel::Kind::fixed) return std::max<std::int64_t>(1, burst.size);
  if (burst.mean <= 1.0) return 1;
  const double p = 1.0 / burst.mean;
  const double u = uniform01(rng);
  return 1 + static_cast<std::int64_t>(std::floor(std::log(1.0 - u) /
                                                  std::log(1.0 - p)));
}

Day ceil_days(double gap) {
  const double c = std::ceil(gap);
  return std::max<Day>(1, static_cast<Day>(c));
}

GapModel::Kind gap_kind_from_string(const std::string& s) {
  if (s == "poisson") return GapModel::Kind::poisson;
  if (s == "pareto") return GapModel::Kind::pareto_gaps;
  if (s == "fixed_schedule") return GapModel::Kind::fixed_schedule;
  throw DataError("unknown gap model kind '" + s + "'");
}

const char* gap_kind_to_string(GapModel::Kind kind) {
  switch (kind) {
    case GapModel::Kind::poisson: return "poisson";
    case GapModel::Kind::pareto_gaps: return "pareto";
    case GapModel::Kind::fixed_schedule: return "fixed_schedule";
  }
  return "poisson";
}

void validate(const SynthConfig& config) {
  if (config.duration_days < 1)
    throw DataError("synthetic duration must be at least 1 day");
  if (config.ioc_creation_rate < 0.0)
    throw DataError("creation rate must be nonnegative");
  if (config.zero_sighting_fraction < 0.0 ||
      config.zero_sighting_fraction >= 1.0)
    throw DataError("zero-sighting fraction must lie in [0, 1)");
  if (config.gap_model.kind == GapModel::Kind::poisson &&
      config.gap_model.rate < 0.0)
    throw DataError("sighting rate must be nonnegative");
  if (config.gap_model.kind == GapModel::Kind::pareto_gaps &&
      (config.gap_model.alpha <= 0.0 || config.gap_model.k <= 0.0))
    throw DataError("pareto gap model needs alpha > 0 and k > 0");
  if (config.hash_event_bundle_prob < 0.0 ||
      config.hash_event_bundle_prob > 1.0)
    throw DataError("event bundle probability must lie in [0, 1]");
  double total = 0.0;
  for (const auto& [name, weight] : config.type_mixture) {
    if (!ioc_type_from_string(name))
      throw DataError("unknown ioc_type '" + name + "' in mixture");
    if (weight < 0.0) throw DataError("mixture weights must be nonnegative");
    total += weight;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw DataError("type mixture weights must sum to 1");
}

IocType sample_type(std::mt19937_64& rng,
                    const std::map<std::string, double>& mixture) {
  const double u = uniform01(rng);
  double acc = 0.0;
  IocType last = IocType::domain;
  for (const auto& [name, weight] : mixture) {
    last = *ioc_type_from_string(name);
    acc += weight;
    if (u < acc) return last;
  }
  return last;
}

}  // namespace

SynthConfig synth_config_from_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string("invalid synth config JSON: ") + e.what());
  }
  SynthConfig c;
  c.seed = j.value("seed", c.seed);
  c.duration_days = j.value("duration_days", c.duration_days);
  c.ioc_creation_rate = j.value("ioc_creation_rate", c.ioc_creation_rate);
  c.zero_sighting_fraction =
      j.value("zero_sighting_fraction", c.zero_sighting_fraction);
  if (j.contains("gap_model")) {
    const auto& g = j["gap_model"];
    c.gap_model.kind = gap_kind_from_string(g.value("kind", "poisson"));
    c.gap_model.rate = g.value("rate", c.gap_model.rate);
    c.gap_model.alpha = g.value("alpha", c.gap_model.alpha);
    c.gap_model.k = g.value("k", c.gap_model.k);
    if (g.contains("offsets"))
      c.gap_model.offsets = g["offsets"].get<std::vector<Day>>();
  }
  if (j.contains("burst")) {
    const auto& b = j["burst"];
    const std::string kind = b.value("kind", "fixed");
    if (kind == "fixed")
      c.burst.kind = BurstModel::Kind::fixed;
    else if (kind == "geometric")
      c.burst.kind = BurstModel::Kind::geometric;
    else
      throw DataError("unknown burst kind '" + kind + "'");
    c.burst.size = b.value("size", c.burst.size);
    c.burst.mean = b.value("mean", c.burst.mean);
  }
  if (j.contains("type_mixture"))
    c.type_mixture = j["type_mixture"].get<std::map<std::string, double>>();
  c.hash_event_bundle_prob =
      j.value("hash_event_bundle_prob", c.hash_event_bundle_prob);
  validate(c);
  return c;
}

std::string synth_config_to_json(const SynthConfig& config) {
  nlohmann::json j;
  j["seed"] = config.seed;
  j["duration_days"] = config.duration_days;
  j["ioc_creation_rate"] = config.ioc_creation_rate;
  j["zero_sighting_fraction"] = config.zero_sighting_fraction;
  j["gap_model"]["kind"] = gap_kind_to_string(config.gap_model.kind);
  switch (config.gap_model.kind) {
    case GapModel::Kind::poisson:
      j["gap_model"]["rate"] = config.gap_model.rate;
      break;
    case GapModel::Kind::pareto_gaps:
      j["gap_model"]["alpha"] = config.gap_model.alpha;
      j["gap_model"]["k"] = config.gap_model.k;
      break;
    case GapModel::Kind::fixed_schedule:
      j["gap_model"]["offsets"] = config.gap_model.offsets;
      break;
  }
  j["burst"]["kind"] =
      config.burst.kind == BurstModel::Kind::fixed ? "fixed" : "geometric";
  if (config.burst.kind == BurstModel::Kind::fixed)
    j["burst"]["size"] = config.burst.size;
  else
    j["burst"]["mean"] = config.burst.mean;
  j["type_mixture"] = config.type_mixture;
  j["hash_event_bundle_prob"] = config.hash_event_bundle_prob;
  j["rng"] = kSynthRngAlgorithm;
  return j.dump(2);
}

SightingTrace generate(const SynthConfig& config) {
  validate(config);
  std::mt19937_64 rng(config.seed);

  // IOC creation instants: Poisson process over [0, duration]
  std::vector<double> creations;
  if (config.ioc_creation_rate > 0.0) {
    double t = sample_exponential(rng, config.ioc_creation_rate);
    while (t <= static_cast<double>(config.duration_days)) {
      creations.push_back(t);
      t += sample_exponential(rng, config.ioc_creation_rate);
    }
  }

  SightingTrace trace;
  trace.window_start = 0;
  trace.window_end = config.duration_days;

  std::int64_t event_counter = 0;
  std::int64_t dropped = 0;
  std::string last_hash_event;
  for (std::size_t i = 0; i < creations.size(); ++i) {
    IocTimeline tl;
    tl.ioc_id = "ioc-" + std::to_string(i + 1);
    tl.type = sample_type(rng, config.type_mixture);
    tl.creation_day = static_cast<Day>(std::floor(creations[i]));

    std::string event_id;
    const bool is_hash = category_of(tl.type) == IocCategory::hashes;
    if (is_hash && !last_hash_event.empty() &&
        uniform01(rng) < config.hash_event_bundle_prob) {
      event_id = last_hash_event;
    } else {
      event_id = "ev-" + std::to_string(++event_counter);
    }
    if (is_hash) last_hash_event = event_id;

    // sighting days from the gap model, starting at creation
    std::vector<Day> days;
    switch (config.gap_model.kind) {
      case GapModel::Kind::poisson: {
        if (config.gap_model.rate > 0.0) {
          Day d = tl.creation_day;
          for (;;) {
            d += ceil_days(sample_exponential(rng, config.gap_model.rate));
            if (d > trace.window_end) break;
            days.push_back(d);
          }
        }
        break;
      }
      case GapModel::Kind::pareto_gaps: {
        Day d = tl.creation_day;
        for (;;) {
          d += ceil_days(
              sample_pareto(rng, config.gap_model.alpha, config.gap_model.k));
          if (d > trace.window_end) break;
          days.push_back(d);
        }
        break;
      }
      case GapModel::Kind::fixed_schedule: {
        for (const Day off : config.gap_model.offsets) {
          const Day d = tl.creation_day + off;
          if (d >= tl.creation_day && d <= trace.window_end) days.push_back(d);
        }
        break;
      }
    }

    if (days.empty()) {
      ++dropped;
      continue;
    }
    for (const Day d : days) {
      const std::int64_t burst = sample_burst_size(rng, config.burst);
      for (std::int64_t b = 0; b < burst; ++b)
        tl.sightings.push_back(Sighting{d * kSecondsPerDay, event_id});
    }
    tl.finalize();
    trace.timelines.push_back(std::move(tl));
  }

  if (trace.timelines.empty())
    throw DataError("empty synthetic trace: no IOC received any sighting");

  const std::int64_t sighted = trace.n_timelines();
  std::int64_t total = sighted + dropped;
  if (config.zero_sighting_fraction > 0.0) {
    const std::int64_t target = static_cast<std::int64_t>(std::llround(
        static_cast<double>(sighted) / (1.0 - config.zero_sighting_fraction)));
    total = std::max(total, target);
  }
  trace.total_ioc_population = total;
  return trace;
}

std::vector<double> sample_gaps(const GapModel& model, std::size_t n,
                                std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> gaps;
  gaps.reserve(n);
  switch (model.kind) {
    case GapModel::Kind::poisson:
      if (model.rate <= 0.0)
        throw DataError("gap sampling needs a positive rate");
      for (std::size_t i = 0; i < n; ++i)
        gaps.push_back(sample_exponential(rng, model.rate));
      break;
    case GapModel::Kind::pareto_gaps:
      if (model.alpha <= 0.0 || model.k <= 0.0)
        throw DataError("gap sampling needs alpha > 0 and k > 0");
      for (std::size_t i = 0; i < n; ++i)
        gaps.push_back(sample_pareto(rng, model.alpha, model.k));
      break;
    case GapModel::Kind::fixed_schedule:
      throw DataError("fixed schedules have no gap distribution to sample");
  }
  return gaps;
}

LittlesLawResult littles_law_check(const SightingTrace& trace,
                                   const PolicyConfig& policy) {
  if (trace.timelines.empty()) return LittlesLawResult{};  // no arrivals
  const Day ws = trace.window_start;
  const Day we = trace.window_end;
  const std::int64_t n_days = we - ws + 1;

  // explicit per-day monitored counts over the trace window
  std::vector<std::int64_t> delta(static_cast<std::size_t>(n_days) + 1, 0);
  double total_mon_days = 0.0;
  for (const auto& tl : trace.timelines) {
    for (const DayInterval& iv : monitored_intervals(tl, policy)) {
      total_mon_days += static_cast<double>(iv.length());
      const Day a = std::max(iv.start, ws);
      const Day b = std::min(iv.end, we + 1);
      if (b <= a) continue;
      delta[static_cast<std::size_t>(a - ws)] += 1;
      delta[static_cast<std::size_t>(b - ws)] -= 1;
    }
  }
  std::int64_t running = 0;
  std::int64_t monitored_day_sum = 0;
  for (std::size_t d = 0; d < static_cast<std::size_t>(n_days); ++d) {
    running += delta[d];
    monitored_day_sum += running;
  }

  LittlesLawResult res;
  res.measured_avg_monitored = static_cast<double>(monitored_day_sum) /
                               static_cast<double>(n_days);
  const double duration = static_cast<double>(trace.duration_days());
  const double creation_rate =
      duration > 0.0 ? static_cast<double>(trace.n_timelines()) / duration
                     : 0.0;
  const double mean_mon =
      total_mon_days / static_cast<double>(trace.n_timelines());
  res.predicted = creation_rate * mean_mon;
  res.short_duration_warning =
      duration < 10.0 * static_cast<double>(policy.ttl_days);
  return res;
}

}  // namespace iocttl
