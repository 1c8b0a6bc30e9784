#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "iocttl/trace.hpp"
#include "iocttl/ttlsim.hpp"

namespace iocttl {

// Sampling is built on mt19937_64 with inverse-CDF transforms only, so a
// seed reproduces the same trace on every platform. The stream consumption
// order is part of the contract.
inline constexpr const char* kSynthRngAlgorithm = "mt19937_64";

struct GapModel {
  enum class Kind { poisson, pareto_gaps, fixed_schedule };
  Kind kind = Kind::poisson;
  double rate = 0.01;     // poisson: sightings per day
  double alpha = 1.2;     // pareto shape
  double k = 1.0;         // pareto scale (days)
  std::vector<Day> offsets;  // fixed_schedule: days after creation
};

struct BurstModel {
  enum class Kind { fixed, geometric };
  Kind kind = Kind::fixed;
  std::int64_t size = 1;   // fixed
  double mean = 1.0;       // geometric, >= 1
};

struct SynthConfig {
  std::uint64_t seed = 1;
  Day duration_days = 365;
  double ioc_creation_rate = 1.0;  // IOCs per day, Poisson process
  double zero_sighting_fraction = 0.0;
  GapModel gap_model;
  BurstModel burst;
  std::map<std::string, double> type_mixture = {{"domain", 1.0}};
  double hash_event_bundle_prob = 0.0;
};

SynthConfig synth_config_from_json(const std::string& json_text);
std::string synth_config_to_json(const SynthConfig& config);

// Creations arrive as a Poisson process over [0, duration]; each IOC draws a
// type from the mixture and sightings from the gap model starting at its
// creation, ceil-rounded to whole days; bursts expand one sighting day into
// several same-day records. Zero-sighting IOCs fold into the population
// count instead of producing timelines.
SightingTrace generate(const SynthConfig& config);

// Raw (continuous) gap samples straight from the model, for closing the
// generator -> fitter loop without day quantization.
std::vector<double> sample_gaps(const GapModel& model, std::size_t n,
                                std::uint64_t seed);

struct LittlesLawResult {
  double measured_avg_monitored = 0.0;
  double predicted = 0.0;              // creation rate x mean monitored days
  bool short_duration_warning = false; // duration < 10 * TTL
};

// Measures the time-average monitored-IOC count through an explicit per-day
// view of the monitoring windows, restricted to the trace window.
LittlesLawResult littles_law_check(const SightingTrace& trace,
                                   const PolicyConfig& policy);

}  // namespace iocttl
