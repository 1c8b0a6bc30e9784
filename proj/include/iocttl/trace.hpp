#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace iocttl {

// All durations and timestamps are day indices (days since 1970-01-01 for
// calendar input, arbitrary origin for integer input). Sub-day precision is
// retained per sighting as seconds for the hour-resolution consumers.
using Day = std::int64_t;

constexpr std::int64_t kSecondsPerDay = 86400;

inline Day day_of_seconds(std::int64_t time_s) {
  // floor division, negative-safe
  std::int64_t q = time_s / kSecondsPerDay;
  if (time_s % kSecondsPerDay < 0) --q;
  return q;
}

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

// Malformed input row. Carries the 1-based line number and the field name.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::string field, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ", field '" +
                           field + "': " + what),
        line_(line),
        field_(std::move(field)) {}

  std::size_t line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

// Semantically invalid data (empty trace, inconsistent population, ...).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

enum class IocType {
  md5,
  sha1,
  sha256,
  ip_src,
  ip_dst,
  email_subject,
  email_dst,
  domain,
  hostname,
  filename,
  url,
};

inline constexpr int kNumIocTypes = 11;

// Coarse clusters of the eleven types.
enum class IocCategory { hashes, ips, email, host, filename };

inline constexpr int kNumIocCategories = 5;

IocCategory category_of(IocType type);
const char* to_string(IocType type);
const char* to_string(IocCategory cat);
std::optional<IocType> ioc_type_from_string(const std::string& s);

// One sighting of one IOC. `time_s` keeps whatever precision the input had
// (integer day indices map to midnight).
struct Sighting {
  std::int64_t time_s = 0;
  std::string event_id;

  Day day() const { return day_of_seconds(time_s); }

  friend bool operator==(const Sighting&, const Sighting&) = default;
};

// Per-IOC view of the trace: creation day plus the time-ordered sightings.
// `sighting_days` deduplicates same-day bursts; `day_multiplicity[i]` is the
// number of sightings on `sighting_days[i]`.
struct IocTimeline {
  std::string ioc_id;
  IocType type = IocType::md5;
  Day creation_day = 0;
  std::vector<Sighting> sightings;       // sorted by time_s
  std::vector<Day> sighting_days;        // unique, ascending
  std::vector<std::int64_t> day_multiplicity;

  std::int64_t n_sightings() const {
    return static_cast<std::int64_t>(sightings.size());
  }
  bool has_sightings() const { return !sightings.empty(); }
  Day first_sighting_day() const { return sighting_days.front(); }
  Day last_sighting_day() const { return sighting_days.back(); }

  std::set<std::string> event_ids() const;

  // Rebuilds sighting_days/day_multiplicity after edits to `sightings`.
  void finalize();

  friend bool operator==(const IocTimeline&, const IocTimeline&) = default;
};

struct SightingTrace {
  std::vector<IocTimeline> timelines;
  Day window_start = 0;
  Day window_end = 0;
  // Total IOC population including IOCs that never produced a row. Defaults
  // to timelines.size() at parse time; monitoring-cost studies override it.
  std::int64_t total_ioc_population = 0;

  std::int64_t n_timelines() const {
    return static_cast<std::int64_t>(timelines.size());
  }
  Day duration_days() const { return window_end - window_start; }

  friend bool operator==(const SightingTrace&, const SightingTrace&) = default;
};

struct SummaryStats {
  std::int64_t n_iocs_with_sightings = 0;
  std::int64_t n_iocs_total = 0;
  std::int64_t n_sightings = 0;
  std::int64_t n_pre_creation_iocs = 0;  // first sighting before creation
  Day trace_duration_days = 0;
  double mean_days_to_first_sighting = 0.0;
  double mean_sightings_per_ioc = 0.0;
  double mean_sighting_days_per_ioc = 0.0;
  Day first_creation_day = 0;
  Day last_creation_day = 0;
  Day first_sighting_day = 0;
  Day last_sighting_day = 0;
};

// ---------------------------------------------------------------------------
// Ingestion / serialization
// ---------------------------------------------------------------------------

enum class TraceFormat { csv, jsonl };

struct ParseOptions {
  std::optional<Day> window_start;
  std::optional<Day> window_end;
  std::optional<std::int64_t> total_ioc_population;
};

// Reads the `timestamp,ioc_id,ioc_type,creation_date,event_id` schema.
// Timestamps and creation dates accept integer day indices, ISO dates
// (YYYY-MM-DD) or ISO datetimes (YYYY-MM-DDTHH:MM:SS[Z]), auto-detected per
// value. Rows for the same ioc_id merge into one timeline; conflicting
// metadata for an id is a hard error.
SightingTrace parse_trace(std::istream& in, TraceFormat format,
                          const ParseOptions& opts = {});

void write_trace_csv(const SightingTrace& trace, std::ostream& out);
void write_trace_jsonl(const SightingTrace& trace, std::ostream& out);

// ---------------------------------------------------------------------------
// Descriptive statistics
// ---------------------------------------------------------------------------

SummaryStats summarize(const SightingTrace& trace);

// first_sighting - creation_day per IOC with sightings; negative keys mark
// retrospective log matches.
std::map<Day, std::int64_t> creation_offset_histogram(
    const SightingTrace& trace);

enum class CorrelationLevel { by_type, by_category };

// cell(r, c) = percentage of row-r sightings whose event also carries at
// least one column-c IOC. Diagonal is 100 wherever the row has sightings.
struct CorrelationMatrix {
  CorrelationLevel level = CorrelationLevel::by_category;
  std::vector<std::string> labels;
  std::vector<std::vector<double>> cells;      // [row][col], percent
  std::vector<bool> row_has_sightings;         // false rows are 0-filled
};

CorrelationMatrix category_correlation(const SightingTrace& trace,
                                       CorrelationLevel level);

enum class GapGrouping { pooled, by_category };
enum class GapUnit { days, hours };

// Gaps between consecutive distinct sighting days of each IOC (days), or
// between consecutive raw timestamps with zero gaps dropped (hours).
struct GapSamples {
  GapGrouping grouping = GapGrouping::pooled;
  GapUnit unit = GapUnit::days;
  std::vector<double> pooled;
  std::map<IocCategory, std::vector<double>> by_category;
};

GapSamples inter_sighting_samples(const SightingTrace& trace,
                                  GapGrouping grouping,
                                  GapUnit unit = GapUnit::days);

// Time from creation to first sighting, one entry per IOC with sightings.
// Censored when the creation date sits on the trace start (the reference
// value used for unknown creation dates). Negative raw offsets clamp to 0.
struct FirstSightingSample {
  std::string ioc_id;
  IocType type = IocType::md5;
  Day duration = 0;
  bool censored = false;
  bool clamped = false;
};

std::vector<FirstSightingSample> first_sighting_samples(
    const SightingTrace& trace);

}  // namespace iocttl
