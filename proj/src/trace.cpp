#include "iocttl/trace.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

namespace iocttl {

namespace {

constexpr std::array<const char*, kNumIocTypes> kTypeNames = {
    "md5",       "sha1",     "sha256",   "ip-src", "ip-dst", "email-subject",
    "email-dst", "domain",   "hostname", "filename", "url"};

constexpr std::array<const char*, kNumIocCategories> kCategoryNames = {
    "hashes", "ips", "email", "host", "filename"};

// days_from_civil (Hinnant): civil date -> days since 1970-01-01.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp + (mp < 10 ? 3 : -9);
  y += (m <= 2);
}

bool parse_int(std::string_view s, std::int64_t& out) {
  if (s.empty()) return false;
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

bool parse_fixed_uint(std::string_view s, unsigned& out) {
  out = 0;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
    out = out * 10 + static_cast<unsigned>(c - '0');
  }
  return !s.empty();
}

// Accepts integer day index, YYYY-MM-DD, or YYYY-MM-DD[T ]HH:MM[:SS][Z].
// Returns seconds since epoch (day index * 86400 for day-resolution input).
bool parse_time_value(std::string_view s, std::int64_t& time_s) {
  std::int64_t day = 0;
  if (parse_int(s, day)) {
    time_s = day * kSecondsPerDay;
    return true;
  }
  if (s.size() < 10 || s[4] != '-' || s[7] != '-') return false;
  std::int64_t year = 0;
  unsigned month = 0, dom = 0;
  if (!parse_int(s.substr(0, 4), year) ||
      !parse_fixed_uint(s.substr(5, 2), month) ||
      !parse_fixed_uint(s.substr(8, 2), dom))
    return false;
  if (month < 1 || month > 12 || dom < 1 || dom > 31) return false;
  std::int64_t secs = days_from_civil(year, month, dom) * kSecondsPerDay;
  if (s.size() == 10) {
    time_s = secs;
    return true;
  }
  if (s[10] != 'T' && s[10] != ' ') return false;
  std::string_view rest = s.substr(11);
  if (!rest.empty() && rest.back() == 'Z') rest.remove_suffix(1);
  unsigned hh = 0, mm = 0, ss = 0;
  if (rest.size() == 5 && rest[2] == ':') {
    if (!parse_fixed_uint(rest.substr(0, 2), hh) ||
        !parse_fixed_uint(rest.substr(3, 2), mm))
      return false;
  } else if (rest.size() == 8 && rest[2] == ':' && rest[5] == ':') {
    if (!parse_fixed_uint(rest.substr(0, 2), hh) ||
        !parse_fixed_uint(rest.substr(3, 2), mm) ||
        !parse_fixed_uint(rest.substr(6, 2), ss))
      return false;
  } else {
    return false;
  }
  if (hh > 23 || mm > 59 || ss > 60) return false;
  time_s = secs + hh * 3600 + mm * 60 + ss;
  return true;
}

std::string format_time_value(std::int64_t time_s) {
  if (time_s % kSecondsPerDay == 0) {
    return std::to_string(time_s / kSecondsPerDay);
  }
  const Day day = day_of_seconds(time_s);
  std::int64_t rem = time_s - day * kSecondsPerDay;
  std::int64_t y;
  unsigned m, d;
  civil_from_days(day, y, m, d);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02uT%02lld:%02lld:%02lldZ",
                static_cast<long long>(y), m, d,
                static_cast<long long>(rem / 3600),
                static_cast<long long>((rem / 60) % 60),
                static_cast<long long>(rem % 60));
  return buf;
}

struct RawRecord {
  std::int64_t time_s = 0;
  std::string ioc_id;
  IocType type = IocType::md5;
  Day creation_day = 0;
  std::string event_id;
};

void split_csv_line(const std::string& line, std::vector<std::string>& out) {
  out.clear();
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      out.emplace_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
}

SightingTrace build_trace(std::vector<RawRecord>&& records,
                          const ParseOptions& opts) {
  std::unordered_map<std::string, std::size_t> index;
  std::vector<IocTimeline> timelines;
  for (auto& rec : records) {
    auto [it, inserted] = index.emplace(rec.ioc_id, timelines.size());
    if (inserted) {
      IocTimeline tl;
      tl.ioc_id = rec.ioc_id;
      tl.type = rec.type;
      tl.creation_day = rec.creation_day;
      timelines.push_back(std::move(tl));
    } else {
      const IocTimeline& tl = timelines[it->second];
      if (tl.type != rec.type)
        throw DataError("inconsistent trace: ioc '" + rec.ioc_id +
                        "' appears with ioc_types '" + to_string(tl.type) +
                        "' and '" + to_string(rec.type) + "'");
      if (tl.creation_day != rec.creation_day)
        throw DataError("inconsistent trace: ioc '" + rec.ioc_id +
                        "' appears with two distinct creation_dates");
    }
    timelines[it->second].sightings.push_back(
        Sighting{rec.time_s, std::move(rec.event_id)});
  }

  SightingTrace trace;
  trace.timelines = std::move(timelines);
  for (auto& tl : trace.timelines) tl.finalize();
  std::sort(trace.timelines.begin(), trace.timelines.end(),
            [](const IocTimeline& a, const IocTimeline& b) {
              return a.ioc_id < b.ioc_id;
            });

  Day min_day = 0, max_day = 0;
  bool any = false;
  for (const auto& tl : trace.timelines) {
    Day lo = std::min(tl.creation_day, tl.sighting_days.front());
    Day hi = std::max(tl.creation_day, tl.sighting_days.back());
    if (!any) {
      min_day = lo;
      max_day = hi;
      any = true;
    } else {
      min_day = std::min(min_day, lo);
      max_day = std::max(max_day, hi);
    }
  }
  trace.window_start = opts.window_start.value_or(any ? min_day : 0);
  trace.window_end = opts.window_end.value_or(any ? max_day : 0);
  if (trace.window_end < trace.window_start)
    throw DataError("trace window end precedes window start");
  for (const auto& tl : trace.timelines) {
    if (tl.sighting_days.back() > trace.window_end)
      throw DataError("ioc '" + tl.ioc_id +
                      "' has a sighting beyond the trace window end");
    if (tl.creation_day > trace.window_end)
      throw DataError("ioc '" + tl.ioc_id +
                      "' was created beyond the trace window end");
  }
  trace.total_ioc_population =
      opts.total_ioc_population.value_or(trace.n_timelines());
  if (trace.total_ioc_population < trace.n_timelines())
    throw DataError("total_ioc_population (" +
                    std::to_string(trace.total_ioc_population) +
                    ") smaller than the number of sighted IOCs (" +
                    std::to_string(trace.n_timelines()) + ")");
  return trace;
}

RawRecord record_from_fields(std::size_t line_no, const std::string& timestamp,
                             const std::string& ioc_id,
                             const std::string& ioc_type,
                             const std::string& creation_date,
                             const std::string& event_id) {
  RawRecord rec;
  if (!parse_time_value(timestamp, rec.time_s))
    throw ParseError(line_no, "timestamp",
                     "expected day index or ISO-8601 date, got '" + timestamp +
                         "'");
  if (ioc_id.empty()) throw ParseError(line_no, "ioc_id", "empty identifier");
  rec.ioc_id = ioc_id;
  auto type = ioc_type_from_string(ioc_type);
  if (!type)
    throw ParseError(line_no, "ioc_type",
                     "'" + ioc_type + "' is not one of the 11 IOC types");
  rec.type = *type;
  std::int64_t creation_s = 0;
  if (!parse_time_value(creation_date, creation_s))
    throw ParseError(line_no, "creation_date",
                     "expected day index or ISO-8601 date, got '" +
                         creation_date + "'");
  rec.creation_day = day_of_seconds(creation_s);
  if (event_id.empty())
    throw ParseError(line_no, "event_id", "empty identifier");
  rec.event_id = event_id;
  return rec;
}

std::vector<RawRecord> parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty input: missing CSV header");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  static const std::array<const char*, 5> kSchema = {
      "timestamp", "ioc_id", "ioc_type", "creation_date", "event_id"};
  std::vector<std::string> header;
  split_csv_line(line, header);
  std::array<int, 5> col{-1, -1, -1, -1, -1};
  for (std::size_t i = 0; i < header.size(); ++i) {
    bool known = false;
    for (std::size_t k = 0; k < kSchema.size(); ++k) {
      if (header[i] == kSchema[k]) {
        if (col[k] != -1)
          throw ParseError(1, kSchema[k], "duplicate column in header");
        col[k] = static_cast<int>(i);
        known = true;
      }
    }
    if (!known)
      throw ParseError(1, header[i], "unknown column in header");
  }
  for (std::size_t k = 0; k < kSchema.size(); ++k)
    if (col[k] == -1) throw ParseError(1, kSchema[k], "missing column in header");

  std::vector<RawRecord> records;
  std::vector<std::string> fields;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    split_csv_line(line, fields);
    if (fields.size() != header.size())
      throw ParseError(line_no, "row",
                       "expected " + std::to_string(header.size()) +
                           " fields, got " + std::to_string(fields.size()));
    records.push_back(record_from_fields(
        line_no, fields[col[0]], fields[col[1]], fields[col[2]],
        fields[col[3]], fields[col[4]]));
  }
  return records;
}

std::vector<RawRecord> parse_jsonl(std::istream& in) {
  std::vector<RawRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(line_no, "row", std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object())
      throw ParseError(line_no, "row", "expected a JSON object per line");
    auto get = [&](const char* key) -> std::string {
      if (!obj.contains(key))
        throw ParseError(line_no, key, "missing key");
      const auto& v = obj[key];
      if (v.is_string()) return v.get<std::string>();
      if (v.is_number_integer())
        return std::to_string(v.get<std::int64_t>());
      throw ParseError(line_no, key, "expected string or integer");
    };
    records.push_back(record_from_fields(line_no, get("timestamp"),
                                         get("ioc_id"), get("ioc_type"),
                                         get("creation_date"),
                                         get("event_id")));
  }
  return records;
}

}  // namespace

IocCategory category_of(IocType type) {
  switch (type) {
    case IocType::md5:
    case IocType::sha1:
    case IocType::sha256:
      return IocCategory::hashes;
    case IocType::ip_src:
    case IocType::ip_dst:
      return IocCategory::ips;
    case IocType::email_subject:
    case IocType::email_dst:
      return IocCategory::email;
    case IocType::domain:
    case IocType::hostname:
    case IocType::url:
      return IocCategory::host;
    case IocType::filename:
      return IocCategory::filename;
  }
  return IocCategory::filename;  // unreachable
}

const char* to_string(IocType type) {
  return kTypeNames[static_cast<int>(type)];
}

const char* to_string(IocCategory cat) {
  return kCategoryNames[static_cast<int>(cat)];
}

std::optional<IocType> ioc_type_from_string(const std::string& s) {
  for (int i = 0; i < kNumIocTypes; ++i)
    if (s == kTypeNames[i]) return static_cast<IocType>(i);
  return std::nullopt;
}

std::set<std::string> IocTimeline::event_ids() const {
  std::set<std::string> ids;
  for (const auto& s : sightings) ids.insert(s.event_id);
  return ids;
}

void IocTimeline::finalize() {
  std::stable_sort(sightings.begin(), sightings.end(),
                   [](const Sighting& a, const Sighting& b) {
                     return a.time_s < b.time_s;
                   });
  sighting_days.clear();
  day_multiplicity.clear();
  for (const auto& s : sightings) {
    const Day d = s.day();
    if (sighting_days.empty() || sighting_days.back() != d) {
      sighting_days.push_back(d);
      day_multiplicity.push_back(1);
    } else {
      ++day_multiplicity.back();
    }
  }
}

SightingTrace parse_trace(std::istream& in, TraceFormat format,
                          const ParseOptions& opts) {
  std::vector<RawRecord> records =
      format == TraceFormat::csv ? parse_csv(in) : parse_jsonl(in);
  return build_trace(std::move(records), opts);
}

void write_trace_csv(const SightingTrace& trace, std::ostream& out) {
  out << "timestamp,ioc_id,ioc_type,creation_date,event_id\n";
  for (const auto& tl : trace.timelines) {
    for (const auto& s : tl.sightings) {
      out << format_time_value(s.time_s) << ',' << tl.ioc_id << ','
          << to_string(tl.type) << ',' << tl.creation_day << ',' << s.event_id
          << '\n';
    }
  }
}

void write_trace_jsonl(const SightingTrace& trace, std::ostream& out) {
  for (const auto& tl : trace.timelines) {
    for (const auto& s : tl.sightings) {
      nlohmann::json obj;
      if (s.time_s % kSecondsPerDay == 0)
        obj["timestamp"] = s.time_s / kSecondsPerDay;
      else
        obj["timestamp"] = format_time_value(s.time_s);
      obj["ioc_id"] = tl.ioc_id;
      obj["ioc_type"] = to_string(tl.type);
      obj["creation_date"] = tl.creation_day;
      obj["event_id"] = s.event_id;
      out << obj.dump() << '\n';
    }
  }
}

SummaryStats summarize(const SightingTrace& trace) {
  if (trace.timelines.empty())
    throw DataError("cannot summarize an empty trace");
  SummaryStats st;
  st.n_iocs_with_sightings = 0;
  st.n_iocs_total = trace.total_ioc_population;
  st.trace_duration_days = trace.duration_days();

  bool first = true;
  double sum_first_offsets = 0.0;
  std::int64_t sum_sighting_days = 0;
  for (const auto& tl : trace.timelines) {
    if (first) {
      st.first_creation_day = st.last_creation_day = tl.creation_day;
      first = false;
    } else {
      st.first_creation_day = std::min(st.first_creation_day, tl.creation_day);
      st.last_creation_day = std::max(st.last_creation_day, tl.creation_day);
    }
    if (!tl.has_sightings()) continue;
    ++st.n_iocs_with_sightings;
    st.n_sightings += tl.n_sightings();
    sum_sighting_days += static_cast<std::int64_t>(tl.sighting_days.size());
    if (tl.first_sighting_day() < tl.creation_day) ++st.n_pre_creation_iocs;
    sum_first_offsets += static_cast<double>(
        std::max<Day>(0, tl.first_sighting_day() - tl.creation_day));
    if (st.n_iocs_with_sightings == 1) {
      st.first_sighting_day = tl.first_sighting_day();
      st.last_sighting_day = tl.last_sighting_day();
    } else {
      st.first_sighting_day =
          std::min(st.first_sighting_day, tl.first_sighting_day());
      st.last_sighting_day =
          std::max(st.last_sighting_day, tl.last_sighting_day());
    }
  }
  if (st.n_iocs_with_sightings > 0) {
    st.mean_days_to_first_sighting =
        sum_first_offsets / static_cast<double>(st.n_iocs_with_sightings);
    st.mean_sightings_per_ioc =
        static_cast<double>(st.n_sightings) /
        static_cast<double>(st.n_iocs_with_sightings);
    st.mean_sighting_days_per_ioc =
        static_cast<double>(sum_sighting_days) /
        static_cast<double>(st.n_iocs_with_sightings);
  }
  return st;
}

std::map<Day, std::int64_t> creation_offset_histogram(
    const SightingTrace& trace) {
  std::map<Day, std::int64_t> hist;
  for (const auto& tl : trace.timelines) {
    if (!tl.has_sightings()) continue;
    ++hist[tl.first_sighting_day() - tl.creation_day];
  }
  return hist;
}

CorrelationMatrix category_correlation(const SightingTrace& trace,
                                       CorrelationLevel level) {
  const int n = level == CorrelationLevel::by_type ? kNumIocTypes
                                                   : kNumIocCategories;
  auto group = [&](IocType t) -> int {
    return level == CorrelationLevel::by_type
               ? static_cast<int>(t)
               : static_cast<int>(category_of(t));
  };

  // Which groups appear in each event, via the sightings that reference it.
  std::unordered_map<std::string, std::uint32_t> event_groups;
  for (const auto& tl : trace.timelines) {
    const std::uint32_t bit = 1u << group(tl.type);
    for (const auto& s : tl.sightings) event_groups[s.event_id] |= bit;
  }

  std::vector<std::vector<std::int64_t>> joint(
      n, std::vector<std::int64_t>(n, 0));
  std::vector<std::int64_t> row_total(n, 0);
  for (const auto& tl : trace.timelines) {
    const int r = group(tl.type);
    for (const auto& s : tl.sightings) {
      ++row_total[r];
      const std::uint32_t bits = event_groups[s.event_id];
      for (int c = 0; c < n; ++c)
        if (bits & (1u << c)) ++joint[r][c];
    }
  }

  CorrelationMatrix m;
  m.level = level;
  m.labels.reserve(n);
  for (int i = 0; i < n; ++i)
    m.labels.push_back(level == CorrelationLevel::by_type
                           ? to_string(static_cast<IocType>(i))
                           : to_string(static_cast<IocCategory>(i)));
  m.cells.assign(n, std::vector<double>(n, 0.0));
  m.row_has_sightings.assign(n, false);
  for (int r = 0; r < n; ++r) {
    if (row_total[r] == 0) continue;  // zero-sighting rows stay 0, flagged
    m.row_has_sightings[r] = true;
    for (int c = 0; c < n; ++c)
      m.cells[r][c] = 100.0 * static_cast<double>(joint[r][c]) /
                      static_cast<double>(row_total[r]);
  }
  return m;
}

GapSamples inter_sighting_samples(const SightingTrace& trace,
                                  GapGrouping grouping, GapUnit unit) {
  GapSamples out;
  out.grouping = grouping;
  out.unit = unit;
  auto emit = [&](IocCategory cat, double gap) {
    if (grouping == GapGrouping::by_category)
      out.by_category[cat].push_back(gap);
    else
      out.pooled.push_back(gap);
  };
  for (const auto& tl : trace.timelines) {
    const IocCategory cat = category_of(tl.type);
    if (unit == GapUnit::days) {
      for (std::size_t i = 1; i < tl.sighting_days.size(); ++i)
        emit(cat, static_cast<double>(tl.sighting_days[i] -
                                      tl.sighting_days[i - 1]));
    } else {
      // hour resolution uses raw timestamps; same-instant repeats are dropped
      for (std::size_t i = 1; i < tl.sightings.size(); ++i) {
        const double gap_h =
            static_cast<double>(tl.sightings[i].time_s -
                                tl.sightings[i - 1].time_s) /
            3600.0;
        if (gap_h > 0.0) emit(cat, gap_h);
      }
    }
  }
  return out;
}

std::vector<FirstSightingSample> first_sighting_samples(
    const SightingTrace& trace) {
  std::vector<FirstSightingSample> out;
  for (const auto& tl : trace.timelines) {
    if (!tl.has_sightings()) continue;
    FirstSightingSample s;
    s.ioc_id = tl.ioc_id;
    s.type = tl.type;
    const Day raw = tl.first_sighting_day() - tl.creation_day;
    s.duration = std::max<Day>(0, raw);
    s.clamped = raw < 0;
    s.censored = tl.creation_day == trace.window_start;
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace iocttl
