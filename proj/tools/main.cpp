// iocttl: trace-driven TTL analysis for threat-intelligence indicators.
// Every pipeline stage is a subcommand over file-based inputs; JSON outputs
// embed a run manifest, CSV outputs get a manifest sidecar.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>
#include <json.hpp>

#include "iocttl/costopt.hpp"
#include "iocttl/fitting.hpp"
#include "iocttl/manifest.hpp"
#include "iocttl/survival.hpp"
#include "iocttl/synthgen.hpp"
#include "iocttl/trace.hpp"
#include "iocttl/ttlsim.hpp"

using namespace iocttl;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

// ---------------------------------------------------------------------------
// Shared option bundles
// ---------------------------------------------------------------------------

struct TraceInput {
  std::string path;
  std::string format = "auto";  // csv | jsonl | auto (by extension)
  std::optional<std::int64_t> window_start;
  std::optional<std::int64_t> window_end;
  std::optional<std::int64_t> population;

  void attach(CLI::App* cmd) {
    cmd->add_option("--in", path, "input trace file")->required();
    cmd->add_option("--input-format", format, "csv|jsonl (default: by extension)")
        ->check(CLI::IsMember({"auto", "csv", "jsonl"}));
    cmd->add_option("--window-start", window_start,
                    "override the inferred window start (day index)");
    cmd->add_option("--window-end", window_end,
                    "override the inferred window end (day index)");
    cmd->add_option("--population", population,
                    "total IOC population including zero-sighting IOCs");
  }

  SightingTrace load(RunManifest& manifest) const {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open input trace '" + path + "'");
    manifest.inputs.push_back(digest_file(path));
    TraceFormat fmt = TraceFormat::csv;
    if (format == "jsonl" ||
        (format == "auto" && path.size() > 6 &&
         path.substr(path.size() - 6) == ".jsonl"))
      fmt = TraceFormat::jsonl;
    ParseOptions opts;
    opts.window_start = window_start;
    opts.window_end = window_end;
    opts.total_ioc_population = population;
    return parse_trace(in, fmt, opts);
  }
};

struct PolicyFlags {
  std::int64_t ttl = 0;
  std::string reset = "on";
  std::string rearm = "reactivate";
  std::string pre_creation = "exclude";
  bool clip = false;
  std::vector<CLI::Option*> rearm_opts;  // one per subcommand attached to

  void attach(CLI::App* cmd, bool with_ttl) {
    if (with_ttl)
      cmd->add_option("--ttl", ttl, "TTL in days")->required();
    cmd->add_option("--reset", reset, "reset TTL on each sighting (on|off)")
        ->check(CLI::IsMember({"on", "off"}));
    rearm_opts.push_back(cmd->add_option("--rearm", rearm,
                                         "evicted IOC on a missed sighting "
                                         "(reactivate|evict)")
                             ->check(CLI::IsMember({"reactivate", "evict"})));
    cmd->add_option("--pre-creation", pre_creation,
                    "sightings before creation (exclude|miss|hit)")
        ->check(CLI::IsMember({"exclude", "miss", "hit"}));
    cmd->add_flag("--clip", clip,
                  "bill monitoring days inside the trace window only");
  }

  PolicyConfig build() const {
    bool rearm_given = false;
    for (const auto* opt : rearm_opts) rearm_given |= opt->count() > 0;
    if (reset == "off" && rearm_given)
      throw CLI::ValidationError(
          "--rearm conflicts with --reset off: without resets an evicted IOC "
          "never re-arms");
    PolicyConfig p;
    p.ttl_days = ttl;
    p.reset_mode =
        reset == "on" ? ResetMode::with_reset : ResetMode::without_reset;
    p.rearm_mode = rearm == "reactivate" ? RearmMode::miss_reactivates
                                         : RearmMode::evict_forever;
    p.pre_creation_mode =
        pre_creation == "exclude"
            ? PreCreationMode::exclude
            : (pre_creation == "miss" ? PreCreationMode::count_as_miss
                                      : PreCreationMode::count_as_hit);
    p.clip_to_window = clip;
    return p;
  }
};

struct OutputFlags {
  std::string out;       // empty: stdout
  std::string manifest;  // empty: <out>.manifest.json when out is a file

  void attach(CLI::App* cmd) {
    cmd->add_option("--out", out,
                    "output file (default stdout; relative paths resolve "
                    "under $IOCTTL_OUT_DIR)");
    cmd->add_option("--manifest", manifest,
                    "manifest sidecar path (default <out>.manifest.json)");
  }

  std::string resolved_out() const {
    if (out.empty()) return out;
    const char* dir = std::getenv("IOCTTL_OUT_DIR");
    if (dir != nullptr && *dir != '\0' && out.front() != '/')
      return std::string(dir) + "/" + out;
    return out;
  }
};

json policy_json(const PolicyConfig& p) {
  json j;
  j["ttl_days"] = p.ttl_days;
  j["reset"] = p.reset_mode == ResetMode::with_reset ? "on" : "off";
  j["rearm"] = p.effective_rearm() == RearmMode::miss_reactivates
                   ? "reactivate"
                   : "evict";
  j["pre_creation"] =
      p.pre_creation_mode == PreCreationMode::exclude
          ? "exclude"
          : (p.pre_creation_mode == PreCreationMode::count_as_miss ? "miss"
                                                                   : "hit");
  j["clip_to_window"] = p.clip_to_window;
  return j;
}

json ratio_json(const Ratio& r) {
  json j;
  j["num"] = r.num;
  j["den"] = r.den;
  j["decimal"] = r.value();
  j["table"] = r.one_to_string();
  return j;
}

RunManifest make_manifest(const std::string& subcommand, const json& config) {
  RunManifest m;
  m.subcommand = subcommand;
  m.config_json = config.dump();
  m.timestamp_utc = utc_timestamp_now();
  return m;
}

void write_text(const OutputFlags& flags, const std::string& text,
                const RunManifest& manifest, bool is_json) {
  const std::string path = flags.resolved_out();
  if (path.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write output file '" + path + "'");
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';

  std::string mpath = flags.manifest;
  if (mpath.empty() && !is_json) mpath = path + ".manifest.json";
  if (!mpath.empty()) {
    std::ofstream mout(mpath, std::ios::binary);
    if (!mout) throw DataError("cannot write manifest file '" + mpath + "'");
    mout << manifest.to_json() << '\n';
  }
}

void emit_json(const OutputFlags& flags, json payload,
               const RunManifest& manifest) {
  payload["manifest"] = json::parse(manifest.to_json());
  write_text(flags, payload.dump(2), manifest, true);
}

std::int64_t resolve_t_max(const std::string& text, const SightingTrace& trace,
                           BoundMode mode) {
  if (text == "auto") {
    // +1: with half-open windows, covering a span of d days takes TTL d+1
    return deterministic_upper_bound(trace, mode) + 1;
  }
  std::int64_t v = 0;
  try {
    std::size_t used = 0;
    v = std::stoll(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
  } catch (const std::exception&) {
    throw CLI::ValidationError("--t-max expects 'auto' or a positive integer");
  }
  if (v < 1) throw CLI::ValidationError("--t-max must be at least 1");
  return v;
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

int run_ingest(const TraceInput& input, const OutputFlags& output,
               const std::string& to_format) {
  json config{{"in", input.path}, {"to", to_format}};
  RunManifest manifest = make_manifest("ingest", config);
  const SightingTrace trace = input.load(manifest);

  std::ostringstream body;
  if (to_format == "jsonl")
    write_trace_jsonl(trace, body);
  else
    write_trace_csv(trace, body);
  write_text(output, body.str(), manifest, false);

  json report;
  report["n_timelines"] = trace.n_timelines();
  report["population"] = trace.total_ioc_population;
  report["window_start"] = trace.window_start;
  report["window_end"] = trace.window_end;
  std::int64_t n_sightings = 0;
  for (const auto& tl : trace.timelines) n_sightings += tl.n_sightings();
  report["n_sightings"] = n_sightings;
  report["manifest"] = json::parse(manifest.to_json());
  if (!output.resolved_out().empty()) std::cout << report.dump(2) << '\n';
  return kExitOk;
}

int run_summarize(const TraceInput& input, const OutputFlags& output,
                  const std::string& format) {
  json config{{"in", input.path}, {"format", format}};
  RunManifest manifest = make_manifest("summarize", config);
  const SummaryStats st = summarize(input.load(manifest));

  if (format == "csv") {
    std::ostringstream csv;
    csv << "metric,value\n";
    csv << "n_iocs_with_sightings," << st.n_iocs_with_sightings << '\n';
    csv << "n_iocs_total," << st.n_iocs_total << '\n';
    csv << "n_sightings," << st.n_sightings << '\n';
    csv << "n_pre_creation_iocs," << st.n_pre_creation_iocs << '\n';
    csv << "trace_duration_days," << st.trace_duration_days << '\n';
    csv << "mean_days_to_first_sighting," << st.mean_days_to_first_sighting
        << '\n';
    csv << "mean_sightings_per_ioc," << st.mean_sightings_per_ioc << '\n';
    csv << "mean_sighting_days_per_ioc," << st.mean_sighting_days_per_ioc
        << '\n';
    csv << "first_creation_day," << st.first_creation_day << '\n';
    csv << "last_creation_day," << st.last_creation_day << '\n';
    csv << "first_sighting_day," << st.first_sighting_day << '\n';
    csv << "last_sighting_day," << st.last_sighting_day << '\n';
    write_text(output, csv.str(), manifest, false);
    return kExitOk;
  }

  json j;
  j["n_iocs_with_sightings"] = st.n_iocs_with_sightings;
  j["n_iocs_total"] = st.n_iocs_total;
  j["n_sightings"] = st.n_sightings;
  j["n_pre_creation_iocs"] = st.n_pre_creation_iocs;
  j["trace_duration_days"] = st.trace_duration_days;
  j["mean_days_to_first_sighting"] = st.mean_days_to_first_sighting;
  j["mean_sightings_per_ioc"] = st.mean_sightings_per_ioc;
  j["mean_sighting_days_per_ioc"] = st.mean_sighting_days_per_ioc;
  j["first_creation_day"] = st.first_creation_day;
  j["last_creation_day"] = st.last_creation_day;
  j["first_sighting_day"] = st.first_sighting_day;
  j["last_sighting_day"] = st.last_sighting_day;
  emit_json(output, j, manifest);
  return kExitOk;
}

int run_correlate(const TraceInput& input, const OutputFlags& output,
                  const std::string& level, const std::string& format) {
  json config{{"in", input.path}, {"level", level}, {"format", format}};
  RunManifest manifest = make_manifest("correlate", config);
  const auto matrix = category_correlation(
      input.load(manifest), level == "type" ? CorrelationLevel::by_type
                                            : CorrelationLevel::by_category);
  if (format == "json") {
    json j;
    j["level"] = level;
    j["labels"] = matrix.labels;
    j["cells"] = matrix.cells;
    j["row_has_sightings"] = std::vector<int>(matrix.row_has_sightings.begin(),
                                              matrix.row_has_sightings.end());
    emit_json(output, j, manifest);
    return kExitOk;
  }
  std::ostringstream csv;
  csv << "category";
  for (const auto& label : matrix.labels) csv << ',' << label;
  csv << '\n';
  for (std::size_t r = 0; r < matrix.cells.size(); ++r) {
    csv << matrix.labels[r];
    for (double cell : matrix.cells[r]) csv << ',' << cell;
    csv << '\n';
  }
  write_text(output, csv.str(), manifest, false);
  return kExitOk;
}

int run_gaps(const TraceInput& input, const OutputFlags& output,
             const std::string& kind, const std::string& grouping,
             const std::string& unit, const std::string& format) {
  json config{{"in", input.path},
              {"kind", kind},
              {"grouping", grouping},
              {"unit", unit},
              {"format", format}};
  RunManifest manifest = make_manifest("gaps", config);
  const SightingTrace trace = input.load(manifest);

  if (format == "json") {
    json j;
    j["kind"] = kind;
    j["unit"] = unit;
    if (kind == "first") {
      json samples = json::array();
      for (const auto& s : first_sighting_samples(trace))
        samples.push_back({{"ioc_id", s.ioc_id},
                           {"ioc_type", to_string(s.type)},
                           {"duration_days", s.duration},
                           {"censored", s.censored},
                           {"clamped", s.clamped}});
      j["samples"] = samples;
    } else if (grouping == "category") {
      const auto gaps = inter_sighting_samples(
          trace, GapGrouping::by_category,
          unit == "hours" ? GapUnit::hours : GapUnit::days);
      json by_cat = json::object();
      for (const auto& [cat, values] : gaps.by_category)
        by_cat[to_string(cat)] = values;
      j["by_category"] = by_cat;
    } else {
      j["samples"] = inter_sighting_samples(
                         trace, GapGrouping::pooled,
                         unit == "hours" ? GapUnit::hours : GapUnit::days)
                         .pooled;
    }
    emit_json(output, j, manifest);
    return kExitOk;
  }

  std::ostringstream csv;
  if (kind == "first") {
    csv << "ioc_id,ioc_type,duration_days,censored,clamped\n";
    for (const auto& s : first_sighting_samples(trace))
      csv << s.ioc_id << ',' << to_string(s.type) << ',' << s.duration << ','
          << (s.censored ? 1 : 0) << ',' << (s.clamped ? 1 : 0) << '\n';
  } else {
    const auto gaps = inter_sighting_samples(
        trace,
        grouping == "category" ? GapGrouping::by_category : GapGrouping::pooled,
        unit == "hours" ? GapUnit::hours : GapUnit::days);
    const char* col = unit == "hours" ? "gap_hours" : "gap_days";
    if (grouping == "category") {
      csv << "category," << col << '\n';
      for (const auto& [cat, values] : gaps.by_category)
        for (double v : values) csv << to_string(cat) << ',' << v << '\n';
    } else {
      csv << col << '\n';
      for (double v : gaps.pooled) csv << v << '\n';
    }
  }
  write_text(output, csv.str(), manifest, false);
  return kExitOk;
}

int run_simulate(const TraceInput& input, const OutputFlags& output,
                 const PolicyFlags& policy_flags, const std::string& format) {
  const PolicyConfig policy = policy_flags.build();
  json config{{"in", input.path}, {"format", format}};
  config["policy"] = policy_json(policy);
  RunManifest manifest = make_manifest("simulate", config);
  const SightingTrace trace = input.load(manifest);
  const SimAggregate agg = simulate_trace(trace, policy);
  if (format == "csv") {
    std::ostringstream csv;
    csv << "metric,value\n";
    csv << "n_mon," << agg.n_mon << '\n';
    csv << "n_miss," << agg.n_miss << '\n';
    csv << "n_hit," << agg.n_hit << '\n';
    csv << "population," << trace.total_ioc_population << '\n';
    write_text(output, csv.str(), manifest, false);
    return kExitOk;
  }
  json j;
  j["n_mon"] = agg.n_mon;
  j["n_miss"] = agg.n_miss;
  j["n_hit"] = agg.n_hit;
  j["population"] = trace.total_ioc_population;
  j["policy"] = policy_json(policy);
  emit_json(output, j, manifest);
  return kExitOk;
}

struct SweepFlags {
  std::string t_max = "auto";
  std::int64_t step = 1;
  std::string bound_mode = "creation";

  void attach(CLI::App* cmd) {
    cmd->add_option("--t-max", t_max, "grid maximum: auto|N");
    cmd->add_option("--step", step, "grid step in days")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--bound-mode", bound_mode,
                    "auto bound measures spans from creation|first sighting")
        ->check(CLI::IsMember({"creation", "first"}));
  }

  std::vector<std::int64_t> grid(const SightingTrace& trace) const {
    const BoundMode mode = bound_mode == "creation"
                               ? BoundMode::creation_to_last
                               : BoundMode::first_to_last;
    return default_grid(resolve_t_max(t_max, trace, mode), step);
  }
};

int run_sweep(const TraceInput& input, const OutputFlags& output,
              const PolicyFlags& policy_flags, const SweepFlags& sweep_flags,
              double c_mon, double c_miss, const std::string& format) {
  const PolicyConfig policy = policy_flags.build();
  json config{{"in", input.path},   {"t_max", sweep_flags.t_max},
              {"step", sweep_flags.step}, {"c_mon", c_mon},
              {"c_miss", c_miss},   {"format", format}};
  config["policy"] = policy_json(policy);
  RunManifest manifest = make_manifest("sweep", config);
  const SightingTrace trace = input.load(manifest);
  const SweepCurves curves = sweep(trace, policy, sweep_flags.grid(trace));
  const auto cost = total_cost(curves, CostParams{c_mon, c_miss});

  if (format == "json") {
    json j;
    j["t_grid"] = curves.t_grid;
    j["g"] = curves.g;
    j["h"] = curves.h;
    j["cost"] = cost;
    j["population"] = curves.population;
    j["policy"] = policy_json(policy);
    emit_json(output, j, manifest);
    return kExitOk;
  }
  std::ostringstream csv;
  csv << "T,g,h,cost\n";
  for (std::size_t j = 0; j < curves.size(); ++j)
    csv << curves.t_grid[j] << ',' << curves.g[j] << ',' << curves.h[j] << ','
        << cost[j] << '\n';
  write_text(output, csv.str(), manifest, false);
  return kExitOk;
}

int run_optimal(const TraceInput& input, const OutputFlags& output,
                const PolicyFlags& policy_flags, const SweepFlags& sweep_flags,
                double c_mon, double c_miss, const std::string& format) {
  const PolicyConfig policy = policy_flags.build();
  json config{{"in", input.path},
              {"c_mon", c_mon},
              {"c_miss", c_miss},
              {"t_max", sweep_flags.t_max},
              {"step", sweep_flags.step},
              {"format", format}};
  config["policy"] = policy_json(policy);
  RunManifest manifest = make_manifest("optimal", config);
  const SightingTrace trace = input.load(manifest);
  const SweepCurves curves = sweep(trace, policy, sweep_flags.grid(trace));
  const CostParams params{c_mon, c_miss};
  const std::int64_t t_star = optimal_ttl(curves, params);
  const auto cost = total_cost(curves, params);
  double best = cost.front();
  for (double c : cost) best = std::min(best, c);

  if (format == "csv") {
    std::ostringstream csv;
    csv << "metric,value\n";
    csv << "t_star," << t_star << '\n';
    csv << "ratio," << params.ratio() << '\n';
    csv << "cost_at_optimum," << best << '\n';
    csv << "t_max," << curves.t_max() << '\n';
    write_text(output, csv.str(), manifest, false);
    return kExitOk;
  }
  json j;
  j["t_star"] = t_star;
  j["ratio"] = params.ratio();
  j["c_mon"] = c_mon;
  j["c_miss"] = c_miss;
  j["cost_at_optimum"] = best;
  j["t_max"] = curves.t_max();
  j["tie_break"] = "smallest_t";
  j["policy"] = policy_json(policy);
  emit_json(output, j, manifest);
  return kExitOk;
}

int run_thresholds(const TraceInput& input, const OutputFlags& output,
                   const PolicyFlags& policy_flags,
                   const SweepFlags& sweep_flags, bool no_trim,
                   std::size_t r_points, const std::string& format) {
  json config{{"in", input.path},
              {"t_max", sweep_flags.t_max},
              {"step", sweep_flags.step},
              {"trim_to_coverage", !no_trim},
              {"r_points", r_points},
              {"format", format}};
  RunManifest manifest = make_manifest("thresholds", config);
  const SightingTrace trace = input.load(manifest);

  json variants;
  for (const auto reset : {ResetMode::with_reset, ResetMode::without_reset}) {
    PolicyConfig policy = policy_flags.build();
    policy.reset_mode = reset;
    SweepCurves curves = sweep(trace, policy, sweep_flags.grid(trace));
    if (!no_trim) curves = trim_to_coverage(curves);
    const ThresholdPair th = thresholds(curves);

    json v;
    v["r_lower"] = ratio_json(th.r_lower);
    v["r_upper"] = ratio_json(th.r_upper);
    v["t_max"] = th.t_max;
    v["degenerate"] = th.degenerate;
    if (!th.degenerate && th.r_lower.num > 0) {
      const double lo = th.r_lower.value() / 10.0;
      const double hi = std::max(th.r_upper.value() * 10.0, lo * 100.0);
      const auto est =
          brute_force_thresholds(curves, log_spaced(lo, hi, r_points));
      json bf;
      bf["r_lower"] = est.r_lower;
      bf["r_upper"] = est.r_upper;
      bf["grid_lo"] = lo;
      bf["grid_hi"] = hi;
      bf["points"] = r_points;
      v["brute_force"] = bf;
    }
    variants[reset == ResetMode::with_reset ? "with_reset" : "without_reset"] =
        v;
  }

  if (format == "csv") {
    std::ostringstream csv;
    csv << "bound,with_reset,without_reset\n";
    for (const char* bound : {"r_lower", "r_upper"}) {
      csv << bound;
      for (const char* variant : {"with_reset", "without_reset"})
        csv << ",\"" << variants[variant][bound]["table"].get<std::string>()
            << '"';
      csv << '\n';
    }
    csv << "t_max";
    for (const char* variant : {"with_reset", "without_reset"})
      csv << ',' << variants[variant]["t_max"].get<std::int64_t>();
    csv << '\n';
    write_text(output, csv.str(), manifest, false);
    return kExitOk;
  }
  json j;
  j["variants"] = variants;
  j["tie_break"] = "smallest_t";
  j["population"] = trace.total_ioc_population;
  emit_json(output, j, manifest);
  return kExitOk;
}

int run_best_ttl_curve(const TraceInput& input, const OutputFlags& output,
                       const PolicyFlags& policy_flags,
                       const SweepFlags& sweep_flags,
                       const std::string& c_miss_range, double c_mon,
                       std::size_t points, const std::string& format) {
  const auto colon = c_miss_range.find(':');
  if (colon == std::string::npos)
    throw CLI::ValidationError("--c-miss-range expects LO:HI");
  double lo = 0.0, hi = 0.0;
  try {
    lo = std::stod(c_miss_range.substr(0, colon));
    hi = std::stod(c_miss_range.substr(colon + 1));
  } catch (const std::exception&) {
    throw CLI::ValidationError("--c-miss-range expects numeric LO:HI");
  }
  if (!(lo > 0.0) || !(hi > lo))
    throw CLI::ValidationError("--c-miss-range expects 0 < LO < HI");

  const PolicyConfig policy = policy_flags.build();
  json config{{"in", input.path},
              {"c_miss_range", c_miss_range},
              {"c_mon", c_mon},
              {"points", points},
              {"t_max", sweep_flags.t_max},
              {"step", sweep_flags.step}};
  config["policy"] = policy_json(policy);
  RunManifest manifest = make_manifest("best-ttl-curve", config);
  const SightingTrace trace = input.load(manifest);
  const SweepCurves curves = sweep(trace, policy, sweep_flags.grid(trace));

  if (format == "json") {
    json j;
    j["c_miss_over_c_mon"] = json::array();
    j["t_star"] = json::array();
    for (const double c_miss : log_spaced(lo, hi, points)) {
      j["c_miss_over_c_mon"].push_back(c_miss / c_mon);
      j["t_star"].push_back(optimal_ttl(curves, CostParams{c_mon, c_miss}));
    }
    emit_json(output, j, manifest);
    return kExitOk;
  }
  std::ostringstream csv;
  csv << "c_miss_over_c_mon,t_star\n";
  for (const double c_miss : log_spaced(lo, hi, points))
    csv << c_miss / c_mon << ','
        << optimal_ttl(curves, CostParams{c_mon, c_miss}) << '\n';
  write_text(output, csv.str(), manifest, false);
  return kExitOk;
}

int run_fit(const TraceInput& input, const OutputFlags& output,
            const std::string& family, const std::string& group_by,
            const std::string& unit, double zero_epsilon,
            const std::string& format) {
  json config{{"in", input.path},
              {"family", family},
              {"group_by", group_by},
              {"unit", unit},
              {"zero_epsilon", zero_epsilon},
              {"format", format},
              {"method", "least squares in transform space"},
              {"rmse_space", "linear CCDF"}};
  RunManifest manifest = make_manifest("fit", config);
  const SightingTrace trace = input.load(manifest);

  const auto grouping = group_by == "category" ? GapGrouping::by_category
                                               : GapGrouping::pooled;
  const auto gaps = inter_sighting_samples(
      trace, grouping, unit == "hours" ? GapUnit::hours : GapUnit::days);

  std::vector<std::pair<std::string, std::vector<double>>> groups;
  if (grouping == GapGrouping::by_category) {
    for (const auto& [cat, values] : gaps.by_category)
      groups.emplace_back(to_string(cat), values);
  } else {
    groups.emplace_back("all", gaps.pooled);
  }

  json rows = json::array();
  for (const auto& [name, samples] : groups) {
    for (const char* fam : {"pareto", "weibull"}) {
      if (family != "both" && family != fam) continue;
      json row{{"group", name}, {"family", fam}};
      try {
        const auto ccdf = empirical_ccdf(samples, zero_epsilon);
        const FitResult fit = fam == std::string("pareto")
                                  ? fit_pareto(ccdf)
                                  : fit_weibull(ccdf);
        row["shape"] = fit.shape;
        row["scale"] = fit.scale;
        row["rmse"] = fit.rmse;
        row["points_used"] = fit.points_used;
        row["note"] = ccdf.zero_shifted ? "zero_shifted" : "";
      } catch (const DataError& e) {
        row["note"] = e.what();
      }
      rows.push_back(std::move(row));
    }
  }

  if (format == "json") {
    json j;
    j["fits"] = rows;
    emit_json(output, j, manifest);
    return kExitOk;
  }
  std::ostringstream csv;
  csv << "group,family,shape,scale,rmse,points_used,note\n";
  for (const auto& row : rows) {
    csv << row["group"].get<std::string>() << ','
        << row["family"].get<std::string>() << ',';
    if (row.contains("shape"))
      csv << row["shape"].get<double>() << ',' << row["scale"].get<double>()
          << ',' << row["rmse"].get<double>() << ','
          << row["points_used"].get<std::size_t>() << ','
          << row["note"].get<std::string>() << '\n';
    else
      csv << ",,,0,\"" << row["note"].get<std::string>() << "\"\n";
  }
  write_text(output, csv.str(), manifest, false);
  return kExitOk;
}

int run_survival(const TraceInput& input, const OutputFlags& output,
                 const std::string& method, const std::string& format) {
  json config{{"in", input.path}, {"method", method}, {"format", format}};
  RunManifest manifest = make_manifest("survival", config);
  const SightingTrace trace = input.load(manifest);

  std::vector<Observation> obs;
  if (method == "heuristic") {
    const auto adjusted = shift_heuristic_adjust(trace);
    for (const auto& s : first_sighting_samples(adjusted.trace))
      obs.push_back({static_cast<double>(s.duration), false});
  } else {
    for (const auto& s : first_sighting_samples(trace))
      obs.push_back(
          {static_cast<double>(s.duration), method == "km" && s.censored});
  }
  const SurvivalCurve curve = km_estimate(obs);
  const auto cdf = curve.cdf();

  if (format == "json") {
    json j;
    j["method"] = method;
    j["t"] = curve.times;
    j["cdf"] = cdf;
    j["survival"] = curve.survival;
    j["no_events"] = curve.no_events;
    emit_json(output, j, manifest);
    return kExitOk;
  }
  std::ostringstream csv;
  csv << "t,cdf\n";
  for (std::size_t i = 0; i < curve.times.size(); ++i)
    csv << curve.times[i] << ',' << cdf[i] << '\n';
  write_text(output, csv.str(), manifest, false);
  return kExitOk;
}

int run_adjust(const TraceInput& input, const OutputFlags& output,
               const std::string& to_format) {
  json config{{"in", input.path}, {"to", to_format}};
  RunManifest manifest = make_manifest("adjust", config);
  const auto res = shift_heuristic_adjust(input.load(manifest));

  std::ostringstream body;
  if (to_format == "jsonl")
    write_trace_jsonl(res.trace, body);
  else
    write_trace_csv(res.trace, body);
  write_text(output, body.str(), manifest, false);

  json report;
  report["n_adjusted"] = res.n_adjusted;
  report["n_censored_without_sightings"] = res.n_censored_without_sightings;
  report["window_start"] = res.trace.window_start;
  report["window_end"] = res.trace.window_end;
  report["manifest"] = json::parse(manifest.to_json());
  if (!output.resolved_out().empty()) std::cout << report.dump(2) << '\n';
  return kExitOk;
}

int run_synth(const std::string& config_path, const OutputFlags& output,
              const std::string& to_format) {
  std::ifstream in(config_path, std::ios::binary);
  if (!in) throw DataError("cannot open synth config '" + config_path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const SynthConfig cfg = synth_config_from_json(buffer.str());

  RunManifest manifest =
      make_manifest("synth", json::parse(synth_config_to_json(cfg)));
  manifest.inputs.push_back(digest_file(config_path));
  const SightingTrace trace = generate(cfg);

  std::ostringstream body;
  if (to_format == "jsonl")
    write_trace_jsonl(trace, body);
  else
    write_trace_csv(trace, body);
  write_text(output, body.str(), manifest, false);

  json report;
  report["n_timelines"] = trace.n_timelines();
  report["population"] = trace.total_ioc_population;
  report["window_start"] = trace.window_start;
  report["window_end"] = trace.window_end;
  report["rng"] = kSynthRngAlgorithm;
  report["manifest"] = json::parse(manifest.to_json());
  if (!output.resolved_out().empty()) std::cout << report.dump(2) << '\n';
  return kExitOk;
}

int run_ballpark(CLI::App* cmd, const TraceInput& input,
                 const OutputFlags& output, std::int64_t n_sightings,
                 std::int64_t n_iocs, std::int64_t duration,
                 const std::string& format) {
  SummaryStats st;
  RunManifest manifest =
      make_manifest("ballpark", json{{"n_sightings", n_sightings},
                                     {"n_iocs_total", n_iocs},
                                     {"trace_duration_days", duration}});
  if (cmd->count("--in") > 0) st = summarize(input.load(manifest));
  if (n_sightings > 0) st.n_sightings = n_sightings;
  if (n_iocs > 0) st.n_iocs_total = n_iocs;
  if (duration > 0) st.trace_duration_days = duration;

  const BallparkThresholds bp = ballpark_thresholds(st);
  if (format == "csv") {
    std::ostringstream csv;
    csv << "bound,decimal,table\n";
    csv << "r_lower," << bp.r_lower.value() << ",\""
        << bp.r_lower.one_to_string() << "\"\n";
    csv << "r_upper," << bp.r_upper.value() << ",\""
        << bp.r_upper.one_to_string() << "\"\n";
    write_text(output, csv.str(), manifest, false);
    return kExitOk;
  }
  json j;
  j["r_lower"] = ratio_json(bp.r_lower);
  j["r_upper"] = ratio_json(bp.r_upper);
  j["inputs"] = {{"n_sightings", st.n_sightings},
                 {"n_iocs_total", st.n_iocs_total},
                 {"trace_duration_days", st.trace_duration_days}};
  emit_json(output, j, manifest);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"trace-driven TTL analysis for threat-intelligence indicators"};
  app.require_subcommand(1);

  int threads = 0;
  app.add_option("--threads", threads, "cap OpenMP worker threads");

  TraceInput input;
  OutputFlags output;
  PolicyFlags policy;
  SweepFlags sweep_flags;

  std::string to_format = "csv";
  std::string format = "json";
  std::string level = "category";
  std::string gap_kind = "inter";
  std::string grouping = "pooled";
  std::string unit = "days";
  std::string sweep_format = "csv";
  std::string csv_format = "csv";  // commands whose natural output is CSV
  std::string family = "both";
  std::string group_by = "category";
  std::string method = "km";
  std::string c_miss_range = "1:100000000";
  std::string synth_config;
  double c_mon = 1.0;
  double c_miss = 1.0;
  double zero_epsilon = 0.5;
  std::size_t curve_points = 200;
  std::size_t r_points = 1000;
  bool no_trim = false;
  std::int64_t bp_sightings = 0, bp_iocs = 0, bp_duration = 0;

  auto* ingest = app.add_subcommand("ingest", "validate and normalize a trace");
  input.attach(ingest);
  output.attach(ingest);
  ingest->add_option("--to", to_format, "output schema (csv|jsonl)")
      ->check(CLI::IsMember({"csv", "jsonl"}));

  auto* summarize_cmd =
      app.add_subcommand("summarize", "general statistics of a trace");
  input.attach(summarize_cmd);
  output.attach(summarize_cmd);
  summarize_cmd->add_option("--format", format, "json|csv")
      ->check(CLI::IsMember({"json", "csv"}));

  auto* correlate =
      app.add_subcommand("correlate", "event co-occurrence matrix");
  input.attach(correlate);
  output.attach(correlate);
  correlate->add_option("--level", level, "type|category")
      ->check(CLI::IsMember({"type", "category"}));
  correlate->add_option("--format", format, "json|csv")
      ->check(CLI::IsMember({"json", "csv"}));

  auto* gaps =
      app.add_subcommand("gaps", "inter-sighting or first-sighting samples");
  input.attach(gaps);
  output.attach(gaps);
  gaps->add_option("--kind", gap_kind, "inter|first")
      ->check(CLI::IsMember({"inter", "first"}));
  gaps->add_option("--grouping", grouping, "pooled|category")
      ->check(CLI::IsMember({"pooled", "category"}));
  gaps->add_option("--unit", unit, "days|hours")
      ->check(CLI::IsMember({"days", "hours"}));
  gaps->add_option("--format", csv_format, "csv|json")
      ->check(CLI::IsMember({"json", "csv"}));

  auto* simulate = app.add_subcommand("simulate", "TTL eviction over a trace");
  input.attach(simulate);
  output.attach(simulate);
  policy.attach(simulate, true);
  simulate->add_option("--format", format, "json|csv")
      ->check(CLI::IsMember({"json", "csv"}));

  auto* sweep_cmd =
      app.add_subcommand("sweep", "monitoring/miss curves over a TTL grid");
  input.attach(sweep_cmd);
  output.attach(sweep_cmd);
  policy.attach(sweep_cmd, false);
  sweep_flags.attach(sweep_cmd);
  sweep_cmd->add_option("--c-mon", c_mon, "monitoring cost per IOC-day");
  sweep_cmd->add_option("--c-miss", c_miss, "cost per missed sighting");
  sweep_cmd->add_option("--format", sweep_format, "csv|json")
      ->check(CLI::IsMember({"json", "csv"}));

  auto* optimal =
      app.add_subcommand("optimal", "cost-minimizing TTL for given costs");
  input.attach(optimal);
  output.attach(optimal);
  policy.attach(optimal, false);
  sweep_flags.attach(optimal);
  optimal->add_option("--c-mon", c_mon, "monitoring cost per IOC-day");
  optimal->add_option("--c-miss", c_miss, "cost per missed sighting");
  optimal->add_option("--format", format, "json|csv")
      ->check(CLI::IsMember({"json", "csv"}));

  auto* thresholds_cmd = app.add_subcommand(
      "thresholds", "never-monitor and always-monitor cost-ratio bounds");
  input.attach(thresholds_cmd);
  output.attach(thresholds_cmd);
  policy.attach(thresholds_cmd, false);
  sweep_flags.attach(thresholds_cmd);
  thresholds_cmd->add_flag("--no-trim", no_trim,
                           "keep grid points past full coverage");
  thresholds_cmd->add_option("--r-points", r_points,
                             "brute-force ratio grid size");
  thresholds_cmd->add_option("--format", format, "json|csv")
      ->check(CLI::IsMember({"json", "csv"}));

  auto* best_curve = app.add_subcommand(
      "best-ttl-curve", "optimal TTL as a function of the miss cost");
  input.attach(best_curve);
  output.attach(best_curve);
  policy.attach(best_curve, false);
  sweep_flags.attach(best_curve);
  best_curve->add_option("--c-miss-range", c_miss_range, "LO:HI, log-swept");
  best_curve->add_option("--c-mon", c_mon, "monitoring cost per IOC-day");
  best_curve->add_option("--points", curve_points, "ratio sample count");
  best_curve->add_option("--format", csv_format, "csv|json")
      ->check(CLI::IsMember({"json", "csv"}));

  auto* fit = app.add_subcommand("fit", "Pareto/Weibull fits of gap CCDFs");
  input.attach(fit);
  output.attach(fit);
  fit->add_option("--family", family, "pareto|weibull|both")
      ->check(CLI::IsMember({"pareto", "weibull", "both"}));
  fit->add_option("--group-by", group_by, "category|pooled")
      ->check(CLI::IsMember({"category", "pooled"}));
  fit->add_option("--unit", unit, "days|hours")
      ->check(CLI::IsMember({"days", "hours"}));
  fit->add_option("--zero-epsilon", zero_epsilon,
                  "shift applied to zero-valued samples");
  fit->add_option("--format", csv_format, "csv|json")
      ->check(CLI::IsMember({"json", "csv"}));

  auto* survival_cmd =
      app.add_subcommand("survival", "time-to-first-sighting CDF");
  input.attach(survival_cmd);
  output.attach(survival_cmd);
  survival_cmd->add_option("--method", method, "km|heuristic|ecdf")
      ->check(CLI::IsMember({"km", "heuristic", "ecdf"}));
  survival_cmd->add_option("--format", csv_format, "csv|json")
      ->check(CLI::IsMember({"json", "csv"}));

  auto* adjust =
      app.add_subcommand("adjust", "rewrite censored creation dates");
  input.attach(adjust);
  output.attach(adjust);
  adjust->add_option("--to", to_format, "output schema (csv|jsonl)")
      ->check(CLI::IsMember({"csv", "jsonl"}));

  auto* synth = app.add_subcommand("synth", "generate a synthetic trace");
  output.attach(synth);
  synth->add_option("--config", synth_config, "synth config JSON file")
      ->required();
  synth->add_option("--to", to_format, "output schema (csv|jsonl)")
      ->check(CLI::IsMember({"csv", "jsonl"}));

  auto* ballpark = app.add_subcommand(
      "ballpark", "back-of-the-envelope threshold estimates");
  ballpark->add_option("--in", input.path, "input trace file");
  ballpark->add_option("--input-format", input.format, "csv|jsonl");
  ballpark->add_option("--population", input.population,
                       "total IOC population");
  output.attach(ballpark);
  ballpark->add_option("--n-sightings", bp_sightings, "override sighting count");
  ballpark->add_option("--n-iocs", bp_iocs, "override total IOC count");
  ballpark->add_option("--duration", bp_duration, "override duration in days");
  ballpark->add_option("--format", format, "json|csv")
      ->check(CLI::IsMember({"json", "csv"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#endif
    if (ingest->parsed()) return run_ingest(input, output, to_format);
    if (summarize_cmd->parsed()) return run_summarize(input, output, format);
    if (correlate->parsed()) return run_correlate(input, output, level, format);
    if (gaps->parsed())
      return run_gaps(input, output, gap_kind, grouping, unit, csv_format);
    if (simulate->parsed()) return run_simulate(input, output, policy, format);
    if (sweep_cmd->parsed())
      return run_sweep(input, output, policy, sweep_flags, c_mon, c_miss,
                       sweep_format);
    if (optimal->parsed())
      return run_optimal(input, output, policy, sweep_flags, c_mon, c_miss,
                         format);
    if (thresholds_cmd->parsed())
      return run_thresholds(input, output, policy, sweep_flags, no_trim,
                            r_points, format);
    if (best_curve->parsed())
      return run_best_ttl_curve(input, output, policy, sweep_flags,
                                c_miss_range, c_mon, curve_points, csv_format);
    if (fit->parsed())
      return run_fit(input, output, family, group_by, unit, zero_epsilon,
                     csv_format);
    if (survival_cmd->parsed())
      return run_survival(input, output, method, csv_format);
    if (adjust->parsed()) return run_adjust(input, output, to_format);
    if (synth->parsed()) return run_synth(synth_config, output, to_format);
    if (ballpark->parsed())
      return run_ballpark(ballpark, input, output, bp_sightings, bp_iocs,
                          bp_duration, format);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
