#include "iocttl/survival.hpp"

#include <algorithm>

namespace iocttl {

std::vector<double> SurvivalCurve::cdf() const {
  std::vector<double> out(survival.size());
  for (std::size_t i = 0; i < survival.size(); ++i) out[i] = 1.0 - survival[i];
  return out;
}

double SurvivalCurve::survival_at(double t) const {
  double s = 1.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] > t) break;
    s = survival[i];
  }
  return s;
}

SurvivalCurve km_estimate(const std::vector<Observation>& observations) {
  if (observations.empty())
    throw DataError("Kaplan-Meier estimate needs at least one observation");
  for (const auto& o : observations)
    if (o.duration < 0.0)
      throw DataError("Kaplan-Meier durations must be nonnegative");

  std::vector<Observation> obs = observations;
  std::sort(obs.begin(), obs.end(), [](const Observation& a,
                                       const Observation& b) {
    if (a.duration != b.duration) return a.duration < b.duration;
    return a.censored < b.censored;  // events precede censorings at ties
  });

  SurvivalCurve curve;
  double s = 1.0;
  std::int64_t at_risk = static_cast<std::int64_t>(obs.size());
  std::size_t i = 0;
  bool any_event = false;
  while (i < obs.size()) {
    const double t = obs[i].duration;
    std::int64_t d = 0, c = 0;
    while (i < obs.size() && obs[i].duration == t) {
      (obs[i].censored ? c : d) += 1;
      ++i;
    }
    if (d > 0) {
      s *= 1.0 - static_cast<double>(d) / static_cast<double>(at_risk);
      any_event = true;
    }
    curve.times.push_back(t);
    curve.survival.push_back(s);
    curve.at_risk.push_back(at_risk);
    curve.events.push_back(d);
    at_risk -= d + c;
  }
  curve.no_events = !any_event;
  return curve;
}

AdjustResult shift_heuristic_adjust(const SightingTrace& trace) {
  AdjustResult out;
  out.trace = trace;
  const Day duration = trace.duration_days();
  for (auto& tl : out.trace.timelines) {
    if (tl.creation_day != trace.window_start) continue;
    if (!tl.has_sightings()) {
      ++out.n_censored_without_sightings;
      continue;
    }
    tl.creation_day = tl.first_sighting_day() - duration;
    ++out.n_adjusted;
  }
  return out;
}

}  // namespace iocttl
