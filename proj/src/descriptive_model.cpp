#include "presence/descriptive_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "presence/error.hpp"

namespace presence {

namespace {

std::string fmt3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::optional<TracePoint> first_upward_midcross(
    std::span<const TracePoint> samples) {
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!(samples[i].p > 0.0)) continue;
    if (i == 0) return samples[0];
    const auto& a = samples[i - 1];
    const auto& b = samples[i];
    const double u = (0.0 - a.p) / (b.p - a.p);
    return TracePoint{a.t + u * (b.t - a.t), 0.0};
  }
  return std::nullopt;
}

// Value of the drawn line where it first reaches `t`.
std::optional<TracePoint> crossing_at(std::span<const TracePoint> samples,
                                      double t) {
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].t < t) continue;
    if (i == 0 || samples[i].t == t) return samples[i];
    const auto& a = samples[i - 1];
    const auto& b = samples[i];
    const double u = (t - a.t) / (b.t - a.t);
    return TracePoint{t, a.p + u * (b.p - a.p)};
  }
  return std::nullopt;
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

ModelPoints extract_points(std::span<const Phase> phases,
                           const NormalizedTrace& trace) {
  if (phases.empty() || trace.samples.empty()) {
    throw Error(ErrorCode::EmptyInput, "no phases to describe");
  }

  std::optional<std::size_t> exit_index;
  for (std::size_t i = phases.size(); i-- > 0;) {
    if (phases[i].kind == PhaseKind::Constant) continue;
    if (phases[i].kind == PhaseKind::Dropping) exit_index = i;
    break;
  }
  if (!exit_index) {
    throw Error(ErrorCode::ModelIncomplete,
                "prerequisite b: the drawing does not end with a drop back to "
                "the real world, so P_return is undefined");
  }

  ModelPoints pts;
  pts.p_transition = trace.samples.front();
  pts.p_return = trace.samples.back();

  const bool opens_raising = phases.front().kind == PhaseKind::Raising;
  const std::size_t experience_index = opens_raising ? 1 : 0;
  pts.p_experience = opens_raising ? phases.front().end : pts.p_transition;
  pts.p_mentalexit = phases[*exit_index].start;

  if (pts.p_return.t >= 1.0 && pts.p_mentalexit.t <= 1.0) {
    pts.p_physicalexit = crossing_at(trace.samples, 1.0);
  }
  pts.p_midcross = first_upward_midcross(trace.samples);

  for (std::size_t i = experience_index; i < *exit_index; ++i) {
    if (phases[i].kind != PhaseKind::Dropping) continue;
    pts.breaks.push_back({phases[i].start, phases[i].end, i});
  }
  return pts;
}

Parameters compute_parameters(const ModelPoints& points,
                              std::span<const Phase> phases) {
  Parameters out;
  out.t_transition = points.p_experience.t - points.p_transition.t;
  out.sh_transition = points.p_experience.p - points.p_transition.p;
  if (points.p_midcross) {
    out.t_transition_midcross = points.p_midcross->t - points.p_transition.t;
  }
  out.t_experience = points.p_mentalexit.t - points.p_experience.t;
  out.t_exit = points.p_return.t - points.p_mentalexit.t;
  out.t_physical =
      points.p_physicalexit ? points.p_return.t - points.p_physicalexit->t : 0.0;
  out.t_mental = out.t_exit - out.t_physical;

  std::vector<double> drops;
  std::vector<double> raises;
  for (const auto& b : points.breaks) {
    BreakParameters bp;
    bp.sh_break = b.p_break.p - b.p_dropping.p;
    bp.t_dropping = b.p_break.t - b.p_dropping.t;
    const std::size_t next = b.phase_index + 1;
    if (next < phases.size()) {
      if (phases[next].kind == PhaseKind::Raising) {
        bp.t_raising = phases[next].duration;
      } else if (phases[next].kind == PhaseKind::Constant) {
        bp.recovery_plateau = phases[next].duration;
      }
    }
    if (bp.t_raising) {
      drops.push_back(bp.t_dropping);
      raises.push_back(*bp.t_raising);
    }
    out.breaks.push_back(bp);
  }
  if (!raises.empty()) {
    const double mean_raise = mean_of(raises);
    if (mean_raise > 0.0) out.drop_raise_ratio = mean_of(drops) / mean_raise;
  }
  return out;
}

bool ConformanceReport::all_passed() const {
  return std::all_of(entries.begin(), entries.end(),
                     [](const auto& e) { return e.passed; });
}

const PrerequisiteResult& ConformanceReport::at(char id) const {
  for (const auto& e : entries) {
    if (e.id == id) return e;
  }
  throw Error(ErrorCode::InvalidConfig,
              std::string("no prerequisite '") + id + "'");
}

std::vector<char> ConformanceReport::failed() const {
  std::vector<char> out;
  for (const auto& e : entries) {
    if (!e.passed) out.push_back(e.id);
  }
  return out;
}

ConformanceReport check_prerequisites(
    const ModelPoints& points, std::span<const Phase> phases,
    const Parameters& params,
    std::span<const NormalizedAnnotation> annotations,
    const ModelConfig& config) {
  ConformanceReport report;

  {
    const double dx = points.p_transition.t * config.time_axis_len_mm;
    const double dy = points.p_transition.p * config.presence_half_range_mm;
    const double miss = std::hypot(dx, dy);
    const bool ok = miss <= config.start_tolerance_mm;
    report.entries[0] = {'a', ok,
                         "start " + fmt3(miss) + " mm from the start dot (limit " +
                             fmt3(config.start_tolerance_mm) + " mm)"};
  }

  {
    const bool ok = points.p_return.p <= config.return_threshold;
    report.entries[1] = {'b', ok,
                         "P_return presence " + fmt3(points.p_return.p) +
                             (ok ? " <= " : " > ") + fmt3(config.return_threshold)};
  }

  {
    std::vector<std::string> misses;
    std::size_t annotated = 0;
    for (const auto& a : annotations) {
      if (a.kind != AnnotationKind::BreakNote) continue;
      ++annotated;
      const bool on_drop =
          std::any_of(phases.begin(), phases.end(), [&](const Phase& ph) {
            return ph.kind == PhaseKind::Dropping &&
                   a.t >= ph.start.t - config.annotation_slack &&
                   a.t <= ph.end.t + config.annotation_slack;
          });
      if (!on_drop) misses.push_back(a.text.empty() ? fmt3(a.t) : a.text);
    }
    const bool negative = std::all_of(params.breaks.begin(), params.breaks.end(),
                                      [](const auto& b) { return b.sh_break < 0.0; });
    std::string detail;
    if (annotated == 0) {
      detail = "no annotated breaks";
    } else if (misses.empty()) {
      detail = std::to_string(annotated) + " annotated breaks on dropping phases";
    } else {
      detail = "annotated breaks off any dropping phase:";
      for (const auto& m : misses) detail += " '" + m + "'";
    }
    if (!negative) detail += "; a break has non-negative sh_break";
    report.entries[2] = {'c', misses.empty() && negative, detail};
  }

  {
    const bool ok = params.t_experience >= config.experience_min_fraction;
    report.entries[3] = {'d', ok,
                         "experience covers " + fmt3(params.t_experience) +
                             " of the timeline (minimum " +
                             fmt3(config.experience_min_fraction) + ")"};
  }

  {
    const bool transition_ok = params.t_transition > params.t_exit;
    std::string detail = transition_ok
                             ? "transition longer than exit (" +
                                   fmt3(params.t_transition) + " > " +
                                   fmt3(params.t_exit) + ")"
                             : "transition shorter than exit (" +
                                   fmt3(params.t_transition) + " <= " +
                                   fmt3(params.t_exit) + ")";
    std::vector<double> drops;
    std::vector<double> raises;
    for (const auto& b : params.breaks) {
      if (!b.t_raising) continue;
      drops.push_back(b.t_dropping);
      raises.push_back(*b.t_raising);
    }
    bool recovery_ok = true;
    if (raises.empty()) {
      detail += "; no recovered breaks";
    } else {
      const double md = mean_of(drops);
      const double mr = mean_of(raises);
      recovery_ok = mr > md;
      detail += recovery_ok ? "; raising slower than dropping (" + fmt3(mr) +
                                  " > " + fmt3(md) + ")"
                            : "; raising not slower than dropping (" + fmt3(mr) +
                                  " <= " + fmt3(md) + ")";
    }
    report.entries[4] = {'e', transition_ok && recovery_ok, detail};
  }
  return report;
}

DescriptiveModel describe(const NormalizedTrace& trace,
                          const SegmentationParams& params) {
  DescriptiveModel model;
  model.phases = segment_phases(trace, params);
  model.points = extract_points(model.phases, trace);
  model.parameters = compute_parameters(model.points, model.phases);
  return model;
}

}  // namespace presence
