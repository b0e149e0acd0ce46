#include "fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <unistd.h>

#include "presence/serialization.hpp"

namespace fixtures {

using presence::GroundTruthEvent;
using presence::NormalizedTrace;
using presence::PhaseKind;
using presence::RawTrace;
using presence::SessionRecord;

std::vector<TracePoint> sample_polyline(const std::vector<TracePoint>& vertices,
                                        double step) {
  std::vector<TracePoint> out;
  if (vertices.empty()) return out;
  out.push_back(vertices.front());
  for (std::size_t i = 1; i < vertices.size(); ++i) {
    const auto& a = vertices[i - 1];
    const auto& b = vertices[i];
    // Grid points strictly between the two vertices.
    const auto first = static_cast<long>(std::floor(a.t / step + 1e-9)) + 1;
    for (long k = first;; ++k) {
      const double t = static_cast<double>(k) * step;
      if (t >= b.t - 1e-12) break;
      const double f = (t - a.t) / (b.t - a.t);
      out.push_back({t, a.p + f * (b.p - a.p)});
    }
    out.push_back(b);
  }
  return out;
}

NormalizedTrace make_trace(const std::vector<TracePoint>& samples,
                           const std::string& participant, const std::string& group) {
  NormalizedTrace trace;
  trace.samples = samples;
  trace.source = {participant, group, presence::Capture::Digital};
  return trace;
}

RawTrace to_raw(const NormalizedTrace& trace, const presence::Template& tmpl) {
  return presence::denormalize(trace, tmpl);
}

PhaseKind slope_kind(double slope, double eps) {
  if (std::abs(slope) < eps) return PhaseKind::Constant;
  return slope > 0 ? PhaseKind::Raising : PhaseKind::Dropping;
}

PiecewiseTrace random_piecewise(std::mt19937_64& rng, std::size_t min_steps) {
  constexpr std::size_t kSteps = 1000;
  PiecewiseTrace out;
  out.step = 1.0 / static_cast<double>(kSteps);

  std::uniform_int_distribution<std::size_t> length(min_steps, 10 * min_steps);
  std::uniform_int_distribution<int> kind(0, 2);
  std::uniform_real_distribution<double> flat(-0.049, 0.049);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  out.breakpoints.push_back(0);
  while (out.breakpoints.back() < kSteps) {
    const std::size_t from = out.breakpoints.back();
    std::size_t to = std::min(kSteps, from + length(rng));
    if (kSteps - to < min_steps) to = kSteps;
    out.breakpoints.push_back(to);
  }

  double p = std::uniform_real_distribution<double>(-0.5, 0.5)(rng);
  std::vector<double> vertex_p{p};
  for (std::size_t k = 1; k < out.breakpoints.size(); ++k) {
    const double len =
        static_cast<double>(out.breakpoints[k] - out.breakpoints[k - 1]) * out.step;
    double slope = 0.0;
    const int which = kind(rng);
    if (which == 0) {
      slope = flat(rng);
      if (std::abs(p + slope * len) > 1.0) slope = -slope;
    } else {
      double dir = which == 1 ? 1.0 : -1.0;
      double room = dir > 0 ? 1.0 - p : p + 1.0;
      if (room / len < 0.25) {
        dir = -dir;
        room = dir > 0 ? 1.0 - p : p + 1.0;
      }
      const double hi = std::min(8.0, room / len);
      slope = dir * (0.2 + 0.05 + unit(rng) * (hi - 0.25));
    }
    out.slopes.push_back(slope);
    p += slope * len;
    vertex_p.push_back(p);
  }

  for (std::size_t k = 0; k + 1 < out.breakpoints.size(); ++k) {
    const std::size_t a = out.breakpoints[k];
    const std::size_t b = out.breakpoints[k + 1];
    for (std::size_t i = a; i < b; ++i) {
      const double t = static_cast<double>(i) * out.step;
      const double p_i =
          vertex_p[k] + out.slopes[k] * static_cast<double>(i - a) * out.step;
      out.samples.push_back({t, p_i});
    }
  }
  out.samples.push_back({1.0, vertex_p.back()});
  return out;
}

std::vector<std::size_t> kind_change_points(const PiecewiseTrace& trace, double eps) {
  std::vector<std::size_t> out{trace.breakpoints.front()};
  for (std::size_t k = 1; k < trace.slopes.size(); ++k) {
    if (slope_kind(trace.slopes[k], eps) != slope_kind(trace.slopes[k - 1], eps)) {
      out.push_back(trace.breakpoints[k]);
    }
  }
  out.push_back(trace.breakpoints.back());
  return out;
}

RawTrace random_raw(std::mt19937_64& rng, const presence::Template& tmpl) {
  std::uniform_int_distribution<int> count(2, 300);
  std::uniform_real_distribution<double> start(-2.0, 2.0);
  std::uniform_real_distribution<double> dx(0.0, 3.0);
  std::uniform_real_distribution<double> dy(-4.0, 4.0);
  const double y_max = 0.99 * tmpl.presence_half_range_mm;
  const double y_min = -0.99 * tmpl.negative_half_range_mm;
  const double x_max = tmpl.time_axis_len_mm;

  RawTrace raw;
  raw.source = {"R", "A", presence::Capture::Digital};
  double x = std::abs(start(rng));
  double y = start(rng);
  const int n = count(rng);
  for (int i = 0; i < n && x <= x_max; ++i) {
    raw.samples.push_back({x, y});
    x += dx(rng);
    y = std::clamp(y + dy(rng), y_min, y_max);
  }
  if (raw.samples.size() < 2) raw.samples.push_back({x_max * 0.5, 0.0});
  return raw;
}

std::vector<TracePoint> exemplar_vertices() {
  return {{0.0, 0.0},  {0.15, 0.7}, {0.3, 0.7},  {0.32, 0.2}, {0.38, 0.6},
          {0.5, 0.6},  {0.58, 0.3}, {0.7, 0.65}, {0.9, 0.65}, {1.0, -0.95}};
}

NormalizedTrace exemplar_trace() {
  auto samples = sample_polyline(exemplar_vertices(), 0.002);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> jitter(-0.005, 0.005);
  for (std::size_t i = 1; i + 1 < samples.size(); ++i) samples[i].p += jitter(rng);
  auto trace = make_trace(samples, "EX", "A");
  trace.annotations.push_back({0.31, presence::AnnotationKind::BreakNote, "alarm"});
  trace.annotations.push_back({0.55, presence::AnnotationKind::BreakNote, "flicker"});
  return trace;
}

NormalizedTrace prerequisite_violation(char id) {
  auto v = exemplar_vertices();
  NormalizedTrace trace;
  switch (id) {
    case 'a':
      v[0] = {0.05, 0.0};
      v[1] = {0.2, 0.7};
      trace = make_trace(sample_polyline(v, 0.002), "PA");
      break;
    case 'b':
      v.back() = {1.0, -0.2};
      trace = make_trace(sample_polyline(v, 0.002), "PB");
      break;
    case 'c':
      trace = make_trace(sample_polyline(v, 0.002), "PC");
      trace.annotations.push_back({0.44, presence::AnnotationKind::BreakNote, "plateau"});
      break;
    case 'd':
      trace = make_trace(sample_polyline({{0.0, 0.0},
                                          {0.45, 0.7},
                                          {0.55, 0.7},
                                          {0.57, 0.2},
                                          {0.63, 0.6},
                                          {0.85, 0.6},
                                          {1.0, -0.95}},
                                         0.002),
                         "PD");
      break;
    case 'e':
      trace = make_trace(sample_polyline({{0.0, 0.0},
                                          {0.05, 0.7},
                                          {0.3, 0.7},
                                          {0.32, 0.2},
                                          {0.38, 0.6},
                                          {0.92, 0.6},
                                          {1.0, -0.95}},
                                         0.002),
                         "PE");
      break;
    default:
      break;
  }
  return trace;
}

TableSpec detection_table_spec() {
  TableSpec s;
  s.events = {"CM", "WS", "TP", "FAIL", "VIB"};
  s.groups = {"A", "B", "C"};
  s.ticks = {0.2, 0.36, 0.52, 0.68, 0.84};
  // positions[group][event]
  s.positions = {{5, 1, 4, 2, 3}, {4, 3, 5, 2, 1}, {1, 5, 3, 2, 4}};
  auto cell = [](int pct, std::optional<double> sh, std::optional<double> pb) {
    return TableCell{pct / 10, sh, pb};
  };
  s.cells = {
      {cell(100, -0.33, -0.72), cell(90, -0.28, -0.33), cell(70, -0.28, -0.34)},
      {cell(60, -0.38, -0.4), cell(70, -0.25, -0.03), cell(70, -0.28, -0.29)},
      {cell(30, -0.45, -0.15), cell(50, -0.18, 0.08), cell(40, -0.3, -0.11)},
      {cell(70, -0.2, -0.23), cell(90, -0.15, 0.23), cell(50, -0.34, -0.2)},
      {cell(20, -0.1, 0.19), cell(0, std::nullopt, std::nullopt), cell(20, -0.22, 0.09)},
  };
  return s;
}

std::vector<GroundTruthEvent> table_events(const TableSpec& spec) {
  std::vector<GroundTruthEvent> out;
  for (std::size_t g = 0; g < spec.groups.size(); ++g) {
    for (std::size_t e = 0; e < spec.events.size(); ++e) {
      const int pos = spec.positions[g][e];
      out.push_back({spec.events[e], spec.ticks[static_cast<std::size_t>(pos - 1)], true,
                     static_cast<int>(e + 1), spec.groups[g]});
    }
  }
  return out;
}

namespace {

struct Planned {
  double tick;
  double level;  // presence just before the drop
  double p_break;
};

std::vector<TracePoint> table_vertices(const std::vector<Planned>& plan) {
  std::vector<TracePoint> v{{0.0, 0.0}};
  double level = 0.5;
  if (plan.empty()) {
    v.push_back({0.08, level});
  } else if (plan.front().level >= 0.15) {
    level = plan.front().level;
    v.push_back({0.08, level});
  } else {
    const double peak = std::max(plan.front().level + 0.2, 0.3);
    v.push_back({0.08, peak});
    v.push_back({0.13, peak});
    level = plan.front().level;
    v.push_back({0.145, level});
  }
  for (std::size_t k = 0; k < plan.size(); ++k) {
    const double tau = plan[k].tick;
    v.push_back({tau + 0.005, level});
    level = plan[k].p_break;
    v.push_back({tau + 0.02, level});
    if (k + 1 == plan.size()) break;
    const double next = plan[k + 1].level;
    v.push_back({tau + 0.06, level});
    if (next - level >= 0.08) {
      v.push_back({tau + 0.08, next});
    } else {
      // Climb above both levels first so the way down is a clear drop.
      const double peak = std::max(level, next) + 0.15;
      v.push_back({tau + 0.075, peak});
      v.push_back({tau + 0.105, peak});
      v.push_back({tau + 0.12, next});
    }
    level = next;
  }
  v.push_back({0.93, level});
  v.push_back({1.0, -0.95});
  return v;
}

}  // namespace

std::vector<RawTrace> table_traces(const TableSpec& spec, const presence::Template& tmpl) {
  std::vector<RawTrace> out;
  const double step = 0.5 / tmpl.time_axis_len_mm;
  for (std::size_t g = 0; g < spec.groups.size(); ++g) {
    for (int i = 0; i < 10; ++i) {
      std::vector<Planned> plan;
      for (std::size_t e = 0; e < spec.events.size(); ++e) {
        const auto& c = spec.cells[e][g];
        const int slot = (i + 3 * static_cast<int>(e)) % 10;
        if (slot >= c.detected) continue;
        const double tick = spec.ticks[static_cast<std::size_t>(spec.positions[g][e] - 1)];
        plan.push_back({tick, *c.p_break - *c.sh_break, *c.p_break});
      }
      std::sort(plan.begin(), plan.end(),
                [](const auto& a, const auto& b) { return a.tick < b.tick; });
      char id[8];
      std::snprintf(id, sizeof id, "%s%02d", spec.groups[g].c_str(), i + 1);
      auto trace = make_trace(sample_polyline(table_vertices(plan), step), id, spec.groups[g]);
      trace.source.capture = presence::Capture::PaperScan;
      out.push_back(to_raw(trace, tmpl));
    }
  }
  return out;
}

std::vector<std::filesystem::path> write_table_fixture(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto spec = detection_table_spec();
  const presence::Template tmpl;
  std::vector<std::filesystem::path> paths;
  for (const auto& raw : table_traces(spec, tmpl)) {
    const auto path = dir / (raw.source.participant_id + ".json");
    presence::write_text_file(path, presence::to_json(presence::TraceFile{tmpl, raw}).dump());
    paths.push_back(path);
  }
  const auto events = table_events(spec);
  presence::write_text_file(dir / "events.json",
                            presence::events_document(events).dump(2) + "\n");
  return paths;
}

std::vector<SessionRecord> global_stats_records() {
  std::vector<SessionRecord> out;
  const double d_transition = 0.10 * std::sqrt(29.0 / 30.0);
  const double d_exit = 0.05 * std::sqrt(29.0 / 30.0);
  int matched_left = 97;
  for (int i = 0; i < 30; ++i) {
    SessionRecord r;
    r.study_id = "global";
    char id[8];
    std::snprintf(id, sizeof id, "P%02d", i + 1);
    r.participant_id = id;
    r.group = std::string(1, static_cast<char>('A' + i % 3));
    const double sign = i % 2 == 0 ? 1.0 : -1.0;
    presence::DescriptiveModel m;
    m.parameters.t_transition = 0.21 + sign * d_transition;
    m.parameters.t_exit = 0.08 + sign * d_exit;
    m.parameters.t_experience = 1.0 - m.parameters.t_transition - m.parameters.t_exit;
    m.points.p_transition = {0.0, 0.0};
    m.points.p_return = {1.0, -0.93};
    const int n_bips = i < 28 ? 4 : 3;
    for (int b = 0; b < n_bips; ++b) {
      presence::BipReport bip;
      const double t0 = 0.3 + 0.12 * b;
      bip.p_dropping = {t0, 0.5};
      bip.p_break = {t0 + 0.008, 0.2};
      bip.sh_break = -0.3;
      bip.t_dropping = 0.008;
      bip.t_raising = 0.010;
      if (matched_left > 0) {
        bip.matched_event = "E" + std::to_string(b + 1);
        --matched_left;
      }
      r.bips.push_back(bip);
      m.parameters.breaks.push_back({0.008, -0.3, 0.010, std::nullopt});
    }
    r.model = m;
    out.push_back(r);
  }
  return out;
}

std::vector<GroundTruthEvent> intensity_events() {
  return {{"CM", 0.2, true, 1, ""},
          {"WS", 0.36, true, 2, ""},
          {"TP", 0.52, true, 3, ""},
          {"FAIL", 0.68, true, 4, ""},
          {"VIB", 0.84, true, 5, ""}};
}

std::vector<SessionRecord> intensity_records() {
  const std::vector<double> medians{-0.5, -0.3, -0.1, 0.0, 0.2};
  const auto events = intensity_events();
  std::vector<SessionRecord> out;
  for (int r = 0; r < 10; ++r) {
    SessionRecord rec;
    rec.study_id = "intensity";
    rec.participant_id = "I" + std::to_string(r);
    rec.group = "A";
    rec.model = presence::DescriptiveModel{};
    for (std::size_t e = 0; e < events.size(); ++e) {
      presence::BipReport bip;
      const double pb = medians[e] + (r - 4.5) * 0.01;
      bip.p_dropping = {events[e].tick_t + 0.01, pb + 0.2};
      bip.p_break = {events[e].tick_t + 0.02, pb};
      bip.sh_break = -0.2;
      bip.t_dropping = 0.01;
      bip.matched_event = events[e].label;
      rec.bips.push_back(bip);
    }
    out.push_back(rec);
  }
  return out;
}

std::size_t brute_force_match_count(const std::vector<presence::BipReport>& bips,
                                    const std::vector<GroundTruthEvent>& events,
                                    const presence::MatchWindow& window) {
  auto inside = [&](double t, double tick) {
    return t >= tick - window.before && t <= tick + window.after;
  };
  std::vector<bool> used(bips.size(), false);
  std::size_t best = 0;
  std::function<void(std::size_t, std::size_t)> go = [&](std::size_t e, std::size_t count) {
    if (e == events.size()) {
      best = std::max(best, count);
      return;
    }
    go(e + 1, count);
    if (!events[e].expected_bip) return;
    for (std::size_t b = 0; b < bips.size(); ++b) {
      if (used[b]) continue;
      if (!inside(bips[b].p_dropping.t, events[e].tick_t) &&
          !inside(bips[b].p_break.t, events[e].tick_t)) {
        continue;
      }
      used[b] = true;
      go(e + 1, count + 1);
      used[b] = false;
    }
  };
  go(0, 0);
  return best;
}

double naive_quantile(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  const double h = static_cast<double>(values.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(h);
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + (h - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
}

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("presence_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace fixtures
