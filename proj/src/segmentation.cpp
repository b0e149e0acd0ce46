#include "presence/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>

#include "presence/error.hpp"

namespace presence {

namespace {

double slope_of(const TracePoint& a, const TracePoint& b) {
  const double dt = b.t - a.t;
  const double dp = b.p - a.p;
  if (dt > 0.0) return dp / dt;
  if (dp > 0.0) return std::numeric_limits<double>::infinity();
  if (dp < 0.0) return -std::numeric_limits<double>::infinity();
  return 0.0;
}

PhaseKind kind_of(double slope, double eps_slope) {
  if (std::abs(slope) < eps_slope) return PhaseKind::Constant;
  return slope > 0.0 ? PhaseKind::Raising : PhaseKind::Dropping;
}

// A phase under construction: an inclusive vertex range.
struct Run {
  std::size_t first;
  std::size_t last;
  PhaseKind kind;
};

class RunReducer {
 public:
  RunReducer(std::vector<TracePoint> vertices, const ClassifyParams& params)
      : v_(std::move(vertices)), params_(params) {}

  std::vector<Phase> reduce() {
    for (std::size_t i = 0; i + 1 < v_.size(); ++i) {
      runs_.push_back({i, i + 1, kind_of(slope_of(v_[i], v_[i + 1]),
                                         params_.eps_slope)});
    }
    merge_same_kind();
    while (auto idx = next_jitter()) {
      absorb(*idx);
      merge_same_kind();
    }

    std::vector<Phase> phases;
    phases.reserve(runs_.size());
    for (const auto& r : runs_) {
      const auto& a = v_[r.first];
      const auto& b = v_[r.last];
      phases.push_back({r.kind, a, b, b.t - a.t, b.p - a.p});
    }
    return phases;
  }

 private:
  double duration(const Run& r) const { return v_[r.last].t - v_[r.first].t; }
  double shift(const Run& r) const { return v_[r.last].p - v_[r.first].p; }

  void merge_same_kind() {
    std::vector<Run> merged;
    for (const auto& r : runs_) {
      if (!merged.empty() && merged.back().kind == r.kind) {
        merged.back().last = r.last;
      } else {
        merged.push_back(r);
      }
    }
    runs_ = std::move(merged);
  }

  std::optional<std::size_t> next_jitter() const {
    if (runs_.size() < 2) return std::nullopt;
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < runs_.size(); ++i) {
      const auto& r = runs_[i];
      if (duration(r) < params_.min_duration &&
          std::abs(shift(r)) < params_.absorb_shift_max) {
        if (!best || duration(r) < duration(runs_[*best])) best = i;
      }
    }
    return best;
  }

  double chord_error(std::size_t first, std::size_t last) const {
    double err = 0.0;
    for (std::size_t i = first + 1; i < last; ++i) {
      const double d = point_segment_distance(v_[i], v_[first], v_[last]);
      err += d * d;
    }
    return err;
  }

  void absorb(std::size_t idx) {
    const bool has_left = idx > 0;
    const bool has_right = idx + 1 < runs_.size();
    bool go_left = has_left;
    if (has_left && has_right) {
      const double left_err = chord_error(runs_[idx - 1].first, runs_[idx].last);
      const double right_err = chord_error(runs_[idx].first, runs_[idx + 1].last);
      go_left = left_err <= right_err;
    }
    const std::size_t lo = go_left ? idx - 1 : idx;
    Run merged{runs_[lo].first, runs_[lo + 1].last, PhaseKind::Constant};
    merged.kind =
        kind_of(slope_of(v_[merged.first], v_[merged.last]), params_.eps_slope);
    runs_[lo] = merged;
    runs_.erase(runs_.begin() + static_cast<std::ptrdiff_t>(lo) + 1);
  }

  std::vector<TracePoint> v_;
  ClassifyParams params_;
  std::vector<Run> runs_;
};

}  // namespace

std::string_view to_string(PhaseKind kind) {
  switch (kind) {
    case PhaseKind::Constant: return "constant";
    case PhaseKind::Raising: return "raising";
    case PhaseKind::Dropping: return "dropping";
  }
  return "constant";
}

PhaseKind phase_kind_from_string(std::string_view name) {
  if (name == "constant") return PhaseKind::Constant;
  if (name == "raising") return PhaseKind::Raising;
  if (name == "dropping") return PhaseKind::Dropping;
  throw Error(ErrorCode::ParseError, "unknown phase kind '" + std::string(name) + "'");
}

double point_segment_distance(const TracePoint& x, const TracePoint& a,
                              const TracePoint& b) {
  const double dt = b.t - a.t;
  const double dp = b.p - a.p;
  const double len2 = dt * dt + dp * dp;
  if (len2 == 0.0) return std::hypot(x.t - a.t, x.p - a.p);
  double u = ((x.t - a.t) * dt + (x.p - a.p) * dp) / len2;
  u = std::clamp(u, 0.0, 1.0);
  return std::hypot(x.t - (a.t + u * dt), x.p - (a.p + u * dp));
}

std::vector<Segment> simplify(std::span<const TracePoint> samples,
                              double tolerance) {
  if (samples.size() < 2) {
    throw Error(ErrorCode::EmptyInput, "simplify needs at least two samples");
  }
  const std::size_t n = samples.size();
  std::vector<bool> keep(n, false);
  keep.front() = keep.back() = true;

  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, n - 1}};
  while (!stack.empty()) {
    const auto [first, last] = stack.back();
    stack.pop_back();
    double max_dist = 0.0;
    std::size_t index = first;
    for (std::size_t i = first + 1; i < last; ++i) {
      const double d =
          point_segment_distance(samples[i], samples[first], samples[last]);
      if (d > max_dist) {
        max_dist = d;
        index = i;
      }
    }
    if (max_dist > tolerance) {
      keep[index] = true;
      stack.push_back({index, last});
      stack.push_back({first, index});
    }
  }

  std::vector<Segment> out;
  std::size_t prev = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (!keep[i]) continue;
    const auto& a = samples[prev];
    const auto& b = samples[i];
    if (a == b) continue;
    out.push_back({a, b, slope_of(a, b)});
    prev = i;
  }
  // A trace that never moves still spans its own duration as one segment.
  if (out.empty()) {
    out.push_back({samples.front(), samples.back(), 0.0});
  }
  return out;
}

std::vector<Segment> simplify(const NormalizedTrace& trace, double tolerance) {
  return simplify(std::span<const TracePoint>(trace.samples), tolerance);
}

std::vector<Phase> classify(std::span<const Segment> segments,
                            const ClassifyParams& params) {
  if (segments.empty()) return {};
  std::vector<TracePoint> vertices{segments.front().start};
  for (const auto& s : segments) {
    if (s.end == vertices.back()) continue;
    vertices.push_back(s.end);
  }
  if (vertices.size() < 2) {
    return {{PhaseKind::Constant, vertices.front(), vertices.front(), 0.0, 0.0}};
  }
  return RunReducer(std::move(vertices), params).reduce();
}

std::vector<Phase> segment_phases(std::span<const TracePoint> samples,
                                  const SegmentationParams& params) {
  const ClassifyParams cp{params.eps_slope, params.min_duration,
                          2.0 * params.tolerance};
  auto phases = classify(simplify(samples, params.tolerance), cp);
  // Merged phases can leave corners that a second pass would drop. Repeat on
  // the phase polyline until nothing changes; its vertex set only shrinks.
  for (;;) {
    const auto polyline = phase_polyline(phases);
    if (polyline.size() < 2) break;
    auto next = classify(simplify(polyline, params.tolerance), cp);
    if (next == phases) break;
    phases = std::move(next);
  }
  return phases;
}

std::vector<Phase> segment_phases(const NormalizedTrace& trace,
                                  const SegmentationParams& params) {
  return segment_phases(std::span<const TracePoint>(trace.samples), params);
}

std::vector<TracePoint> phase_polyline(std::span<const Phase> phases) {
  std::vector<TracePoint> out;
  if (phases.empty()) return out;
  out.push_back(phases.front().start);
  for (const auto& ph : phases) out.push_back(ph.end);
  return out;
}

}  // namespace presence
