#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "presence/trace_model.hpp"

namespace presence {

// One piece of a simplified polyline. A vertical stroke (two vertices at the
// same time, e.g. a sudden drop drawn straight down) has end.t == start.t and
// an infinite slope carrying the sign of the presence change.
struct Segment {
  TracePoint start;
  TracePoint end;
  double slope = 0.0;

  friend bool operator==(const Segment&, const Segment&) = default;
};

enum class PhaseKind { Constant, Raising, Dropping };

std::string_view to_string(PhaseKind kind);
PhaseKind phase_kind_from_string(std::string_view name);

struct Phase {
  PhaseKind kind = PhaseKind::Constant;
  TracePoint start;
  TracePoint end;
  double duration = 0.0;
  double shift = 0.0;

  friend bool operator==(const Phase&, const Phase&) = default;
};

struct SegmentationParams {
  // Maximum perpendicular distance of a dropped sample from the simplified
  // polyline, in presence units.
  double tolerance = 0.02;
  // |slope| below this is constant; units are presence per full timeline.
  double eps_slope = 0.1;
  // Phases shorter than this (and with |shift| < 2 * tolerance) are jitter.
  double min_duration = 0.01;
};

struct ClassifyParams {
  double eps_slope = 0.1;
  double min_duration = 0.01;
  double absorb_shift_max = 0.04;
};

/// Ramer-Douglas-Peucker simplification in the (t, p) plane. Endpoints are
/// kept exactly; every dropped sample lies within `tolerance` of the segment
/// that replaces it. Exact duplicate vertices are collapsed. Throws
/// Error(EmptyInput) for fewer than two samples.
std::vector<Segment> simplify(std::span<const TracePoint> samples,
                              double tolerance);
std::vector<Segment> simplify(const NormalizedTrace& trace, double tolerance);

/// Labels contiguous segments and reduces them to phases.
///
/// Each segment is constant when |slope| < eps_slope, otherwise raising or
/// dropping by sign. Adjacent phases of the same kind merge. A phase shorter
/// than min_duration whose |shift| is below absorb_shift_max is jitter: it is
/// merged into the neighbour whose merged chord fits the covered vertices
/// best (sum of squared distances; ties go left) and the merged phase is
/// relabelled from its chord. This repeats, shortest jitter first, until no
/// jitter remains. The result tiles the input span.
std::vector<Phase> classify(std::span<const Segment> segments,
                            const ClassifyParams& params);

/// simplify followed by classify with absorb_shift_max = 2 * tolerance,
/// repeated on the resulting phase polyline until it is a fixed point.
std::vector<Phase> segment_phases(const NormalizedTrace& trace,
                                  const SegmentationParams& params = {});
std::vector<Phase> segment_phases(std::span<const TracePoint> samples,
                                  const SegmentationParams& params = {});

/// Vertices of the polyline described by a phase sequence.
std::vector<TracePoint> phase_polyline(std::span<const Phase> phases);

/// Perpendicular distance from `x` to the segment a-b.
double point_segment_distance(const TracePoint& x, const TracePoint& a,
                              const TracePoint& b);

}  // namespace presence
