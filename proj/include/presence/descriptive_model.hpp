#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "presence/segmentation.hpp"
#include "presence/trace_model.hpp"

namespace presence {

struct BreakPoints {
  TracePoint p_dropping;
  TracePoint p_break;
  // Index of the dropping phase in the phase list the points came from.
  std::size_t phase_index = 0;

  friend bool operator==(const BreakPoints&, const BreakPoints&) = default;
};

struct ModelPoints {
  TracePoint p_transition;
  TracePoint p_experience;
  TracePoint p_mentalexit;
  std::optional<TracePoint> p_physicalexit;
  TracePoint p_return;
  // First upward crossing of the middle line, the alternative end of the
  // transition into VR. Absent when the trace never rises above p = 0.
  std::optional<TracePoint> p_midcross;
  std::vector<BreakPoints> breaks;

  friend bool operator==(const ModelPoints&, const ModelPoints&) = default;
};

struct BreakParameters {
  double t_dropping = 0.0;
  double sh_break = 0.0;
  std::optional<double> t_raising;
  // Set when the drop is followed by a constant plateau instead of a rise.
  std::optional<double> recovery_plateau;

  friend bool operator==(const BreakParameters&, const BreakParameters&) =
      default;
};

struct Parameters {
  double t_transition = 0.0;
  double sh_transition = 0.0;
  std::optional<double> t_transition_midcross;
  double t_experience = 0.0;
  double t_exit = 0.0;
  double t_mental = 0.0;
  double t_physical = 0.0;
  std::vector<BreakParameters> breaks;
  std::optional<double> drop_raise_ratio;

  friend bool operator==(const Parameters&, const Parameters&) = default;
};

struct ModelConfig {
  double start_tolerance_mm = 5.0;
  double time_axis_len_mm = 200.0;
  double presence_half_range_mm = 40.0;
  // Final presence at or below this counts as fully back in the real world.
  double return_threshold = -0.5;
  double experience_min_fraction = 0.5;
  // How far (timeline fraction) a break annotation may sit from a dropping
  // phase and still coincide with it.
  double annotation_slack = 0.025;
};

/// Locates the model points on a phase sequence.
///
/// The exit is the last dropping phase; only constant phases may follow it.
/// Throws Error(ModelIncomplete) mentioning prerequisite b when the trace
/// does not end in a drop. Every other dropping phase from the start of the
/// experience on is a break.
ModelPoints extract_points(std::span<const Phase> phases,
                           const NormalizedTrace& trace);

Parameters compute_parameters(const ModelPoints& points,
                              std::span<const Phase> phases);

struct PrerequisiteResult {
  char id = 'a';
  bool passed = false;
  std::string detail;

  friend bool operator==(const PrerequisiteResult&, const PrerequisiteResult&) =
      default;
};

struct ConformanceReport {
  std::array<PrerequisiteResult, 5> entries;

  bool all_passed() const;
  const PrerequisiteResult& at(char id) const;
  std::vector<char> failed() const;

  friend bool operator==(const ConformanceReport&, const ConformanceReport&) =
      default;
};

/// Evaluates the five structural expectations of a drawing:
///   a  starts at the start dot
///   b  ends fully back in the real world
///   c  annotated breaks sit on dropping phases
///   d  the experience covers most of the timeline
///   e  transition longer than exit, recovery slower than dropping
ConformanceReport check_prerequisites(
    const ModelPoints& points, std::span<const Phase> phases,
    const Parameters& params,
    std::span<const NormalizedAnnotation> annotations,
    const ModelConfig& config = {});

/// Phases, points and parameters for one drawing.
struct DescriptiveModel {
  std::vector<Phase> phases;
  ModelPoints points;
  Parameters parameters;

  friend bool operator==(const DescriptiveModel&, const DescriptiveModel&) =
      default;
};

DescriptiveModel describe(const NormalizedTrace& trace,
                          const SegmentationParams& params = {});

}  // namespace presence
