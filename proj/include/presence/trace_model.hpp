#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace presence {

/// Point on the normalized drawing plane: `t` is the fraction of the
/// timeline between HMD-on and HMD-off, `p` the presence level where +1 is
/// fully in the virtual world and -1 fully in the real world.
struct TracePoint {
  double t = 0.0;
  double p = 0.0;

  friend bool operator==(const TracePoint&, const TracePoint&) = default;
};

struct RawSample {
  double x_mm = 0.0;
  double y_mm = 0.0;

  friend bool operator==(const RawSample&, const RawSample&) = default;
};

struct EventTick {
  std::string label;
  double x_mm = 0.0;

  friend bool operator==(const EventTick&, const EventTick&) = default;
};

// Physical drawing sheet. Time runs from the HMD-on line (x = 0) to the
// dashed HMD-off line (x = time_axis_len_mm); presence is measured from the
// middle line, positive toward the virtual world.
struct Template {
  double time_axis_len_mm = 200.0;
  double presence_half_range_mm = 40.0;
  // Extent below the middle line. Equal to the positive half range unless a
  // sheet is deliberately asymmetric.
  double negative_half_range_mm = 40.0;
  std::vector<EventTick> event_ticks;

  double hmd_on_x_mm() const { return 0.0; }
  double hmd_off_x_mm() const { return time_axis_len_mm; }
  double tick_fraction(std::size_t i) const {
    return event_ticks.at(i).x_mm / time_axis_len_mm;
  }

  friend bool operator==(const Template&, const Template&) = default;
};

struct TemplateConfig {
  std::optional<double> time_len_mm;
  std::optional<double> half_range_mm;
  std::optional<double> negative_range_mm;
  std::vector<EventTick> ticks;
};

/// Builds a template with 200 mm / 40 mm defaults. Ticks are sorted by
/// position. Throws Error(InvalidTemplate) naming the offending tick for a
/// duplicate label, duplicate position, or a tick outside the time axis.
Template build_template(const TemplateConfig& config);

enum class AnnotationKind { BreakNote, ConstantNote, EventNote, FreeText };

std::string_view to_string(AnnotationKind kind);
AnnotationKind annotation_kind_from_string(std::string_view name);

struct Annotation {
  double x_mm = 0.0;
  AnnotationKind kind = AnnotationKind::FreeText;
  std::string text;

  friend bool operator==(const Annotation&, const Annotation&) = default;
};

struct NormalizedAnnotation {
  double t = 0.0;
  AnnotationKind kind = AnnotationKind::FreeText;
  std::string text;

  friend bool operator==(const NormalizedAnnotation&,
                         const NormalizedAnnotation&) = default;
};

enum class Capture { PaperScan, Digital };

std::string_view to_string(Capture capture);
Capture capture_from_string(std::string_view name);

struct TraceSource {
  std::string participant_id;
  std::string group;
  Capture capture = Capture::Digital;

  friend bool operator==(const TraceSource&, const TraceSource&) = default;
};

struct RawTrace {
  std::vector<RawSample> samples;
  std::vector<Annotation> annotations;
  TraceSource source;

  friend bool operator==(const RawTrace&, const RawTrace&) = default;
};

struct NormalizedTrace {
  std::vector<TracePoint> samples;
  std::vector<NormalizedAnnotation> annotations;
  TraceSource source;

  friend bool operator==(const NormalizedTrace&, const NormalizedTrace&) =
      default;
};

enum class Severity { Fatal, Warning };

std::string_view to_string(Severity severity);

struct ValidationIssue {
  Severity severity = Severity::Warning;
  std::string code;
  std::string message;

  friend bool operator==(const ValidationIssue&, const ValidationIssue&) =
      default;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;

  bool has_fatal() const;
  bool has(std::string_view code) const;
  bool empty() const { return issues.empty(); }

  friend bool operator==(const ValidationReport&, const ValidationReport&) =
      default;
};

struct ValidationConfig {
  // First sample must lie within this distance of the start dot.
  double start_tolerance_mm = 5.0;
  // Overshoot past the presence range that is clamped instead of rejected.
  double clamp_tolerance_mm = 2.0;
  // Traces ending before this fraction of the timeline get a warning.
  double early_end_fraction = 0.9;
  // Samples may run past the HMD-off line up to this fraction.
  double max_time_fraction = 1.05;
};

/// Pure, report-valued check of a raw drawing against its sheet.
///
/// Fatal codes: `too-few-samples`, `non-finite`, `x-decreasing`,
/// `start-dot-miss`, `y-out-of-range`, `x-past-hmd-off`,
/// `annotation-outside-axis`. Warning codes: `y-clamped`, `ends-early`.
ValidationReport validate_trace(const RawTrace& trace, const Template& tmpl,
                                const ValidationConfig& config = {});

/// Clamps samples that overshoot the presence range by no more than the
/// clamp tolerance. Samples further out are left alone (validation rejects
/// them).
RawTrace clamp_to_template(const RawTrace& trace, const Template& tmpl,
                           const ValidationConfig& config = {});

/// Divides time by the HMD-on/HMD-off distance and presence by the positive
/// half range. Runs validation first and throws Error(FatalValidation) on
/// any fatal issue; tolerable overshoot is clamped.
NormalizedTrace normalize(const RawTrace& trace, const Template& tmpl,
                          const ValidationConfig& config = {});

/// Exact inverse of the scaling in normalize (clamping is not undone).
RawTrace denormalize(const NormalizedTrace& trace, const Template& tmpl);

}  // namespace presence
