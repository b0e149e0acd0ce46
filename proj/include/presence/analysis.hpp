#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "presence/descriptive_model.hpp"
#include "presence/segmentation.hpp"
#include "presence/trace_model.hpp"

namespace presence {

struct GroundTruthEvent {
  std::string label;
  double tick_t = 0.0;
  bool expected_bip = true;
  // 1 is the strongest break.
  std::optional<int> bip_rank;
  // Randomization group this tick belongs to; empty applies to every group.
  std::string group;

  friend bool operator==(const GroundTruthEvent&, const GroundTruthEvent&) =
      default;
};

/// Ticks that apply to `group`, sorted by time. Throws Error(InvalidConfig)
/// on duplicate labels, ticks outside [0, 1] or duplicate ranks among
/// expected breaks.
std::vector<GroundTruthEvent> events_for_group(
    std::span<const GroundTruthEvent> events, const std::string& group);

struct MatchWindow {
  double before = 0.025;
  double after = 0.125;

  friend bool operator==(const MatchWindow&, const MatchWindow&) = default;
};

struct BipReport {
  TracePoint p_dropping;
  TracePoint p_break;
  double sh_break = 0.0;
  double t_dropping = 0.0;
  std::optional<double> t_raising;
  std::optional<std::string> matched_event;

  friend bool operator==(const BipReport&, const BipReport&) = default;
};

std::vector<BipReport> bip_reports(const ModelPoints& points,
                                   const Parameters& params);

struct MatchResult {
  // Per BIP, index into the event list passed to match_events.
  std::vector<std::optional<std::size_t>> event_of_bip;
  std::vector<std::size_t> unexplained;
  std::vector<std::string> warnings;
};

/// Assigns breaks to expected-break ticks.
///
/// A break is a candidate for a tick when its P_dropping or P_break time lies
/// in [tick - before, tick + after], both ends inclusive. Ticks are visited in
/// time order; each takes the free candidate whose P_dropping is nearest the
/// tick, earlier break on ties. Overlapping windows produce a warning.
MatchResult match_events(std::span<const BipReport> bips,
                         std::span<const GroundTruthEvent> events,
                         const MatchWindow& window = {});

struct AnalysisConfig {
  SegmentationParams segmentation;
  ModelConfig model;
  MatchWindow window;
};

struct SessionRecord {
  std::string study_id;
  std::string participant_id;
  int revision = 0;
  std::string group;
  Capture capture = Capture::Digital;
  std::optional<NormalizedTrace> trace;
  std::vector<ValidationIssue> ingest_warnings;
  std::optional<DescriptiveModel> model;
  std::vector<BipReport> bips;
  std::optional<ConformanceReport> conformance;
  // Why no model could be built, e.g. a drawing without P_return.
  std::optional<std::string> excluded;
  // Compact JSON of the run configuration that produced this record.
  std::string config_json;

  bool analyzed() const { return model.has_value(); }

  friend bool operator==(const SessionRecord&, const SessionRecord&) = default;
};

/// Runs segmentation, point extraction, parameters, matching and the
/// prerequisite check on a record holding a normalized trace. A drawing the
/// model cannot describe comes back with `excluded` set instead of throwing.
SessionRecord analyze_record(const SessionRecord& provisional,
                             std::span<const GroundTruthEvent> events,
                             const AnalysisConfig& config = {});

struct MeanSd {
  double mean = 0.0;
  // Sample (n - 1) standard deviation; absent for a single value.
  std::optional<double> sd;
  std::size_t n = 0;

  friend bool operator==(const MeanSd&, const MeanSd&) = default;
};

std::optional<MeanSd> mean_sd(std::span<const double> values);

struct BoxSummary {
  std::string event;
  std::size_t n = 0;
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  double whisker_low = 0.0;
  double whisker_high = 0.0;
  std::vector<double> outliers;

  friend bool operator==(const BoxSummary&, const BoxSummary&) = default;
};

/// Median and quartiles by linear interpolation between order statistics,
/// whiskers at the furthest values within 1.5 IQR. Outliers stay listed.
BoxSummary box_summary(std::string event, std::span<const double> values);

/// Linear-interpolation quantile of sorted data, q in [0, 1].
double quantile_sorted(std::span<const double> sorted, double q);

struct DetectionRow {
  std::string event;
  std::string group;
  // 1-based position of the event among the group's expected breaks.
  std::optional<int> pos;
  double detection_pct = 0.0;
  std::optional<double> mean_sh_break;
  std::optional<double> mean_p_break;
  std::size_t n = 0;
  std::size_t group_size = 0;

  friend bool operator==(const DetectionRow&, const DetectionRow&) = default;
};

/// One row per (expected-break event, group) in event order then group
/// order. Means cover matched instances only and are absent without any.
std::vector<DetectionRow> detection_table(
    std::span<const SessionRecord> records,
    std::span<const GroundTruthEvent> events);

struct GlobalStats {
  std::size_t records = 0;
  std::size_t described = 0;
  std::optional<MeanSd> t_transition;
  std::optional<MeanSd> t_exit;
  std::optional<MeanSd> experience_fraction;
  std::optional<MeanSd> p_return_t;
  std::optional<MeanSd> p_return_p;
  std::optional<MeanSd> bip_count;
  std::size_t total_bips = 0;
  std::size_t matched_bips = 0;
  std::optional<double> correct_position_rate;
  std::optional<double> drop_raise_ratio;

  friend bool operator==(const GlobalStats&, const GlobalStats&) = default;
};

struct ParticipantCount {
  std::string participant_id;
  std::string group;
  std::size_t bip_count = 0;

  friend bool operator==(const ParticipantCount&, const ParticipantCount&) =
      default;
};

struct AggregateStats {
  std::vector<DetectionRow> detection;
  std::vector<ParticipantCount> participants;
  GlobalStats global;
  // P_break distribution per matched event, in event order.
  std::vector<BoxSummary> intensity;

  friend bool operator==(const AggregateStats&, const AggregateStats&) = default;
};

/// Cross-session summary. Records are processed in (study, participant,
/// revision) order so the result does not depend on input order. Throws
/// Error(EmptyInput) for an empty record set.
AggregateStats aggregate(std::span<const SessionRecord> records,
                         std::span<const GroundTruthEvent> events);

struct IntensityOrdering {
  // Strongest (lowest median P_break) first.
  std::vector<std::string> order;
  std::vector<double> medians;
  std::vector<std::string> omitted;
  // Pairwise agreements with bip_rank, ties counted as one half.
  std::optional<double> concordance;
  std::size_t pairs = 0;
};

IntensityOrdering intensity_ordering(const AggregateStats& stats,
                                     std::span<const GroundTruthEvent> events);

}  // namespace presence
