#pragma once

#include <span>
#include <string>

#include "presence/analysis.hpp"
#include "presence/trace_model.hpp"

namespace presence {

// All documents are standalone SVG whose user unit is one millimetre of the
// drawing sheet. Output is a pure function of the inputs.

/// Blank drawing sheet: gradient bands, middle line, HMD-on line, start dot,
/// dashed HMD-off line with its symbol, and labelled event ticks.
std::string render_template(const Template& tmpl, const std::string& config_json = "");

struct OverlayOptions {
  Template sheet;
  // Mark P_experience and P_mentalexit of every described drawing.
  bool mark_points = false;
  std::string config_json;
};

/// Colour for a randomization group: A green, B red, C blue, others from a
/// fixed palette.
std::string group_color(const std::string& group, std::size_t fallback_index);

/// Every retained trace over one sheet, coloured by group. Throws
/// Error(EmptyInput) when no record carries a trace.
std::string render_overlay(std::span<const SessionRecord> records,
                           const OverlayOptions& options = {});

/// One box per event with at least one matched break, strongest first.
std::string render_boxplot(const AggregateStats& stats,
                           std::span<const GroundTruthEvent> events,
                           const std::string& config_json = "");

}  // namespace presence
