#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "presence/analysis.hpp"
#include "presence/segmentation.hpp"
#include "presence/trace_model.hpp"

namespace fixtures {

using presence::TracePoint;

/// Samples a polyline at `step` in t, always including its vertices.
std::vector<TracePoint> sample_polyline(const std::vector<TracePoint>& vertices,
                                        double step);

presence::NormalizedTrace make_trace(const std::vector<TracePoint>& samples,
                                     const std::string& participant = "P01",
                                     const std::string& group = "A");

presence::RawTrace to_raw(const presence::NormalizedTrace& trace,
                          const presence::Template& tmpl = {});

// Noise-free piecewise-linear trace on a uniform grid.
struct PiecewiseTrace {
  std::vector<TracePoint> samples;
  // Grid indices of all piece boundaries, including 0 and the last index.
  std::vector<std::size_t> breakpoints;
  std::vector<double> slopes;
  double step = 0.001;
};

/// Pieces span at least `min_steps` grid steps. Constant pieces have
/// |slope| < 0.05, changing pieces |slope| in [0.2, 8]; p stays in [-1, 1].
PiecewiseTrace random_piecewise(std::mt19937_64& rng, std::size_t min_steps = 12);

/// Phase kind of a slope against the constant band.
presence::PhaseKind slope_kind(double slope, double eps);

/// Grid indices where the brute-force kind changes between pieces.
std::vector<std::size_t> kind_change_points(const PiecewiseTrace& trace, double eps);

/// Random raw drawing inside the default sheet: x non-decreasing from the
/// start dot, y strictly inside the presence range.
presence::RawTrace random_raw(std::mt19937_64& rng, const presence::Template& tmpl);

// Exemplar drawing with two interior breaks: rise, plateau, break and
// recovery twice, then the exit.
std::vector<TracePoint> exemplar_vertices();
/// Dense, slightly jittered samples of the exemplar.
presence::NormalizedTrace exemplar_trace();

// Traces violating exactly one prerequisite each ('a' .. 'e').
presence::NormalizedTrace prerequisite_violation(char id);

// Five events with strongest-first ranks: CM, WS, TP, FAIL, VIB.
struct TableCell {
  int detected = 0;  // of 10
  std::optional<double> sh_break;
  std::optional<double> p_break;
};

struct TableSpec {
  std::vector<std::string> events;
  std::vector<std::string> groups;
  std::vector<double> ticks;
  // positions[group][event] is the 1-based order in that group.
  std::vector<std::vector<int>> positions;
  // cells[event][group]
  std::vector<std::vector<TableCell>> cells;
};

TableSpec detection_table_spec();

/// Events file content for a table: one group-scoped tick per event.
std::vector<presence::GroundTruthEvent> table_events(const TableSpec& spec);

/// Raw drawings, ten per group, whose matched breaks reproduce the table.
std::vector<presence::RawTrace> table_traces(const TableSpec& spec,
                                             const presence::Template& tmpl = {});

/// Writes the table traces and an events file into `dir`; returns the trace
/// file paths in participant order.
std::vector<std::filesystem::path> write_table_fixture(const std::filesystem::path& dir);

// Thirty analyzed records with transition 0.21 (SD 0.10), exit 0.08 (SD
// 0.05), 118 breaks of which 97 matched, and drop/raise durations 0.008 and
// 0.010.
std::vector<presence::SessionRecord> global_stats_records();

// Records whose matched P_break medians follow bip_rank strongest first.
std::vector<presence::SessionRecord> intensity_records();
std::vector<presence::GroundTruthEvent> intensity_events();

// Oracle: maximum matching by exhaustive search, ties broken by the
// smallest total |P_dropping - tick| distance. Returns the match count.
std::size_t brute_force_match_count(const std::vector<presence::BipReport>& bips,
                                    const std::vector<presence::GroundTruthEvent>& events,
                                    const presence::MatchWindow& window);

// Oracle: quantile by the textbook (n - 1) p rule, computed independently.
double naive_quantile(std::vector<double> values, double q);

/// Unique scratch directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

}  // namespace fixtures
