#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "presence/analysis.hpp"
#include "presence/error.hpp"
#include "presence/serialization.hpp"
#include "presence/trace_model.hpp"

namespace presence {

// Effective configuration of one command-line run. Paths are kept out of the
// echoed document so identical runs in different directories produce
// identical outputs.
struct RunConfig {
  std::string study_id = "study";
  SegmentationParams segmentation;
  MatchWindow window;
  double start_tolerance_mm = 5.0;
  double clamp_tolerance_mm = 2.0;
  double return_threshold = -0.5;
  double experience_min = 0.5;
  // Allowed group labels; empty accepts any.
  std::vector<std::string> groups;
  Template sheet;
  bool mark_points = false;

  std::filesystem::path store;
  std::filesystem::path events;
  std::filesystem::path out;

  ValidationConfig validation() const;
  AnalysisConfig analysis() const;
};

/// Throws Error(InvalidConfig) for non-positive thresholds.
void check(const RunConfig& config);

Json to_json(const RunConfig& config);
/// Overlays the fields present in `doc` onto `base`.
RunConfig apply_config(RunConfig base, const Json& doc);

// Process exit codes, one per failure class.
enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitUsage = 2,
  kExitMissingFile = 3,
  kExitSchemaMismatch = 4,
  kExitFatalValidation = 5,
  kExitParseError = 6,
  kExitDuplicateRecord = 7,
  kExitInvalidConfig = 8,
  kExitEmptyInput = 9,
  kExitIo = 10,
};

int exit_code_for(ErrorCode code);

/// `{"error": ..., "exit_code": ..., "message": ...}` on one line.
std::string error_line(ErrorCode code, const std::string& message);

struct CommandOutput {
  std::vector<std::filesystem::path> written;
  std::vector<std::string> messages;
};

/// Provisional record for one trace file: validated, normalized, stamped with
/// the study id and config echo. Throws Error(FatalValidation) naming
/// `origin` on the first fatal issue or a group outside config.groups.
SessionRecord ingest_record(const TraceFile& file, const RunConfig& config,
                            const std::string& origin = "trace");

/// Writes template.svg and template.json into config.out.
CommandOutput cmd_template(const RunConfig& config);

/// Validates and normalizes every trace file, then appends provisional
/// records to config.store. Nothing is written if any file has a fatal issue.
CommandOutput cmd_ingest(const RunConfig& config,
                         const std::vector<std::filesystem::path>& trace_files);

/// Describes the latest revision of every session in config.store and
/// appends the analyzed record as the next revision.
CommandOutput cmd_analyze(const RunConfig& config);

/// detection.csv, global_stats.json and boxplot.svg into config.out.
CommandOutput cmd_aggregate(const RunConfig& config);

/// Conformance report per session as JSON lines, written to config.out
/// (or returned in messages when no path is set).
CommandOutput cmd_validate(const RunConfig& config);

/// Overlay SVG of every stored trace to config.out.
CommandOutput cmd_render(const RunConfig& config);

}  // namespace presence
