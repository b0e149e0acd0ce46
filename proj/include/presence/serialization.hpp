#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "presence/analysis.hpp"
#include "presence/trace_model.hpp"

namespace presence {

using Json = nlohmann::ordered_json;

inline constexpr const char* kSchemaVersion = "1";

/// Rounds to 9 significant decimal digits, the precision every persisted
/// floating-point field is stored at. Non-finite values pass through.
double round9(double v);

/// `%.9g` text of round9(v).
std::string format9(double v);

/// Throws Error(SchemaMismatch) unless doc["schema_version"] == "1".
void require_schema(const Json& doc, const std::string& what);

Json to_json(const Template& tmpl);
/// Missing dimensions fall back to the 200 mm / 40 mm sheet.
Template template_from_json(const Json& j);

struct TraceFile {
  Template tmpl;
  RawTrace trace;

  friend bool operator==(const TraceFile&, const TraceFile&) = default;
};

Json to_json(const TraceFile& file);
TraceFile trace_file_from_json(const Json& doc);

Json to_json(const GroundTruthEvent& e);
GroundTruthEvent event_from_json(const Json& j);
Json events_document(std::span<const GroundTruthEvent> events);
std::vector<GroundTruthEvent> events_from_document(const Json& doc);

/// Copy with every floating-point field rounded to 9 significant digits,
/// trace source synced with the record identity and the config text
/// re-serialized compactly. Idempotent; this is exactly what a store read
/// returns after a write.
SessionRecord canonicalize(const SessionRecord& record);

Json to_json(const SessionRecord& record);
SessionRecord record_from_json(const Json& j);

Json to_json(const ConformanceReport& report);
Json to_json(const AggregateStats& stats);
Json to_json(const IntensityOrdering& ordering);

/// Detection CSV: one row per event x group. A leading `#` line carries
/// the schema version and the run configuration; cells without matches are
/// written as "-".
std::string detection_csv(std::span<const DetectionRow> rows,
                          const std::string& config_json = "");

Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace presence
