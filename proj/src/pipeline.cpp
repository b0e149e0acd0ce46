#include "presence/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "presence/render.hpp"
#include "presence/store.hpp"

namespace presence {

namespace {

std::vector<GroundTruthEvent> load_events(const RunConfig& config) {
  if (config.events.empty()) return {};
  return events_from_document(read_json_file(config.events));
}

std::vector<SessionRecord> load_latest(const std::filesystem::path& path) {
  if (path.empty()) throw Error(ErrorCode::InvalidConfig, "--store is required");
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::MissingFile, "store " + path.string() + " does not exist");
  }
  return SessionStore(path).latest();
}

void require_out(const RunConfig& config) {
  if (config.out.empty()) throw Error(ErrorCode::InvalidConfig, "--out is required");
}

}  // namespace

ValidationConfig RunConfig::validation() const {
  ValidationConfig v;
  v.start_tolerance_mm = start_tolerance_mm;
  v.clamp_tolerance_mm = clamp_tolerance_mm;
  return v;
}

AnalysisConfig RunConfig::analysis() const {
  AnalysisConfig a;
  a.segmentation = segmentation;
  a.window = window;
  a.model.start_tolerance_mm = start_tolerance_mm;
  a.model.time_axis_len_mm = sheet.time_axis_len_mm;
  a.model.presence_half_range_mm = sheet.presence_half_range_mm;
  a.model.return_threshold = return_threshold;
  a.model.experience_min_fraction = experience_min;
  return a;
}

void check(const RunConfig& c) {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::InvalidConfig, std::string(name) + " must be positive");
    }
  };
  positive(c.segmentation.tolerance, "tolerance");
  positive(c.segmentation.eps_slope, "eps-slope");
  positive(c.segmentation.min_duration, "min-duration");
  positive(c.window.before, "window-before");
  positive(c.window.after, "window-after");
  positive(c.start_tolerance_mm, "start-tolerance");
  positive(c.clamp_tolerance_mm, "clamp-tolerance");
  positive(c.experience_min, "experience-min");
  // The return threshold is a presence level, negative by nature.
  if (!(c.return_threshold >= -1.0 && c.return_threshold <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "return-threshold must lie in [-1, 1]");
  }
  if (c.study_id.empty()) throw Error(ErrorCode::InvalidConfig, "study id is empty");
}

Json to_json(const RunConfig& c) {
  return Json{{"study_id", c.study_id},
              {"tolerance", round9(c.segmentation.tolerance)},
              {"eps_slope", round9(c.segmentation.eps_slope)},
              {"min_duration", round9(c.segmentation.min_duration)},
              {"window_before", round9(c.window.before)},
              {"window_after", round9(c.window.after)},
              {"start_tolerance_mm", round9(c.start_tolerance_mm)},
              {"clamp_tolerance_mm", round9(c.clamp_tolerance_mm)},
              {"return_threshold", round9(c.return_threshold)},
              {"experience_min", round9(c.experience_min)},
              {"groups", c.groups},
              {"template", to_json(c.sheet)}};
}

RunConfig apply_config(RunConfig base, const Json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::InvalidConfig, "config must be an object");
  try {
    auto num = [&](const char* key, double& slot) {
      if (doc.contains(key)) slot = doc.at(key).get<double>();
    };
    if (doc.contains("study_id")) base.study_id = doc.at("study_id").get<std::string>();
    num("tolerance", base.segmentation.tolerance);
    num("eps_slope", base.segmentation.eps_slope);
    num("min_duration", base.segmentation.min_duration);
    num("window_before", base.window.before);
    num("window_after", base.window.after);
    num("start_tolerance_mm", base.start_tolerance_mm);
    num("clamp_tolerance_mm", base.clamp_tolerance_mm);
    num("return_threshold", base.return_threshold);
    num("experience_min", base.experience_min);
    if (doc.contains("groups")) base.groups = doc.at("groups").get<std::vector<std::string>>();
    if (doc.contains("template")) base.sheet = template_from_json(doc.at("template"));
    if (doc.contains("mark_points")) base.mark_points = doc.at("mark_points").get<bool>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("config: ") + e.what());
  }
  return base;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingFile: return kExitMissingFile;
    case ErrorCode::SchemaMismatch: return kExitSchemaMismatch;
    case ErrorCode::FatalValidation: return kExitFatalValidation;
    case ErrorCode::ParseError: return kExitParseError;
    case ErrorCode::DuplicateRecord: return kExitDuplicateRecord;
    case ErrorCode::InvalidConfig:
    case ErrorCode::InvalidTemplate: return kExitInvalidConfig;
    case ErrorCode::EmptyInput:
    case ErrorCode::ModelIncomplete:
    case ErrorCode::RecordNotFound: return kExitEmptyInput;
    case ErrorCode::IoError: return kExitIo;
  }
  return kExitInternal;
}

std::string error_line(ErrorCode code, const std::string& message) {
  return Json{{"error", to_string(code)},
              {"exit_code", exit_code_for(code)},
              {"message", message}}
      .dump();
}

SessionRecord ingest_record(const TraceFile& file, const RunConfig& config,
                            const std::string& origin) {
  const auto& group = file.trace.source.group;
  if (!config.groups.empty() &&
      std::find(config.groups.begin(), config.groups.end(), group) == config.groups.end()) {
    throw Error(ErrorCode::FatalValidation,
                origin + ": unknown-group: group '" + group + "' is not in the configured groups");
  }
  const auto report = validate_trace(file.trace, file.tmpl, config.validation());
  for (const auto& issue : report.issues) {
    if (issue.severity == Severity::Fatal) {
      throw Error(ErrorCode::FatalValidation,
                  origin + ": " + issue.code + ": " + issue.message);
    }
  }
  SessionRecord r;
  r.study_id = config.study_id;
  r.participant_id = file.trace.source.participant_id;
  r.group = file.trace.source.group;
  r.capture = file.trace.source.capture;
  r.trace = normalize(file.trace, file.tmpl, config.validation());
  r.ingest_warnings = report.issues;
  r.config_json = to_json(config).dump();
  return r;
}

CommandOutput cmd_template(const RunConfig& config) {
  require_out(config);
  CommandOutput out;
  const auto cfg = to_json(config).dump();
  const auto svg = config.out / "template.svg";
  const auto json = config.out / "template.json";
  write_text_file(svg, render_template(config.sheet, cfg));
  write_text_file(json, Json{{"schema_version", kSchemaVersion},
                             {"template", to_json(config.sheet)}}
                                .dump(2) +
                            "\n");
  out.written = {svg, json};
  return out;
}

CommandOutput cmd_ingest(const RunConfig& config,
                         const std::vector<std::filesystem::path>& trace_files) {
  if (config.store.empty()) throw Error(ErrorCode::InvalidConfig, "--store is required");
  if (trace_files.empty()) throw Error(ErrorCode::EmptyInput, "no trace files given");

  std::vector<SessionRecord> pending;
  CommandOutput out;
  for (const auto& path : trace_files) {
    auto r = ingest_record(trace_file_from_json(read_json_file(path)), config, path.string());
    for (const auto& w : r.ingest_warnings) {
      out.messages.push_back(path.string() + ": warning " + w.code + ": " + w.message);
    }
    pending.push_back(std::move(r));
  }
  std::sort(pending.begin(), pending.end(), [](const auto& a, const auto& b) {
    return a.participant_id < b.participant_id;
  });

  SessionStore store(config.store);
  for (const auto& r : pending) {
    if (store.contains(key_of(r))) {
      throw Error(ErrorCode::DuplicateRecord,
                  "duplicate-record " + r.study_id + "/" + r.participant_id);
    }
  }
  for (const auto& r : pending) store.write(r);
  out.written = {config.store};
  return out;
}

CommandOutput cmd_analyze(const RunConfig& config) {
  if (config.store.empty()) throw Error(ErrorCode::InvalidConfig, "--store is required");
  const auto records = load_latest(config.store);
  const auto events = load_events(config);
  const auto cfg = to_json(config).dump();

  SessionStore store(config.store);
  CommandOutput out;
  for (const auto& r : records) {
    if (!r.trace) continue;
    // Already analyzed under the same configuration.
    if ((r.analyzed() || r.excluded) && r.config_json == cfg) continue;
    auto analyzed = analyze_record(r, events, config.analysis());
    analyzed.config_json = cfg;
    if (analyzed.excluded) {
      out.messages.push_back(r.participant_id + ": excluded: " + *analyzed.excluded);
    }
    store.write_revision(std::move(analyzed));
  }
  out.written = {config.store};
  return out;
}

CommandOutput cmd_aggregate(const RunConfig& config) {
  require_out(config);
  const auto records = load_latest(config.store);
  if (records.empty()) throw Error(ErrorCode::EmptyInput, "store has no records");
  const auto events = load_events(config);
  const auto cfg_json = to_json(config);
  const auto cfg = cfg_json.dump();

  const auto stats = aggregate(records, events);
  const auto ordering = intensity_ordering(stats, events);
  Json doc{{"schema_version", kSchemaVersion}, {"config", cfg_json}};
  const Json body = to_json(stats);
  for (const auto& [key, value] : body.items()) doc[key] = value;
  doc["intensity_ordering"] = to_json(ordering);

  const auto csv = config.out / "detection.csv";
  const auto global = config.out / "global_stats.json";
  const auto box = config.out / "boxplot.svg";
  write_text_file(csv, detection_csv(stats.detection, cfg));
  write_text_file(global, doc.dump(2) + "\n");
  write_text_file(box, render_boxplot(stats, events, cfg));
  CommandOutput out;
  out.written = {csv, global, box};
  return out;
}

CommandOutput cmd_validate(const RunConfig& config) {
  const auto records = load_latest(config.store);
  std::string lines;
  CommandOutput out;
  const auto cfg = to_json(config);
  for (const auto& r : records) {
    Json line{{"schema_version", kSchemaVersion},
              {"study_id", r.study_id},
              {"participant_id", r.participant_id},
              {"group", r.group}};
    if (r.conformance) {
      line["conformance"] = to_json(*r.conformance);
      line["passed"] = r.conformance->all_passed();
    } else if (r.trace) {
      // Provisional record: describe it on the fly.
      const auto analyzed = analyze_record(r, {}, config.analysis());
      line["conformance"] =
          analyzed.conformance ? to_json(*analyzed.conformance) : Json(nullptr);
      line["passed"] = analyzed.conformance && analyzed.conformance->all_passed();
      if (analyzed.excluded) line["excluded"] = *analyzed.excluded;
    } else {
      line["conformance"] = nullptr;
      line["passed"] = false;
    }
    if (r.excluded) line["excluded"] = *r.excluded;
    line["config"] = cfg;
    lines += line.dump() + "\n";
    out.messages.push_back(line.dump());
  }
  if (!config.out.empty()) {
    write_text_file(config.out, lines);
    out.written = {config.out};
  }
  return out;
}

CommandOutput cmd_render(const RunConfig& config) {
  require_out(config);
  const auto records = load_latest(config.store);
  OverlayOptions opts;
  opts.sheet = config.sheet;
  opts.mark_points = config.mark_points;
  opts.config_json = to_json(config).dump();
  write_text_file(config.out, render_overlay(records, opts));
  CommandOutput out;
  out.written = {config.out};
  return out;
}

}  // namespace presence
