// presence-trace: command-line driver for the trace analysis pipeline.

#include <cstdlib>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "presence/pipeline.hpp"

namespace {

using presence::Json;
using presence::RunConfig;

struct Flags {
  std::string config;
  std::string template_path;
  std::optional<std::string> study;
  std::optional<double> tolerance;
  std::optional<double> eps_slope;
  std::optional<double> min_duration;
  std::optional<double> window_before;
  std::optional<double> window_after;
  std::optional<double> start_tolerance;
  std::optional<double> clamp_tolerance;
  std::optional<double> return_threshold;
  std::optional<double> experience_min;
  std::vector<std::string> groups;
  bool points = false;
  std::string store;
  std::string events;
  std::string out;
  std::vector<std::string> files;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON config file (overrides $PRESENCE_TRACE_CONFIG)");
  cmd->add_option("--template", f.template_path, "Template JSON written by `template`");
  cmd->add_option("--study", f.study, "Study identifier");
  cmd->add_option("--tolerance", f.tolerance, "Simplification tolerance");
  cmd->add_option("--eps-slope", f.eps_slope, "Slope below which a segment is constant");
  cmd->add_option("--min-duration", f.min_duration, "Shortest retained phase");
  cmd->add_option("--window-before", f.window_before, "Match window before a tick");
  cmd->add_option("--window-after", f.window_after, "Match window after a tick");
  cmd->add_option("--start-tolerance", f.start_tolerance, "Start dot tolerance in mm");
  cmd->add_option("--clamp-tolerance", f.clamp_tolerance, "Out of range tolerance in mm");
  cmd->add_option("--return-threshold", f.return_threshold, "Presence level of a full return");
  cmd->add_option("--experience-min", f.experience_min, "Minimum experience fraction");
  cmd->add_option("--groups", f.groups, "Group labels");
  cmd->add_option("--store", f.store, "Session record store (NDJSON)");
  cmd->add_option("--events", f.events, "Ground-truth events file");
  cmd->add_option("--out", f.out, "Output path");
}

presence::Template load_template(const std::string& path) {
  const Json doc = presence::read_json_file(path);
  if (doc.contains("template")) {
    presence::require_schema(doc, "template");
    return presence::template_from_json(doc.at("template"));
  }
  return presence::template_from_json(doc);
}

RunConfig resolve(const Flags& f) {
  RunConfig c;
  std::string config_path = f.config;
  if (config_path.empty()) {
    if (const char* env = std::getenv("PRESENCE_TRACE_CONFIG"); env && *env) config_path = env;
  }
  if (!config_path.empty()) c = presence::apply_config(c, presence::read_json_file(config_path));
  if (!f.template_path.empty()) c.sheet = load_template(f.template_path);

  if (f.study) c.study_id = *f.study;
  if (f.tolerance) c.segmentation.tolerance = *f.tolerance;
  if (f.eps_slope) c.segmentation.eps_slope = *f.eps_slope;
  if (f.min_duration) c.segmentation.min_duration = *f.min_duration;
  if (f.window_before) c.window.before = *f.window_before;
  if (f.window_after) c.window.after = *f.window_after;
  if (f.start_tolerance) c.start_tolerance_mm = *f.start_tolerance;
  if (f.clamp_tolerance) c.clamp_tolerance_mm = *f.clamp_tolerance;
  if (f.return_threshold) c.return_threshold = *f.return_threshold;
  if (f.experience_min) c.experience_min = *f.experience_min;
  if (!f.groups.empty()) c.groups = f.groups;
  if (f.points) c.mark_points = true;
  c.store = f.store;
  c.events = f.events;
  c.out = f.out;
  presence::check(c);
  return c;
}

void report(const presence::CommandOutput& out) {
  for (const auto& m : out.messages) std::cerr << m << "\n";
  for (const auto& p : out.written) std::cout << p.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Presence trace analysis pipeline"};
  app.require_subcommand(1);
  Flags f;

  auto* tmpl = app.add_subcommand("template", "Write the blank drawing sheet");
  auto* ingest = app.add_subcommand("ingest", "Validate traces and store provisional records");
  auto* analyze = app.add_subcommand("analyze", "Describe stored sessions and match events");
  auto* aggregate = app.add_subcommand("aggregate", "Detection table, global stats, box plot");
  auto* validate = app.add_subcommand("validate", "Conformance report per session");
  auto* render = app.add_subcommand("render", "Overlay of all stored traces");
  for (auto* cmd : {tmpl, ingest, analyze, aggregate, validate, render}) add_common(cmd, f);
  ingest->add_option("files", f.files, "Trace files")->required();
  render->add_flag("--points", f.points, "Mark experience and mental exit points");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << Json{{"error", "usage"},
                      {"exit_code", static_cast<int>(presence::kExitUsage)},
                      {"message", e.what()}}
                     .dump()
              << "\n";
    return presence::kExitUsage;
  }

  try {
    const RunConfig config = resolve(f);
    if (tmpl->parsed()) {
      report(presence::cmd_template(config));
    } else if (ingest->parsed()) {
      std::vector<std::filesystem::path> files(f.files.begin(), f.files.end());
      report(presence::cmd_ingest(config, files));
    } else if (analyze->parsed()) {
      report(presence::cmd_analyze(config));
    } else if (aggregate->parsed()) {
      report(presence::cmd_aggregate(config));
    } else if (validate->parsed()) {
      const auto out = presence::cmd_validate(config);
      if (config.out.empty()) {
        for (const auto& m : out.messages) std::cout << m << "\n";
      } else {
        report(out);
      }
    } else if (render->parsed()) {
      report(presence::cmd_render(config));
    }
  } catch (const presence::Error& e) {
    std::cerr << presence::error_line(e.code(), e.what()) << "\n";
    return presence::exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << Json{{"error", "internal"},
                      {"exit_code", static_cast<int>(presence::kExitInternal)},
                      {"message", e.what()}}
                     .dump()
              << "\n";
    return presence::kExitInternal;
  }
  return presence::kExitOk;
}
