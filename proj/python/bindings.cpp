// Python module `presence_trace._core`. Structured values cross the boundary
// as JSON text in the same schema the files use; the package wrapper turns
// them into dicts.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "presence/pipeline.hpp"
#include "presence/render.hpp"
#include "presence/segmentation.hpp"
#include "presence/store.hpp"

namespace py = pybind11;
using namespace presence;

namespace {

Json parse(const std::string& text, const char* what) {
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string(what) + ": " + e.what());
  }
}

RunConfig run_config(const std::string& config_json, const std::string& store = "",
                     const std::string& events = "", const std::string& out = "") {
  RunConfig c = config_json.empty() ? RunConfig{} : apply_config({}, parse(config_json, "config"));
  check(c);
  c.store = store;
  c.events = events;
  c.out = out;
  return c;
}

std::vector<GroundTruthEvent> events_of(const std::string& events_json) {
  if (events_json.empty()) return {};
  return events_from_document(parse(events_json, "events"));
}

std::vector<SessionRecord> records_of(const std::vector<std::string>& records_json) {
  std::vector<SessionRecord> out;
  for (const auto& r : records_json) out.push_back(record_from_json(parse(r, "record")));
  return out;
}

Json phases_json(const std::vector<Phase>& phases) {
  Json out = Json::array();
  for (const auto& p : phases) {
    out.push_back({{"kind", to_string(p.kind)},
                   {"start", {p.start.t, p.start.p}},
                   {"end", {p.end.t, p.end.p}},
                   {"duration", p.duration},
                   {"shift", p.shift}});
  }
  return out;
}

std::string build_template_json(const std::string& template_json) {
  return to_json(template_from_json(parse(template_json, "template"))).dump();
}

std::string validate_json(const std::string& trace_file_json, const std::string& config_json) {
  const auto file = trace_file_from_json(parse(trace_file_json, "trace file"));
  const auto report = validate_trace(file.trace, file.tmpl, run_config(config_json).validation());
  Json out = Json::array();
  for (const auto& i : report.issues) {
    out.push_back({{"severity", i.severity == Severity::Fatal ? "fatal" : "warning"},
                   {"code", i.code},
                   {"message", i.message}});
  }
  return out.dump();
}

std::string ingest_json(const std::string& trace_file_json, const std::string& config_json) {
  const auto file = trace_file_from_json(parse(trace_file_json, "trace file"));
  return to_json(canonicalize(ingest_record(file, run_config(config_json)))).dump();
}

std::string segment_json(const std::vector<std::pair<double, double>>& samples,
                         const std::string& config_json) {
  std::vector<TracePoint> pts;
  for (const auto& [t, p] : samples) pts.push_back({t, p});
  return phases_json(segment_phases(pts, run_config(config_json).segmentation)).dump();
}

std::string analyze_json(const std::string& record_json, const std::string& events_json,
                         const std::string& config_json) {
  const auto config = run_config(config_json);
  auto r = analyze_record(record_from_json(parse(record_json, "record")), events_of(events_json),
                          config.analysis());
  r.config_json = to_json(config).dump();
  return to_json(canonicalize(r)).dump();
}

std::string aggregate_json(const std::vector<std::string>& records_json,
                           const std::string& events_json) {
  const auto records = records_of(records_json);
  const auto events = events_of(events_json);
  const auto stats = aggregate(records, events);
  Json doc = to_json(stats);
  doc["intensity_ordering"] = to_json(intensity_ordering(stats, events));
  return doc.dump();
}

std::string detection_csv_text(const std::vector<std::string>& records_json,
                               const std::string& events_json) {
  return detection_csv(aggregate(records_of(records_json), events_of(events_json)).detection);
}

std::string render_template_svg(const std::string& template_json) {
  return render_template(template_from_json(parse(template_json, "template")));
}

std::string render_overlay_svg(const std::vector<std::string>& records_json,
                               const std::string& template_json, bool mark_points) {
  OverlayOptions opts;
  if (!template_json.empty()) opts.sheet = template_from_json(parse(template_json, "template"));
  opts.mark_points = mark_points;
  return render_overlay(records_of(records_json), opts);
}

std::string render_boxplot_svg(const std::vector<std::string>& records_json,
                               const std::string& events_json) {
  const auto events = events_of(events_json);
  return render_boxplot(aggregate(records_of(records_json), events), events);
}

std::vector<std::string> store_latest(const std::string& path) {
  std::vector<std::string> out;
  for (const auto& r : SessionStore(path).latest()) out.push_back(to_json(r).dump());
  return out;
}

py::tuple run_command(const std::string& name, const std::string& config_json,
                      const std::string& store, const std::string& events,
                      const std::string& out, const std::vector<std::string>& files) {
  const auto config = run_config(config_json, store, events, out);
  CommandOutput result;
  {
    py::gil_scoped_release release;
    if (name == "template") {
      result = cmd_template(config);
    } else if (name == "ingest") {
      result = cmd_ingest(config, {files.begin(), files.end()});
    } else if (name == "analyze") {
      result = cmd_analyze(config);
    } else if (name == "aggregate") {
      result = cmd_aggregate(config);
    } else if (name == "validate") {
      result = cmd_validate(config);
    } else if (name == "render") {
      result = cmd_render(config);
    } else {
      throw Error(ErrorCode::InvalidConfig, "unknown command " + name);
    }
  }
  std::vector<std::string> written;
  for (const auto& p : result.written) written.push_back(p.string());
  return py::make_tuple(written, result.messages);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Presence trace analysis core";
  m.attr("SCHEMA_VERSION") = kSchemaVersion;

  PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error;
  error.call_once_and_store_result(
      [&]() { return py::exception<Error>(m, "PresenceError"); });
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const auto args = py::make_tuple(std::string(to_string(e.code())), exit_code_for(e.code()),
                                       std::string(e.what()));
      PyErr_SetObject(error.get_stored().ptr(), args.ptr());
    }
  });

  m.def("build_template", &build_template_json, py::arg("template_json"));
  m.def("validate", &validate_json, py::arg("trace_file_json"), py::arg("config_json") = "");
  m.def("ingest", &ingest_json, py::arg("trace_file_json"), py::arg("config_json") = "");
  m.def("segment", &segment_json, py::arg("samples"), py::arg("config_json") = "");
  m.def("analyze", &analyze_json, py::arg("record_json"), py::arg("events_json") = "",
        py::arg("config_json") = "");
  m.def("aggregate", &aggregate_json, py::arg("records_json"), py::arg("events_json") = "");
  m.def("detection_csv", &detection_csv_text, py::arg("records_json"),
        py::arg("events_json") = "");
  m.def("render_template", &render_template_svg, py::arg("template_json"));
  m.def("render_overlay", &render_overlay_svg, py::arg("records_json"),
        py::arg("template_json") = "", py::arg("mark_points") = false);
  m.def("render_boxplot", &render_boxplot_svg, py::arg("records_json"),
        py::arg("events_json") = "");
  m.def("store_latest", &store_latest, py::arg("path"));
  m.def("run_command", &run_command, py::arg("name"), py::arg("config_json") = "",
        py::arg("store") = "", py::arg("events") = "", py::arg("out") = "",
        py::arg("files") = std::vector<std::string>{});
}
