#include "presence/serialization.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "presence/error.hpp"

namespace presence {

namespace {

Json point_json(const TracePoint& p) { return Json::array({round9(p.t), round9(p.p)}); }

TracePoint point_from(const Json& j) {
  if (!j.is_array() || j.size() != 2) {
    throw Error(ErrorCode::ParseError, "point must be a [t, p] pair");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

Json opt_point(const std::optional<TracePoint>& p) {
  return p ? point_json(*p) : Json(nullptr);
}

std::optional<TracePoint> opt_point_from(const Json& j) {
  if (j.is_null()) return std::nullopt;
  return point_from(j);
}

Json opt_num(const std::optional<double>& v) {
  return v ? Json(round9(*v)) : Json(nullptr);
}

std::optional<double> opt_num_from(const Json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

const Json& field(const Json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) {
    throw Error(ErrorCode::ParseError, std::string("missing field '") + name + "'");
  }
  return j.at(name);
}

template <class T>
T get_or(const Json& j, const char* name, T fallback) {
  if (!j.is_object() || !j.contains(name) || j.at(name).is_null()) return fallback;
  return j.at(name).get<T>();
}

Json phase_json(const Phase& ph) {
  return Json{{"kind", to_string(ph.kind)},
              {"start", point_json(ph.start)},
              {"end", point_json(ph.end)},
              {"duration", round9(ph.duration)},
              {"shift", round9(ph.shift)}};
}

Phase phase_from(const Json& j) {
  Phase ph;
  ph.kind = phase_kind_from_string(field(j, "kind").get<std::string>());
  ph.start = point_from(field(j, "start"));
  ph.end = point_from(field(j, "end"));
  ph.duration = field(j, "duration").get<double>();
  ph.shift = field(j, "shift").get<double>();
  return ph;
}

Json points_json(const ModelPoints& pts) {
  Json breaks = Json::array();
  for (const auto& b : pts.breaks) {
    breaks.push_back({{"p_dropping", point_json(b.p_dropping)},
                      {"p_break", point_json(b.p_break)},
                      {"phase_index", b.phase_index}});
  }
  return Json{{"p_transition", point_json(pts.p_transition)},
              {"p_experience", point_json(pts.p_experience)},
              {"p_mentalexit", point_json(pts.p_mentalexit)},
              {"p_physicalexit", opt_point(pts.p_physicalexit)},
              {"p_return", point_json(pts.p_return)},
              {"p_midcross", opt_point(pts.p_midcross)},
              {"breaks", breaks}};
}

ModelPoints points_from(const Json& j) {
  ModelPoints pts;
  pts.p_transition = point_from(field(j, "p_transition"));
  pts.p_experience = point_from(field(j, "p_experience"));
  pts.p_mentalexit = point_from(field(j, "p_mentalexit"));
  pts.p_physicalexit = opt_point_from(field(j, "p_physicalexit"));
  pts.p_return = point_from(field(j, "p_return"));
  pts.p_midcross = opt_point_from(field(j, "p_midcross"));
  for (const auto& b : field(j, "breaks")) {
    pts.breaks.push_back({point_from(field(b, "p_dropping")),
                          point_from(field(b, "p_break")),
                          field(b, "phase_index").get<std::size_t>()});
  }
  return pts;
}

Json parameters_json(const Parameters& p) {
  Json breaks = Json::array();
  for (const auto& b : p.breaks) {
    breaks.push_back({{"t_dropping", round9(b.t_dropping)},
                      {"sh_break", round9(b.sh_break)},
                      {"t_raising", opt_num(b.t_raising)},
                      {"recovery_plateau", opt_num(b.recovery_plateau)}});
  }
  return Json{{"t_transition", round9(p.t_transition)},
              {"sh_transition", round9(p.sh_transition)},
              {"t_transition_midcross", opt_num(p.t_transition_midcross)},
              {"t_experience", round9(p.t_experience)},
              {"t_exit", round9(p.t_exit)},
              {"t_mental", round9(p.t_mental)},
              {"t_physical", round9(p.t_physical)},
              {"breaks", breaks},
              {"drop_raise_ratio", opt_num(p.drop_raise_ratio)}};
}

Parameters parameters_from(const Json& j) {
  Parameters p;
  p.t_transition = field(j, "t_transition").get<double>();
  p.sh_transition = field(j, "sh_transition").get<double>();
  p.t_transition_midcross = opt_num_from(field(j, "t_transition_midcross"));
  p.t_experience = field(j, "t_experience").get<double>();
  p.t_exit = field(j, "t_exit").get<double>();
  p.t_mental = field(j, "t_mental").get<double>();
  p.t_physical = field(j, "t_physical").get<double>();
  for (const auto& b : field(j, "breaks")) {
    BreakParameters bp;
    bp.t_dropping = field(b, "t_dropping").get<double>();
    bp.sh_break = field(b, "sh_break").get<double>();
    bp.t_raising = opt_num_from(field(b, "t_raising"));
    bp.recovery_plateau = opt_num_from(field(b, "recovery_plateau"));
    p.breaks.push_back(bp);
  }
  p.drop_raise_ratio = opt_num_from(field(j, "drop_raise_ratio"));
  return p;
}

Json bip_json(const BipReport& b) {
  return Json{{"p_dropping", point_json(b.p_dropping)},
              {"p_break", point_json(b.p_break)},
              {"sh_break", round9(b.sh_break)},
              {"t_dropping", round9(b.t_dropping)},
              {"t_raising", opt_num(b.t_raising)},
              {"matched_event", b.matched_event ? Json(*b.matched_event) : Json(nullptr)}};
}

BipReport bip_from(const Json& j) {
  BipReport b;
  b.p_dropping = point_from(field(j, "p_dropping"));
  b.p_break = point_from(field(j, "p_break"));
  b.sh_break = field(j, "sh_break").get<double>();
  b.t_dropping = field(j, "t_dropping").get<double>();
  b.t_raising = opt_num_from(field(j, "t_raising"));
  if (!field(j, "matched_event").is_null()) {
    b.matched_event = j.at("matched_event").get<std::string>();
  }
  return b;
}

Json issue_json(const ValidationIssue& i) {
  return Json{{"severity", to_string(i.severity)}, {"code", i.code}, {"message", i.message}};
}

ValidationIssue issue_from(const Json& j) {
  ValidationIssue i;
  i.severity = field(j, "severity").get<std::string>() == "fatal" ? Severity::Fatal
                                                                  : Severity::Warning;
  i.code = field(j, "code").get<std::string>();
  i.message = field(j, "message").get<std::string>();
  return i;
}

Json mean_sd_json(const std::optional<MeanSd>& m) {
  if (!m) return nullptr;
  return Json{{"mean", round9(m->mean)}, {"sd", opt_num(m->sd)}, {"n", m->n}};
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string config_text(const std::string& config_json) {
  if (config_json.empty()) return "{}";
  return Json::parse(config_json).dump();
}

}  // namespace

double round9(double v) {
  if (!std::isfinite(v)) return v;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return std::strtod(buf, nullptr);
}

std::string format9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", round9(v));
  std::string s = buf;
  if (s == "-0") s = "0";
  return s;
}

void require_schema(const Json& doc, const std::string& what) {
  if (!doc.is_object() || !doc.contains("schema_version")) {
    throw Error(ErrorCode::SchemaMismatch, what + ": missing schema_version");
  }
  const auto& v = doc.at("schema_version");
  if (!v.is_string() || v.get<std::string>() != kSchemaVersion) {
    throw Error(ErrorCode::SchemaMismatch,
                what + ": unsupported schema_version " + v.dump() +
                    " (expected \"" + kSchemaVersion + "\")");
  }
}

Json to_json(const Template& tmpl) {
  Json ticks = Json::array();
  for (const auto& t : tmpl.event_ticks) {
    ticks.push_back({{"label", t.label}, {"x_mm", round9(t.x_mm)}});
  }
  return Json{{"time_axis_len_mm", round9(tmpl.time_axis_len_mm)},
              {"presence_half_range_mm", round9(tmpl.presence_half_range_mm)},
              {"negative_half_range_mm", round9(tmpl.negative_half_range_mm)},
              {"hmd_on_x_mm", round9(tmpl.hmd_on_x_mm())},
              {"hmd_off_x_mm", round9(tmpl.hmd_off_x_mm())},
              {"start_dot", {{"x", 0.0}, {"y", 0.0}}},
              {"event_ticks", ticks},
              {"gradient_spec", {{"from", "#ffffff"}, {"to", "#bfbfbf"}}}};
}

Template template_from_json(const Json& j) {
  TemplateConfig cfg;
  if (j.contains("time_axis_len_mm")) cfg.time_len_mm = j.at("time_axis_len_mm").get<double>();
  if (j.contains("presence_half_range_mm")) {
    cfg.half_range_mm = j.at("presence_half_range_mm").get<double>();
  }
  if (j.contains("negative_half_range_mm")) {
    cfg.negative_range_mm = j.at("negative_half_range_mm").get<double>();
  }
  if (j.contains("event_ticks")) {
    for (const auto& t : j.at("event_ticks")) {
      cfg.ticks.push_back({field(t, "label").get<std::string>(),
                           field(t, "x_mm").get<double>()});
    }
  }
  return build_template(cfg);
}

Json to_json(const TraceFile& file) {
  Json samples = Json::array();
  for (const auto& s : file.trace.samples) {
    samples.push_back(Json::array({round9(s.x_mm), round9(s.y_mm)}));
  }
  Json annotations = Json::array();
  for (const auto& a : file.trace.annotations) {
    annotations.push_back(
        {{"x_mm", round9(a.x_mm)}, {"kind", to_string(a.kind)}, {"text", a.text}});
  }
  const auto& src = file.trace.source;
  return Json{{"schema_version", kSchemaVersion},
              {"template", to_json(file.tmpl)},
              {"samples", samples},
              {"annotations", annotations},
              {"source",
               {{"participant_id", src.participant_id},
                {"group", src.group},
                {"capture", to_string(src.capture)}}}};
}

TraceFile trace_file_from_json(const Json& doc) {
  require_schema(doc, "trace file");
  try {
    TraceFile file;
    file.tmpl = template_from_json(get_or(doc, "template", Json::object()));
    for (const auto& s : field(doc, "samples")) {
      if (!s.is_array() || s.size() != 2) {
        throw Error(ErrorCode::ParseError, "sample must be an [x_mm, y_mm] pair");
      }
      file.trace.samples.push_back({s[0].get<double>(), s[1].get<double>()});
    }
    for (const auto& a : get_or(doc, "annotations", Json::array())) {
      file.trace.annotations.push_back(
          {field(a, "x_mm").get<double>(),
           annotation_kind_from_string(field(a, "kind").get<std::string>()),
           get_or<std::string>(a, "text", "")});
    }
    const auto& src = field(doc, "source");
    file.trace.source.participant_id = field(src, "participant_id").get<std::string>();
    file.trace.source.group = get_or<std::string>(src, "group", "");
    file.trace.source.capture =
        capture_from_string(get_or<std::string>(src, "capture", "digital"));
    return file;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("trace file: ") + e.what());
  }
}

Json to_json(const GroundTruthEvent& e) {
  Json j{{"label", e.label},
         {"tick_t", round9(e.tick_t)},
         {"expected_bip", e.expected_bip},
         {"bip_rank", e.bip_rank ? Json(*e.bip_rank) : Json(nullptr)}};
  if (!e.group.empty()) j["group"] = e.group;
  return j;
}

GroundTruthEvent event_from_json(const Json& j) {
  GroundTruthEvent e;
  e.label = field(j, "label").get<std::string>();
  e.tick_t = field(j, "tick_t").get<double>();
  e.expected_bip = get_or(j, "expected_bip", true);
  if (j.contains("bip_rank") && !j.at("bip_rank").is_null()) {
    e.bip_rank = j.at("bip_rank").get<int>();
  }
  e.group = get_or<std::string>(j, "group", "");
  return e;
}

Json events_document(std::span<const GroundTruthEvent> events) {
  Json list = Json::array();
  for (const auto& e : events) list.push_back(to_json(e));
  return Json{{"schema_version", kSchemaVersion}, {"events", list}};
}

std::vector<GroundTruthEvent> events_from_document(const Json& doc) {
  require_schema(doc, "events file");
  try {
    std::vector<GroundTruthEvent> out;
    for (const auto& e : field(doc, "events")) out.push_back(event_from_json(e));
    return out;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("events file: ") + e.what());
  }
}

SessionRecord canonicalize(const SessionRecord& record) {
  return record_from_json(to_json(record));
}

Json to_json(const SessionRecord& r) {
  Json trace = nullptr;
  if (r.trace) {
    Json samples = Json::array();
    for (const auto& s : r.trace->samples) samples.push_back(point_json(s));
    Json annotations = Json::array();
    for (const auto& a : r.trace->annotations) {
      annotations.push_back(
          {{"t", round9(a.t)}, {"kind", to_string(a.kind)}, {"text", a.text}});
    }
    trace = Json{{"samples", samples}, {"annotations", annotations}};
  }
  Json warnings = Json::array();
  for (const auto& w : r.ingest_warnings) warnings.push_back(issue_json(w));

  Json model = nullptr;
  if (r.model) {
    Json phases = Json::array();
    for (const auto& ph : r.model->phases) phases.push_back(phase_json(ph));
    model = Json{{"phases", phases},
                 {"points", points_json(r.model->points)},
                 {"parameters", parameters_json(r.model->parameters)}};
  }
  Json bips = Json::array();
  for (const auto& b : r.bips) bips.push_back(bip_json(b));

  return Json{{"schema_version", kSchemaVersion},
              {"study_id", r.study_id},
              {"participant_id", r.participant_id},
              {"revision", r.revision},
              {"group", r.group},
              {"capture", to_string(r.capture)},
              {"trace", trace},
              {"ingest_warnings", warnings},
              {"model", model},
              {"bips", bips},
              {"conformance", r.conformance ? to_json(*r.conformance) : Json(nullptr)},
              {"excluded", r.excluded ? Json(*r.excluded) : Json(nullptr)},
              {"config", r.config_json.empty() ? Json(nullptr)
                                               : Json::parse(r.config_json)}};
}

SessionRecord record_from_json(const Json& j) {
  require_schema(j, "session record");
  try {
    SessionRecord r;
    r.study_id = field(j, "study_id").get<std::string>();
    r.participant_id = field(j, "participant_id").get<std::string>();
    r.revision = field(j, "revision").get<int>();
    r.group = field(j, "group").get<std::string>();
    r.capture = capture_from_string(field(j, "capture").get<std::string>());
    if (const auto& t = field(j, "trace"); !t.is_null()) {
      NormalizedTrace trace;
      for (const auto& s : field(t, "samples")) trace.samples.push_back(point_from(s));
      for (const auto& a : field(t, "annotations")) {
        trace.annotations.push_back(
            {field(a, "t").get<double>(),
             annotation_kind_from_string(field(a, "kind").get<std::string>()),
             field(a, "text").get<std::string>()});
      }
      trace.source = {r.participant_id, r.group, r.capture};
      r.trace = std::move(trace);
    }
    for (const auto& w : field(j, "ingest_warnings")) r.ingest_warnings.push_back(issue_from(w));
    if (const auto& m = field(j, "model"); !m.is_null()) {
      DescriptiveModel model;
      for (const auto& ph : field(m, "phases")) model.phases.push_back(phase_from(ph));
      model.points = points_from(field(m, "points"));
      model.parameters = parameters_from(field(m, "parameters"));
      r.model = std::move(model);
    }
    for (const auto& b : field(j, "bips")) r.bips.push_back(bip_from(b));
    if (const auto& c = field(j, "conformance"); !c.is_null()) {
      ConformanceReport report;
      if (!c.is_array() || c.size() != 5) {
        throw Error(ErrorCode::ParseError, "conformance must list five prerequisites");
      }
      for (std::size_t i = 0; i < 5; ++i) {
        const auto id = field(c[i], "id").get<std::string>();
        report.entries[i] = {id.empty() ? '?' : id[0], field(c[i], "passed").get<bool>(),
                             field(c[i], "detail").get<std::string>()};
      }
      r.conformance = report;
    }
    if (const auto& e = field(j, "excluded"); !e.is_null()) r.excluded = e.get<std::string>();
    if (const auto& c = field(j, "config"); !c.is_null()) r.config_json = c.dump();
    return r;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("session record: ") + e.what());
  }
}

Json to_json(const ConformanceReport& report) {
  Json out = Json::array();
  for (const auto& e : report.entries) {
    out.push_back({{"id", std::string(1, e.id)}, {"passed", e.passed}, {"detail", e.detail}});
  }
  return out;
}

Json to_json(const AggregateStats& stats) {
  Json detection = Json::array();
  for (const auto& row : stats.detection) {
    detection.push_back({{"event", row.event},
                         {"group", row.group},
                         {"pos", row.pos ? Json(*row.pos) : Json(nullptr)},
                         {"detection_pct", round9(row.detection_pct)},
                         {"mean_sh_break", opt_num(row.mean_sh_break)},
                         {"mean_p_break", opt_num(row.mean_p_break)},
                         {"n", row.n},
                         {"group_size", row.group_size}});
  }
  Json participants = Json::array();
  for (const auto& p : stats.participants) {
    participants.push_back(
        {{"participant_id", p.participant_id}, {"group", p.group}, {"bip_count", p.bip_count}});
  }
  const auto& g = stats.global;
  Json global{{"records", g.records},
              {"described", g.described},
              {"t_transition", mean_sd_json(g.t_transition)},
              {"t_exit", mean_sd_json(g.t_exit)},
              {"experience_fraction", mean_sd_json(g.experience_fraction)},
              {"p_return_t", mean_sd_json(g.p_return_t)},
              {"p_return_p", mean_sd_json(g.p_return_p)},
              {"bip_count", mean_sd_json(g.bip_count)},
              {"total_bips", g.total_bips},
              {"matched_bips", g.matched_bips},
              {"correct_position_rate", opt_num(g.correct_position_rate)},
              {"drop_raise_ratio", opt_num(g.drop_raise_ratio)}};
  Json intensity = Json::array();
  for (const auto& b : stats.intensity) {
    Json outliers = Json::array();
    for (double o : b.outliers) outliers.push_back(round9(o));
    intensity.push_back({{"event", b.event},
                         {"n", b.n},
                         {"min", round9(b.min)},
                         {"q1", round9(b.q1)},
                         {"median", round9(b.median)},
                         {"q3", round9(b.q3)},
                         {"max", round9(b.max)},
                         {"whisker_low", round9(b.whisker_low)},
                         {"whisker_high", round9(b.whisker_high)},
                         {"outliers", outliers}});
  }
  return Json{{"global", global},
              {"detection", detection},
              {"participants", participants},
              {"intensity", intensity}};
}

Json to_json(const IntensityOrdering& ordering) {
  Json medians = Json::array();
  for (double m : ordering.medians) medians.push_back(round9(m));
  return Json{{"order", ordering.order},
              {"medians", medians},
              {"omitted", ordering.omitted},
              {"concordance", opt_num(ordering.concordance)},
              {"pairs", ordering.pairs}};
}

std::string detection_csv(std::span<const DetectionRow> rows,
                          const std::string& config_json) {
  std::ostringstream out;
  out << "# schema_version=" << kSchemaVersion << " config=" << config_text(config_json)
      << "\n";
  out << "event,group,pos,detection_pct,mean_sh_break,mean_p_break,n,group_size\n";
  for (const auto& row : rows) {
    out << csv_cell(row.event) << ',' << csv_cell(row.group) << ','
        << (row.pos ? std::to_string(*row.pos) : "-") << ',' << format9(row.detection_pct)
        << ',' << (row.mean_sh_break ? format9(*row.mean_sh_break) : "-") << ','
        << (row.mean_p_break ? format9(*row.mean_p_break) : "-") << ',' << row.n << ','
        << row.group_size << '\n';
  }
  return out.str();
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::MissingFile, "cannot open " + path.string());
  }
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + path.parent_path().string());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

}  // namespace presence
