#include "presence/trace_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "presence/error.hpp"

namespace presence {

namespace {

std::string mm(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f mm", v);
  return buf;
}

void require_positive(std::optional<double> v, const char* name) {
  if (v && !(*v > 0.0 && std::isfinite(*v))) {
    throw Error(ErrorCode::InvalidTemplate,
                std::string(name) + " must be a positive length");
  }
}

}  // namespace

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidTemplate: return "invalid-template";
    case ErrorCode::InvalidConfig: return "invalid-config";
    case ErrorCode::FatalValidation: return "fatal-validation";
    case ErrorCode::ModelIncomplete: return "model-incomplete";
    case ErrorCode::DuplicateRecord: return "duplicate-record";
    case ErrorCode::RecordNotFound: return "record-not-found";
    case ErrorCode::SchemaMismatch: return "schema-mismatch";
    case ErrorCode::ParseError: return "parse-error";
    case ErrorCode::MissingFile: return "missing-file";
    case ErrorCode::EmptyInput: return "empty-input";
    case ErrorCode::IoError: return "io-error";
  }
  return "unknown";
}

Template build_template(const TemplateConfig& config) {
  require_positive(config.time_len_mm, "time_len_mm");
  require_positive(config.half_range_mm, "half_range_mm");
  require_positive(config.negative_range_mm, "negative_range_mm");

  Template tmpl;
  tmpl.time_axis_len_mm = config.time_len_mm.value_or(200.0);
  tmpl.presence_half_range_mm = config.half_range_mm.value_or(40.0);
  tmpl.negative_half_range_mm =
      config.negative_range_mm.value_or(tmpl.presence_half_range_mm);

  std::set<std::string> labels;
  for (const auto& tick : config.ticks) {
    if (!labels.insert(tick.label).second) {
      throw Error(ErrorCode::InvalidTemplate,
                  "duplicate tick label '" + tick.label + "'");
    }
    if (!std::isfinite(tick.x_mm) || tick.x_mm < 0.0 ||
        tick.x_mm > tmpl.time_axis_len_mm) {
      throw Error(ErrorCode::InvalidTemplate,
                  "tick '" + tick.label + "' outside axis at " + mm(tick.x_mm));
    }
  }

  tmpl.event_ticks = config.ticks;
  std::stable_sort(
      tmpl.event_ticks.begin(), tmpl.event_ticks.end(),
      [](const EventTick& a, const EventTick& b) { return a.x_mm < b.x_mm; });
  for (std::size_t i = 1; i < tmpl.event_ticks.size(); ++i) {
    if (tmpl.event_ticks[i].x_mm == tmpl.event_ticks[i - 1].x_mm) {
      throw Error(ErrorCode::InvalidTemplate,
                  "tick '" + tmpl.event_ticks[i].label +
                      "' shares its position with '" +
                      tmpl.event_ticks[i - 1].label + "'");
    }
  }
  return tmpl;
}

std::string_view to_string(AnnotationKind kind) {
  switch (kind) {
    case AnnotationKind::BreakNote: return "break_note";
    case AnnotationKind::ConstantNote: return "constant_note";
    case AnnotationKind::EventNote: return "event_note";
    case AnnotationKind::FreeText: return "free_text";
  }
  return "free_text";
}

AnnotationKind annotation_kind_from_string(std::string_view name) {
  if (name == "break_note") return AnnotationKind::BreakNote;
  if (name == "constant_note") return AnnotationKind::ConstantNote;
  if (name == "event_note") return AnnotationKind::EventNote;
  if (name == "free_text") return AnnotationKind::FreeText;
  throw Error(ErrorCode::ParseError,
              "unknown annotation kind '" + std::string(name) + "'");
}

std::string_view to_string(Capture capture) {
  return capture == Capture::PaperScan ? "paper_scan" : "digital";
}

Capture capture_from_string(std::string_view name) {
  if (name == "paper_scan") return Capture::PaperScan;
  if (name == "digital") return Capture::Digital;
  throw Error(ErrorCode::ParseError,
              "unknown capture kind '" + std::string(name) + "'");
}

std::string_view to_string(Severity severity) {
  return severity == Severity::Fatal ? "fatal" : "warning";
}

bool ValidationReport::has_fatal() const {
  return std::any_of(issues.begin(), issues.end(), [](const auto& i) {
    return i.severity == Severity::Fatal;
  });
}

bool ValidationReport::has(std::string_view code) const {
  return std::any_of(issues.begin(), issues.end(),
                     [&](const auto& i) { return i.code == code; });
}

ValidationReport validate_trace(const RawTrace& trace, const Template& tmpl,
                                const ValidationConfig& config) {
  ValidationReport report;
  auto fatal = [&](std::string code, std::string message) {
    report.issues.push_back({Severity::Fatal, std::move(code), std::move(message)});
  };
  auto warn = [&](std::string code, std::string message) {
    report.issues.push_back(
        {Severity::Warning, std::move(code), std::move(message)});
  };

  const auto& s = trace.samples;
  if (s.size() < 2) {
    fatal("too-few-samples",
          "trace has " + std::to_string(s.size()) + " samples, need at least 2");
    return report;
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!std::isfinite(s[i].x_mm) || !std::isfinite(s[i].y_mm)) {
      fatal("non-finite", "sample " + std::to_string(i) + " is not finite");
      return report;
    }
  }

  for (std::size_t i = 1; i < s.size(); ++i) {
    if (s[i].x_mm < s[i - 1].x_mm) {
      fatal("x-decreasing", "sample " + std::to_string(i) + " moves left from " +
                                mm(s[i - 1].x_mm) + " to " + mm(s[i].x_mm));
      break;
    }
  }

  const double start_miss = std::hypot(s.front().x_mm, s.front().y_mm);
  if (start_miss > config.start_tolerance_mm) {
    fatal("start-dot-miss", "first sample is " + mm(start_miss) +
                                " from the start dot (tolerance " +
                                mm(config.start_tolerance_mm) + ")");
  }

  const double x_limit = config.max_time_fraction * tmpl.time_axis_len_mm;
  const double x_max = std::max_element(s.begin(), s.end(), [](auto& a, auto& b) {
                         return a.x_mm < b.x_mm;
                       })->x_mm;
  if (x_max > x_limit) {
    fatal("x-past-hmd-off",
          "trace reaches " + mm(x_max) + ", limit is " + mm(x_limit));
  }

  std::size_t clamped = 0;
  std::size_t rejected = 0;
  for (const auto& sample : s) {
    const double over =
        std::max(sample.y_mm - tmpl.presence_half_range_mm,
                 -tmpl.negative_half_range_mm - sample.y_mm);
    if (over > config.clamp_tolerance_mm) {
      ++rejected;
    } else if (over > 0.0) {
      ++clamped;
    }
  }
  if (rejected > 0) {
    fatal("y-out-of-range", std::to_string(rejected) +
                                " samples exceed the presence range by more "
                                "than " + mm(config.clamp_tolerance_mm));
  }
  if (clamped > 0) {
    warn("y-clamped",
         std::to_string(clamped) + " samples clamped to the presence range");
  }

  if (s.back().x_mm < config.early_end_fraction * tmpl.time_axis_len_mm) {
    warn("ends-early", "trace ends at " + mm(s.back().x_mm) +
                           ", before the last 10% of the timeline");
  }

  for (const auto& a : trace.annotations) {
    if (!std::isfinite(a.x_mm) || a.x_mm < 0.0 ||
        a.x_mm > tmpl.time_axis_len_mm) {
      fatal("annotation-outside-axis",
            "annotation '" + a.text + "' at " + mm(a.x_mm));
    }
  }
  return report;
}

RawTrace clamp_to_template(const RawTrace& trace, const Template& tmpl,
                           const ValidationConfig& config) {
  RawTrace out = trace;
  const double hi = tmpl.presence_half_range_mm;
  const double lo = -tmpl.negative_half_range_mm;
  for (auto& sample : out.samples) {
    if (sample.y_mm > hi && sample.y_mm - hi <= config.clamp_tolerance_mm) {
      sample.y_mm = hi;
    } else if (sample.y_mm < lo && lo - sample.y_mm <= config.clamp_tolerance_mm) {
      sample.y_mm = lo;
    }
  }
  return out;
}

NormalizedTrace normalize(const RawTrace& trace, const Template& tmpl,
                          const ValidationConfig& config) {
  if (trace.samples.empty()) {
    throw Error(ErrorCode::FatalValidation, "empty trace");
  }
  const auto report = validate_trace(trace, tmpl, config);
  if (report.has_fatal()) {
    for (const auto& issue : report.issues) {
      if (issue.severity == Severity::Fatal) {
        throw Error(ErrorCode::FatalValidation, issue.code + ": " + issue.message);
      }
    }
  }
  const RawTrace clamped = clamp_to_template(trace, tmpl, config);

  NormalizedTrace out;
  out.source = trace.source;
  out.samples.reserve(clamped.samples.size());
  for (const auto& s : clamped.samples) {
    out.samples.push_back({s.x_mm / tmpl.time_axis_len_mm,
                           s.y_mm / tmpl.presence_half_range_mm});
  }
  for (const auto& a : clamped.annotations) {
    out.annotations.push_back({a.x_mm / tmpl.time_axis_len_mm, a.kind, a.text});
  }
  return out;
}

RawTrace denormalize(const NormalizedTrace& trace, const Template& tmpl) {
  RawTrace out;
  out.source = trace.source;
  out.samples.reserve(trace.samples.size());
  for (const auto& s : trace.samples) {
    out.samples.push_back({s.t * tmpl.time_axis_len_mm,
                           s.p * tmpl.presence_half_range_mm});
  }
  for (const auto& a : trace.annotations) {
    out.annotations.push_back({a.t * tmpl.time_axis_len_mm, a.kind, a.text});
  }
  return out;
}

}  // namespace presence
