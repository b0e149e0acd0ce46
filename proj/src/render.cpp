#include "presence/render.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>
#include <tuple>

#include "presence/error.hpp"

namespace presence {

namespace {

constexpr double kMarginLeft = 15.0;
constexpr double kMarginRight = 20.0;
constexpr double kMarginTop = 12.0;
constexpr double kMarginBottom = 22.0;
constexpr const char* kBandGrey = "#bfbfbf";  // 25% grey

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  std::string s = buf;
  if (s == "-0.000") s = "0.000";
  return s;
}

std::string escape(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Maps sheet millimetres (x right from HMD-on, y up from the middle line) to
// document coordinates.
struct Frame {
  double origin_x;
  double origin_y;
  double width;
  double height;

  explicit Frame(const Template& t)
      : origin_x(kMarginLeft),
        origin_y(kMarginTop + t.presence_half_range_mm),
        width(kMarginLeft + t.time_axis_len_mm + kMarginRight),
        height(kMarginTop + t.presence_half_range_mm + t.negative_half_range_mm +
               kMarginBottom) {}

  double x(double mm) const { return origin_x + mm; }
  double y(double mm) const { return origin_y - mm; }
};

void open_document(std::ostringstream& out, double width, double height,
                   const std::string& config_json) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width)
      << "mm\" height=\"" << num(height) << "mm\" viewBox=\"0 0 " << num(width) << ' '
      << num(height) << "\" data-schema-version=\"1\">\n";
  if (!config_json.empty()) {
    out << "<metadata id=\"run-config\">" << escape(config_json) << "</metadata>\n";
  }
}

void sheet_body(std::ostringstream& out, const Template& t, const Frame& f) {
  const double len = t.time_axis_len_mm;
  const double up = t.presence_half_range_mm;
  const double down = t.negative_half_range_mm;

  out << "<defs>\n"
      << "<linearGradient id=\"band-up\" x1=\"0\" y1=\"1\" x2=\"0\" y2=\"0\">"
      << "<stop offset=\"0\" stop-color=\"#ffffff\"/><stop offset=\"1\" stop-color=\""
      << kBandGrey << "\"/></linearGradient>\n"
      << "<linearGradient id=\"band-down\" x1=\"0\" y1=\"0\" x2=\"0\" y2=\"1\">"
      << "<stop offset=\"0\" stop-color=\"#ffffff\"/><stop offset=\"1\" stop-color=\""
      << kBandGrey << "\"/></linearGradient>\n"
      << "</defs>\n";

  out << "<g id=\"gradient\">\n"
      << "<rect x=\"" << num(f.x(0)) << "\" y=\"" << num(f.y(up)) << "\" width=\""
      << num(len) << "\" height=\"" << num(up) << "\" fill=\"url(#band-up)\"/>\n"
      << "<rect x=\"" << num(f.x(0)) << "\" y=\"" << num(f.y(0)) << "\" width=\""
      << num(len) << "\" height=\"" << num(down) << "\" fill=\"url(#band-down)\"/>\n"
      << "</g>\n";

  out << "<g id=\"axes\" stroke=\"#000000\" stroke-width=\"0.35\">\n"
      << "<line id=\"time-axis\" x1=\"" << num(f.x(0)) << "\" y1=\"" << num(f.y(0))
      << "\" x2=\"" << num(f.x(len)) << "\" y2=\"" << num(f.y(0)) << "\"/>\n"
      << "<line id=\"hmd-on\" x1=\"" << num(f.x(0)) << "\" y1=\"" << num(f.y(up))
      << "\" x2=\"" << num(f.x(0)) << "\" y2=\"" << num(f.y(-down)) << "\"/>\n"
      << "<line id=\"hmd-off\" x1=\"" << num(f.x(len)) << "\" y1=\"" << num(f.y(up))
      << "\" x2=\"" << num(f.x(len)) << "\" y2=\"" << num(f.y(-down))
      << "\" stroke-dasharray=\"2,1.5\"/>\n"
      << "</g>\n";

  out << "<g id=\"hmd-symbol\">\n"
      << "<rect x=\"" << num(f.x(len) - 4.0) << "\" y=\"" << num(f.y(-down) + 2.0)
      << "\" width=\"8.000\" height=\"4.000\" rx=\"1.500\" fill=\"none\" "
         "stroke=\"#000000\" stroke-width=\"0.3\"/>\n"
      << "<text x=\"" << num(f.x(len)) << "\" y=\"" << num(f.y(-down) + 10.0)
      << "\" font-size=\"3\" text-anchor=\"middle\">HMD off</text>\n"
      << "</g>\n";

  out << "<circle id=\"start-dot\" cx=\"" << num(f.x(0)) << "\" cy=\"" << num(f.y(0))
      << "\" r=\"1.200\" fill=\"#000000\"/>\n";

  if (!t.event_ticks.empty()) {
    out << "<g id=\"ticks\" stroke=\"#000000\" stroke-width=\"0.3\">\n";
    for (const auto& tick : t.event_ticks) {
      out << "<g class=\"tick\" data-label=\"" << escape(tick.label) << "\" data-fraction=\""
          << num(tick.x_mm / len) << "\">"
          << "<line x1=\"" << num(f.x(tick.x_mm)) << "\" y1=\"" << num(f.y(0) - 2.0)
          << "\" x2=\"" << num(f.x(tick.x_mm)) << "\" y2=\"" << num(f.y(0) + 2.0)
          << "\"/><text x=\"" << num(f.x(tick.x_mm)) << "\" y=\"" << num(f.y(0) + 5.0)
          << "\" font-size=\"2.5\" stroke=\"none\" text-anchor=\"middle\">"
          << escape(tick.label) << "</text></g>\n";
    }
    out << "</g>\n";
  }
}

}  // namespace

std::string render_template(const Template& tmpl, const std::string& config_json) {
  const Frame f(tmpl);
  std::ostringstream out;
  open_document(out, f.width, f.height, config_json);
  sheet_body(out, tmpl, f);
  out << "</svg>\n";
  return out.str();
}

std::string group_color(const std::string& group, std::size_t fallback_index) {
  if (group == "A") return "#2ca02c";
  if (group == "B") return "#d62728";
  if (group == "C") return "#1f77b4";
  static const char* palette[] = {"#ff7f0e", "#9467bd", "#8c564b",
                                  "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  return palette[fallback_index % std::size(palette)];
}

std::string render_overlay(std::span<const SessionRecord> records,
                           const OverlayOptions& options) {
  std::vector<const SessionRecord*> drawn;
  for (const auto& r : records) {
    if (r.trace && !r.trace->samples.empty()) drawn.push_back(&r);
  }
  if (drawn.empty()) {
    throw Error(ErrorCode::EmptyInput, "empty-input: no record with a retained trace");
  }
  std::stable_sort(drawn.begin(), drawn.end(), [](const auto* a, const auto* b) {
    return std::tie(a->study_id, a->participant_id, a->revision) <
           std::tie(b->study_id, b->participant_id, b->revision);
  });

  std::map<std::string, std::string> colors;
  std::size_t fallback = 0;
  for (const auto* r : drawn) {
    if (colors.count(r->group)) continue;
    const bool named = r->group == "A" || r->group == "B" || r->group == "C";
    colors[r->group] = group_color(r->group, named ? 0 : fallback++);
  }

  const auto& t = options.sheet;
  const Frame f(t);
  std::ostringstream out;
  open_document(out, f.width, f.height, options.config_json);
  sheet_body(out, t, f);

  out << "<g id=\"traces\" fill=\"none\" stroke-width=\"0.4\">\n";
  for (const auto* r : drawn) {
    out << "<polyline class=\"trace\" data-participant=\"" << escape(r->participant_id)
        << "\" data-group=\"" << escape(r->group) << "\" stroke=\"" << colors[r->group]
        << "\" points=\"";
    bool first = true;
    for (const auto& s : r->trace->samples) {
      if (!first) out << ' ';
      first = false;
      out << num(f.x(s.t * t.time_axis_len_mm)) << ','
          << num(f.y(s.p * t.presence_half_range_mm));
    }
    out << "\"/>\n";
  }
  out << "</g>\n";

  if (options.mark_points) {
    out << "<g id=\"points\" fill=\"#000000\">\n";
    for (const auto* r : drawn) {
      if (!r->model) continue;
      for (const auto& [name, pt] :
           {std::pair{"p_experience", r->model->points.p_experience},
            std::pair{"p_mentalexit", r->model->points.p_mentalexit}}) {
        out << "<circle class=\"" << name << "\" data-participant=\""
            << escape(r->participant_id) << "\" cx=\""
            << num(f.x(pt.t * t.time_axis_len_mm)) << "\" cy=\""
            << num(f.y(pt.p * t.presence_half_range_mm)) << "\" r=\"0.900\"/>\n";
      }
    }
    out << "</g>\n";
  }

  out << "<g id=\"legend\" font-size=\"3\">\n";
  double ly = kMarginTop - 6.0;
  double lx = f.x(0);
  for (const auto& [group, color] : colors) {
    out << "<rect x=\"" << num(lx) << "\" y=\"" << num(ly - 2.5) << "\" width=\"3.000\""
        << " height=\"3.000\" fill=\"" << color << "\"/><text x=\"" << num(lx + 4.0)
        << "\" y=\"" << num(ly) << "\">" << escape(group) << "</text>\n";
    lx += 20.0;
  }
  out << "</g>\n</svg>\n";
  return out.str();
}

std::string render_boxplot(const AggregateStats& stats,
                           std::span<const GroundTruthEvent> events,
                           const std::string& config_json) {
  const auto ordering = intensity_ordering(stats, events);
  std::vector<const BoxSummary*> boxes;
  for (const auto& label : ordering.order) {
    for (const auto& b : stats.intensity) {
      if (b.event == label && b.n >= 1) boxes.push_back(&b);
    }
  }

  constexpr double kUnit = 40.0;  // mm per presence unit
  constexpr double kSlot = 24.0;
  constexpr double kBoxWidth = 12.0;
  const double width = kMarginLeft + kSlot * static_cast<double>(std::max<std::size_t>(
                                                 boxes.size(), 1)) +
                       kMarginRight;
  const double height = kMarginTop + 2.0 * kUnit + kMarginBottom;
  const double mid_y = kMarginTop + kUnit;
  auto y = [&](double p) { return mid_y - p * kUnit; };

  std::ostringstream out;
  open_document(out, width, height, config_json);
  out << "<g id=\"axis\" stroke=\"#000000\" stroke-width=\"0.3\" font-size=\"3\">\n"
      << "<line x1=\"" << num(kMarginLeft) << "\" y1=\"" << num(y(1.0)) << "\" x2=\""
      << num(kMarginLeft) << "\" y2=\"" << num(y(-1.0)) << "\"/>\n";
  for (double p : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
    out << "<line x1=\"" << num(kMarginLeft - 1.5) << "\" y1=\"" << num(y(p))
        << "\" x2=\"" << num(kMarginLeft) << "\" y2=\"" << num(y(p)) << "\"/>"
        << "<text x=\"" << num(kMarginLeft - 2.5) << "\" y=\"" << num(y(p) + 1.0)
        << "\" stroke=\"none\" text-anchor=\"end\">" << num(p) << "</text>\n";
  }
  out << "<line x1=\"" << num(kMarginLeft) << "\" y1=\"" << num(y(0.0)) << "\" x2=\""
      << num(width - kMarginRight) << "\" y2=\"" << num(y(0.0))
      << "\" stroke-dasharray=\"1,1\"/>\n</g>\n";

  out << "<g id=\"boxes\" stroke=\"#000000\" stroke-width=\"0.3\">\n";
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const auto& b = *boxes[i];
    const double cx = kMarginLeft + kSlot * (static_cast<double>(i) + 0.5);
    const double left = cx - kBoxWidth / 2.0;
    out << "<g class=\"box\" data-event=\"" << escape(b.event) << "\" data-n=\"" << b.n
        << "\" data-median=\"" << num(b.median) << "\">\n"
        << "<line class=\"whisker\" x1=\"" << num(cx) << "\" y1=\"" << num(y(b.whisker_high))
        << "\" x2=\"" << num(cx) << "\" y2=\"" << num(y(b.q3)) << "\"/>\n"
        << "<line class=\"whisker\" x1=\"" << num(cx) << "\" y1=\"" << num(y(b.q1))
        << "\" x2=\"" << num(cx) << "\" y2=\"" << num(y(b.whisker_low)) << "\"/>\n"
        << "<rect x=\"" << num(left) << "\" y=\"" << num(y(b.q3)) << "\" width=\""
        << num(kBoxWidth) << "\" height=\"" << num((b.q3 - b.q1) * kUnit)
        << "\" fill=\"#dddddd\"/>\n"
        << "<line class=\"median\" x1=\"" << num(left) << "\" y1=\"" << num(y(b.median))
        << "\" x2=\"" << num(left + kBoxWidth) << "\" y2=\"" << num(y(b.median))
        << "\" stroke-width=\"0.6\"/>\n";
    for (double o : b.outliers) {
      out << "<circle class=\"outlier\" cx=\"" << num(cx) << "\" cy=\"" << num(y(o))
          << "\" r=\"0.700\" fill=\"none\"/>\n";
    }
    out << "<text x=\"" << num(cx) << "\" y=\"" << num(y(-1.0) + 6.0)
        << "\" font-size=\"3\" stroke=\"none\" text-anchor=\"middle\">" << escape(b.event)
        << "</text>\n</g>\n";
  }
  out << "</g>\n</svg>\n";
  return out.str();
}

}  // namespace presence
