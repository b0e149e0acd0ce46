#include "presence/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <tuple>

#include "presence/error.hpp"

namespace presence {

namespace {

// Window bounds are inclusive; the slack only absorbs representation error
// from mm-to-fraction conversion, far below any drawable distance.
constexpr double kWindowSlack = 1e-9;

bool in_window(double t, double tick, const MatchWindow& w) {
  return t >= tick - w.before - kWindowSlack && t <= tick + w.after + kWindowSlack;
}

std::vector<std::string> expected_labels(std::span<const GroundTruthEvent> events) {
  std::vector<std::string> labels;
  for (const auto& e : events) {
    if (!e.expected_bip) continue;
    if (std::find(labels.begin(), labels.end(), e.label) == labels.end()) {
      labels.push_back(e.label);
    }
  }
  return labels;
}

std::optional<int> rank_of(std::span<const GroundTruthEvent> events,
                           const std::string& label) {
  for (const auto& e : events) {
    if (e.label == label && e.bip_rank) return e.bip_rank;
  }
  return std::nullopt;
}

std::vector<const SessionRecord*> sorted_records(
    std::span<const SessionRecord> records) {
  std::vector<const SessionRecord*> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(&r);
  std::stable_sort(out.begin(), out.end(), [](const auto* a, const auto* b) {
    return std::tie(a->study_id, a->participant_id, a->revision) <
           std::tie(b->study_id, b->participant_id, b->revision);
  });
  return out;
}

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

std::vector<GroundTruthEvent> events_for_group(
    std::span<const GroundTruthEvent> events, const std::string& group) {
  std::vector<GroundTruthEvent> out;
  std::set<std::string> labels;
  std::set<int> ranks;
  for (const auto& e : events) {
    if (!e.group.empty() && e.group != group) continue;
    if (!labels.insert(e.label).second) {
      throw Error(ErrorCode::InvalidConfig,
                  "duplicate event label '" + e.label + "' for group '" + group + "'");
    }
    if (!(e.tick_t >= 0.0 && e.tick_t <= 1.0)) {
      throw Error(ErrorCode::InvalidConfig,
                  "event '" + e.label + "' tick outside [0, 1]");
    }
    if (e.expected_bip && e.bip_rank && !ranks.insert(*e.bip_rank).second) {
      throw Error(ErrorCode::InvalidConfig,
                  "duplicate bip_rank " + std::to_string(*e.bip_rank));
    }
    out.push_back(e);
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.tick_t < b.tick_t;
  });
  return out;
}

std::vector<BipReport> bip_reports(const ModelPoints& points,
                                   const Parameters& params) {
  std::vector<BipReport> out;
  for (std::size_t i = 0; i < points.breaks.size(); ++i) {
    const auto& b = points.breaks[i];
    const auto& bp = params.breaks.at(i);
    out.push_back({b.p_dropping, b.p_break, bp.sh_break, bp.t_dropping,
                   bp.t_raising, std::nullopt});
  }
  return out;
}

MatchResult match_events(std::span<const BipReport> bips,
                         std::span<const GroundTruthEvent> events,
                         const MatchWindow& window) {
  MatchResult result;
  result.event_of_bip.assign(bips.size(), std::nullopt);

  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (events[i].expected_bip) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
    return events[a].tick_t < events[b].tick_t;
  });

  for (std::size_t k = 1; k < order.size(); ++k) {
    const auto& prev = events[order[k - 1]];
    const auto& next = events[order[k]];
    if (next.tick_t - window.before <= prev.tick_t + window.after) {
      result.warnings.push_back("match windows of '" + prev.label + "' and '" +
                                next.label + "' overlap");
    }
  }

  std::vector<bool> taken(bips.size(), false);
  for (const std::size_t ev : order) {
    const double tick = events[ev].tick_t;
    std::optional<std::size_t> best;
    double best_dist = 0.0;
    for (std::size_t b = 0; b < bips.size(); ++b) {
      if (taken[b]) continue;
      const auto& bip = bips[b];
      if (!in_window(bip.p_dropping.t, tick, window) &&
          !in_window(bip.p_break.t, tick, window)) {
        continue;
      }
      const double dist = std::abs(bip.p_dropping.t - tick);
      const bool better =
          !best || dist < best_dist ||
          (dist == best_dist && bip.p_dropping.t < bips[*best].p_dropping.t);
      if (better) {
        best = b;
        best_dist = dist;
      }
    }
    if (best) {
      taken[*best] = true;
      result.event_of_bip[*best] = ev;
    }
  }
  for (std::size_t b = 0; b < bips.size(); ++b) {
    if (!result.event_of_bip[b]) result.unexplained.push_back(b);
  }
  return result;
}

SessionRecord analyze_record(const SessionRecord& provisional,
                             std::span<const GroundTruthEvent> events,
                             const AnalysisConfig& config) {
  if (!provisional.trace) {
    throw Error(ErrorCode::EmptyInput,
                "record " + provisional.participant_id + " has no trace");
  }
  SessionRecord out = provisional;
  out.model.reset();
  out.bips.clear();
  out.conformance.reset();
  out.excluded.reset();

  const auto& trace = *provisional.trace;
  DescriptiveModel model;
  try {
    model = describe(trace, config.segmentation);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::ModelIncomplete) throw;
    out.excluded = e.what();
    return out;
  }

  const auto group_events = events_for_group(events, provisional.group);
  out.bips = bip_reports(model.points, model.parameters);
  const auto match = match_events(out.bips, group_events, config.window);
  for (std::size_t b = 0; b < out.bips.size(); ++b) {
    if (match.event_of_bip[b]) {
      out.bips[b].matched_event = group_events[*match.event_of_bip[b]].label;
    }
  }
  out.conformance = check_prerequisites(model.points, model.phases,
                                        model.parameters, trace.annotations,
                                        config.model);
  out.model = std::move(model);
  return out;
}

std::optional<MeanSd> mean_sd(std::span<const double> values) {
  if (values.empty()) return std::nullopt;
  MeanSd out;
  out.n = values.size();
  out.mean = mean_of(values);
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return out;
}

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) {
    throw Error(ErrorCode::EmptyInput, "quantile of empty data");
  }
  const double h = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

BoxSummary box_summary(std::string event, std::span<const double> values) {
  if (values.empty()) {
    throw Error(ErrorCode::EmptyInput, "box summary of empty data");
  }
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  BoxSummary box;
  box.event = std::move(event);
  box.n = v.size();
  box.min = v.front();
  box.max = v.back();
  box.q1 = quantile_sorted(v, 0.25);
  box.median = quantile_sorted(v, 0.5);
  box.q3 = quantile_sorted(v, 0.75);
  const double iqr = box.q3 - box.q1;
  const double lo_fence = box.q1 - 1.5 * iqr;
  const double hi_fence = box.q3 + 1.5 * iqr;
  box.whisker_low = box.q1;
  box.whisker_high = box.q3;
  for (double x : v) {
    if (x < lo_fence || x > hi_fence) {
      box.outliers.push_back(x);
      continue;
    }
    box.whisker_low = std::min(box.whisker_low, x);
    box.whisker_high = std::max(box.whisker_high, x);
  }
  return box;
}

std::vector<DetectionRow> detection_table(
    std::span<const SessionRecord> records,
    std::span<const GroundTruthEvent> events) {
  const auto ordered = sorted_records(records);
  std::map<std::string, std::vector<const SessionRecord*>> groups;
  for (const auto* r : ordered) groups[r->group].push_back(r);

  std::vector<DetectionRow> rows;
  for (const auto& label : expected_labels(events)) {
    for (const auto& [group, members] : groups) {
      if (members.empty()) continue;
      const auto applicable = events_for_group(events, group);
      std::optional<int> pos;
      int position = 0;
      for (const auto& e : applicable) {
        if (!e.expected_bip) continue;
        ++position;
        if (e.label == label) pos = position;
      }
      if (!pos) continue;

      DetectionRow row;
      row.event = label;
      row.group = group;
      row.pos = pos;
      row.group_size = members.size();
      std::vector<double> sh;
      std::vector<double> pb;
      std::size_t detected = 0;
      for (const auto* r : members) {
        bool hit = false;
        for (const auto& bip : r->bips) {
          if (bip.matched_event != label) continue;
          hit = true;
          sh.push_back(bip.sh_break);
          pb.push_back(bip.p_break.p);
        }
        if (hit) ++detected;
      }
      row.n = detected;
      row.detection_pct = 100.0 * static_cast<double>(detected) /
                          static_cast<double>(members.size());
      if (!sh.empty()) {
        row.mean_sh_break = mean_of(sh);
        row.mean_p_break = mean_of(pb);
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

AggregateStats aggregate(std::span<const SessionRecord> records,
                         std::span<const GroundTruthEvent> events) {
  if (records.empty()) {
    throw Error(ErrorCode::EmptyInput, "no records to aggregate");
  }
  const auto ordered = sorted_records(records);

  AggregateStats stats;
  stats.detection = detection_table(records, events);

  auto& g = stats.global;
  g.records = ordered.size();
  std::vector<double> t_transition, t_exit, t_experience, ret_t, ret_p, counts;
  std::vector<double> drops, raises;
  for (const auto* r : ordered) {
    stats.participants.push_back({r->participant_id, r->group, r->bips.size()});
    if (!r->model) continue;
    ++g.described;
    const auto& params = r->model->parameters;
    const auto& points = r->model->points;
    t_transition.push_back(params.t_transition);
    t_exit.push_back(params.t_exit);
    t_experience.push_back(params.t_experience);
    ret_t.push_back(points.p_return.t);
    ret_p.push_back(points.p_return.p);
    counts.push_back(static_cast<double>(r->bips.size()));
    for (const auto& bip : r->bips) {
      ++g.total_bips;
      if (bip.matched_event) ++g.matched_bips;
      if (bip.t_raising) {
        drops.push_back(bip.t_dropping);
        raises.push_back(*bip.t_raising);
      }
    }
  }
  g.t_transition = mean_sd(t_transition);
  g.t_exit = mean_sd(t_exit);
  g.experience_fraction = mean_sd(t_experience);
  g.p_return_t = mean_sd(ret_t);
  g.p_return_p = mean_sd(ret_p);
  g.bip_count = mean_sd(counts);
  if (g.total_bips > 0) {
    g.correct_position_rate =
        static_cast<double>(g.matched_bips) / static_cast<double>(g.total_bips);
  }
  if (!raises.empty() && mean_of(raises) > 0.0) {
    g.drop_raise_ratio = mean_of(drops) / mean_of(raises);
  }

  for (const auto& label : expected_labels(events)) {
    std::vector<double> pb;
    for (const auto* r : ordered) {
      for (const auto& bip : r->bips) {
        if (bip.matched_event == label) pb.push_back(bip.p_break.p);
      }
    }
    if (!pb.empty()) stats.intensity.push_back(box_summary(label, pb));
  }
  return stats;
}

IntensityOrdering intensity_ordering(const AggregateStats& stats,
                                     std::span<const GroundTruthEvent> events) {
  IntensityOrdering out;
  struct Entry {
    std::string label;
    double median;
    std::optional<int> rank;
  };
  std::vector<Entry> entries;
  for (const auto& box : stats.intensity) {
    if (box.n < 1) continue;
    entries.push_back({box.event, box.median, rank_of(events, box.event)});
  }
  for (const auto& label : expected_labels(events)) {
    const bool present = std::any_of(entries.begin(), entries.end(),
                                     [&](const auto& e) { return e.label == label; });
    if (!present) out.omitted.push_back(label);
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const auto& a, const auto& b) { return a.median < b.median; });

  double agree = 0.0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    for (std::size_t j = i + 1; j < entries.size(); ++j) {
      if (!entries[i].rank || !entries[j].rank) continue;
      ++out.pairs;
      if (entries[i].median == entries[j].median) {
        agree += 0.5;
      } else if (*entries[i].rank < *entries[j].rank) {
        agree += 1.0;
      }
    }
  }
  if (out.pairs > 0) out.concordance = agree;
  for (const auto& e : entries) {
    out.order.push_back(e.label);
    out.medians.push_back(e.median);
  }
  return out;
}

}  // namespace presence
