#include <doctest.h>

#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include "fixtures.hpp"
#include "presence/error.hpp"
#include "presence/trace_model.hpp"

using namespace presence;

namespace {

RawTrace raw(std::vector<RawSample> samples) {
  RawTrace t;
  t.samples = std::move(samples);
  t.source = {"P1", "A", Capture::Digital};
  return t;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::IoError;
}

}  // namespace

TEST_CASE("build_template defaults") {
  const auto t = build_template({});
  CHECK(t.time_axis_len_mm == 200.0);
  CHECK(t.presence_half_range_mm == 40.0);
  CHECK(t.negative_half_range_mm == 40.0);
  CHECK(t.event_ticks.empty());
  CHECK(t.hmd_on_x_mm() == 0.0);
  CHECK(t.hmd_off_x_mm() == 200.0);
}

TEST_CASE("build_template ticks") {
  TemplateConfig cfg;
  cfg.ticks = {{"task2", 90.0}, {"task1", 50.0}};
  const auto t = build_template(cfg);
  REQUIRE(t.event_ticks.size() == 2);
  CHECK(t.event_ticks[0].label == "task1");
  CHECK(t.tick_fraction(0) == 0.25);
  CHECK(t.tick_fraction(1) == 0.45);

  SUBCASE("tick past the axis") {
    TemplateConfig bad;
    bad.time_len_mm = 200.0;
    bad.ticks = {{"a", 210.0}};
    CHECK(code_of([&] { build_template(bad); }) == ErrorCode::InvalidTemplate);
  }
  SUBCASE("duplicate label") {
    TemplateConfig bad;
    bad.ticks = {{"a", 10.0}, {"a", 20.0}};
    CHECK(code_of([&] { build_template(bad); }) == ErrorCode::InvalidTemplate);
  }
  SUBCASE("duplicate position") {
    TemplateConfig bad;
    bad.ticks = {{"a", 10.0}, {"b", 10.0}};
    CHECK(code_of([&] { build_template(bad); }) == ErrorCode::InvalidTemplate);
  }
  SUBCASE("non-positive size") {
    TemplateConfig bad;
    bad.half_range_mm = 0.0;
    CHECK(code_of([&] { build_template(bad); }) == ErrorCode::InvalidTemplate);
  }
}

TEST_CASE("asymmetric sheet keeps its own negative range") {
  TemplateConfig cfg;
  cfg.half_range_mm = 40.0;
  cfg.negative_range_mm = 30.0;
  const auto t = build_template(cfg);
  CHECK(t.negative_half_range_mm == 30.0);

  auto r = raw({{0, 0}, {100, -31}, {200, -29}});
  CHECK(validate_trace(r, t).has("y-clamped"));
  r.samples[1].y_mm = -33.0;
  CHECK(validate_trace(r, t).has("y-out-of-range"));
}

TEST_CASE("normalize examples") {
  const Template t;
  const auto n = normalize(raw({{0, 0}, {100, 40}, {200, -37.2}}), t);
  REQUIRE(n.samples.size() == 3);
  CHECK(n.samples[0] == TracePoint{0.0, 0.0});
  CHECK(n.samples[1] == TracePoint{0.5, 1.0});
  CHECK(n.samples[2].t == 1.0);
  CHECK(n.samples[2].p == doctest::Approx(-0.93).epsilon(1e-12));
  CHECK(n.source.participant_id == "P1");
}

TEST_CASE("normalize converts annotations") {
  auto r = raw({{0, 0}, {200, -38}});
  r.annotations.push_back({50.0, AnnotationKind::BreakNote, "alarm"});
  const auto n = normalize(r, Template{});
  REQUIRE(n.annotations.size() == 1);
  CHECK(n.annotations[0].t == 0.25);
  CHECK(n.annotations[0].kind == AnnotationKind::BreakNote);
  CHECK(n.annotations[0].text == "alarm");
}

TEST_CASE("validate_trace examples") {
  const Template t;
  CHECK(validate_trace(raw({{0, 0}, {100, 20}, {199, -38}}), t).empty());

  const auto miss = validate_trace(raw({{15, 5}, {100, 20}, {199, -38}}), t);
  CHECK(miss.has_fatal());
  CHECK(miss.has("start-dot-miss"));

  const auto r = raw({{0, 0}, {100, 41}, {199, -38}});
  const auto over = validate_trace(r, t);
  CHECK_FALSE(over.has_fatal());
  CHECK(over.has("y-clamped"));
  CHECK(clamp_to_template(r, t).samples[1].y_mm == 40.0);
  CHECK(normalize(r, t).samples[1].p == 1.0);
}

TEST_CASE("validate_trace fatal codes") {
  const Template t;
  CHECK(validate_trace(raw({{0, 0}}), t).has("too-few-samples"));
  CHECK(validate_trace(raw({{0, 0}, {50, 0}, {40, 0}, {200, -30}}), t).has("x-decreasing"));
  CHECK(validate_trace(raw({{0, 0}, {100, 43}, {200, -30}}), t).has("y-out-of-range"));
  CHECK(validate_trace(raw({{0, 0}, {215, -30}}), t).has("x-past-hmd-off"));
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CHECK(validate_trace(raw({{0, 0}, {50, nan}, {200, -30}}), t).has("non-finite"));

  auto with_note = raw({{0, 0}, {200, -30}});
  with_note.annotations.push_back({260, AnnotationKind::FreeText, ""});
  CHECK(validate_trace(with_note, t).has("annotation-outside-axis"));

  CHECK(validate_trace(raw({{0, 0}, {120, -30}}), t).has("ends-early"));
  CHECK_FALSE(validate_trace(raw({{0, 0}, {120, -30}}), t).has_fatal());
}

TEST_CASE("vertical strokes are not a decrease in x") {
  const auto r = raw({{0, 0}, {80, 20}, {80, 5}, {200, -30}});
  CHECK_FALSE(validate_trace(r, Template{}).has_fatal());
}

TEST_CASE("normalize rejects fatal traces") {
  CHECK(code_of([] { normalize(raw({{0, 0}, {50, 0}, {40, 0}, {200, -30}}), Template{}); }) ==
        ErrorCode::FatalValidation);
  CHECK(code_of([] { normalize(raw({}), Template{}); }) == ErrorCode::FatalValidation);
}

TEST_CASE("validate_trace is deterministic") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 50; ++i) {
    auto r = fixtures::random_raw(rng, Template{});
    r.samples.push_back({r.samples.back().x_mm - 1.0, 45.0});
    CHECK(validate_trace(r, Template{}) == validate_trace(r, Template{}));
  }
}

TEST_CASE("property: denormalize inverts normalize") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> size(50.0, 400.0);
  for (int i = 0; i < 200; ++i) {
    TemplateConfig cfg;
    cfg.time_len_mm = size(rng);
    cfg.half_range_mm = size(rng) / 5.0;
    const auto t = build_template(cfg);
    const auto r = fixtures::random_raw(rng, t);
    const auto back = denormalize(normalize(r, t), t);
    REQUIRE(back.samples.size() == r.samples.size());
    for (std::size_t k = 0; k < r.samples.size(); ++k) {
      CHECK(std::abs(back.samples[k].x_mm - r.samples[k].x_mm) <= 1e-9);
      CHECK(std::abs(back.samples[k].y_mm - r.samples[k].y_mm) <= 1e-9);
    }
  }
}

TEST_CASE("property: proportional sheets give the same normalized trace") {
  std::mt19937_64 rng(12);
  const Template base;
  for (int i = 0; i < 100; ++i) {
    const auto r = fixtures::random_raw(rng, base);
    const auto want = normalize(r, base);
    for (double f : {0.5, 1.5, 3.0}) {
      TemplateConfig cfg;
      cfg.time_len_mm = 200.0 * f;
      cfg.half_range_mm = 40.0 * f;
      auto scaled = r;
      for (auto& s : scaled.samples) {
        s.x_mm *= f;
        s.y_mm *= f;
      }
      ValidationConfig vc;
      vc.start_tolerance_mm *= f;
      vc.clamp_tolerance_mm *= f;
      const auto got = normalize(scaled, build_template(cfg), vc);
      for (std::size_t k = 0; k < want.samples.size(); ++k) {
        CHECK(got.samples[k].t == doctest::Approx(want.samples[k].t).epsilon(1e-14));
        CHECK(got.samples[k].p == doctest::Approx(want.samples[k].p).epsilon(1e-14));
      }
    }
  }
}

TEST_CASE("enum names round-trip") {
  for (auto k : {AnnotationKind::BreakNote, AnnotationKind::ConstantNote,
                 AnnotationKind::EventNote, AnnotationKind::FreeText}) {
    CHECK(annotation_kind_from_string(to_string(k)) == k);
  }
  for (auto c : {Capture::PaperScan, Capture::Digital}) {
    CHECK(capture_from_string(to_string(c)) == c);
  }
  CHECK(to_string(ErrorCode::DuplicateRecord) == "duplicate-record");
}
