#include <doctest.h>

#include <cmath>
#include <random>

#include "corrmatch/signals.hpp"

using namespace corrmatch;
using namespace corrmatch::signals;

namespace {

Track make_track(std::vector<TrackSample> samples, std::string id = "t0",
                 std::optional<std::string> label = std::nullopt) {
  Track t;
  t.track_id = std::move(id);
  t.samples = std::move(samples);
  t.label = std::move(label);
  return t;
}

Track quarter_circle_track(double radius, double total_s, double dt) {
  // Quarter circle traversed at constant angular rate.
  std::vector<TrackSample> s;
  const double omega = (M_PI / 2.0) / total_s;
  for (double t = 0.0; t <= total_s + 1e-9; t += dt) {
    s.push_back({t, radius * std::cos(omega * t), radius * std::sin(omega * t)});
  }
  return make_track(std::move(s));
}

ChannelSeries series_of(std::vector<TimedValue> v,
                        Channel c = Channel::speed) {
  ChannelSeries s;
  s.channel = c;
  s.values = std::move(v);
  return s;
}

}  // namespace

TEST_CASE("derive_speed: uniform straight motion") {
  const Track t = make_track({{0, 0, 0}, {1, 1, 0}, {2, 2, 0}});
  const ChannelSeries s = derive_speed(t);
  REQUIRE(s.values.size() == 3);
  for (const auto& v : s.values) CHECK(v.value == doctest::Approx(1.0));
}

TEST_CASE("derive_speed: stationary track") {
  const Track t = make_track({{0, 0, 0}, {1, 0, 0}});
  const ChannelSeries s = derive_speed(t);
  REQUIRE(s.values.size() == 2);
  CHECK(s.values[0].value == 0.0);
  CHECK(s.values[1].value == 0.0);
}

TEST_CASE("derive_speed: quarter circle matches arc-length oracle") {
  const double radius = 2.0, total = 4.0;
  const Track t = quarter_circle_track(radius, total, 0.5);
  // Independent oracle: arc length over time.
  const double oracle = (radius * M_PI / 2.0) / total;
  const ChannelSeries s = derive_speed(t);
  for (const auto& v : s.values) {
    CHECK(std::fabs(v.value - oracle) < 0.01);  // discretization error bound
  }
}

TEST_CASE("derive_speed: degenerate input") {
  CHECK_THROWS_AS(derive_speed(make_track({{0, 0, 0}})),
                  DegenerateInputError);
}

TEST_CASE("derive_turn_rate: straight line is zero at any speed") {
  const Track t = make_track({{0, 0, 0}, {1, 2, 2}, {2, 4, 4}, {3.5, 7, 7}});
  for (const auto& v : derive_turn_rate(t).values) {
    CHECK(v.value == doctest::Approx(0.0));
  }
}

TEST_CASE("derive_turn_rate: quarter circle constant-curvature oracle") {
  const Track t = quarter_circle_track(2.0, 4.0, 0.5);
  // Oracle: heading advances with the angular rate of the circle.
  const double oracle = M_PI / 8.0;
  const ChannelSeries s = derive_turn_rate(t);
  for (size_t i = 1; i + 1 < s.values.size(); ++i) {
    CHECK(s.values[i].value == doctest::Approx(oracle).epsilon(1e-6));
  }
}

TEST_CASE("derive_turn_rate: stationary track hits the displacement floor") {
  std::vector<TrackSample> samples;
  for (int i = 0; i < 10; ++i) {
    samples.push_back({0.1 * i, 1.0 + 1e-4 * (i % 2), 2.0});
  }
  for (const auto& v : derive_turn_rate(make_track(std::move(samples))).values) {
    CHECK(v.value == 0.0);
  }
}

TEST_CASE("derive_turn_rate: degenerate input") {
  CHECK_THROWS_AS(derive_turn_rate(make_track({{0, 0, 0}, {1, 1, 0}})),
                  DegenerateInputError);
}

TEST_CASE("speed/turn rate are rigid-motion invariant") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::vector<TrackSample> samples;
  double t = 0.0;
  for (int i = 0; i < 40; ++i) {
    samples.push_back({t, u(rng), u(rng)});
    t += 0.2 + 0.05 * std::fabs(u(rng));
  }
  const Track a = make_track(samples);

  const double angle = 1.234, dx = 17.0, dy = -4.2;
  Track b = a;
  for (auto& s : b.samples) {
    const double x = s.x * std::cos(angle) - s.y * std::sin(angle) + dx;
    const double y = s.x * std::sin(angle) + s.y * std::cos(angle) + dy;
    s.x = x;
    s.y = y;
  }
  const auto sa = derive_speed(a), sb = derive_speed(b);
  const auto ta = derive_turn_rate(a), tb = derive_turn_rate(b);
  for (size_t i = 0; i < sa.values.size(); ++i) {
    CHECK(std::fabs(sa.values[i].value - sb.values[i].value) < 1e-9);
    CHECK(std::fabs(ta.values[i].value - tb.values[i].value) < 1e-9);
  }
}

TEST_CASE("derive_lin_accel_norm: still device and constant offset") {
  SensorRecord r;
  r.participant_id = "p";
  for (int i = 0; i < 5; ++i) {
    ImuSample s;
    s.t = 0.1 * i;
    s.gravity = {0.1, -0.2, 9.8};
    s.accel = s.gravity;
    r.samples.push_back(s);
  }
  for (const auto& v : derive_lin_accel_norm(r).values) CHECK(v.value == 0.0);

  for (auto& s : r.samples) s.accel = s.gravity + Vec3{1.0, 0.0, 0.0};
  for (const auto& v : derive_lin_accel_norm(r).values) {
    CHECK(v.value == doctest::Approx(1.0));
  }
}

TEST_CASE("derive_lin_accel_norm: random record matches elementwise oracle") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0.0, 1.0);
  SensorRecord r;
  r.participant_id = "p";
  for (int i = 0; i < 50; ++i) {
    ImuSample s;
    s.t = 0.02 * i;
    s.gravity = {0.3 * g(rng), 0.3 * g(rng), 9.81};
    s.accel = {g(rng), g(rng), 9.81 + g(rng)};
    r.samples.push_back(s);
  }
  const auto series = derive_lin_accel_norm(r);
  for (size_t i = 0; i < r.samples.size(); ++i) {
    const auto& s = r.samples[i];
    const double ex = s.accel.x - s.gravity.x;
    const double ey = s.accel.y - s.gravity.y;
    const double ez = s.accel.z - s.gravity.z;
    CHECK(series.values[i].value ==
          doctest::Approx(std::sqrt(ex * ex + ey * ey + ez * ez)));
  }
}

TEST_CASE("gaussian_smooth: preserves constants") {
  std::vector<TimedValue> v;
  for (int i = 0; i < 100; ++i) v.push_back({0.1 * i, 3.25});
  const auto out = gaussian_smooth(series_of(std::move(v)), 0.5);
  for (const auto& s : out.values) {
    CHECK(s.value == doctest::Approx(3.25).epsilon(1e-12));
  }
}

TEST_CASE("gaussian_smooth: impulse response is a normalized symmetric kernel") {
  std::vector<TimedValue> v;
  const int n = 201, mid = 100;
  for (int i = 0; i < n; ++i) v.push_back({0.1 * i, i == mid ? 1.0 : 0.0});
  const auto out = gaussian_smooth(series_of(std::move(v)), 0.4);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    sum += out.values[i].value;
    if (i != mid) {
      CHECK(out.values[i].value ==
            doctest::Approx(out.values[2 * mid - i].value).epsilon(1e-12));
    }
  }
  CHECK(std::fabs(sum - 1.0) < 1e-9);
}

TEST_CASE("gaussian_smooth: reduces white-noise variance") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<TimedValue> v;
  for (int i = 0; i < 500; ++i) v.push_back({0.1 * i, g(rng)});
  const auto series = series_of(std::move(v));
  const auto out = gaussian_smooth(series, 0.5);
  std::vector<double> before, after;
  for (const auto& s : series.values) before.push_back(s.value);
  for (const auto& s : out.values) after.push_back(s.value);
  CHECK(population_variance(after) < population_variance(before));
}

TEST_CASE("gaussian_smooth: linearity") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<TimedValue> x, y, combo;
  const double a = 2.5, b = -1.25;
  for (int i = 0; i < 120; ++i) {
    const double t = 0.1 * i;
    const double xv = g(rng), yv = g(rng);
    x.push_back({t, xv});
    y.push_back({t, yv});
    combo.push_back({t, a * xv + b * yv});
  }
  const auto sx = gaussian_smooth(series_of(std::move(x)), 0.3);
  const auto sy = gaussian_smooth(series_of(std::move(y)), 0.3);
  const auto sc = gaussian_smooth(series_of(std::move(combo)), 0.3);
  for (size_t i = 0; i < sc.values.size(); ++i) {
    CHECK(std::fabs(sc.values[i].value -
                    (a * sx.values[i].value + b * sy.values[i].value)) < 1e-9);
  }
}

TEST_CASE("gaussian_smooth: empty series and bad sigma") {
  CHECK_THROWS_AS(gaussian_smooth(series_of({}), 0.5), DegenerateInputError);
  CHECK_THROWS_AS(gaussian_smooth(series_of({{0, 1}}), 0.0), ConfigError);
}

TEST_CASE("resample: identity on an already-uniform grid") {
  std::vector<TimedValue> v;
  for (int i = 0; i < 50; ++i) v.push_back({0.1 * i, std::sin(0.3 * i)});
  const auto series = series_of(std::move(v));
  const auto out = resample(series, 10.0);
  REQUIRE(out.values.size() == series.values.size());
  for (size_t i = 0; i < out.values.size(); ++i) {
    CHECK(out.values[i].value ==
          doctest::Approx(series.values[i].value).epsilon(1e-12));
  }
}

TEST_CASE("resample: linear segment") {
  const auto out = resample(series_of({{0.0, 0.0}, {1.0, 10.0}}), 10.0);
  REQUIRE(out.values.size() == 11);
  for (int i = 0; i <= 10; ++i) {
    CHECK(out.values[i].value == doctest::Approx(static_cast<double>(i)));
    if (i > 0) {
      CHECK(std::fabs((out.values[i].t - out.values[i - 1].t) - 0.1) < 1e-9);
    }
  }
}

TEST_CASE("resample: 50 Hz sine to 10 Hz against the analytic oracle") {
  std::vector<TimedValue> v;
  for (int i = 0; i <= 250; ++i) {
    const double t = i / 50.0;
    v.push_back({t, std::sin(2.0 * M_PI * t)});
  }
  const auto out = resample(series_of(std::move(v)), 10.0);
  for (const auto& s : out.values) {
    CHECK(std::fabs(s.value - std::sin(2.0 * M_PI * s.t)) < 0.01);
  }
}

TEST_CASE("resample: idempotent at the same rate") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<TimedValue> v;
  double t = 0.0;
  for (int i = 0; i < 100; ++i) {
    v.push_back({t, g(rng)});
    t += 0.05 + 0.1 * std::fabs(g(rng));
  }
  const auto once = resample(series_of(std::move(v)), 10.0);
  const auto twice = resample(once, 10.0);
  REQUIRE(once.values.size() == twice.values.size());
  for (size_t i = 0; i < once.values.size(); ++i) {
    CHECK(std::fabs(once.values[i].value - twice.values[i].value) < 1e-9);
  }
}

TEST_CASE("resample: span too short") {
  CHECK_THROWS_AS(resample(series_of({{0.0, 0.0}, {0.05, 1.0}}), 10.0),
                  DegenerateInputError);
}

namespace {

GridSeries grid(int64_t start, int n, double value = 0.0) {
  GridSeries g;
  g.start_index = start;
  g.rate = 10.0;
  g.values.assign(n, value);
  return g;
}

TrackChannels grid_track(int64_t start, int n) {
  TrackChannels t;
  t.track_id = "t";
  t.label = "p";
  t.speed = grid(start, n, 1.0);
  t.turn_rate = grid(start, n, 0.0);
  return t;
}

SensorChannels grid_sensor(int64_t start, int n) {
  SensorChannels s;
  s.participant_id = "p";
  for (auto& c : s.channels) c = grid(start, n, 0.5);
  return s;
}

}  // namespace

TEST_CASE("make_windows: boundary and counting cases") {
  const int W = 50;
  SUBCASE("overlap exactly W, any stride") {
    for (int stride : {1, 7, 10, 100}) {
      CHECK(make_windows(grid_track(0, W), grid_sensor(0, W), W, stride)
                .size() == 1);
    }
  }
  SUBCASE("overlap W+10 at stride 10") {
    CHECK(make_windows(grid_track(0, W + 10), grid_sensor(0, W + 10), W, 10)
              .size() == 2);
  }
  SUBCASE("stride 1 against exhaustive counting oracle") {
    for (int overlap : {W, W + 1, W + 13, 3 * W}) {
      // Oracle: enumerate every admissible start offset.
      int64_t expected = 0;
      for (int s = 0; s + W <= overlap; ++s) ++expected;
      CHECK(make_windows(grid_track(0, overlap), grid_sensor(0, overlap), W, 1)
                .size() == static_cast<size_t>(expected));
    }
  }
  SUBCASE("partial grid overlap") {
    // Track [0, 100), sensor [60, 160): 40 shared samples.
    const auto windows =
        make_windows(grid_track(0, 100), grid_sensor(60, 100), 30, 5);
    CHECK(windows.size() == 3);  // starts 60, 65, 70
    CHECK(windows.front().start_t == doctest::Approx(6.0));
  }
  SUBCASE("overlap shorter than W yields an empty list") {
    CHECK(make_windows(grid_track(0, W - 1), grid_sensor(0, W - 1), W, 1)
              .empty());
  }
}

TEST_CASE("feature windows from the full pipeline are finite") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> g(0.0, 1.0);
  Track track;
  track.track_id = "t";
  track.label = "p";
  for (int i = 0; i < 120; ++i) {
    track.samples.push_back(
        {i * 0.2, 0.5 * i * 0.2 + 0.1 * g(rng), 0.05 * g(rng)});
  }
  SensorRecord rec;
  rec.participant_id = "p";
  for (int i = 0; i < 1200; ++i) {
    ImuSample s;
    s.t = i * 0.02;
    s.gravity = {0.0, 0.0, 9.81};
    s.accel = s.gravity + Vec3{g(rng), g(rng), g(rng)};
    s.gyro = {0.1 * g(rng), 0.1 * g(rng), 0.1 * g(rng)};
    rec.samples.push_back(s);
  }
  PreprocessOptions opts;
  const auto tc = preprocess_track(track, opts);
  const auto sc = preprocess_sensor(rec, opts);
  REQUIRE(tc.has_value());
  REQUIRE(sc.has_value());
  const auto windows = make_windows(*tc, *sc, 100, 10);
  CHECK(!windows.empty());
  for (const auto& w : windows) {
    for (double v : w.data) CHECK(std::isfinite(v));
  }
}

TEST_CASE("grid resampling anchors timestamps onto the shared lattice") {
  std::vector<TimedValue> v;
  for (int i = 0; i < 100; ++i) v.push_back({0.137 + 0.05 * i, 1.0 * i});
  const auto g = resample_to_grid(series_of(std::move(v)), 10.0);
  CHECK(g.start_index == 2);  // first multiple of 0.1 at or after 0.137
  for (size_t i = 1; i < g.values.size(); ++i) {
    const double dt = g.time_at(g.start_index + i) -
                      g.time_at(g.start_index + i - 1);
    CHECK(std::fabs(dt - 0.1) < 1e-9);
  }
}

TEST_CASE("track and sensor invariant validation") {
  Track bad = make_track({{0, 0, 0}, {0, 1, 0}});
  CHECK_THROWS_AS(validate(bad), DataError);

  SensorRecord r;
  r.participant_id = "p";
  ImuSample s;
  s.t = 0.0;
  s.gravity = {0.0, 0.0, 5.0};  // outside the sanity band
  r.samples.push_back(s);
  CHECK_THROWS_AS(validate(r), DataError);
}
