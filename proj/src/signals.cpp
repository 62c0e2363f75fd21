#include "corrmatch/signals.hpp"

#include <algorithm>
#include <cmath>

namespace corrmatch::signals {

void validate(const Track& track) {
  if (track.samples.size() < 2) {
    throw DegenerateInputError("track '" + track.track_id +
                               "' has fewer than 2 samples");
  }
  for (size_t i = 1; i < track.samples.size(); ++i) {
    if (!(track.samples[i].t > track.samples[i - 1].t)) {
      throw DataError("track '" + track.track_id +
                      "' timestamps not strictly increasing at sample " +
                      std::to_string(i));
    }
  }
}

void validate(const SensorRecord& record) {
  if (record.samples.empty()) {
    throw DegenerateInputError("sensor record '" + record.participant_id +
                               "' is empty");
  }
  for (size_t i = 0; i < record.samples.size(); ++i) {
    if (i > 0 && !(record.samples[i].t > record.samples[i - 1].t)) {
      throw DataError("sensor record '" + record.participant_id +
                      "' timestamps not strictly increasing at sample " +
                      std::to_string(i));
    }
    const double g = record.samples[i].gravity.norm();
    if (g < 8.0 || g > 11.0) {
      throw DataError("sensor record '" + record.participant_id +
                      "' gravity norm " + std::to_string(g) +
                      " outside [8, 11] at sample " + std::to_string(i));
    }
  }
}

const char* channel_name(Channel c) {
  switch (c) {
    case Channel::speed: return "speed";
    case Channel::turn_rate: return "turn_rate";
    case Channel::lin_accel_norm: return "lin_accel_norm";
    case Channel::accel_x: return "accel_x";
    case Channel::accel_y: return "accel_y";
    case Channel::accel_z: return "accel_z";
    case Channel::gyro_x: return "gyro_x";
    case Channel::gyro_y: return "gyro_y";
    case Channel::gyro_z: return "gyro_z";
  }
  return "?";
}

ChannelSeries derive_speed(const Track& track) {
  const auto& s = track.samples;
  const size_t n = s.size();
  if (n < 2) {
    throw DegenerateInputError("derive_speed: track '" + track.track_id +
                               "' needs at least 2 samples");
  }
  ChannelSeries out;
  out.channel = Channel::speed;
  out.values.resize(n);
  auto displacement_speed = [&](size_t a, size_t b) {
    const double dx = s[b].x - s[a].x;
    const double dy = s[b].y - s[a].y;
    return std::sqrt(dx * dx + dy * dy) / (s[b].t - s[a].t);
  };
  out.values[0] = {s[0].t, displacement_speed(0, 1)};
  out.values[n - 1] = {s[n - 1].t, displacement_speed(n - 2, n - 1)};
  for (size_t i = 1; i + 1 < n; ++i) {
    out.values[i] = {s[i].t, displacement_speed(i - 1, i + 1)};
  }
  return out;
}

ChannelSeries derive_turn_rate(const Track& track,
                               double displacement_floor_m) {
  const auto& s = track.samples;
  const size_t n = s.size();
  if (n < 3) {
    throw DegenerateInputError("derive_turn_rate: track '" + track.track_id +
                               "' needs at least 3 samples");
  }
  // Segment headings; a segment shorter than the floor has no usable heading.
  std::vector<double> heading(n - 1, 0.0);
  std::vector<bool> valid(n - 1, false);
  for (size_t i = 0; i + 1 < n; ++i) {
    const double dx = s[i + 1].x - s[i].x;
    const double dy = s[i + 1].y - s[i].y;
    if (std::sqrt(dx * dx + dy * dy) >= displacement_floor_m) {
      heading[i] = std::atan2(dy, dx);
      valid[i] = true;
    }
  }
  ChannelSeries out;
  out.channel = Channel::turn_rate;
  out.values.resize(n);
  for (size_t i = 0; i < n; ++i) out.values[i].t = s[i].t;
  for (size_t i = 1; i + 1 < n; ++i) {
    double rate = 0.0;
    if (valid[i - 1] && valid[i]) {
      const double dt = 0.5 * (s[i + 1].t - s[i - 1].t);
      rate = wrap_angle(heading[i] - heading[i - 1]) / dt;
    }
    out.values[i].value = rate;
  }
  out.values[0].value = out.values[1].value;
  out.values[n - 1].value = out.values[n - 2].value;
  return out;
}

ChannelSeries derive_lin_accel_norm(const SensorRecord& record) {
  if (record.samples.empty()) {
    throw DegenerateInputError("derive_lin_accel_norm: record '" +
                               record.participant_id + "' is empty");
  }
  ChannelSeries out;
  out.channel = Channel::lin_accel_norm;
  out.values.reserve(record.samples.size());
  for (const auto& m : record.samples) {
    out.values.push_back({m.t, (m.accel - m.gravity).norm()});
  }
  return out;
}

ChannelSeries extract_axis(const SensorRecord& record, Channel channel) {
  if (record.samples.empty()) {
    throw DegenerateInputError("extract_axis: record '" +
                               record.participant_id + "' is empty");
  }
  ChannelSeries out;
  out.channel = channel;
  out.values.reserve(record.samples.size());
  for (const auto& m : record.samples) {
    double v = 0.0;
    switch (channel) {
      case Channel::accel_x: v = m.accel.x; break;
      case Channel::accel_y: v = m.accel.y; break;
      case Channel::accel_z: v = m.accel.z; break;
      case Channel::gyro_x: v = m.gyro.x; break;
      case Channel::gyro_y: v = m.gyro.y; break;
      case Channel::gyro_z: v = m.gyro.z; break;
      default:
        throw ConfigError("extract_axis: channel is not a raw sensor axis");
    }
    out.values.push_back({m.t, v});
  }
  return out;
}

namespace {

// Shared time-domain Gaussian pass over one set of timestamps. `get` reads
// the raw value at an index, `set` stores the smoothed one.
void gaussian_pass(const std::vector<double>& times, double sigma_s,
                   const std::function<double(size_t)>& get,
                   const std::function<void(size_t, double)>& set) {
  const size_t n = times.size();
  // Slack keeps samples sitting exactly on the 3-sigma cutoff inside the
  // kernel regardless of floating-point timestamp rounding.
  const double radius = 3.0 * sigma_s + 1e-9;
  const double inv_two_sigma_sq = 1.0 / (2.0 * sigma_s * sigma_s);
  size_t lo = 0;
  for (size_t i = 0; i < n; ++i) {
    while (lo < n && times[lo] < times[i] - radius) ++lo;
    double wsum = 0.0, vsum = 0.0;
    for (size_t j = lo; j < n && times[j] <= times[i] + radius; ++j) {
      const double dt = times[j] - times[i];
      const double w = std::exp(-dt * dt * inv_two_sigma_sq);
      wsum += w;
      vsum += w * get(j);
    }
    set(i, vsum / wsum);
  }
}

}  // namespace

ChannelSeries gaussian_smooth(const ChannelSeries& series, double sigma_s) {
  if (!(sigma_s > 0.0)) {
    throw ConfigError("gaussian_smooth: sigma must be positive");
  }
  if (series.values.empty()) {
    throw DegenerateInputError("gaussian_smooth: empty series");
  }
  std::vector<double> times(series.values.size());
  for (size_t i = 0; i < times.size(); ++i) times[i] = series.values[i].t;
  ChannelSeries out = series;
  gaussian_pass(
      times, sigma_s, [&](size_t j) { return series.values[j].value; },
      [&](size_t i, double v) { out.values[i].value = v; });
  return out;
}

Track smooth_track_positions(const Track& track, double sigma_s) {
  if (!(sigma_s > 0.0)) {
    throw ConfigError("smooth_track_positions: sigma must be positive");
  }
  if (track.samples.empty()) {
    throw DegenerateInputError("smooth_track_positions: empty track");
  }
  std::vector<double> times(track.samples.size());
  for (size_t i = 0; i < times.size(); ++i) times[i] = track.samples[i].t;
  Track out = track;
  gaussian_pass(
      times, sigma_s, [&](size_t j) { return track.samples[j].x; },
      [&](size_t i, double v) { out.samples[i].x = v; });
  gaussian_pass(
      times, sigma_s, [&](size_t j) { return track.samples[j].y; },
      [&](size_t i, double v) { out.samples[i].y = v; });
  return out;
}

namespace {

// Linear interpolation of an ordered series at time t (t inside the span).
double interpolate_at(const std::vector<TimedValue>& v, size_t& cursor,
                      double t) {
  while (cursor + 2 < v.size() && v[cursor + 1].t < t) ++cursor;
  const double t0 = v[cursor].t, t1 = v[cursor + 1].t;
  if (t <= t0) return v[cursor].value;
  if (t >= t1) return v[cursor + 1].value;
  const double a = (t - t0) / (t1 - t0);
  return v[cursor].value + a * (v[cursor + 1].value - v[cursor].value);
}

void require_resamplable(const ChannelSeries& series, double rate_hz,
                         const char* who) {
  if (!(rate_hz > 0.0)) {
    throw ConfigError(std::string(who) + ": rate must be positive");
  }
  if (series.values.size() < 2 ||
      series.values.back().t - series.values.front().t < 2.0 / rate_hz) {
    throw DegenerateInputError(std::string(who) +
                               ": series span shorter than 2/rate");
  }
}

}  // namespace

ChannelSeries resample(const ChannelSeries& series, double rate_hz) {
  require_resamplable(series, rate_hz, "resample");
  const double t0 = series.values.front().t;
  const double t_end = series.values.back().t;
  const auto count =
      static_cast<int64_t>(std::floor((t_end - t0) * rate_hz + 1e-9)) + 1;
  ChannelSeries out;
  out.channel = series.channel;
  out.rate = rate_hz;
  out.values.resize(count);
  size_t cursor = 0;
  for (int64_t i = 0; i < count; ++i) {
    const double t = t0 + static_cast<double>(i) / rate_hz;
    out.values[i] = {t, interpolate_at(series.values, cursor, t)};
  }
  return out;
}

GridSeries resample_to_grid(const ChannelSeries& series, double rate_hz) {
  require_resamplable(series, rate_hz, "resample_to_grid");
  const double t0 = series.values.front().t;
  const double t_end = series.values.back().t;
  const auto k0 = static_cast<int64_t>(std::ceil(t0 * rate_hz - 1e-9));
  const auto k1 = static_cast<int64_t>(std::floor(t_end * rate_hz + 1e-9));
  GridSeries out;
  out.start_index = k0;
  out.rate = rate_hz;
  if (k1 < k0) return out;
  out.values.resize(k1 - k0 + 1);
  size_t cursor = 0;
  for (int64_t k = k0; k <= k1; ++k) {
    out.values[k - k0] =
        interpolate_at(series.values, cursor, static_cast<double>(k) / rate_hz);
  }
  return out;
}

std::optional<TrackChannels> preprocess_track(const Track& track,
                                              const PreprocessOptions& opts) {
  if (track.samples.size() < 3 ||
      track.duration() < 2.0 / opts.rate_hz) {
    return std::nullopt;
  }
  const Track smoothed =
      smooth_track_positions(track, opts.trajectory_sigma_s);
  TrackChannels out;
  out.track_id = track.track_id;
  out.label = track.label;
  out.speed = resample_to_grid(derive_speed(smoothed), opts.rate_hz);
  out.turn_rate = resample_to_grid(
      derive_turn_rate(smoothed, opts.displacement_floor_m), opts.rate_hz);
  if (out.speed.values.empty()) return std::nullopt;
  return out;
}

std::optional<SensorChannels> preprocess_sensor(const SensorRecord& record,
                                                const PreprocessOptions& opts) {
  if (record.samples.size() < 3 ||
      record.samples.back().t - record.samples.front().t <
          2.0 / opts.rate_hz) {
    return std::nullopt;
  }
  SensorChannels out;
  out.participant_id = record.participant_id;
  const std::array<Channel, 7> order = {
      Channel::lin_accel_norm, Channel::accel_x, Channel::accel_y,
      Channel::accel_z,        Channel::gyro_x,  Channel::gyro_y,
      Channel::gyro_z};
  for (size_t i = 0; i < order.size(); ++i) {
    ChannelSeries raw = (order[i] == Channel::lin_accel_norm)
                            ? derive_lin_accel_norm(record)
                            : extract_axis(record, order[i]);
    out.channels[i] =
        resample_to_grid(gaussian_smooth(raw, opts.sensor_sigma_s),
                         opts.rate_hz);
  }
  if (out.channels[0].values.empty()) return std::nullopt;
  return out;
}

int64_t window_count(int64_t overlap, int window, int stride) {
  if (window < 1 || stride < 1) {
    throw ConfigError("window_count: window and stride must be >= 1");
  }
  if (overlap < window) return 0;
  return (overlap - window) / stride + 1;
}

void fill_window(const TrackChannels& track, const SensorChannels& sensor,
                 int64_t track_start, int64_t sensor_start, int window,
                 FeatureWindow& out) {
  if (track_start < track.start_index() ||
      track_start + window > track.end_index() ||
      sensor_start < sensor.start_index() ||
      sensor_start + window > sensor.end_index()) {
    throw ShapeError("fill_window: window exceeds grid range");
  }
  out.track_id = track.track_id;
  out.sensor_id = sensor.participant_id;
  out.start_t = track.speed.time_at(track_start);
  out.length = window;
  out.data.resize(static_cast<size_t>(kChannelCount) * window);
  const auto copy_from = [&](const GridSeries& g, int64_t start, Channel c) {
    const double* src = g.values.data() + (start - g.start_index);
    std::copy(src, src + window, out.channel_mut(c).data());
  };
  copy_from(track.speed, track_start, Channel::speed);
  copy_from(track.turn_rate, track_start, Channel::turn_rate);
  const std::array<Channel, 7> order = {
      Channel::lin_accel_norm, Channel::accel_x, Channel::accel_y,
      Channel::accel_z,        Channel::gyro_x,  Channel::gyro_y,
      Channel::gyro_z};
  for (size_t i = 0; i < order.size(); ++i) {
    copy_from(sensor.channels[i], sensor_start, order[i]);
  }
}

int64_t for_each_window(const TrackChannels& track,
                        const SensorChannels& sensor, int window, int stride,
                        const std::function<void(const FeatureWindow&)>& fn) {
  const int64_t lo = std::max(track.start_index(), sensor.start_index());
  const int64_t hi = std::min(track.end_index(), sensor.end_index());
  const int64_t n = window_count(hi - lo, window, stride);
  FeatureWindow buffer;
  for (int64_t i = 0; i < n; ++i) {
    const int64_t start = lo + i * stride;
    fill_window(track, sensor, start, start, window, buffer);
    fn(buffer);
  }
  return n;
}

std::vector<FeatureWindow> make_windows(const TrackChannels& track,
                                        const SensorChannels& sensor,
                                        int window, int stride) {
  std::vector<FeatureWindow> out;
  for_each_window(track, sensor, window, stride,
                  [&](const FeatureWindow& w) { out.push_back(w); });
  return out;
}

}  // namespace corrmatch::signals
