#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "corrmatch/common.hpp"

namespace corrmatch::signals {

struct TrackSample {
  double t = 0.0;  // seconds, shared epoch
  double x = 0.0;  // meters, world frame
  double y = 0.0;
};

// One visually tracked subject. `label` is the participant identity when
// known, empty optional for people without sensors.
struct Track {
  std::string track_id;
  std::vector<TrackSample> samples;
  std::optional<std::string> label;

  double start_t() const { return samples.front().t; }
  double end_t() const { return samples.back().t; }
  double duration() const { return end_t() - start_t(); }
};

struct ImuSample {
  double t = 0.0;
  Vec3 accel;    // measured acceleration incl. gravity, m/s^2
  Vec3 gravity;  // gravitational component, m/s^2
  Vec3 gyro;     // angular velocity, rad/s
};

// Inertial streams bound to one participant.
struct SensorRecord {
  std::string participant_id;
  std::vector<ImuSample> samples;
};

// Throw DataError if the type invariants do not hold
// (ordering, sample counts, gravity norm in [8, 11] m/s^2).
void validate(const Track& track);
void validate(const SensorRecord& record);

enum class Channel : int {
  speed = 0,
  turn_rate = 1,
  lin_accel_norm = 2,
  accel_x = 3,
  accel_y = 4,
  accel_z = 5,
  gyro_x = 6,
  gyro_y = 7,
  gyro_z = 8,
};

inline constexpr int kChannelCount = 9;
inline constexpr int kTrajectoryChannels = 2;  // speed, turn_rate
const char* channel_name(Channel c);

struct TimedValue {
  double t = 0.0;
  double value = 0.0;
};

// A scalar time series for one channel. `rate` is 0 for irregular series and
// set to the grid rate after resampling.
struct ChannelSeries {
  Channel channel = Channel::speed;
  double rate = 0.0;
  std::vector<TimedValue> values;
};

struct PreprocessOptions {
  double trajectory_sigma_s = 0.5;  // Gaussian smoothing for camera positions
  double sensor_sigma_s = 0.2;      // Gaussian smoothing for inertial channels
  double rate_hz = 10.0;            // common resampling rate
  double displacement_floor_m = 0.01;
};

// --- channel derivation ------------------------------------------------

// Speed magnitude per sample; central differences inside, one-sided at the
// ends. Requires >= 2 samples.
ChannelSeries derive_speed(const Track& track);

// Signed heading change rate per sample. Headings come from consecutive
// displacement vectors and are wrapped to (-pi, pi] before differencing;
// samples adjacent to a displacement below `displacement_floor_m` carry 0.
// Requires >= 3 samples. End samples replicate their interior neighbor.
ChannelSeries derive_turn_rate(const Track& track,
                               double displacement_floor_m = 0.01);

// |accel - gravity| per sample.
ChannelSeries derive_lin_accel_norm(const SensorRecord& record);

// Extracts one raw axis channel (accel_x..gyro_z) from a record.
ChannelSeries extract_axis(const SensorRecord& record, Channel channel);

// --- smoothing / resampling ---------------------------------------------

// Gaussian filter along the time axis, kernel truncated at 3 sigma and
// renormalized to sum 1, so boundaries see a truncation-normalized kernel
// rather than reflected data. Timestamps are unchanged. Works on irregular
// series (weights evaluated at actual sample offsets).
ChannelSeries gaussian_smooth(const ChannelSeries& series, double sigma_s);

// Same kernel applied to the x/y coordinates of a track.
Track smooth_track_positions(const Track& track, double sigma_s);

// Linear interpolation onto a uniform grid starting at the first timestamp.
// No extrapolation beyond the last timestamp. Requires a span >= 2/rate s.
ChannelSeries resample(const ChannelSeries& series, double rate_hz);

// A uniformly sampled series on the shared epoch grid: sample i lives at
// t = (start_index + i) / rate. Anchoring grid points at integer multiples
// of 1/rate makes independently preprocessed tracks and sensor records
// alignable sample-for-sample.
struct GridSeries {
  int64_t start_index = 0;
  double rate = 10.0;
  std::vector<double> values;

  int64_t end_index() const {  // one past the last grid index
    return start_index + static_cast<int64_t>(values.size());
  }
  double time_at(int64_t grid_index) const {
    return static_cast<double>(grid_index) / rate;
  }
};

// Linear interpolation onto the epoch-anchored grid (indices k with
// k/rate inside the series' time span). Requires a span >= 2/rate s.
GridSeries resample_to_grid(const ChannelSeries& series, double rate_hz);

// --- preprocessed per-entity channel bundles -----------------------------

struct TrackChannels {
  std::string track_id;
  std::optional<std::string> label;
  GridSeries speed;
  GridSeries turn_rate;

  int64_t start_index() const { return speed.start_index; }
  int64_t end_index() const { return speed.end_index(); }
};

struct SensorChannels {
  std::string participant_id;
  // lin_accel_norm, accel x/y/z, gyro x/y/z -- all on one shared grid range.
  std::array<GridSeries, 7> channels;

  int64_t start_index() const { return channels[0].start_index; }
  int64_t end_index() const { return channels[0].end_index(); }
};

// Full trajectory pipeline: smooth positions, derive speed/turn rate,
// resample to the common grid. Returns nullopt when the track is too short
// to survive the pipeline (< 3 samples or span < 2/rate).
std::optional<TrackChannels> preprocess_track(const Track& track,
                                              const PreprocessOptions& opts);

// Full sensor pipeline: derive lin-accel norm, smooth every channel,
// resample to the common grid.
std::optional<SensorChannels> preprocess_sensor(const SensorRecord& record,
                                                const PreprocessOptions& opts);

// --- windows --------------------------------------------------------------

// Fixed-length multi-channel slice pairing trajectory channels with sensor
// channels for one (track, sensor) combination. Channel rows are ordered
// exactly as `Channel`: speed, turn_rate, lin_accel_norm, accel x/y/z,
// gyro x/y/z. That ordering is part of the serialized-window contract.
struct FeatureWindow {
  std::string track_id;
  std::string sensor_id;
  double start_t = 0.0;
  int length = 0;
  std::vector<double> data;  // kChannelCount x length, row-major

  std::span<const double> channel(Channel c) const {
    return std::span<const double>(data).subspan(
        static_cast<size_t>(static_cast<int>(c)) * length, length);
  }
  std::span<double> channel_mut(Channel c) {
    return std::span<double>(data).subspan(
        static_cast<size_t>(static_cast<int>(c)) * length, length);
  }
  double at(Channel c, int i) const {
    return data[static_cast<size_t>(static_cast<int>(c)) * length + i];
  }
};

// Number of windows of length `window` at the given stride inside an
// overlap of `overlap` samples (0 when overlap < window).
int64_t window_count(int64_t overlap, int window, int stride);

// Fills `out` with the window whose trajectory channels start at grid index
// `track_start` and whose sensor channels start at `sensor_start` (they
// differ only for deliberately time-shifted training negatives). Buffers are
// reused across calls.
void fill_window(const TrackChannels& track, const SensorChannels& sensor,
                 int64_t track_start, int64_t sensor_start, int window,
                 FeatureWindow& out);

// Calls `fn` for every aligned window start inside the temporal intersection
// of the two grids, reusing one window buffer. Returns the number of windows
// visited. An overlap shorter than `window` yields zero calls.
int64_t for_each_window(const TrackChannels& track,
                        const SensorChannels& sensor, int window, int stride,
                        const std::function<void(const FeatureWindow&)>& fn);

// Materialized variant of for_each_window.
std::vector<FeatureWindow> make_windows(const TrackChannels& track,
                                        const SensorChannels& sensor,
                                        int window, int stride);

}  // namespace corrmatch::signals
