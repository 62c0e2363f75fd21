#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "corrmatch/common.hpp"
#include "corrmatch/signals.hpp"

namespace corrmatch::simulator {

enum class MotionState : int {
  stand = 0,
  walk = 1,
  inspect = 2,  // stationary, upper-body motion only
  backward_walk = 3,
};

const char* motion_state_name(MotionState s);

// Scripted camera visibility for one participant (by index). Participants
// without entries are visible for the whole scene.
struct PresenceWindow {
  int participant = 0;
  double start_s = 0.0;
  double end_s = 0.0;
};

struct ScenarioConfig {
  double duration_s = 600.0;
  int participants = 10;
  int non_participants = 5;

  // Semi-Markov motion model: mean dwell seconds and entry weights per
  // state, ordered stand / walk / inspect / backward_walk.
  std::array<double, 4> dwell_mean_s = {12.0, 20.0, 15.0, 5.0};
  std::array<double, 4> entry_weight = {0.25, 0.45, 0.20, 0.10};
  double walk_speed_mps = 1.2;
  double walk_speed_sd = 0.15;
  double backward_speed_mps = 0.5;

  double arena_w_m = 29.0;
  double arena_h_m = 18.0;

  // Camera side.
  double camera_rate_hz = 5.0;
  double traj_noise_sigma_m = 0.15;
  double fragmentation_per_min = 0.25;

  // Sensor side.
  double sensor_rate_hz = 50.0;
  double clock_offset_range_s = 0.2;  // +- uniform, per participant
  double accel_noise_sd = 0.12;
  double gyro_noise_sd = 0.02;
  double step_freq_hz = 2.0;
  double step_amp_vertical = 2.0;  // m/s^2 during walking
  double step_amp_forward = 0.4;
  double burst_rate_hz = 0.3;  // inspect-state accel bursts
  double burst_amp = 2.0;
  double gravity_mps2 = 9.81;
  double tilt_wander_deg = 3.0;

  // Mean visible time for non-participants (they pass through the area).
  double non_participant_presence_s = 60.0;

  int coordinated_pairs = 0;  // leading pairs walk side by side
  std::vector<PresenceWindow> presence;

  uint64_t seed = 1;

  void validate() const;
};

struct StateSpan {
  double start_s = 0.0;
  double end_s = 0.0;
  MotionState state = MotionState::stand;
};

// Latent motion sampled on a fixed fine grid; the shared source for both a
// participant's camera track and their sensor stream.
struct MotionTimeline {
  double t0 = 0.0;
  double dt = 0.02;
  std::vector<double> x, y;    // m
  std::vector<double> vx, vy;  // m/s
  std::vector<double> yaw;     // body yaw, rad
  std::vector<double> yaw_rate;
  std::vector<MotionState> state;

  size_t size() const { return x.size(); }
  double time_at(size_t i) const {
    return t0 + static_cast<double>(i) * dt;
  }
};

struct GroundTruth {
  // Participant id per track, empty optional for non-participant tracks.
  std::map<std::string, std::optional<std::string>> track_to_participant;
  std::map<std::string, std::vector<StateSpan>> state_timeline;
};

struct Scenario {
  std::vector<signals::Track> tracks;
  std::vector<signals::SensorRecord> sensors;
  GroundTruth truth;
};

// Fully deterministic per config (incl. seed). Throws ConfigError when the
// arena cannot hold the requested agent count.
Scenario generate_scenario(const ScenarioConfig& config);

// Waypoint-walking semi-Markov motion for one agent.
MotionTimeline simulate_motion(const ScenarioConfig& config, uint64_t seed,
                               std::vector<StateSpan>* spans = nullptr);

// Forward IMU model: measured acceleration is gravity (with slow tilt
// wander) plus the body-frame second derivative of the latent motion, a
// step-frequency oscillation while walking, inspect-state bursts, and white
// noise. Emitted timestamps are shifted by `clock_offset_s`.
signals::SensorRecord synthesize_imu(const MotionTimeline& timeline,
                                     const ScenarioConfig& config,
                                     const std::string& participant_id,
                                     uint64_t seed,
                                     double clock_offset_s = 0.0);

// Camera-side samples of a latent motion over [start_s, end_s]: positions on
// the global camera grid plus isotropic Gaussian noise.
signals::Track sample_camera_track(const MotionTimeline& timeline,
                                   const ScenarioConfig& config,
                                   const std::string& track_id,
                                   std::optional<std::string> label,
                                   double start_s, double end_s,
                                   uint64_t seed);

// Splits tracks at Poisson-distributed cut times (rate per minute),
// preserving labels and dropping segments shorter than 2 samples.
// Rate 0 returns the input unchanged.
std::vector<signals::Track> fragment_tracks(
    const std::vector<signals::Track>& tracks, double rate_per_min,
    uint64_t seed);

}  // namespace corrmatch::simulator
