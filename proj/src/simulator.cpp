#include "corrmatch/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace corrmatch::simulator {

const char* motion_state_name(MotionState s) {
  switch (s) {
    case MotionState::stand: return "stand";
    case MotionState::walk: return "walk";
    case MotionState::inspect: return "inspect";
    case MotionState::backward_walk: return "backward_walk";
  }
  return "?";
}

void ScenarioConfig::validate() const {
  if (!(duration_s > 0.0)) throw ConfigError("scenario: duration must be > 0");
  if (participants < 0 || non_participants < 0) {
    throw ConfigError("scenario: agent counts must be >= 0");
  }
  for (double d : dwell_mean_s) {
    if (!(d > 0.0)) throw ConfigError("scenario: dwell means must be > 0");
  }
  for (double w : entry_weight) {
    if (w < 0.0) throw ConfigError("scenario: entry weights must be >= 0");
  }
  if (!(camera_rate_hz > 0.0) || !(sensor_rate_hz > 0.0)) {
    throw ConfigError("scenario: sample rates must be > 0");
  }
  if (traj_noise_sigma_m < 0.0 || fragmentation_per_min < 0.0 ||
      clock_offset_range_s < 0.0) {
    throw ConfigError("scenario: noise/fragmentation values must be >= 0");
  }
  const int agents = participants + non_participants;
  if (agents > 0 && arena_w_m * arena_h_m < 4.0 * agents) {
    throw ConfigError("scenario: arena " + std::to_string(arena_w_m) + "x" +
                      std::to_string(arena_h_m) + " m too small for " +
                      std::to_string(agents) + " agents");
  }
  if (coordinated_pairs * 2 > participants) {
    throw ConfigError("scenario: not enough participants for coordinated pairs");
  }
}

namespace {

constexpr double kArenaMargin = 1.0;
constexpr double kMaxTurnRate = 1.5;   // rad/s
constexpr double kSpeedRamp = 1.0;     // m/s^2
constexpr double kHeadingGain = 2.5;   // 1/s
constexpr double kWaypointRadius = 0.6;

double target_speed(MotionState s, const ScenarioConfig& cfg, double bout_speed) {
  switch (s) {
    case MotionState::walk: return bout_speed;
    case MotionState::backward_walk: return cfg.backward_speed_mps;
    default: return 0.0;
  }
}

MotionState draw_state(std::mt19937_64& rng, const ScenarioConfig& cfg,
                       std::optional<MotionState> current) {
  std::array<double, 4> w = cfg.entry_weight;
  if (current) w[static_cast<int>(*current)] = 0.0;
  double total = 0.0;
  for (double v : w) total += v;
  if (total <= 0.0) return MotionState::walk;
  std::uniform_real_distribution<double> dist(0.0, total);
  double u = dist(rng);
  for (int i = 0; i < 4; ++i) {
    if (u < w[i]) return static_cast<MotionState>(i);
    u -= w[i];
  }
  return MotionState::walk;
}

}  // namespace

MotionTimeline simulate_motion(const ScenarioConfig& cfg, uint64_t seed,
                               std::vector<StateSpan>* spans) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(kArenaMargin,
                                            cfg.arena_w_m - kArenaMargin);
  std::uniform_real_distribution<double> uy(kArenaMargin,
                                            cfg.arena_h_m - kArenaMargin);
  std::uniform_real_distribution<double> uang(-M_PI, M_PI);
  std::normal_distribution<double> nspeed(cfg.walk_speed_mps,
                                          cfg.walk_speed_sd);

  MotionTimeline tl;
  tl.dt = 1.0 / std::max(50.0, cfg.sensor_rate_hz);
  const auto steps =
      static_cast<size_t>(std::llround(cfg.duration_s / tl.dt)) + 1;
  tl.x.resize(steps);
  tl.y.resize(steps);
  tl.vx.resize(steps);
  tl.vy.resize(steps);
  tl.yaw.resize(steps);
  tl.yaw_rate.resize(steps);
  tl.state.resize(steps);

  double px = ux(rng), py = uy(rng);
  double heading = uang(rng);  // movement direction
  double speed = 0.0;

  MotionState state = draw_state(rng, cfg, std::nullopt);
  std::exponential_distribution<double> dwell(
      1.0 / cfg.dwell_mean_s[static_cast<int>(state)]);
  double state_until = std::clamp(dwell(rng), 1.5, 90.0);
  double state_start = 0.0;
  double bout_speed = std::clamp(nspeed(rng), 0.5, 2.0);
  double wp_x = ux(rng), wp_y = uy(rng);

  for (size_t i = 0; i < steps; ++i) {
    const double t = tl.time_at(i);
    if (t >= state_until) {
      if (spans) spans->push_back({state_start, t, state});
      const MotionState prev = state;
      state = draw_state(rng, cfg, prev);
      std::exponential_distribution<double> next_dwell(
          1.0 / cfg.dwell_mean_s[static_cast<int>(state)]);
      state_until = t + std::clamp(next_dwell(rng), 1.5, 90.0);
      state_start = t;
      bout_speed = std::clamp(nspeed(rng), 0.5, 2.0);
      if (state == MotionState::walk || state == MotionState::backward_walk) {
        wp_x = ux(rng);
        wp_y = uy(rng);
      }
    }

    const bool moving =
        state == MotionState::walk || state == MotionState::backward_walk;
    double turn = 0.0;
    if (moving) {
      if (std::hypot(wp_x - px, wp_y - py) < kWaypointRadius) {
        wp_x = ux(rng);
        wp_y = uy(rng);
      }
      const double bearing = std::atan2(wp_y - py, wp_x - px);
      turn = std::clamp(wrap_angle(bearing - heading) * kHeadingGain,
                        -kMaxTurnRate, kMaxTurnRate);
    }
    heading = wrap_angle(heading + turn * tl.dt);

    const double want = target_speed(state, cfg, bout_speed);
    const double dv = std::clamp(want - speed, -kSpeedRamp * tl.dt,
                                 kSpeedRamp * tl.dt);
    speed += dv;

    px += speed * std::cos(heading) * tl.dt;
    py += speed * std::sin(heading) * tl.dt;
    px = std::clamp(px, 0.2, cfg.arena_w_m - 0.2);
    py = std::clamp(py, 0.2, cfg.arena_h_m - 0.2);

    tl.x[i] = px;
    tl.y[i] = py;
    tl.vx[i] = speed * std::cos(heading);
    tl.vy[i] = speed * std::sin(heading);
    const bool backward = state == MotionState::backward_walk;
    tl.yaw[i] = wrap_angle(backward ? heading + M_PI : heading);
    tl.yaw_rate[i] = turn;
    tl.state[i] = state;
  }
  if (spans) spans->push_back({state_start, cfg.duration_s, state});
  return tl;
}

namespace {

struct Burst {
  double center = 0.0;
  double width = 0.3;
  Vec3 direction;  // scaled by amplitude
};

// Pre-generates inspect-state acceleration bursts along the timeline.
std::vector<Burst> make_bursts(const MotionTimeline& tl,
                               const ScenarioConfig& cfg,
                               std::mt19937_64& rng) {
  std::vector<Burst> out;
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::normal_distribution<double> amp(cfg.burst_amp, 0.5 * cfg.burst_amp);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double p_step = cfg.burst_rate_hz * tl.dt;
  for (size_t i = 0; i < tl.size(); ++i) {
    if (tl.state[i] != MotionState::inspect) continue;
    if (u01(rng) < p_step) {
      Burst b;
      b.center = tl.time_at(i);
      b.width = 0.1 + 0.2 * u01(rng);
      Vec3 dir{gauss(rng), gauss(rng), gauss(rng)};
      const double n = dir.norm();
      if (n > 1e-9) dir = dir * (1.0 / n);
      out.push_back({b.center, b.width, dir * std::fabs(amp(rng))});
    }
  }
  return out;
}

// Linear interpolation helpers over the fixed-step timeline.
double lerp_series(const std::vector<double>& v, double idx) {
  if (idx <= 0.0) return v.front();
  const auto i = static_cast<size_t>(idx);
  if (i + 1 >= v.size()) return v.back();
  const double a = idx - static_cast<double>(i);
  return v[i] * (1.0 - a) + v[i + 1] * a;
}

}  // namespace

signals::SensorRecord synthesize_imu(const MotionTimeline& tl,
                                     const ScenarioConfig& cfg,
                                     const std::string& participant_id,
                                     uint64_t seed, double clock_offset_s) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const std::vector<Burst> bursts = make_bursts(tl, cfg, rng);

  signals::SensorRecord rec;
  rec.participant_id = participant_id;
  const double dt_s = 1.0 / cfg.sensor_rate_hz;
  const double t_end = tl.time_at(tl.size() - 1);
  const auto n = static_cast<size_t>(std::floor((t_end - tl.t0) / dt_s)) + 1;
  rec.samples.resize(n);

  const double tilt_max = cfg.tilt_wander_deg * M_PI / 180.0;
  double tilt_x = 0.0, tilt_y = 0.0;
  double prev_tilt_x = 0.0, prev_tilt_y = 0.0;
  double phase = 0.0;
  size_t burst_lo = 0;

  for (size_t i = 0; i < n; ++i) {
    const double t = tl.t0 + static_cast<double>(i) * dt_s;
    const double idx = (t - tl.t0) / tl.dt;
    const auto near = std::min(tl.size() - 1,
                               static_cast<size_t>(std::llround(idx)));
    const MotionState state = tl.state[near];

    // World-frame acceleration from the latent velocity.
    const double h = dt_s;
    const double i0 = std::max(0.0, idx - h / tl.dt);
    const double i1 =
        std::min(static_cast<double>(tl.size() - 1), idx + h / tl.dt);
    const double span = (i1 - i0) * tl.dt;
    double ax_w = 0.0, ay_w = 0.0;
    if (span > 1e-12) {
      ax_w = (lerp_series(tl.vx, i1) - lerp_series(tl.vx, i0)) / span;
      ay_w = (lerp_series(tl.vy, i1) - lerp_series(tl.vy, i0)) / span;
    }

    // Rotate into the device frame (forward along body yaw).
    const double yaw = tl.yaw[near];
    const double c = std::cos(yaw), s = std::sin(yaw);
    Vec3 lin{ax_w * c + ay_w * s, -ax_w * s + ay_w * c, 0.0};

    const bool stepping =
        state == MotionState::walk || state == MotionState::backward_walk;
    double wobble = 0.0;
    if (stepping) {
      // Cadence and impact strength scale with walking speed.
      const double speed_now =
          std::hypot(lerp_series(tl.vx, idx), lerp_series(tl.vy, idx));
      const double cadence = cfg.step_freq_hz * (0.7 + 0.25 * speed_now);
      const double strength = 0.4 + 0.5 * speed_now;
      phase += 2.0 * M_PI * cadence * dt_s;
      lin.z += cfg.step_amp_vertical * strength * std::sin(phase);
      lin.x += cfg.step_amp_forward * strength * std::sin(2.0 * phase + 0.7);
      wobble = 0.05 * std::sin(phase + 1.1);
    }

    while (burst_lo < bursts.size() &&
           bursts[burst_lo].center + 4.0 * bursts[burst_lo].width < t) {
      ++burst_lo;
    }
    for (size_t b = burst_lo; b < bursts.size(); ++b) {
      const double d = t - bursts[b].center;
      if (d < -4.0 * bursts[b].width) break;
      const double env =
          std::exp(-d * d / (2.0 * bursts[b].width * bursts[b].width));
      lin = lin + bursts[b].direction * env;
    }

    // Slow bounded tilt wander; gravity norm stays fixed.
    prev_tilt_x = tilt_x;
    prev_tilt_y = tilt_y;
    tilt_x = std::clamp(tilt_x + 0.02 * std::sqrt(dt_s) * gauss(rng) * tilt_max,
                        -tilt_max, tilt_max);
    tilt_y = std::clamp(tilt_y + 0.02 * std::sqrt(dt_s) * gauss(rng) * tilt_max,
                        -tilt_max, tilt_max);
    const double g = cfg.gravity_mps2;
    const double gz =
        std::sqrt(std::max(0.0, 1.0 - tilt_x * tilt_x - tilt_y * tilt_y));
    const Vec3 gravity{g * tilt_x, g * tilt_y, g * gz};

    const Vec3 noise{cfg.accel_noise_sd * gauss(rng),
                     cfg.accel_noise_sd * gauss(rng),
                     cfg.accel_noise_sd * gauss(rng)};
    auto& sample = rec.samples[i];
    sample.t = t + clock_offset_s;
    sample.gravity = gravity;
    sample.accel = gravity + lin + noise;
    sample.gyro = {
        (tilt_x - prev_tilt_x) / dt_s + wobble + cfg.gyro_noise_sd * gauss(rng),
        (tilt_y - prev_tilt_y) / dt_s + wobble + cfg.gyro_noise_sd * gauss(rng),
        tl.yaw_rate[near] + cfg.gyro_noise_sd * gauss(rng)};
  }
  return rec;
}

signals::Track sample_camera_track(const MotionTimeline& tl,
                                   const ScenarioConfig& cfg,
                                   const std::string& track_id,
                                   std::optional<std::string> label,
                                   double start_s, double end_s,
                                   uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  signals::Track track;
  track.track_id = track_id;
  track.label = std::move(label);
  const double rate = cfg.camera_rate_hz;
  const double t_end = std::min(end_s, tl.time_at(tl.size() - 1));
  const auto c0 = static_cast<int64_t>(std::ceil(start_s * rate - 1e-9));
  const auto c1 = static_cast<int64_t>(std::floor(t_end * rate + 1e-9));
  track.samples.reserve(std::max<int64_t>(0, c1 - c0 + 1));
  for (int64_t cidx = c0; cidx <= c1; ++cidx) {
    const double t = static_cast<double>(cidx) / rate;
    const double idx = (t - tl.t0) / tl.dt;
    signals::TrackSample s;
    s.t = t;
    s.x = lerp_series(tl.x, idx) + cfg.traj_noise_sigma_m * gauss(rng);
    s.y = lerp_series(tl.y, idx) + cfg.traj_noise_sigma_m * gauss(rng);
    track.samples.push_back(s);
  }
  return track;
}

std::vector<signals::Track> fragment_tracks(
    const std::vector<signals::Track>& tracks, double rate_per_min,
    uint64_t seed) {
  if (rate_per_min < 0.0) {
    throw ConfigError("fragment_tracks: rate must be >= 0");
  }
  if (rate_per_min == 0.0) return tracks;
  std::vector<signals::Track> out;
  for (size_t i = 0; i < tracks.size(); ++i) {
    const auto& track = tracks[i];
    if (track.samples.size() < 2) continue;
    std::mt19937_64 rng(derive_seed(seed, i));
    const double span_min = track.duration() / 60.0;
    std::poisson_distribution<int> cut_count(rate_per_min * span_min);
    const int cuts = cut_count(rng);
    if (cuts == 0) {
      out.push_back(track);
      continue;
    }
    std::uniform_real_distribution<double> cut_time(track.start_t(),
                                                    track.end_t());
    std::vector<double> cut_at(cuts);
    for (auto& c : cut_at) c = cut_time(rng);
    std::sort(cut_at.begin(), cut_at.end());

    size_t lo = 0;
    int segment = 0;
    auto emit = [&](size_t hi) {  // samples [lo, hi)
      if (hi - lo >= 2) {
        signals::Track piece;
        piece.track_id = track.track_id + "_f" + std::to_string(segment++);
        piece.label = track.label;
        piece.samples.assign(track.samples.begin() + lo,
                             track.samples.begin() + hi);
        out.push_back(std::move(piece));
      }
      lo = hi;
    };
    for (double c : cut_at) {
      size_t hi = lo;
      while (hi < track.samples.size() && track.samples[hi].t < c) ++hi;
      emit(hi);
    }
    emit(track.samples.size());
  }
  return out;
}

Scenario generate_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  Scenario scenario;

  // Per-agent presence windows; participants default to the whole scene,
  // non-participants pass through for a shorter stretch.
  std::vector<std::vector<std::pair<double, double>>> presence(
      cfg.participants);
  for (const auto& p : cfg.presence) {
    if (p.participant < 0 || p.participant >= cfg.participants) {
      throw ConfigError("scenario: presence entry for unknown participant " +
                        std::to_string(p.participant));
    }
    if (!(p.start_s < p.end_s) || p.start_s < 0.0 ||
        p.end_s > cfg.duration_s) {
      throw ConfigError("scenario: presence window outside scene duration");
    }
    presence[p.participant].push_back({p.start_s, p.end_s});
  }
  for (int i = 0; i < cfg.participants; ++i) {
    if (presence[i].empty()) presence[i].push_back({0.0, cfg.duration_s});
  }

  std::vector<MotionTimeline> timelines(cfg.participants);
  for (int i = 0; i < cfg.participants; ++i) {
    const bool follower = i < 2 * cfg.coordinated_pairs && (i % 2 == 1);
    std::vector<StateSpan> spans;
    if (follower) {
      // Walk side by side with the pair leader: same latent motion at a
      // constant offset, the ambiguous case the matcher must defer on.
      const MotionTimeline& lead = timelines[i - 1];
      MotionTimeline tl = lead;
      constexpr double kSideOffset = 0.8;
      const double side = wrap_angle(lead.yaw.front() + M_PI / 2.0);
      for (size_t k = 0; k < tl.size(); ++k) {
        tl.x[k] += kSideOffset * std::cos(side);
        tl.y[k] += kSideOffset * std::sin(side);
      }
      MotionState cur = tl.state.front();
      double start = tl.t0;
      for (size_t k = 1; k < tl.size(); ++k) {
        if (tl.state[k] != cur) {
          spans.push_back({start, tl.time_at(k), cur});
          start = tl.time_at(k);
          cur = tl.state[k];
        }
      }
      spans.push_back({start, tl.time_at(tl.size() - 1), cur});
      timelines[i] = std::move(tl);
    } else {
      timelines[i] = simulate_motion(cfg, derive_seed(cfg.seed, 100 + i),
                                     &spans);
    }
    const std::string id =
        "P" + std::string(i < 10 ? "0" : "") + std::to_string(i);
    scenario.truth.state_timeline[id] = std::move(spans);
  }

  // Sensors (participants only), with per-participant clock offsets.
  for (int i = 0; i < cfg.participants; ++i) {
    const std::string id =
        "P" + std::string(i < 10 ? "0" : "") + std::to_string(i);
    double offset = 0.0;
    if (cfg.clock_offset_range_s > 0.0) {
      std::mt19937_64 rng(derive_seed(cfg.seed, 500 + i));
      std::uniform_real_distribution<double> u(-cfg.clock_offset_range_s,
                                               cfg.clock_offset_range_s);
      offset = u(rng);
    }
    scenario.sensors.push_back(synthesize_imu(
        timelines[i], cfg, id, derive_seed(cfg.seed, 200 + i), offset));
  }

  // Camera tracks: participants over their presence windows, then
  // non-participants over short pass-through intervals.
  std::vector<signals::Track> raw_tracks;
  for (int i = 0; i < cfg.participants; ++i) {
    const std::string id =
        "P" + std::string(i < 10 ? "0" : "") + std::to_string(i);
    int seg = 0;
    for (const auto& [a, b] : presence[i]) {
      raw_tracks.push_back(sample_camera_track(
          timelines[i], cfg, "trk_" + id + "_s" + std::to_string(seg++), id,
          a, b, derive_seed(cfg.seed, 300 + i)));
    }
  }
  for (int i = 0; i < cfg.non_participants; ++i) {
    const std::string id =
        "N" + std::string(i < 10 ? "0" : "") + std::to_string(i);
    MotionTimeline tl =
        simulate_motion(cfg, derive_seed(cfg.seed, 700 + i), nullptr);
    std::mt19937_64 rng(derive_seed(cfg.seed, 600 + i));
    std::uniform_real_distribution<double> ulen(
        0.5 * cfg.non_participant_presence_s,
        1.5 * cfg.non_participant_presence_s);
    const double len = std::min(ulen(rng), cfg.duration_s);
    std::uniform_real_distribution<double> ustart(0.0, cfg.duration_s - len);
    const double start = cfg.duration_s > len ? ustart(rng) : 0.0;
    raw_tracks.push_back(sample_camera_track(
        tl, cfg, "trk_" + id + "_s0", std::nullopt, start, start + len,
        derive_seed(cfg.seed, 800 + i)));
  }

  scenario.tracks = fragment_tracks(raw_tracks, cfg.fragmentation_per_min,
                                    derive_seed(cfg.seed, 0xf4a6));
  for (const auto& t : scenario.tracks) {
    scenario.truth.track_to_participant[t.track_id] = t.label;
  }
  return scenario;
}

}  // namespace corrmatch::simulator
