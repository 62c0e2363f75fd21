#include "corrmatch/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace corrmatch::io {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

double parse_double(std::string_view s, const std::string& what,
                    size_t line) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw DataError("line " + std::to_string(line) + ": bad " + what + " '" +
                    std::string(s) + "'");
  }
  return v;
}

int64_t parse_int(std::string_view s, const std::string& what, size_t line) {
  int64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw DataError("line " + std::to_string(line) + ": bad " + what + " '" +
                    std::string(s) + "'");
  }
  return v;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  size_t pos = 0;
  while (true) {
    const size_t comma = line.find(',', pos);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(pos));
      break;
    }
    out.push_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
  return out;
}

// Reads a CSV file, checks the exact header, and hands each data line to
// `row(fields, line_number)`.
void read_csv(const std::string& path, const std::string& header,
              size_t columns,
              const std::function<void(const std::vector<std::string_view>&,
                                       size_t)>& row) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open '" + path + "'");
  std::string line;
  size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (lineno == 1) {
      if (line != header) {
        throw DataError(path + ": expected header '" + header + "', got '" +
                        line + "'");
      }
      continue;
    }
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != columns) {
      throw DataError(path + " line " + std::to_string(lineno) + ": expected " +
                      std::to_string(columns) + " fields, got " +
                      std::to_string(fields.size()));
    }
    row(fields, lineno);
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw DataError("cannot open '" + path + "' for write");
  return f;
}

}  // namespace

void save_tracks_csv(const std::string& path,
                     std::span<const signals::Track> tracks) {
  auto f = open_out(path);
  f << "track_id,t,x,y,label\n";
  for (const auto& t : tracks) {
    const std::string label = t.label.value_or("");
    for (const auto& s : t.samples) {
      f << t.track_id << ',' << format_double(s.t) << ',' << format_double(s.x)
        << ',' << format_double(s.y) << ',' << label << '\n';
    }
  }
}

std::vector<signals::Track> load_tracks_csv(const std::string& path) {
  std::vector<signals::Track> tracks;
  std::map<std::string, size_t> index;
  read_csv(path, "track_id,t,x,y,label", 5,
           [&](const std::vector<std::string_view>& f, size_t line) {
             const std::string id(f[0]);
             auto [it, inserted] = index.try_emplace(id, tracks.size());
             if (inserted) {
               tracks.emplace_back();
               tracks.back().track_id = id;
               if (!f[4].empty()) tracks.back().label = std::string(f[4]);
             } else {
               const auto& label = tracks[it->second].label;
               const std::string row_label(f[4]);
               if (label.value_or("") != row_label) {
                 throw DataError(path + " line " + std::to_string(line) +
                                 ": track '" + id + "' changes label");
               }
             }
             tracks[it->second].samples.push_back(
                 {parse_double(f[1], "t", line),
                  parse_double(f[2], "x", line),
                  parse_double(f[3], "y", line)});
           });
  for (const auto& t : tracks) signals::validate(t);
  return tracks;
}

void save_sensors_csv(const std::string& path,
                      std::span<const signals::SensorRecord> records) {
  auto f = open_out(path);
  f << "participant_id,t,ax,ay,az,gx,gy,gz,wx,wy,wz\n";
  for (const auto& r : records) {
    for (const auto& s : r.samples) {
      f << r.participant_id << ',' << format_double(s.t) << ','
        << format_double(s.accel.x) << ',' << format_double(s.accel.y) << ','
        << format_double(s.accel.z) << ',' << format_double(s.gravity.x) << ','
        << format_double(s.gravity.y) << ',' << format_double(s.gravity.z)
        << ',' << format_double(s.gyro.x) << ',' << format_double(s.gyro.y)
        << ',' << format_double(s.gyro.z) << '\n';
    }
  }
}

std::vector<signals::SensorRecord> load_sensors_csv(const std::string& path) {
  std::vector<signals::SensorRecord> records;
  std::map<std::string, size_t> index;
  read_csv(path, "participant_id,t,ax,ay,az,gx,gy,gz,wx,wy,wz", 11,
           [&](const std::vector<std::string_view>& f, size_t line) {
             const std::string id(f[0]);
             if (id.empty()) {
               throw DataError(path + " line " + std::to_string(line) +
                               ": empty participant_id");
             }
             auto [it, inserted] = index.try_emplace(id, records.size());
             if (inserted) {
               records.emplace_back();
               records.back().participant_id = id;
             }
             signals::ImuSample s;
             s.t = parse_double(f[1], "t", line);
             s.accel = {parse_double(f[2], "ax", line),
                        parse_double(f[3], "ay", line),
                        parse_double(f[4], "az", line)};
             s.gravity = {parse_double(f[5], "gx", line),
                          parse_double(f[6], "gy", line),
                          parse_double(f[7], "gz", line)};
             s.gyro = {parse_double(f[8], "wx", line),
                       parse_double(f[9], "wy", line),
                       parse_double(f[10], "wz", line)};
             records[it->second].samples.push_back(s);
           });
  for (const auto& r : records) signals::validate(r);
  return records;
}

void save_truth_csv(
    const std::string& path,
    const std::map<std::string, std::optional<std::string>>& truth) {
  auto f = open_out(path);
  f << "track_id,participant_id\n";
  for (const auto& [track, participant] : truth) {
    f << track << ',' << participant.value_or("") << '\n';
  }
}

std::map<std::string, std::optional<std::string>> load_truth_csv(
    const std::string& path) {
  std::map<std::string, std::optional<std::string>> truth;
  read_csv(path, "track_id,participant_id", 2,
           [&](const std::vector<std::string_view>& f, size_t line) {
             const std::string id(f[0]);
             if (truth.contains(id)) {
               throw DataError(path + " line " + std::to_string(line) +
                               ": duplicate track '" + id + "'");
             }
             truth[id] = f[1].empty()
                             ? std::nullopt
                             : std::optional<std::string>(std::string(f[1]));
           });
  return truth;
}

struct ScoresWriter::Impl {
  std::ofstream f;
};

ScoresWriter::ScoresWriter(const std::string& path) : impl_(new Impl) {
  impl_->f.open(path);
  if (!impl_->f) {
    delete impl_;
    throw DataError("cannot open '" + path + "' for write");
  }
  impl_->f << "step,track_id,sensor_id,p,r\n";
}

ScoresWriter::~ScoresWriter() { delete impl_; }

void ScoresWriter::append(const matching::StepScore& s) {
  impl_->f << s.step << ',' << s.track_id << ',' << s.sensor_id << ','
           << format_double(s.p) << ',' << format_double(s.r) << '\n';
}

void ScoresWriter::close() {
  impl_->f.close();
  if (impl_->f.fail()) throw DataError("score file write failed");
}

std::vector<matching::StepScore> load_scores_csv(const std::string& path) {
  std::vector<matching::StepScore> out;
  read_csv(path, "step,track_id,sensor_id,p,r", 5,
           [&](const std::vector<std::string_view>& f, size_t line) {
             matching::StepScore s;
             s.step = parse_int(f[0], "step", line);
             s.track_id = std::string(f[1]);
             s.sensor_id = std::string(f[2]);
             s.p = parse_double(f[3], "p", line);
             s.r = parse_double(f[4], "r", line);
             out.push_back(std::move(s));
           });
  return out;
}

void save_decisions_csv(const std::string& path,
                        std::span<const LoggedDecision> decisions) {
  auto f = open_out(path);
  f << "step,kind,track_id,sensor_id\n";
  for (const auto& d : decisions) {
    const char* kind = d.decision.kind == matching::DecisionKind::positive
                           ? "positive"
                       : d.decision.kind == matching::DecisionKind::negative
                           ? "negative"
                           : "deferred";
    f << d.step << ',' << kind << ',' << d.decision.track_id << ','
      << d.decision.sensor_id << '\n';
  }
}

void save_loss_csv(const std::string& path,
                   std::span<const training::EpochLoss> history) {
  auto f = open_out(path);
  f << "epoch,train_loss,val_loss\n";
  for (const auto& e : history) {
    f << e.epoch << ',' << format_double(e.train_loss) << ','
      << format_double(e.val_loss) << '\n';
  }
}

std::vector<training::EpochLoss> load_loss_csv(const std::string& path) {
  std::vector<training::EpochLoss> out;
  read_csv(path, "epoch,train_loss,val_loss", 3,
           [&](const std::vector<std::string_view>& f, size_t line) {
             training::EpochLoss e;
             e.epoch = static_cast<int>(parse_int(f[0], "epoch", line));
             e.train_loss = parse_double(f[1], "train_loss", line);
             e.val_loss = parse_double(f[2], "val_loss", line);
             out.push_back(e);
           });
  return out;
}

void save_metrics_csv(const std::string& path,
                      const metrics::MetricsReport& r) {
  auto f = open_out(path);
  f << "metric,value,weighted\n";
  const auto row = [&](const char* name, metrics::Metric m, int weighted) {
    f << name << ',' << (m ? format_double(*m) : std::string("undefined"))
      << ',' << weighted << '\n';
  };
  row("pp", r.pp, 0);
  row("pr", r.pr, 0);
  row("pf", r.pf, 0);
  row("pp", r.pp_w, 1);
  row("pr", r.pr_w, 1);
  row("pf", r.pf_w, 1);
  f << "null_predictions," << r.null_predictions << ",0\n";
  f << "undefined_predictions," << r.undefined_predictions << ",0\n";
}

void save_assignments_csv(
    const std::string& path,
    const std::map<std::string, matching::Assignment>& assignments) {
  auto f = open_out(path);
  f << "track_id,predicted\n";
  for (const auto& [track, a] : assignments) {
    using State = matching::Assignment::State;
    f << track << ',';
    if (a.state == State::assigned) {
      f << a.sensor_id;
    } else if (a.state == State::undefined) {
      f << '?';
    }
    f << '\n';
  }
}

// --- configs -----------------------------------------------------------------

namespace {

std::string read_text_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config '" + path + "'");
  return std::string((std::istreambuf_iterator<char>(f)),
                     std::istreambuf_iterator<char>());
}

// Pulls typed values out of a JSON object while tracking which keys were
// consumed; leftovers raise ConfigError naming the offending key.
class KeyChecker {
 public:
  explicit KeyChecker(const nlohmann::json& j, std::string scope)
      : j_(j), scope_(std::move(scope)) {
    if (!j.is_object()) {
      throw ConfigError(scope_ + ": expected a JSON object");
    }
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError(scope_ + ": bad value for key '" + std::string(key) +
                        "'");
    }
  }

  const nlohmann::json* object(const char* key) {
    seen_.insert(key);
    if (!j_.contains(key)) return nullptr;
    return &j_.at(key);
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.contains(key)) {
        throw ConfigError(scope_ + ": unknown key '" + key + "'");
      }
    }
  }

 private:
  const nlohmann::json& j_;
  std::string scope_;
  std::set<std::string> seen_;
};

}  // namespace

simulator::ScenarioConfig scenario_config_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("scenario config: ") + e.what());
  }
  simulator::ScenarioConfig cfg;
  KeyChecker k(j, "scenario config");
  k.get("duration_s", cfg.duration_s);
  k.get("participants", cfg.participants);
  k.get("non_participants", cfg.non_participants);
  if (const auto* dwell = k.object("dwell_mean_s")) {
    KeyChecker kd(*dwell, "scenario config.dwell_mean_s");
    kd.get("stand", cfg.dwell_mean_s[0]);
    kd.get("walk", cfg.dwell_mean_s[1]);
    kd.get("inspect", cfg.dwell_mean_s[2]);
    kd.get("backward_walk", cfg.dwell_mean_s[3]);
    kd.finish();
  }
  if (const auto* w = k.object("entry_weight")) {
    KeyChecker kw(*w, "scenario config.entry_weight");
    kw.get("stand", cfg.entry_weight[0]);
    kw.get("walk", cfg.entry_weight[1]);
    kw.get("inspect", cfg.entry_weight[2]);
    kw.get("backward_walk", cfg.entry_weight[3]);
    kw.finish();
  }
  k.get("walk_speed_mps", cfg.walk_speed_mps);
  k.get("walk_speed_sd", cfg.walk_speed_sd);
  k.get("backward_speed_mps", cfg.backward_speed_mps);
  k.get("arena_w_m", cfg.arena_w_m);
  k.get("arena_h_m", cfg.arena_h_m);
  k.get("camera_rate_hz", cfg.camera_rate_hz);
  k.get("traj_noise_sigma_m", cfg.traj_noise_sigma_m);
  k.get("fragmentation_per_min", cfg.fragmentation_per_min);
  k.get("sensor_rate_hz", cfg.sensor_rate_hz);
  k.get("clock_offset_range_s", cfg.clock_offset_range_s);
  k.get("accel_noise_sd", cfg.accel_noise_sd);
  k.get("gyro_noise_sd", cfg.gyro_noise_sd);
  k.get("step_freq_hz", cfg.step_freq_hz);
  k.get("step_amp_vertical", cfg.step_amp_vertical);
  k.get("step_amp_forward", cfg.step_amp_forward);
  k.get("burst_rate_hz", cfg.burst_rate_hz);
  k.get("burst_amp", cfg.burst_amp);
  k.get("gravity_mps2", cfg.gravity_mps2);
  k.get("tilt_wander_deg", cfg.tilt_wander_deg);
  k.get("non_participant_presence_s", cfg.non_participant_presence_s);
  k.get("coordinated_pairs", cfg.coordinated_pairs);
  k.get("seed", cfg.seed);
  if (const auto* presence = k.object("presence")) {
    if (!presence->is_array()) {
      throw ConfigError("scenario config: 'presence' must be an array");
    }
    for (const auto& entry : *presence) {
      KeyChecker kp(entry, "scenario config.presence[]");
      simulator::PresenceWindow w;
      kp.get("participant", w.participant);
      kp.get("start_s", w.start_s);
      kp.get("end_s", w.end_s);
      kp.finish();
      cfg.presence.push_back(w);
    }
  }
  k.finish();
  cfg.validate();
  return cfg;
}

simulator::ScenarioConfig load_scenario_config(const std::string& path) {
  return scenario_config_from_json(read_text_file(path));
}

TrainCliConfig train_config_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("train config: ") + e.what());
  }
  TrainCliConfig cfg;
  KeyChecker k(j, "train config");
  k.get("window", cfg.train.window);
  k.get("stride_train", cfg.train.stride_train);
  k.get("stride_val", cfg.train.stride_val);
  k.get("rho_neg", cfg.train.rho_neg);
  k.get("learning_rate", cfg.train.learning_rate);
  k.get("batch_size", cfg.train.batch_size);
  k.get("epochs", cfg.train.epochs);
  k.get("patience", cfg.train.patience);
  k.get("seed", cfg.train.seed);
  k.get("split_ratio", cfg.train.split_ratio);
  k.get("shifted_fraction", cfg.train.shifted_fraction);
  k.get("estimator", cfg.estimator);
  if (const auto* pre = k.object("preprocess")) {
    KeyChecker kp(*pre, "train config.preprocess");
    kp.get("trajectory_sigma_s", cfg.train.pre.trajectory_sigma_s);
    kp.get("sensor_sigma_s", cfg.train.pre.sensor_sigma_s);
    kp.get("rate_hz", cfg.train.pre.rate_hz);
    kp.get("displacement_floor_m", cfg.train.pre.displacement_floor_m);
    kp.finish();
  }
  if (const auto* arch = k.object("arch")) {
    KeyChecker ka(*arch, "train config.arch");
    ka.get("maps", cfg.arch.maps);
    ka.get("attention", cfg.arch.attention);
    ka.get("hidden", cfg.arch.hidden);
    ka.get("kernel_short", cfg.arch.kernel_short);
    ka.get("kernel_long", cfg.arch.kernel_long);
    ka.finish();
  }
  k.finish();
  if (cfg.estimator != "nn" && cfg.estimator != "logistic") {
    throw ConfigError("train config: estimator must be 'nn' or 'logistic'");
  }
  cfg.train.validate();
  cfg.arch.window = cfg.train.window;
  return cfg;
}

TrainCliConfig load_train_config(const std::string& path) {
  return train_config_from_json(read_text_file(path));
}

void save_manifest(const std::string& path, const RunManifest& m) {
  nlohmann::json j;
  j["stage"] = m.stage;
  j["config"] = m.config_path;
  j["inputs"] = m.inputs;
  j["outputs"] = m.outputs;
  j["seed"] = m.seed;
  j["version"] = m.version;
  auto f = open_out(path);
  f << j.dump(2) << '\n';
}

}  // namespace corrmatch::io
