#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "corrmatch/matching.hpp"
#include "corrmatch/metrics.hpp"
#include "corrmatch/signals.hpp"
#include "corrmatch/simulator.hpp"
#include "corrmatch/training.hpp"

namespace corrmatch::io {

// Shortest round-trip decimal representation; keeps file digests stable and
// load(save(x)) bit-exact.
std::string format_double(double v);

// --- dataset files ----------------------------------------------------------
// tracks.csv:  track_id,t,x,y,label        (label empty = no sensor)
// sensors.csv: participant_id,t,ax,ay,az,gx,gy,gz,wx,wy,wz
//              (accelerometer, gravity, gyroscope)
// truth.csv:   track_id,participant_id     (empty = non-participant)

void save_tracks_csv(const std::string& path,
                     std::span<const signals::Track> tracks);
std::vector<signals::Track> load_tracks_csv(const std::string& path);

void save_sensors_csv(const std::string& path,
                      std::span<const signals::SensorRecord> records);
std::vector<signals::SensorRecord> load_sensors_csv(const std::string& path);

void save_truth_csv(
    const std::string& path,
    const std::map<std::string, std::optional<std::string>>& truth);
std::map<std::string, std::optional<std::string>> load_truth_csv(
    const std::string& path);

// --- pipeline files -----------------------------------------------------------
// scores.csv:    step,track_id,sensor_id,p,r
// decisions.csv: step,kind,track_id,sensor_id
// loss.csv:      epoch,train_loss,val_loss
// metrics.csv:   metric,value,weighted plus null/undefined prediction counts
// assignments.csv: track_id,predicted   (empty = null, "?" = undefined)

// Streaming writer; score files can be large.
class ScoresWriter {
 public:
  explicit ScoresWriter(const std::string& path);
  ~ScoresWriter();
  void append(const matching::StepScore& score);
  void close();

 private:
  struct Impl;
  Impl* impl_;
};

std::vector<matching::StepScore> load_scores_csv(const std::string& path);

struct LoggedDecision {
  int64_t step = 0;
  matching::Decision decision;
};
void save_decisions_csv(const std::string& path,
                        std::span<const LoggedDecision> decisions);

void save_loss_csv(const std::string& path,
                   std::span<const training::EpochLoss> history);
std::vector<training::EpochLoss> load_loss_csv(const std::string& path);

void save_metrics_csv(const std::string& path,
                      const metrics::MetricsReport& report);

void save_assignments_csv(
    const std::string& path,
    const std::map<std::string, matching::Assignment>& assignments);

// --- configs -----------------------------------------------------------------

// JSON scenario config; unknown keys raise ConfigError naming the key.
simulator::ScenarioConfig load_scenario_config(const std::string& path);
simulator::ScenarioConfig scenario_config_from_json(const std::string& text);

struct TrainCliConfig {
  training::TrainConfig train;
  std::string estimator = "nn";  // "nn" or "logistic"
  estimator::ArchConfig arch;    // window is overridden by train.window
};

TrainCliConfig load_train_config(const std::string& path);
TrainCliConfig train_config_from_json(const std::string& text);

// --- run manifest ---------------------------------------------------------------

struct RunManifest {
  std::string stage;
  std::string config_path;
  std::map<std::string, std::string> inputs;
  std::map<std::string, std::string> outputs;
  uint64_t seed = 0;
  std::string version = kVersion;
};

void save_manifest(const std::string& path, const RunManifest& manifest);

}  // namespace corrmatch::io
