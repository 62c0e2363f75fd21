#include <doctest.h>

#include <cstdio>
#include <unistd.h>
#include <filesystem>
#include <fstream>
#include <random>

#include "corrmatch/io.hpp"

using namespace corrmatch;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("corrmatch_io_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  f << text;
}

}  // namespace

TEST_CASE("format_double round-trips exactly") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng) * std::pow(10.0, i % 7 - 3);
    CHECK(std::stod(io::format_double(v)) == v);
  }
}

TEST_CASE("tracks csv round trip is exact") {
  TempDir tmp;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  std::vector<signals::Track> tracks(3);
  for (int i = 0; i < 3; ++i) {
    tracks[i].track_id = "trk" + std::to_string(i);
    if (i != 1) tracks[i].label = "P" + std::to_string(i);
    for (int j = 0; j < 20; ++j) {
      tracks[i].samples.push_back({j * 0.2 + 0.001 * i, u(rng), u(rng)});
    }
  }
  const std::string path = tmp.file("tracks.csv");
  io::save_tracks_csv(path, tracks);
  const auto loaded = io::load_tracks_csv(path);
  REQUIRE(loaded.size() == 3);
  for (size_t i = 0; i < 3; ++i) {
    CHECK(loaded[i].track_id == tracks[i].track_id);
    CHECK(loaded[i].label == tracks[i].label);
    REQUIRE(loaded[i].samples.size() == tracks[i].samples.size());
    for (size_t j = 0; j < loaded[i].samples.size(); ++j) {
      CHECK(loaded[i].samples[j].t == tracks[i].samples[j].t);
      CHECK(loaded[i].samples[j].x == tracks[i].samples[j].x);
      CHECK(loaded[i].samples[j].y == tracks[i].samples[j].y);
    }
  }
}

TEST_CASE("sensors csv round trip is exact") {
  TempDir tmp;
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 1.0);
  signals::SensorRecord rec;
  rec.participant_id = "P00";
  for (int j = 0; j < 50; ++j) {
    signals::ImuSample s;
    s.t = 0.02 * j - 0.1;
    s.gravity = {0.1 * g(rng), 0.1 * g(rng), 9.81};
    s.accel = s.gravity + Vec3{g(rng), g(rng), g(rng)};
    s.gyro = {g(rng), g(rng), g(rng)};
    rec.samples.push_back(s);
  }
  const std::string path = tmp.file("sensors.csv");
  io::save_sensors_csv(path, {&rec, 1});
  const auto loaded = io::load_sensors_csv(path);
  REQUIRE(loaded.size() == 1);
  REQUIRE(loaded[0].samples.size() == rec.samples.size());
  for (size_t j = 0; j < rec.samples.size(); ++j) {
    CHECK(loaded[0].samples[j].t == rec.samples[j].t);
    CHECK(loaded[0].samples[j].accel.x == rec.samples[j].accel.x);
    CHECK(loaded[0].samples[j].gravity.z == rec.samples[j].gravity.z);
    CHECK(loaded[0].samples[j].gyro.y == rec.samples[j].gyro.y);
  }
}

TEST_CASE("truth and scores round trips") {
  TempDir tmp;
  const std::map<std::string, std::optional<std::string>> truth = {
      {"t1", std::optional<std::string>("P0")},
      {"t2", std::nullopt},
  };
  io::save_truth_csv(tmp.file("truth.csv"), truth);
  CHECK(io::load_truth_csv(tmp.file("truth.csv")) == truth);

  {
    io::ScoresWriter w(tmp.file("scores.csv"));
    w.append({0, "t1", "P0", 0.75, 0.5});
    w.append({10, "t1", "P0", 0.25, 1.0});
    w.close();
  }
  const auto scores = io::load_scores_csv(tmp.file("scores.csv"));
  REQUIRE(scores.size() == 2);
  CHECK(scores[0].step == 0);
  CHECK(scores[1].p == 0.25);
  CHECK(scores[1].r == 1.0);
}

TEST_CASE("loss csv round trip") {
  TempDir tmp;
  const std::vector<training::EpochLoss> history = {
      {1, 0.9, 0.8}, {2, 0.5, 0.45}, {3, 0.3, 0.35}};
  io::save_loss_csv(tmp.file("loss.csv"), history);
  const auto loaded = io::load_loss_csv(tmp.file("loss.csv"));
  REQUIRE(loaded.size() == 3);
  CHECK(loaded[2].epoch == 3);
  CHECK(loaded[2].val_loss == 0.35);
}

TEST_CASE("metrics csv marks undefined values") {
  TempDir tmp;
  metrics::MetricsReport r;
  r.pr = 0.0;
  r.null_predictions = 4;
  r.undefined_predictions = 2;
  io::save_metrics_csv(tmp.file("metrics.csv"), r);
  std::ifstream f(tmp.file("metrics.csv"));
  std::string text((std::istreambuf_iterator<char>(f)),
                   std::istreambuf_iterator<char>());
  CHECK(text.find("pp,undefined,0") != std::string::npos);
  CHECK(text.find("pr,0,0") != std::string::npos);
  CHECK(text.find("null_predictions,4,0") != std::string::npos);
  CHECK(text.find("undefined_predictions,2,0") != std::string::npos);
}

TEST_CASE("csv loaders reject malformed input with line numbers") {
  TempDir tmp;
  write_file(tmp.file("bad_header.csv"), "track,t,x,y,label\n");
  CHECK_THROWS_AS(io::load_tracks_csv(tmp.file("bad_header.csv")), DataError);

  write_file(tmp.file("bad_fields.csv"), "track_id,t,x,y,label\na,1,2\n");
  CHECK_THROWS_AS(io::load_tracks_csv(tmp.file("bad_fields.csv")), DataError);

  write_file(tmp.file("bad_value.csv"),
             "track_id,t,x,y,label\na,0,zzz,0,\na,1,0,0,\n");
  CHECK_THROWS_WITH_AS(io::load_tracks_csv(tmp.file("bad_value.csv")),
                       "line 2: bad x 'zzz'", DataError);

  write_file(tmp.file("label_flip.csv"),
             "track_id,t,x,y,label\na,0,0,0,P1\na,1,0,0,P2\n");
  CHECK_THROWS_AS(io::load_tracks_csv(tmp.file("label_flip.csv")), DataError);

  CHECK_THROWS_AS(io::load_tracks_csv(tmp.file("missing.csv")), DataError);
}

TEST_CASE("scenario config: defaults, overrides, unknown keys") {
  const auto cfg = io::scenario_config_from_json(
      R"({"duration_s": 60, "participants": 2, "non_participants": 0,
          "dwell_mean_s": {"walk": 30}, "seed": 5,
          "presence": [{"participant": 1, "start_s": 5, "end_s": 20}]})");
  CHECK(cfg.duration_s == 60.0);
  CHECK(cfg.participants == 2);
  CHECK(cfg.dwell_mean_s[1] == 30.0);
  CHECK(cfg.dwell_mean_s[0] == 12.0);  // untouched default
  REQUIRE(cfg.presence.size() == 1);
  CHECK(cfg.presence[0].end_s == 20.0);

  CHECK_THROWS_WITH_AS(
      io::scenario_config_from_json(R"({"duration_sec": 60})"),
      "scenario config: unknown key 'duration_sec'", ConfigError);
  CHECK_THROWS_AS(io::scenario_config_from_json(R"({"participants": -3})"),
                  ConfigError);
  CHECK_THROWS_AS(io::scenario_config_from_json("not json"), ConfigError);
}

TEST_CASE("train config: estimator gate and nested keys") {
  const auto cfg = io::train_config_from_json(
      R"({"window": 100, "rho_neg": 16, "estimator": "nn",
          "arch": {"maps": 8}, "preprocess": {"sensor_sigma_s": 0.3}})");
  CHECK(cfg.train.window == 100);
  CHECK(cfg.train.rho_neg == 16.0);
  CHECK(cfg.arch.maps == 8);
  CHECK(cfg.arch.window == 100);
  CHECK(cfg.train.pre.sensor_sigma_s == 0.3);

  CHECK_THROWS_AS(io::train_config_from_json(R"({"estimator": "svm"})"),
                  ConfigError);
  CHECK_THROWS_AS(io::train_config_from_json(R"({"rho_neg": 0.5})"),
                  ConfigError);
  CHECK_THROWS_WITH_AS(io::train_config_from_json(R"({"windows": 100})"),
                       "train config: unknown key 'windows'", ConfigError);
}
