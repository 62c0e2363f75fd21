// corrmatch: batch pipeline front end.
//   simulate -> train -> score -> match-eval
// Every stage reads and writes the documented CSV/JSON formats, so stages
// can be rerun independently from persisted intermediates.

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "corrmatch/estimator.hpp"
#include "corrmatch/io.hpp"
#include "corrmatch/matching.hpp"
#include "corrmatch/pipeline.hpp"
#include "corrmatch/metrics.hpp"
#include "corrmatch/signals.hpp"
#include "corrmatch/simulator.hpp"
#include "corrmatch/training.hpp"

namespace fs = std::filesystem;
using namespace corrmatch;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

struct Paths {
  static std::string join(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
  }
};

void require_file(const std::string& path) {
  if (!fs::exists(path)) {
    throw DataError("required input '" + path + "' does not exist");
  }
}

training::Dataset load_dataset(const std::string& dir) {
  const std::string tracks = Paths::join(dir, "tracks.csv");
  const std::string sensors = Paths::join(dir, "sensors.csv");
  require_file(tracks);
  require_file(sensors);
  training::Dataset ds;
  ds.tracks = io::load_tracks_csv(tracks);
  ds.sensors = io::load_sensors_csv(sensors);
  return ds;
}

// --- simulate ------------------------------------------------------------

struct SimulateArgs {
  std::string config;
  std::string out;
  std::optional<uint64_t> seed;
};

int run_simulate(const SimulateArgs& args) {
  simulator::ScenarioConfig cfg = io::load_scenario_config(args.config);
  if (args.seed) cfg.seed = *args.seed;
  fs::create_directories(args.out);
  const simulator::Scenario scenario = simulator::generate_scenario(cfg);

  const std::string tracks = Paths::join(args.out, "tracks.csv");
  const std::string sensors = Paths::join(args.out, "sensors.csv");
  const std::string truth = Paths::join(args.out, "truth.csv");
  io::save_tracks_csv(tracks, scenario.tracks);
  io::save_sensors_csv(sensors, scenario.sensors);
  io::save_truth_csv(truth, scenario.truth.track_to_participant);

  io::RunManifest manifest;
  manifest.stage = "simulate";
  manifest.config_path = args.config;
  manifest.outputs = {{"tracks", tracks}, {"sensors", sensors}, {"truth", truth}};
  manifest.seed = cfg.seed;
  io::save_manifest(Paths::join(args.out, "manifest_simulate.json"), manifest);
  std::cout << "simulate: " << scenario.tracks.size() << " tracks, "
            << scenario.sensors.size() << " sensor streams -> " << args.out
            << "\n";
  return 0;
}

// --- train -----------------------------------------------------------------

struct TrainArgs {
  std::string config;
  std::string data;
  std::string out;
  std::optional<uint64_t> seed;
  std::string resume;
  bool grid = false;
  std::vector<int> grid_windows = {100, 300, 600};
  std::vector<double> grid_rhos = {1, 4, 16, 64, 256};
};

struct BuiltPairs {
  training::PairSet train;
  training::PairSet val;
};

BuiltPairs build_split_pairs(const training::Dataset& ds,
                             const training::TrainConfig& cfg) {
  const training::SplitResult split =
      training::split_by_individual(ds, cfg.split_ratio, cfg.seed);
  if (split.validation_empty) {
    std::cerr << "warning: split ratio leaves the validation set empty\n";
  }
  training::PairBuildConfig pb;
  pb.window = cfg.window;
  pb.stride = cfg.stride_train;
  pb.rho_neg = cfg.rho_neg;
  pb.shifted_fraction = cfg.shifted_fraction;
  pb.seed = cfg.seed;
  pb.pre = cfg.pre;
  BuiltPairs out;
  out.train = training::build_pairs(split.train, pb);
  if (!split.val.sensors.empty()) {
    pb.stride = cfg.stride_val;
    pb.rho_neg = 1.0;  // validation ratio is fixed to one
    out.val = training::build_pairs(split.val, pb);
  }
  return out;
}

int run_train(const TrainArgs& args) {
  io::TrainCliConfig cli_cfg = io::load_train_config(args.config);
  if (args.seed) cli_cfg.train.seed = *args.seed;
  fs::create_directories(args.out);
  const training::Dataset ds = load_dataset(args.data);

  io::RunManifest manifest;
  manifest.stage = "train";
  manifest.config_path = args.config;
  manifest.inputs = {{"tracks", Paths::join(args.data, "tracks.csv")},
                     {"sensors", Paths::join(args.data, "sensors.csv")}};
  manifest.seed = cli_cfg.train.seed;

  if (args.grid) {
    // One row per window size, one validation-loss column per rho_neg.
    const std::string grid_path = Paths::join(args.out, "grid_losses.csv");
    std::ofstream grid_csv(grid_path);
    grid_csv << "W";
    for (double rho : args.grid_rhos) grid_csv << ',' << rho;
    grid_csv << '\n';
    for (int window : args.grid_windows) {
      grid_csv << window;
      for (double rho : args.grid_rhos) {
        training::TrainConfig cfg = cli_cfg.train;
        cfg.window = window;
        cfg.rho_neg = rho;
        cfg.seed = derive_seed(cli_cfg.train.seed,
                               static_cast<uint64_t>(window) * 1000 +
                                   static_cast<uint64_t>(rho));
        const BuiltPairs pairs = build_split_pairs(ds, cfg);
        double best = 0.0;
        if (cli_cfg.estimator == "nn") {
          estimator::ArchConfig arch = cli_cfg.arch;
          arch.window = window;
          auto model = estimator::ConvAttentionModel::seeded(
              arch, derive_seed(cfg.seed, 0xa12c));
          best = training::fit(model, pairs.train, pairs.val, cfg)
                     .best_val_loss;
        } else {
          estimator::LogisticModel model;
          best = training::fit(model, pairs.train, pairs.val, cfg)
                     .best_val_loss;
        }
        grid_csv << ',' << io::format_double(best);
      }
      grid_csv << '\n';
    }
    manifest.outputs = {{"grid_losses", grid_path}};
    io::save_manifest(Paths::join(args.out, "manifest_train.json"), manifest);
    std::cout << "train: grid losses -> " << grid_path << "\n";
    return 0;
  }

  training::TrainConfig cfg = cli_cfg.train;
  std::vector<training::EpochLoss> history;
  estimator::Checkpoint ckpt;

  std::optional<estimator::Checkpoint> resume;
  if (!args.resume.empty()) {
    require_file(args.resume);
    resume = estimator::Checkpoint::load(args.resume);
    cfg.epoch_offset = resume->epochs_trained;
    const std::string old_loss = Paths::join(args.out, "loss.csv");
    if (fs::exists(old_loss)) history = io::load_loss_csv(old_loss);
    manifest.inputs["resume"] = args.resume;
  }

  const BuiltPairs pairs = build_split_pairs(ds, cfg);
  training::FitResult result;
  if ((resume && resume->kind == "nn") ||
      (!resume && cli_cfg.estimator == "nn")) {
    estimator::ArchConfig arch = cli_cfg.arch;
    arch.window = cfg.window;
    auto model = resume ? resume->to_nn()
                        : estimator::ConvAttentionModel::seeded(
                              arch, derive_seed(cfg.seed, 0xa12c));
    if (model.arch().window != cfg.window) {
      throw DataError("resume checkpoint window " +
                      std::to_string(model.arch().window) +
                      " does not match configured window " +
                      std::to_string(cfg.window));
    }
    result = training::fit(model, pairs.train, pairs.val, cfg);
    ckpt = estimator::Checkpoint::from_model(
        model, cfg.epoch_offset + static_cast<int>(result.history.size()));
  } else {
    auto model = resume ? resume->to_logistic() : estimator::LogisticModel();
    result = training::fit(model, pairs.train, pairs.val, cfg);
    ckpt = estimator::Checkpoint::from_model(
        model, cfg.window,
        cfg.epoch_offset + static_cast<int>(result.history.size()));
  }

  history.insert(history.end(), result.history.begin(), result.history.end());
  const std::string ckpt_path = Paths::join(args.out, "checkpoint.json");
  const std::string loss_path = Paths::join(args.out, "loss.csv");
  ckpt.save(ckpt_path);
  io::save_loss_csv(loss_path, history);
  manifest.outputs = {{"checkpoint", ckpt_path}, {"loss", loss_path}};
  io::save_manifest(Paths::join(args.out, "manifest_train.json"), manifest);
  std::cout << "train: best val loss " << io::format_double(result.best_val_loss)
            << " at epoch " << result.best_epoch << " -> " << ckpt_path
            << "\n";
  return 0;
}

// --- score -----------------------------------------------------------------

struct ScoreArgs {
  uint64_t seed = 0;  // provenance only; scoring is deterministic
  std::string data;
  std::string out;
  std::string estimator = "oracle";
  std::string checkpoint;
  std::string truth;
  int window = 0;
  int stride = 1;
  signals::PreprocessOptions pre;
};

int run_score(const ScoreArgs& args) {
  fs::create_directories(args.out);
  const training::Dataset ds = load_dataset(args.data);

  std::unique_ptr<estimator::ProbabilityEstimator> est;
  estimator::RunningStats stats;
  int window = args.window;

  if (args.estimator == "oracle") {
    if (window <= 0) {
      throw ConfigError("score: --window is required for the oracle estimator");
    }
    const std::string truth_path =
        args.truth.empty() ? Paths::join(args.data, "truth.csv") : args.truth;
    require_file(truth_path);
    est = std::make_unique<estimator::OracleEstimator>(
        io::load_truth_csv(truth_path));
  } else {
    if (args.checkpoint.empty()) {
      throw ConfigError("score: --checkpoint is required for estimator '" +
                        args.estimator + "'");
    }
    require_file(args.checkpoint);
    const auto ckpt = estimator::Checkpoint::load(args.checkpoint);
    if (window > 0 && window != ckpt.trained_window) {
      throw DataError("score: window " + std::to_string(window) +
                      " does not match checkpoint window " +
                      std::to_string(ckpt.trained_window));
    }
    window = ckpt.trained_window;
    if (args.estimator == "nn") {
      est = std::make_unique<estimator::ConvAttentionModel>(ckpt.to_nn());
      stats = ckpt.stats;
    } else if (args.estimator == "logistic") {
      est = std::make_unique<estimator::LogisticModel>(ckpt.to_logistic());
      stats = ckpt.stats;
    } else {
      throw ConfigError("score: unknown estimator '" + args.estimator + "'");
    }
  }

  const pipeline::PreprocessedDataset pre =
      pipeline::preprocess_dataset(ds, args.pre);
  if (args.estimator == "oracle") {
    stats = pipeline::calibrate_stats(pre, window, args.stride);
  }

  const std::string scores_path = Paths::join(args.out, "scores.csv");
  io::ScoresWriter writer(scores_path);
  const int64_t rows = pipeline::score_pairs(
      pre, *est, stats, window, args.stride, args.pre.rate_hz,
      [&](const matching::StepScore& s) { writer.append(s); });
  writer.close();

  io::RunManifest manifest;
  manifest.stage = "score";
  manifest.seed = args.seed;
  manifest.inputs = {{"tracks", Paths::join(args.data, "tracks.csv")},
                     {"sensors", Paths::join(args.data, "sensors.csv")}};
  if (!args.checkpoint.empty()) manifest.inputs["checkpoint"] = args.checkpoint;
  manifest.outputs = {{"scores", scores_path}};
  io::save_manifest(Paths::join(args.out, "manifest_score.json"), manifest);
  std::cout << "score: " << rows << " scores (" << args.estimator << ", W="
            << window << ") -> " << scores_path << "\n";
  return 0;
}

// --- match-eval ----------------------------------------------------------------

struct MatchEvalArgs {
  uint64_t seed = 0;  // provenance only
  std::string scores;
  std::string truth;
  std::string tracks;
  std::string out;
  int window = 0;
  std::optional<double> r_csdr;
  std::optional<double> p_acpt;
  int n_min = 1;
};

int run_match_eval(const MatchEvalArgs& args) {
  fs::create_directories(args.out);
  require_file(args.scores);
  require_file(args.truth);
  require_file(args.tracks);

  matching::MatchConfig cfg = matching::default_thresholds(args.window);
  if (args.r_csdr) cfg.r_csdr = *args.r_csdr;
  if (args.p_acpt) cfg.p_acpt = *args.p_acpt;
  cfg.n_min = args.n_min;

  const auto truth = io::load_truth_csv(args.truth);
  const auto tracks = io::load_tracks_csv(args.tracks);
  std::map<std::string, double> durations;
  for (const auto& t : tracks) durations[t.track_id] = t.duration();

  const pipeline::EvalResult eval = pipeline::match_and_evaluate(
      io::load_scores_csv(args.scores), truth, durations, cfg);
  const auto& assignments = eval.assignments;
  const auto& log = eval.decisions;
  const auto& report = eval.report;

  const std::string decisions_path = Paths::join(args.out, "decisions.csv");
  const std::string assignments_path = Paths::join(args.out, "assignments.csv");
  const std::string metrics_path = Paths::join(args.out, "metrics.csv");
  io::save_decisions_csv(decisions_path, log);
  io::save_assignments_csv(assignments_path, assignments);
  io::save_metrics_csv(metrics_path, report);

  io::RunManifest manifest;
  manifest.stage = "match-eval";
  manifest.seed = args.seed;
  manifest.inputs = {{"scores", args.scores},
                     {"truth", args.truth},
                     {"tracks", args.tracks}};
  manifest.outputs = {{"decisions", decisions_path},
                      {"assignments", assignments_path},
                      {"metrics", metrics_path}};
  io::save_manifest(Paths::join(args.out, "manifest_match_eval.json"),
                    manifest);

  const auto show = [](const metrics::Metric& m) {
    return m ? io::format_double(*m) : std::string("undefined");
  };
  std::cout << "match-eval: (r_csdr=" << cfg.r_csdr << ", p_acpt=" << cfg.p_acpt
            << ") pp=" << show(report.pp) << " pr=" << show(report.pr)
            << " pf=" << show(report.pf) << " | weighted pf="
            << show(report.pf_w) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"trajectory/inertial correspondence identification toolkit"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* cmd_sim = app.add_subcommand("simulate", "generate a synthetic scene");
  cmd_sim->add_option("--config", sim.config, "scenario config (JSON)")
      ->required();
  cmd_sim->add_option("--out", sim.out, "output directory")->required();
  uint64_t sim_seed = 0;
  auto* sim_seed_opt = cmd_sim->add_option("--seed", sim_seed, "seed override");

  TrainArgs train;
  auto* cmd_train = app.add_subcommand("train", "fit a correspondence model");
  cmd_train->add_option("--config", train.config, "train config (JSON)")
      ->required();
  cmd_train->add_option("--data", train.data, "dataset directory")->required();
  cmd_train->add_option("--out", train.out, "output directory")->required();
  uint64_t train_seed = 0;
  auto* train_seed_opt =
      cmd_train->add_option("--seed", train_seed, "seed override");
  cmd_train->add_option("--resume", train.resume, "checkpoint to resume from");
  cmd_train->add_flag("--grid", train.grid,
                      "sweep W x rho_neg and emit grid_losses.csv");
  cmd_train->add_option("--grid-windows", train.grid_windows,
                        "window sizes for --grid")
      ->delimiter(',');
  cmd_train->add_option("--grid-rhos", train.grid_rhos,
                        "rho_neg values for --grid")
      ->delimiter(',');

  ScoreArgs score;
  auto* cmd_score =
      app.add_subcommand("score", "score every (track, sensor) pair");
  cmd_score->add_option("--data", score.data, "dataset directory")->required();
  cmd_score->add_option("--out", score.out, "output directory")->required();
  cmd_score->add_option("--estimator", score.estimator,
                        "oracle | logistic | nn")
      ->check(CLI::IsMember({"oracle", "logistic", "nn"}));
  cmd_score->add_option("--checkpoint", score.checkpoint, "model checkpoint");
  cmd_score->add_option("--truth", score.truth,
                        "truth csv (oracle; default <data>/truth.csv)");
  cmd_score->add_option("--window", score.window, "window length in samples");
  cmd_score->add_option("--stride", score.stride, "window stride (default 1)")
      ->check(CLI::PositiveNumber);
  cmd_score->add_option("--seed", score.seed,
                        "recorded in the manifest (stage is deterministic)");

  MatchEvalArgs match;
  auto* cmd_match =
      app.add_subcommand("match-eval", "run matching and compute metrics");
  cmd_match->add_option("--scores", match.scores, "scores csv")->required();
  cmd_match->add_option("--truth", match.truth, "truth csv")->required();
  cmd_match->add_option("--tracks", match.tracks, "tracks csv (durations)")
      ->required();
  cmd_match->add_option("--out", match.out, "output directory")->required();
  cmd_match->add_option("--window", match.window,
                        "window size selecting default thresholds");
  double r_csdr = 0.0, p_acpt = 0.0;
  auto* r_opt = cmd_match->add_option("--r-csdr", r_csdr, "reliability threshold");
  auto* p_opt = cmd_match->add_option("--p-acpt", p_acpt, "acceptance threshold");
  cmd_match->add_option("--n-min", match.n_min, "minimum reliable points");
  cmd_match->add_option("--seed", match.seed,
                        "recorded in the manifest (stage is deterministic)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*cmd_sim) {
      if (*sim_seed_opt) sim.seed = sim_seed;
      return run_simulate(sim);
    }
    if (*cmd_train) {
      if (*train_seed_opt) train.seed = train_seed;
      return run_train(train);
    }
    if (*cmd_score) return run_score(score);
    if (*cmd_match) {
      if (*r_opt) match.r_csdr = r_csdr;
      if (*p_opt) match.p_acpt = p_acpt;
      return run_match_eval(match);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return 0;
}
