#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "corrmatch/common.hpp"
#include "corrmatch/signals.hpp"

namespace corrmatch::estimator {

using signals::Channel;
using signals::FeatureWindow;

// Per-channel running mean/variance, accumulated as an exponential moving
// average during training (momentum 0.1) and frozen afterward. The frozen
// statistics standardize model inputs and feed the reliability score.
struct RunningStats {
  std::array<double, signals::kChannelCount> mean{};
  std::array<double, signals::kChannelCount> var;
  double momentum = 0.1;
  bool frozen = false;

  RunningStats() { var.fill(1.0); }

  // EMA update from one batch (population statistics over batch x time).
  // Throws StateError when already frozen.
  void update(const std::vector<const FeatureWindow*>& batch);

  // Freezes and epsilon-floors the variances.
  void freeze();

  // Plain population statistics over a whole window set, already frozen.
  static RunningStats from_windows(const std::vector<const FeatureWindow*>& windows);
};

inline constexpr double kVarianceFloor = 1e-12;

// Activity-based reliability: sigmoid of the larger log variance ratio
// between the window and the running statistics, taken over the speed and
// lin-accel-norm channels. Window variances are population variances; both
// ratio operands are floored at 1e-12. Requires frozen stats.
double reliability(const FeatureWindow& window, const RunningStats& stats);

struct CorrespondenceScore {
  std::string track_id;
  std::string sensor_id;
  double start_t = 0.0;
  double p = 0.0;  // correspondence probability, [0, 1]
  double r = 0.0;  // activity-based reliability, [0, 1]
};

// Pluggable probability source; implementations must be pure functions of
// (window, internal frozen state) so concurrent evaluation is safe.
class ProbabilityEstimator {
 public:
  virtual ~ProbabilityEstimator() = default;

  virtual double probability(const FeatureWindow& window) const = 0;

  // Expected window length; 0 accepts any length.
  virtual int window_length() const { return 0; }
};

// Combines a probability estimate with the reliability module.
// Throws ShapeError when the window length does not match the estimator.
CorrespondenceScore estimate(const FeatureWindow& window,
                             const ProbabilityEstimator& est,
                             const RunningStats& stats);

// Ground-truth lookup estimator: 1 when the window's track is labeled with
// the window's sensor id, 0 otherwise (including non-participant tracks).
class OracleEstimator : public ProbabilityEstimator {
 public:
  // truth maps track_id -> participant id (empty optional = no sensor).
  explicit OracleEstimator(
      std::map<std::string, std::optional<std::string>> truth)
      : truth_(std::move(truth)) {}

  double probability(const FeatureWindow& window) const override;

 private:
  std::map<std::string, std::optional<std::string>> truth_;
};

// --- trainable estimators -------------------------------------------------

// Common plumbing for models trained by corrmatch::training::fit: a flat,
// deterministically laid out parameter vector plus owned running stats.
// `version()` changes whenever parameters change, which lets cached forward
// activations detect staleness.
class TrainableEstimator : public ProbabilityEstimator {
 public:
  const std::vector<double>& params() const { return params_; }
  size_t param_count() const { return params_.size(); }
  void set_params(std::vector<double> p);
  void set_param(size_t i, double v);
  uint64_t version() const { return version_; }

  RunningStats& stats() { return stats_; }
  const RunningStats& stats() const { return stats_; }
  void set_stats(const RunningStats& s) { stats_ = s; }

  // d p / d theta scaled by `upstream`, as one flat vector.
  virtual std::vector<double> gradient(const FeatureWindow& window,
                                       double upstream) const = 0;

 protected:
  std::vector<double> params_;
  RunningStats stats_;
  uint64_t version_ = 0;
};

// Logistic regression over a fixed set of cross-modal window features
// (correlations between trajectory- and sensor-derived channels plus
// marginal activity levels). Cheap enough for large grid sweeps.
class LogisticModel : public TrainableEstimator {
 public:
  static constexpr int kFeatureCount = 8;

  LogisticModel();  // zero weights: p = 0.5 everywhere

  static std::array<double, kFeatureCount> features(const FeatureWindow& w);

  struct Cache {
    uint64_t model_version = 0;
    std::array<double, kFeatureCount> f{};
    double p = 0.5;
  };

  double forward(const FeatureWindow& window, Cache& cache) const;
  void backward(const Cache& cache, double upstream,
                std::vector<double>& grad) const;

  double probability(const FeatureWindow& window) const override;
  std::vector<double> gradient(const FeatureWindow& window,
                               double upstream) const override;
};

// --- dual-kernel convolution + attention model ------------------------------

// Architecture descriptor. Parameter count and layout are a deterministic
// function of these fields.
struct ArchConfig {
  int window = 300;    // W, samples at 10 Hz
  int channels = signals::kChannelCount;
  int kernel_short = 5;
  int kernel_long = 25;
  int maps = 16;       // feature maps per convolutional path
  int attention = 32;  // attention hidden width
  int hidden = 32;     // dense hidden width

  int concat_width() const { return 2 * maps; }
};

// Correspondence probability network:
//   standardize -> two parallel 1-D temporal convolutions (short and long
//   kernels, same padding, tanh) -> concatenate -> additive-attention
//   softmax pooling over time -> dense tanh layer -> logistic output.
// The two kernel sizes give the model short- and long-timescale views of
// the same nine channels.
class ConvAttentionModel : public TrainableEstimator {
 public:
  explicit ConvAttentionModel(const ArchConfig& arch);

  // Random initialization, uniform in +-1/sqrt(fan_in) per layer.
  static ConvAttentionModel seeded(const ArchConfig& arch, uint64_t seed);

  const ArchConfig& arch() const { return arch_; }
  int window_length() const override { return arch_.window; }

  // Cached activations from one forward pass, consumed by backward().
  struct Cache {
    uint64_t model_version = 0;
    int length = 0;
    std::vector<double> input;   // standardized, channels x W
    std::vector<double> conv_a;  // tanh output, maps x W
    std::vector<double> conv_b;
    std::vector<double> att_u;      // tanh(Wa h + ba), attention x W
    std::vector<double> att_score;  // W
    std::vector<double> att_alpha;  // softmax, W
    std::vector<double> pooled;     // concat_width
    std::vector<double> dense;      // tanh hidden, hidden
    double logit = 0.0;
    double p = 0.5;
  };

  // Throws ShapeError on a window length mismatch and NumericError (naming
  // the layer) when activations go non-finite.
  double forward(const FeatureWindow& window, Cache& cache) const;

  // Exact gradient of (upstream * p) with respect to the parameter vector.
  // Throws StateError when the cache does not match the current parameters.
  void backward(const Cache& cache, double upstream,
                std::vector<double>& grad) const;

  double probability(const FeatureWindow& window) const override;
  std::vector<double> gradient(const FeatureWindow& window,
                               double upstream) const override;

  // Parameter segment offsets within the flat vector, in layout order:
  // conv1 w, conv1 b, conv2 w, conv2 b, attention W, attention b,
  // attention v, dense W, dense b, output w, output b.
  struct Layout {
    size_t conv1_w, conv1_b, conv2_w, conv2_b;
    size_t att_w, att_b, att_v;
    size_t dense_w, dense_b;
    size_t out_w, out_b;
    size_t total;
  };
  const Layout& layout() const { return layout_; }

 private:
  ArchConfig arch_;
  Layout layout_;
};

// --- checkpoints ------------------------------------------------------------

// Self-describing JSON checkpoint for either trainable model. Doubles are
// serialized with shortest round-trip representation, so save/load is
// bit-exact.
struct Checkpoint {
  std::string kind;  // "nn" or "logistic"
  std::optional<ArchConfig> arch;  // present for kind == "nn"
  std::vector<double> params;
  RunningStats stats;
  int trained_window = 0;
  int epochs_trained = 0;

  static Checkpoint from_model(const ConvAttentionModel& m, int epochs);
  static Checkpoint from_model(const LogisticModel& m, int window, int epochs);

  ConvAttentionModel to_nn() const;       // throws DataError on kind mismatch
  LogisticModel to_logistic() const;

  std::string to_json() const;
  static Checkpoint from_json(const std::string& text);

  void save(const std::string& path) const;
  static Checkpoint load(const std::string& path);
};

}  // namespace corrmatch::estimator
