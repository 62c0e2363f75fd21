#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "corrmatch/estimator.hpp"
#include "corrmatch/signals.hpp"

namespace corrmatch::training {

struct Dataset {
  std::vector<signals::Track> tracks;
  std::vector<signals::SensorRecord> sensors;
};

struct SplitResult {
  Dataset train;
  Dataset val;
  bool validation_empty = false;  // set (with a warning) for ratio 1.0
};

// Assigns every participant exclusively to one subset, so no identity is
// shared between training and validation. Tracks without labels belong to
// neither subset (they never enter training pairs anyway).
// Requires >= 2 labeled participants.
SplitResult split_by_individual(const Dataset& dataset, double ratio,
                                uint64_t seed);

// One (trajectory window, sensor window) coupling with its supervision
// label. `track_start`/`sensor_start` are shared-epoch grid indices; they
// differ only for time-shifted negatives.
struct PairSample {
  signals::FeatureWindow window;
  int label = 0;
  int64_t track_start = 0;
  int64_t sensor_start = 0;
};

struct PairBuildConfig {
  int window = 300;
  int stride = 10;
  double rho_neg = 256.0;      // cap on negatives per positive
  double shifted_fraction = 0.5;  // share of negatives from time shifts
  uint64_t seed = 0;
  signals::PreprocessOptions pre;
};

// Positive and negative couplings over one dataset. Windows are materialized
// on demand (fill/sample) to keep large rho_neg sweeps in bounded memory.
class PairSet {
 public:
  struct Coupling {
    int track = 0;   // index into tracks()
    int sensor = 0;  // index into sensors()
    int64_t track_start = 0;
    int64_t sensor_start = 0;
    int label = 0;
  };

  size_t size() const { return couplings_.size(); }
  size_t positive_count() const { return positives_; }
  size_t negative_count() const { return couplings_.size() - positives_; }
  int window() const { return window_; }

  const std::vector<Coupling>& couplings() const { return couplings_; }
  const std::vector<signals::TrackChannels>& tracks() const { return tracks_; }
  const std::vector<signals::SensorChannels>& sensors() const {
    return sensors_;
  }

  int label(size_t i) const { return couplings_[i].label; }
  void fill(size_t i, signals::FeatureWindow& out) const;
  PairSample sample(size_t i) const;

 private:
  friend PairSet build_pairs(const Dataset&, const PairBuildConfig&);
  std::vector<signals::TrackChannels> tracks_;
  std::vector<signals::SensorChannels> sensors_;
  std::vector<Coupling> couplings_;
  size_t positives_ = 0;
  int window_ = 0;
};

// Builds aligned same-identity positives plus capped random negatives drawn
// from different-identity same-time couplings and same-identity couplings
// shifted by at least `window` samples. Tracks without labels are excluded
// entirely. |negatives| = min(available, rho_neg * |positives|).
// Throws DegenerateInputError when the dataset yields zero positives.
PairSet build_pairs(const Dataset& dataset, const PairBuildConfig& cfg);

// Counts every admissible negative coupling without sampling; used to size
// caps and exposed for verification.
struct NegativeAvailability {
  uint64_t different_identity = 0;
  uint64_t time_shifted = 0;
  uint64_t total() const { return different_identity + time_shifted; }
};
NegativeAvailability count_negative_couplings(const PairSet& positives_only,
                                              int window, int stride);

// Per-sample weighted binary cross entropy. p is clamped to
// [1e-7, 1 - 1e-7]; positives are weighted by w_pos.
double weighted_bce(double p, int y, double w_pos);

inline constexpr double kProbabilityClamp = 1e-7;

struct TrainConfig {
  int window = 300;
  int stride_train = 10;
  int stride_val = 1;
  double rho_neg = 256.0;
  double learning_rate = 1e-4;  // Adam step size
  int batch_size = 512;
  int epochs = 100;
  int patience = 10;  // early stop after this many non-improving epochs
  uint64_t seed = 0;
  double split_ratio = 0.8;
  double shifted_fraction = 0.5;
  int epoch_offset = 0;  // resumed runs continue the epoch numbering
  signals::PreprocessOptions pre;

  void validate() const;
};

struct EpochLoss {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct FitResult {
  std::vector<EpochLoss> history;
  int best_epoch = 0;
  double best_val_loss = 0.0;
  double pos_weight = 1.0;  // N_neg / N_pos over the training pairs
};

// Adam-fitted weighted-BCE training. Positive weight is N_neg/N_pos over the
// training pairs. Running statistics update batch-by-batch and freeze at the
// end; the returned model carries the parameters and statistics of the epoch
// with the smallest validation loss. Deterministic for a fixed seed.
// Throws NumericError if the loss goes non-finite.
template <class Model>
FitResult fit(Model& model, const PairSet& train_pairs,
              const PairSet& val_pairs, const TrainConfig& cfg);

// Mean weighted BCE of a model over a pair set (w_pos from that set's own
// composition).
template <class Model>
double evaluate_loss(const Model& model, const PairSet& pairs);

}  // namespace corrmatch::training
