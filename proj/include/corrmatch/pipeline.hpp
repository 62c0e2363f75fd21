#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "corrmatch/estimator.hpp"
#include "corrmatch/io.hpp"
#include "corrmatch/matching.hpp"
#include "corrmatch/metrics.hpp"
#include "corrmatch/signals.hpp"
#include "corrmatch/training.hpp"

namespace corrmatch::pipeline {

struct PreprocessedDataset {
  std::vector<signals::TrackChannels> tracks;
  std::vector<signals::SensorChannels> sensors;
};

// Tracks/records too short to preprocess are dropped (they stay undefined
// downstream).
PreprocessedDataset preprocess_dataset(const training::Dataset& ds,
                                       const signals::PreprocessOptions& pre);

// Dataset-level channel statistics for reliability when the estimator has no
// trained statistics of its own (oracle scoring).
estimator::RunningStats calibrate_stats(const PreprocessedDataset& pre,
                                        int window, int stride);

// Scores every (track, sensor) window at the given stride and hands each
// step score to `sink` (pair-major, steps increasing within a pair).
// Returns the number of scores produced.
int64_t score_pairs(const PreprocessedDataset& pre,
                    const estimator::ProbabilityEstimator& est,
                    const estimator::RunningStats& stats, int window,
                    int stride, double rate_hz,
                    const std::function<void(const matching::StepScore&)>& sink);

struct EvalResult {
  std::map<std::string, matching::Assignment> assignments;
  std::vector<metrics::LabeledOutcome> outcomes;
  metrics::MetricsReport report;
  std::vector<io::LoggedDecision> decisions;  // confirmed only
  int64_t false_positives = 0;  // assigned to a wrong participant
};

// Replays scores in step order (decide() after every step), finalizes, and
// evaluates against the truth table. Tracks present in `truth` but absent
// from the scores stay undefined. Throws DataError when a score references a
// track missing from `truth`.
EvalResult match_and_evaluate(
    std::vector<matching::StepScore> scores,
    const std::map<std::string, std::optional<std::string>>& truth,
    const std::map<std::string, double>& durations,
    const matching::MatchConfig& config);

}  // namespace corrmatch::pipeline
