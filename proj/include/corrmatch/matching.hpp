#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "corrmatch/common.hpp"
#include "corrmatch/estimator.hpp"

namespace corrmatch::matching {

// One probability/reliability observation for a (track, sensor) pair at a
// window step.
struct StepScore {
  int64_t step = 0;
  std::string track_id;
  std::string sensor_id;
  double p = 0.0;
  double r = 0.0;
};

StepScore to_step_score(const estimator::CorrespondenceScore& s,
                        double rate_hz);

struct MatchConfig {
  double r_csdr = 0.1;  // reliability filter (strict >)
  double p_acpt = 0.7;  // acceptance threshold, >= 0.5
  int n_min = 1;        // minimum reliable points before any decision

  void validate() const;
};

// Per-window-size threshold pairs used as defaults by the pipeline.
MatchConfig default_thresholds(int window);

enum class DecisionKind { positive, negative, deferred };

struct Decision {
  DecisionKind kind = DecisionKind::deferred;
  std::string track_id;
  std::string sensor_id;  // empty for deferred
};

// Final per-track verdict: a sensor id, null (confirmed to carry no
// sensor among the candidates), or undefined (not enough evidence).
struct Assignment {
  enum class State { assigned, null_id, undefined };
  State state = State::undefined;
  std::string sensor_id;  // set when state == assigned
};

// Incremental matcher. Scores stream in via ingest(); decide() confirms
// positive and negative pairs permanently; finalize() reports the verdicts.
// Single-writer: ingest/decide must not interleave across threads for one
// state.
class MatchState {
 public:
  explicit MatchState(MatchConfig config);

  const MatchConfig& config() const { return config_; }

  // Declares a (track, sensor) combination without scores. Combinations are
  // also registered implicitly by ingest().
  void register_pair(const std::string& track_id,
                     const std::string& sensor_id);

  // Accumulates the score if its reliability exceeds r_csdr (strict).
  // Scores for negatively confirmed pairs are counted as contradictions and
  // otherwise ignored. Throws OrderingError when a pair's step indices do
  // not increase strictly.
  void ingest(const StepScore& score);

  // Emits permanent Negative decisions (reliable mean < 1 - p_acpt), then
  // permanent Positive decisions (the unique candidate whose reliable mean
  // exceeds p_acpt), then Deferred markers for undecided tracks that have
  // at least one decidable candidate. Candidates with fewer than n_min
  // reliable points block nothing and count as non-exceeding.
  std::vector<Decision> decide();

  // Mean probability over reliable points, empty before n_min points.
  std::optional<double> reliable_mean(const std::string& track_id,
                                      const std::string& sensor_id) const;

  std::map<std::string, Assignment> finalize() const;

  const std::map<std::string, std::string>& confirmed_positive() const {
    return positive_;
  }
  const std::set<std::pair<std::string, std::string>>& confirmed_negative()
      const {
    return negative_;
  }
  // Scores that arrived for already-eliminated pairs (logged, never applied).
  int64_t contradiction_count() const { return contradictions_; }

 private:
  struct PairAccumulator {
    double p_sum = 0.0;
    int64_t reliable_count = 0;
    int64_t last_step = INT64_MIN;
  };

  MatchConfig config_;
  // track -> sensor -> accumulator; doubles as the candidate set M^t
  // (eliminated sensors are erased).
  std::map<std::string, std::map<std::string, PairAccumulator>> candidates_;
  std::map<std::string, std::string> positive_;
  std::set<std::pair<std::string, std::string>> negative_;
  std::set<std::string> had_candidates_;  // tracks ever seen with a pair
  int64_t contradictions_ = 0;
};

}  // namespace corrmatch::matching
