#pragma once

#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "corrmatch/common.hpp"

namespace corrmatch::metrics {

// Predicted identity for one track: a participant id, null (predicted to
// carry no sensor), or undefined (no confirmed matching / track too short).
struct Prediction {
  enum class Kind { id, null_id, undefined };
  Kind kind = Kind::undefined;
  std::string id;

  static Prediction of(std::string participant) {
    return {Kind::id, std::move(participant)};
  }
  static Prediction null_id() { return {Kind::null_id, {}}; }
  static Prediction undefined() { return {Kind::undefined, {}}; }
};

struct LabeledOutcome {
  std::string track_id;
  Prediction predicted;
  std::optional<std::string> actual;  // empty = non-participant
  double duration_s = 1.0;
};

// Empty optional = metric undefined (empty denominator); never silently 0.
using Metric = std::optional<double>;

// Correct participant predictions over all predictions naming a participant.
// Undefined predictions are never correct and never counted as participant
// predictions.
Metric participant_precision(std::span<const LabeledOutcome> outcomes,
                             const std::set<std::string>& participants);

// Correct participant predictions over all tracks of actual participants.
Metric participant_recall(std::span<const LabeledOutcome> outcomes,
                          const std::set<std::string>& participants);

// Harmonic mean; 0 when both inputs are 0; undefined when either is.
Metric participant_f1(Metric pp, Metric pr);

struct MetricsReport {
  Metric pp, pr, pf;        // unweighted
  Metric pp_w, pr_w, pf_w;  // duration-weighted
  int64_t null_predictions = 0;
  int64_t undefined_predictions = 0;
};

// Duration-weighted variants replace set cardinalities with summed track
// durations; PF_w is the harmonic mean of PP_w and PR_w.
MetricsReport compute_metrics(std::span<const LabeledOutcome> outcomes,
                              const std::set<std::string>& participants);

}  // namespace corrmatch::metrics
