#include "corrmatch/pipeline.hpp"

#include <algorithm>
#include <cmath>

namespace corrmatch::pipeline {

PreprocessedDataset preprocess_dataset(const training::Dataset& ds,
                                       const signals::PreprocessOptions& pre) {
  PreprocessedDataset out;
  for (const auto& t : ds.tracks) {
    if (auto p = signals::preprocess_track(t, pre)) {
      out.tracks.push_back(std::move(*p));
    }
  }
  for (const auto& s : ds.sensors) {
    if (auto p = signals::preprocess_sensor(s, pre)) {
      out.sensors.push_back(std::move(*p));
    }
  }
  return out;
}

estimator::RunningStats calibrate_stats(const PreprocessedDataset& pre,
                                        int window, int stride) {
  std::array<double, signals::kChannelCount> sum{}, sumsq{};
  int64_t count = 0;
  for (const auto& tc : pre.tracks) {
    for (const auto& sc : pre.sensors) {
      signals::for_each_window(
          tc, sc, window, stride, [&](const signals::FeatureWindow& w) {
            for (int c = 0; c < signals::kChannelCount; ++c) {
              for (double v : w.channel(static_cast<signals::Channel>(c))) {
                sum[c] += v;
                sumsq[c] += v * v;
              }
            }
            count += w.length;
          });
    }
  }
  estimator::RunningStats stats;
  if (count > 0) {
    for (int c = 0; c < signals::kChannelCount; ++c) {
      const double m = sum[c] / static_cast<double>(count);
      stats.mean[c] = m;
      stats.var[c] =
          std::max(0.0, sumsq[c] / static_cast<double>(count) - m * m);
    }
  }
  stats.freeze();
  return stats;
}

int64_t score_pairs(
    const PreprocessedDataset& pre, const estimator::ProbabilityEstimator& est,
    const estimator::RunningStats& stats, int window, int stride,
    double rate_hz,
    const std::function<void(const matching::StepScore&)>& sink) {
  int64_t rows = 0;
  for (const auto& tc : pre.tracks) {
    for (const auto& sc : pre.sensors) {
      signals::for_each_window(
          tc, sc, window, stride, [&](const signals::FeatureWindow& w) {
            sink(matching::to_step_score(estimator::estimate(w, est, stats),
                                         rate_hz));
            ++rows;
          });
    }
  }
  return rows;
}

EvalResult match_and_evaluate(
    std::vector<matching::StepScore> scores,
    const std::map<std::string, std::optional<std::string>>& truth,
    const std::map<std::string, double>& durations,
    const matching::MatchConfig& config) {
  for (const auto& s : scores) {
    if (!truth.contains(s.track_id)) {
      throw DataError("match-eval: score references unknown track '" +
                      s.track_id + "'");
    }
  }
  std::stable_sort(scores.begin(), scores.end(),
                   [](const auto& a, const auto& b) { return a.step < b.step; });

  EvalResult result;
  matching::MatchState state(config);
  size_t i = 0;
  while (i < scores.size()) {
    const int64_t step = scores[i].step;
    for (; i < scores.size() && scores[i].step == step; ++i) {
      state.ingest(scores[i]);
    }
    for (auto& d : state.decide()) {
      if (d.kind != matching::DecisionKind::deferred) {
        result.decisions.push_back({step, std::move(d)});
      }
    }
  }
  result.assignments = state.finalize();

  std::set<std::string> participants;
  for (const auto& [track, participant] : truth) {
    if (participant) participants.insert(*participant);
  }
  for (const auto& [track, participant] : truth) {
    const auto dur = durations.find(track);
    if (dur == durations.end()) {
      throw DataError("match-eval: truth references unknown track '" + track +
                      "'");
    }
    metrics::LabeledOutcome o;
    o.track_id = track;
    o.actual = participant;
    o.duration_s = dur->second;
    const auto a = result.assignments.find(track);
    if (a == result.assignments.end()) {
      o.predicted = metrics::Prediction::undefined();
    } else {
      switch (a->second.state) {
        case matching::Assignment::State::assigned:
          o.predicted = metrics::Prediction::of(a->second.sensor_id);
          break;
        case matching::Assignment::State::null_id:
          o.predicted = metrics::Prediction::null_id();
          break;
        case matching::Assignment::State::undefined:
          o.predicted = metrics::Prediction::undefined();
          break;
      }
    }
    if (o.predicted.kind == metrics::Prediction::Kind::id &&
        (!o.actual || *o.actual != o.predicted.id)) {
      ++result.false_positives;
    }
    result.outcomes.push_back(std::move(o));
  }
  result.report = metrics::compute_metrics(result.outcomes, participants);
  return result;
}

}  // namespace corrmatch::pipeline
