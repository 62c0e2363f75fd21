#include "corrmatch/matching.hpp"

#include <cmath>

namespace corrmatch::matching {

StepScore to_step_score(const estimator::CorrespondenceScore& s,
                        double rate_hz) {
  StepScore out;
  out.step = static_cast<int64_t>(std::llround(s.start_t * rate_hz));
  out.track_id = s.track_id;
  out.sensor_id = s.sensor_id;
  out.p = s.p;
  out.r = s.r;
  return out;
}

void MatchConfig::validate() const {
  if (!(p_acpt >= 0.5)) {
    throw ConfigError("match config: p_acpt must be >= 0.5");
  }
  if (r_csdr < 0.0 || r_csdr > 1.0) {
    throw ConfigError("match config: r_csdr must be in [0, 1]");
  }
  if (n_min < 1) {
    throw ConfigError("match config: n_min must be >= 1");
  }
}

MatchConfig default_thresholds(int window) {
  // (r_csdr, p_acpt) pairs adopted per window size.
  switch (window) {
    case 100: return {0.3, 0.7, 1};
    case 600: return {0.1, 0.9, 1};
    case 300:
    default: return {0.1, 0.7, 1};
  }
}

MatchState::MatchState(MatchConfig config) : config_(config) {
  config_.validate();
}

void MatchState::register_pair(const std::string& track_id,
                               const std::string& sensor_id) {
  if (negative_.contains({track_id, sensor_id})) return;
  had_candidates_.insert(track_id);
  candidates_[track_id].try_emplace(sensor_id);
}

void MatchState::ingest(const StepScore& score) {
  if (score.p < 0.0 || score.p > 1.0 || score.r < 0.0 || score.r > 1.0) {
    throw DataError("ingest: probability/reliability outside [0, 1] for (" +
                    score.track_id + ", " + score.sensor_id + ")");
  }
  if (negative_.contains({score.track_id, score.sensor_id})) {
    ++contradictions_;  // eliminated pairs never come back
    return;
  }
  had_candidates_.insert(score.track_id);
  auto& acc = candidates_[score.track_id][score.sensor_id];
  if (score.step <= acc.last_step) {
    throw OrderingError("ingest: step " + std::to_string(score.step) +
                        " out of order for (" + score.track_id + ", " +
                        score.sensor_id + ")");
  }
  acc.last_step = score.step;
  if (score.r > config_.r_csdr) {
    acc.p_sum += score.p;
    acc.reliable_count += 1;
  }
}

std::vector<Decision> MatchState::decide() {
  std::vector<Decision> out;
  for (auto& [track_id, sensors] : candidates_) {
    // Negative eliminations first, so a same-step positive can follow.
    for (auto it = sensors.begin(); it != sensors.end();) {
      const auto& acc = it->second;
      if (acc.reliable_count >= config_.n_min &&
          acc.p_sum / static_cast<double>(acc.reliable_count) <
              1.0 - config_.p_acpt) {
        negative_.insert({track_id, it->first});
        out.push_back({DecisionKind::negative, track_id, it->first});
        it = sensors.erase(it);
      } else {
        ++it;
      }
    }
    if (positive_.contains(track_id)) continue;

    // Positive acceptance requires a unique candidate above p_acpt;
    // candidates without a defined mean count as non-exceeding.
    const std::string* unique = nullptr;
    bool ambiguous = false;
    bool any_defined = false;
    for (const auto& [sensor_id, acc] : sensors) {
      if (acc.reliable_count < config_.n_min) continue;
      any_defined = true;
      if (acc.p_sum / static_cast<double>(acc.reliable_count) >
          config_.p_acpt) {
        if (unique != nullptr) {
          ambiguous = true;
          break;
        }
        unique = &sensor_id;
      }
    }
    if (!ambiguous && unique != nullptr) {
      positive_[track_id] = *unique;
      out.push_back({DecisionKind::positive, track_id, *unique});
    } else if (any_defined) {
      out.push_back({DecisionKind::deferred, track_id, ""});
    }
  }
  return out;
}

std::optional<double> MatchState::reliable_mean(
    const std::string& track_id, const std::string& sensor_id) const {
  const auto t = candidates_.find(track_id);
  if (t == candidates_.end()) return std::nullopt;
  const auto s = t->second.find(sensor_id);
  if (s == t->second.end() || s->second.reliable_count < config_.n_min) {
    return std::nullopt;
  }
  return s->second.p_sum / static_cast<double>(s->second.reliable_count);
}

std::map<std::string, Assignment> MatchState::finalize() const {
  std::map<std::string, Assignment> out;
  for (const auto& track_id : had_candidates_) {
    Assignment a;
    const auto pos = positive_.find(track_id);
    if (pos != positive_.end()) {
      a.state = Assignment::State::assigned;
      a.sensor_id = pos->second;
    } else {
      const auto cand = candidates_.find(track_id);
      const bool emptied = cand == candidates_.end() || cand->second.empty();
      a.state = emptied ? Assignment::State::null_id
                        : Assignment::State::undefined;
    }
    out[track_id] = a;
  }
  return out;
}

}  // namespace corrmatch::matching
