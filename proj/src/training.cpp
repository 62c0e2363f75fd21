#include "corrmatch/training.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <unordered_set>

namespace corrmatch::training {

using signals::FeatureWindow;
using signals::SensorChannels;
using signals::TrackChannels;

SplitResult split_by_individual(const Dataset& dataset, double ratio,
                                uint64_t seed) {
  if (!(ratio > 0.0 && ratio <= 1.0)) {
    throw ConfigError("split_by_individual: ratio must be in (0, 1]");
  }
  std::set<std::string> ids;
  for (const auto& s : dataset.sensors) ids.insert(s.participant_id);
  if (ids.size() < 2) {
    throw DegenerateInputError(
        "split_by_individual: need at least 2 labeled participants");
  }
  std::vector<std::string> order(ids.begin(), ids.end());
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const auto n = static_cast<int64_t>(order.size());
  int64_t n_train = std::llround(ratio * static_cast<double>(n));
  SplitResult out;
  if (ratio >= 1.0) {
    n_train = n;
    out.validation_empty = true;
  } else {
    n_train = std::clamp<int64_t>(n_train, 1, n - 1);
  }
  const std::set<std::string> train_ids(order.begin(),
                                        order.begin() + n_train);
  auto assign = [&](Dataset& d, bool in_train) {
    for (const auto& t : dataset.tracks) {
      if (!t.label) continue;  // unlabeled tracks join neither subset
      if (train_ids.contains(*t.label) == in_train) d.tracks.push_back(t);
    }
    for (const auto& s : dataset.sensors) {
      if (train_ids.contains(s.participant_id) == in_train) {
        d.sensors.push_back(s);
      }
    }
  };
  assign(out.train, true);
  assign(out.val, false);
  return out;
}

void PairSet::fill(size_t i, FeatureWindow& out) const {
  const Coupling& c = couplings_[i];
  signals::fill_window(tracks_[c.track], sensors_[c.sensor], c.track_start,
                       c.sensor_start, window_, out);
}

PairSample PairSet::sample(size_t i) const {
  PairSample s;
  fill(i, s.window);
  s.label = couplings_[i].label;
  s.track_start = couplings_[i].track_start;
  s.sensor_start = couplings_[i].sensor_start;
  return s;
}

namespace {

// Arithmetic window-start sequence of one grid range on the stride lattice
// anchored at the range start.
struct StartSeq {
  int64_t first = 0;
  int64_t count = 0;
  int stride = 1;

  int64_t at(int64_t i) const { return first + i * stride; }
};

StartSeq starts_of(int64_t lo, int64_t hi, int window, int stride) {
  StartSeq s;
  s.first = lo;
  s.stride = stride;
  s.count = signals::window_count(hi - lo, window, stride);
  return s;
}

// Same-time couplings of one (track, wrong sensor) combination.
struct DiffEntry {
  int track = 0;
  int sensor = 0;
  StartSeq starts;
};

// Time-shifted couplings of one (track, own sensor) combination. For every
// track start s, admissible sensor starts are those at least `window`
// samples away on either side.
struct ShiftEntry {
  int track = 0;
  int sensor = 0;
  StartSeq track_starts;
  StartSeq sensor_starts;
  int window = 0;
  std::vector<uint64_t> cum;  // cumulative admissible count per track start

  int64_t left_count(int64_t s) const {
    const int64_t limit = s - window;
    if (sensor_starts.count == 0 || sensor_starts.at(0) > limit) return 0;
    const int64_t i = (limit - sensor_starts.first) / sensor_starts.stride;
    return std::min<int64_t>(sensor_starts.count, i + 1);
  }
  // First sensor-start index at or beyond s + window.
  int64_t right_begin(int64_t s) const {
    const int64_t limit = s + window;
    if (sensor_starts.at(0) >= limit) return 0;
    const int64_t num = limit - sensor_starts.first;
    const int64_t i =
        (num + sensor_starts.stride - 1) / sensor_starts.stride;
    return std::min<int64_t>(i, sensor_starts.count);
  }
  uint64_t admissible(int64_t s) const {
    return static_cast<uint64_t>(left_count(s)) +
           static_cast<uint64_t>(sensor_starts.count - right_begin(s));
  }
};

struct NegativeSpace {
  std::vector<DiffEntry> diff;
  std::vector<uint64_t> diff_cum;  // size diff.size() + 1
  std::vector<ShiftEntry> shift;
  std::vector<uint64_t> shift_cum;  // size shift.size() + 1

  uint64_t diff_total() const { return diff_cum.back(); }
  uint64_t shift_total() const { return shift_cum.back(); }
};

NegativeSpace build_negative_space(
    const std::vector<TrackChannels>& tracks,
    const std::vector<SensorChannels>& sensors, int window, int stride) {
  NegativeSpace space;
  space.diff_cum.push_back(0);
  space.shift_cum.push_back(0);
  for (size_t ti = 0; ti < tracks.size(); ++ti) {
    const auto& tr = tracks[ti];
    for (size_t mi = 0; mi < sensors.size(); ++mi) {
      const auto& se = sensors[mi];
      if (tr.label && *tr.label == se.participant_id) {
        ShiftEntry e;
        e.track = static_cast<int>(ti);
        e.sensor = static_cast<int>(mi);
        e.track_starts =
            starts_of(tr.start_index(), tr.end_index(), window, stride);
        e.sensor_starts =
            starts_of(se.start_index(), se.end_index(), window, stride);
        e.window = window;
        if (e.track_starts.count > 0 && e.sensor_starts.count > 0) {
          e.cum.reserve(e.track_starts.count);
          uint64_t acc = 0;
          for (int64_t i = 0; i < e.track_starts.count; ++i) {
            acc += e.admissible(e.track_starts.at(i));
            e.cum.push_back(acc);
          }
          if (acc > 0) {
            space.shift_cum.push_back(space.shift_cum.back() + acc);
            space.shift.push_back(std::move(e));
          }
        }
      } else {
        DiffEntry e;
        e.track = static_cast<int>(ti);
        e.sensor = static_cast<int>(mi);
        const int64_t lo = std::max(tr.start_index(), se.start_index());
        const int64_t hi = std::min(tr.end_index(), se.end_index());
        e.starts = starts_of(lo, std::max(lo, hi), window, stride);
        if (e.starts.count > 0) {
          space.diff_cum.push_back(space.diff_cum.back() +
                                   static_cast<uint64_t>(e.starts.count));
          space.diff.push_back(e);
        }
      }
    }
  }
  return space;
}

// k distinct values from [0, space), ascending; deterministic for a fixed rng.
std::vector<uint64_t> sample_distinct(std::mt19937_64& rng, uint64_t space,
                                      uint64_t k) {
  std::vector<uint64_t> out;
  if (k >= space) {
    out.resize(space);
    std::iota(out.begin(), out.end(), uint64_t{0});
    return out;
  }
  if (k * 2 >= space) {
    std::vector<uint64_t> all(space);
    std::iota(all.begin(), all.end(), uint64_t{0});
    std::shuffle(all.begin(), all.end(), rng);
    out.assign(all.begin(), all.begin() + k);
  } else {
    std::unordered_set<uint64_t> seen;
    std::uniform_int_distribution<uint64_t> dist(0, space - 1);
    while (seen.size() < k) seen.insert(dist(rng));
    out.assign(seen.begin(), seen.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

PairSet::Coupling decode_diff(const NegativeSpace& space, uint64_t index) {
  const auto it = std::upper_bound(space.diff_cum.begin(),
                                   space.diff_cum.end(), index);
  const size_t e = static_cast<size_t>(it - space.diff_cum.begin()) - 1;
  const uint64_t offset = index - space.diff_cum[e];
  const DiffEntry& entry = space.diff[e];
  PairSet::Coupling c;
  c.track = entry.track;
  c.sensor = entry.sensor;
  c.track_start = entry.starts.at(static_cast<int64_t>(offset));
  c.sensor_start = c.track_start;
  c.label = 0;
  return c;
}

PairSet::Coupling decode_shift(const NegativeSpace& space, uint64_t index) {
  const auto it = std::upper_bound(space.shift_cum.begin(),
                                   space.shift_cum.end(), index);
  const size_t e = static_cast<size_t>(it - space.shift_cum.begin()) - 1;
  uint64_t offset = index - space.shift_cum[e];
  const ShiftEntry& entry = space.shift[e];
  const auto sit =
      std::upper_bound(entry.cum.begin(), entry.cum.end(), offset);
  const auto si = static_cast<int64_t>(sit - entry.cum.begin());
  if (si > 0) offset -= entry.cum[si - 1];
  const int64_t s = entry.track_starts.at(si);
  const int64_t left = entry.left_count(s);
  int64_t sensor_idx;
  if (static_cast<int64_t>(offset) < left) {
    sensor_idx = static_cast<int64_t>(offset);
  } else {
    sensor_idx = entry.right_begin(s) + (static_cast<int64_t>(offset) - left);
  }
  PairSet::Coupling c;
  c.track = entry.track;
  c.sensor = entry.sensor;
  c.track_start = s;
  c.sensor_start = entry.sensor_starts.at(sensor_idx);
  c.label = 0;
  return c;
}

}  // namespace

PairSet build_pairs(const Dataset& dataset, const PairBuildConfig& cfg) {
  if (cfg.window < 2 || cfg.stride < 1) {
    throw ConfigError("build_pairs: window must be >= 2 and stride >= 1");
  }
  if (cfg.rho_neg < 1.0) {
    throw ConfigError("build_pairs: rho_neg must be >= 1");
  }
  PairSet out;
  out.window_ = cfg.window;

  std::map<std::string, const signals::SensorRecord*> sensor_by_id;
  for (const auto& s : dataset.sensors) sensor_by_id[s.participant_id] = &s;
  for (const auto& [id, rec] : sensor_by_id) {
    if (auto pre = signals::preprocess_sensor(*rec, cfg.pre)) {
      out.sensors_.push_back(std::move(*pre));
    }
  }
  std::map<std::string, int> sensor_index;
  for (size_t i = 0; i < out.sensors_.size(); ++i) {
    sensor_index[out.sensors_[i].participant_id] = static_cast<int>(i);
  }

  // Only tracks of sensor-carrying people enter the pair pool.
  std::vector<const signals::Track*> labeled;
  for (const auto& t : dataset.tracks) {
    if (t.label && sensor_index.contains(*t.label)) labeled.push_back(&t);
  }
  std::sort(labeled.begin(), labeled.end(),
            [](const auto* a, const auto* b) { return a->track_id < b->track_id; });
  for (const auto* t : labeled) {
    if (auto pre = signals::preprocess_track(*t, cfg.pre)) {
      out.tracks_.push_back(std::move(*pre));
    }
  }

  // Positives: aligned same-identity windows on the stride lattice.
  for (size_t ti = 0; ti < out.tracks_.size(); ++ti) {
    const auto& tr = out.tracks_[ti];
    const int mi = sensor_index.at(*tr.label);
    const auto& se = out.sensors_[mi];
    const int64_t lo = std::max(tr.start_index(), se.start_index());
    const int64_t hi = std::min(tr.end_index(), se.end_index());
    const int64_t n = signals::window_count(hi - lo, cfg.window, cfg.stride);
    for (int64_t i = 0; i < n; ++i) {
      const int64_t s = lo + i * cfg.stride;
      out.couplings_.push_back({static_cast<int>(ti), mi, s, s, 1});
    }
  }
  out.positives_ = out.couplings_.size();
  if (out.positives_ == 0) {
    throw DegenerateInputError("build_pairs: dataset yields no positive pairs");
  }

  const NegativeSpace space = build_negative_space(
      out.tracks_, out.sensors_, cfg.window, cfg.stride);
  const uint64_t available = space.diff_total() + space.shift_total();
  const auto requested = static_cast<uint64_t>(
      std::llround(cfg.rho_neg * static_cast<double>(out.positives_)));
  const uint64_t target = std::min(available, requested);

  uint64_t want_shift = std::min<uint64_t>(
      space.shift_total(),
      static_cast<uint64_t>(std::llround(
          cfg.shifted_fraction * static_cast<double>(target))));
  uint64_t want_diff = std::min<uint64_t>(space.diff_total(),
                                          target - want_shift);
  want_shift = std::min<uint64_t>(space.shift_total(), target - want_diff);

  std::mt19937_64 rng(derive_seed(cfg.seed, 0xbead5));
  for (uint64_t idx : sample_distinct(rng, space.diff_total(), want_diff)) {
    out.couplings_.push_back(decode_diff(space, idx));
  }
  for (uint64_t idx : sample_distinct(rng, space.shift_total(), want_shift)) {
    out.couplings_.push_back(decode_shift(space, idx));
  }
  return out;
}

NegativeAvailability count_negative_couplings(const PairSet& pairs,
                                              int window, int stride) {
  const NegativeSpace space =
      build_negative_space(pairs.tracks(), pairs.sensors(), window, stride);
  return {space.diff_total(), space.shift_total()};
}

double weighted_bce(double p, int y, double w_pos) {
  const double q = std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp);
  return y == 1 ? -w_pos * std::log(q) : -std::log(1.0 - q);
}

void TrainConfig::validate() const {
  if (window < 2) throw ConfigError("train config: window must be >= 2");
  if (stride_train < 1 || stride_val < 1) {
    throw ConfigError("train config: strides must be >= 1");
  }
  if (rho_neg < 1.0) throw ConfigError("train config: rho_neg must be >= 1");
  if (!(learning_rate > 0.0)) {
    throw ConfigError("train config: learning rate must be positive");
  }
  if (batch_size < 1) throw ConfigError("train config: batch size must be >= 1");
  if (epochs < 1) throw ConfigError("train config: epochs must be >= 1");
  if (patience < 1) throw ConfigError("train config: patience must be >= 1");
  if (!(split_ratio > 0.0 && split_ratio <= 1.0)) {
    throw ConfigError("train config: split ratio must be in (0, 1]");
  }
}

namespace {

double set_weight(const PairSet& pairs) {
  const size_t pos = pairs.positive_count();
  const size_t neg = pairs.negative_count();
  if (pos == 0 || neg == 0) return 1.0;
  return static_cast<double>(neg) / static_cast<double>(pos);
}

}  // namespace

template <class Model>
double evaluate_loss(const Model& model, const PairSet& pairs) {
  if (pairs.size() == 0) return 0.0;
  const double w = set_weight(pairs);
  typename Model::Cache cache;
  FeatureWindow win;
  double sum = 0.0;
  for (size_t i = 0; i < pairs.size(); ++i) {
    pairs.fill(i, win);
    const double p = model.forward(win, cache);
    sum += weighted_bce(p, pairs.label(i), w);
  }
  return sum / static_cast<double>(pairs.size());
}

template <class Model>
FitResult fit(Model& model, const PairSet& train_pairs,
              const PairSet& val_pairs, const TrainConfig& cfg) {
  cfg.validate();
  if (train_pairs.positive_count() == 0) {
    throw DegenerateInputError("fit: training set has no positive pairs");
  }
  const double w_pos = set_weight(train_pairs);

  FitResult result;
  result.pos_weight = w_pos;

  std::vector<double> theta = model.params();
  std::vector<double> adam_m(theta.size(), 0.0);
  std::vector<double> adam_v(theta.size(), 0.0);
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kAdamEps = 1e-8;
  int64_t step = 0;

  model.stats().frozen = false;

  std::vector<double> best_theta = theta;
  estimator::RunningStats best_stats = model.stats();
  double best_loss = std::numeric_limits<double>::infinity();
  int best_epoch = cfg.epoch_offset;
  int stale_epochs = 0;

  std::vector<size_t> order(train_pairs.size());
  std::iota(order.begin(), order.end(), size_t{0});

  std::vector<FeatureWindow> batch_windows;
  std::vector<const FeatureWindow*> batch_ptrs;
  typename Model::Cache cache;
  std::vector<double> grad, batch_grad(theta.size());

  for (int e = 1; e <= cfg.epochs; ++e) {
    const int epoch = cfg.epoch_offset + e;
    std::mt19937_64 rng(derive_seed(cfg.seed, 0xe90c0 + epoch));
    std::shuffle(order.begin(), order.end(), rng);

    double loss_sum = 0.0;
    for (size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      const size_t end =
          std::min(order.size(), begin + static_cast<size_t>(cfg.batch_size));
      const size_t n = end - begin;

      batch_windows.resize(n);
      batch_ptrs.resize(n);
      for (size_t i = 0; i < n; ++i) {
        train_pairs.fill(order[begin + i], batch_windows[i]);
        batch_ptrs[i] = &batch_windows[i];
      }
      model.stats().update(batch_ptrs);

      std::fill(batch_grad.begin(), batch_grad.end(), 0.0);
      for (size_t i = 0; i < n; ++i) {
        const int y = train_pairs.label(order[begin + i]);
        const double p = model.forward(batch_windows[i], cache);
        loss_sum += weighted_bce(p, y, w_pos);
        const double q =
            std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp);
        const double upstream =
            (y == 1 ? -w_pos / q : 1.0 / (1.0 - q)) / static_cast<double>(n);
        model.backward(cache, upstream, grad);
        for (size_t k = 0; k < batch_grad.size(); ++k) {
          batch_grad[k] += grad[k];
        }
      }

      ++step;
      const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
      const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
      for (size_t k = 0; k < theta.size(); ++k) {
        adam_m[k] = kBeta1 * adam_m[k] + (1.0 - kBeta1) * batch_grad[k];
        adam_v[k] =
            kBeta2 * adam_v[k] + (1.0 - kBeta2) * batch_grad[k] * batch_grad[k];
        theta[k] -= cfg.learning_rate * (adam_m[k] / bc1) /
                    (std::sqrt(adam_v[k] / bc2) + kAdamEps);
      }
      model.set_params(theta);
    }

    const double train_loss =
        loss_sum / static_cast<double>(train_pairs.size());
    const double val_loss =
        val_pairs.size() > 0 ? evaluate_loss(model, val_pairs) : train_loss;
    if (!std::isfinite(train_loss) || !std::isfinite(val_loss)) {
      throw NumericError("fit: loss diverged (non-finite) at epoch " +
                         std::to_string(epoch));
    }
    result.history.push_back({epoch, train_loss, val_loss});

    if (val_loss < best_loss) {
      best_loss = val_loss;
      best_theta = theta;
      best_stats = model.stats();
      best_epoch = epoch;
      stale_epochs = 0;
    } else if (++stale_epochs >= cfg.patience) {
      break;
    }
  }

  model.set_params(best_theta);
  best_stats.freeze();
  model.set_stats(best_stats);
  result.best_epoch = best_epoch;
  result.best_val_loss = best_loss;
  return result;
}

template FitResult fit<estimator::LogisticModel>(estimator::LogisticModel&,
                                                 const PairSet&,
                                                 const PairSet&,
                                                 const TrainConfig&);
template FitResult fit<estimator::ConvAttentionModel>(
    estimator::ConvAttentionModel&, const PairSet&, const PairSet&,
    const TrainConfig&);
template double evaluate_loss<estimator::LogisticModel>(
    const estimator::LogisticModel&, const PairSet&);
template double evaluate_loss<estimator::ConvAttentionModel>(
    const estimator::ConvAttentionModel&, const PairSet&);

}  // namespace corrmatch::training
