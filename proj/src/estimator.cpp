#include "corrmatch/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include <json.hpp>

namespace corrmatch::estimator {

void RunningStats::update(const std::vector<const FeatureWindow*>& batch) {
  if (frozen) {
    throw StateError("RunningStats::update: stats are frozen");
  }
  if (batch.empty()) return;
  for (int c = 0; c < signals::kChannelCount; ++c) {
    double sum = 0.0, sumsq = 0.0;
    size_t n = 0;
    for (const FeatureWindow* w : batch) {
      for (double v : w->channel(static_cast<Channel>(c))) {
        sum += v;
        sumsq += v * v;
        ++n;
      }
    }
    const double m = sum / static_cast<double>(n);
    const double v = std::max(0.0, sumsq / static_cast<double>(n) - m * m);
    mean[c] = (1.0 - momentum) * mean[c] + momentum * m;
    var[c] = (1.0 - momentum) * var[c] + momentum * v;
  }
}

void RunningStats::freeze() {
  for (double& v : var) v = std::max(v, kVarianceFloor);
  frozen = true;
}

RunningStats RunningStats::from_windows(
    const std::vector<const FeatureWindow*>& windows) {
  RunningStats s;
  if (!windows.empty()) {
    for (int c = 0; c < signals::kChannelCount; ++c) {
      double sum = 0.0, sumsq = 0.0;
      size_t n = 0;
      for (const FeatureWindow* w : windows) {
        for (double v : w->channel(static_cast<Channel>(c))) {
          sum += v;
          sumsq += v * v;
          ++n;
        }
      }
      const double m = sum / static_cast<double>(n);
      s.mean[c] = m;
      s.var[c] = std::max(0.0, sumsq / static_cast<double>(n) - m * m);
    }
  }
  s.freeze();
  return s;
}

double reliability(const FeatureWindow& window, const RunningStats& stats) {
  if (!stats.frozen) {
    throw StateError("reliability: running stats must be frozen");
  }
  const double v_spd = std::max(
      population_variance(window.channel(Channel::speed)), kVarianceFloor);
  const double v_acc =
      std::max(population_variance(window.channel(Channel::lin_accel_norm)),
               kVarianceFloor);
  const double ref_spd =
      std::max(stats.var[static_cast<int>(Channel::speed)], kVarianceFloor);
  const double ref_acc = std::max(
      stats.var[static_cast<int>(Channel::lin_accel_norm)], kVarianceFloor);
  return sigmoid(std::max(std::log(v_spd / ref_spd), std::log(v_acc / ref_acc)));
}

CorrespondenceScore estimate(const FeatureWindow& window,
                             const ProbabilityEstimator& est,
                             const RunningStats& stats) {
  if (est.window_length() != 0 && est.window_length() != window.length) {
    throw ShapeError("estimate: window length " +
                     std::to_string(window.length) +
                     " does not match estimator length " +
                     std::to_string(est.window_length()));
  }
  CorrespondenceScore s;
  s.track_id = window.track_id;
  s.sensor_id = window.sensor_id;
  s.start_t = window.start_t;
  s.p = est.probability(window);
  s.r = reliability(window, stats);
  return s;
}

double OracleEstimator::probability(const FeatureWindow& window) const {
  const auto it = truth_.find(window.track_id);
  if (it == truth_.end()) {
    throw LookupError("oracle: unknown track_id '" + window.track_id + "'");
  }
  return (it->second && *it->second == window.sensor_id) ? 1.0 : 0.0;
}

void TrainableEstimator::set_params(std::vector<double> p) {
  if (p.size() != params_.size()) {
    throw ShapeError("set_params: expected " + std::to_string(params_.size()) +
                     " parameters, got " + std::to_string(p.size()));
  }
  params_ = std::move(p);
  ++version_;
}

void TrainableEstimator::set_param(size_t i, double v) {
  params_.at(i) = v;
  ++version_;
}

// --- logistic model ---------------------------------------------------------

LogisticModel::LogisticModel() {
  params_.assign(kFeatureCount + 1, 0.0);
}

std::array<double, LogisticModel::kFeatureCount> LogisticModel::features(
    const FeatureWindow& w) {
  const auto spd = w.channel(Channel::speed);
  const auto turn = w.channel(Channel::turn_rate);
  const auto acc = w.channel(Channel::lin_accel_norm);
  const auto gx = w.channel(Channel::gyro_x);
  const auto gy = w.channel(Channel::gyro_y);
  const auto gz = w.channel(Channel::gyro_z);
  const size_t n = spd.size();

  std::vector<double> abs_turn(n), abs_gz(n), gyro_mag(n);
  for (size_t i = 0; i < n; ++i) {
    abs_turn[i] = std::fabs(turn[i]);
    abs_gz[i] = std::fabs(gz[i]);
    gyro_mag[i] =
        std::sqrt(gx[i] * gx[i] + gy[i] * gy[i] + gz[i] * gz[i]);
  }
  const double m_spd = mean_of(spd);
  const double m_acc = mean_of(acc);
  std::vector<double> env_spd(n), env_acc(n);
  for (size_t i = 0; i < n; ++i) {
    env_spd[i] = std::fabs(spd[i] - m_spd);
    env_acc[i] = std::fabs(acc[i] - m_acc);
  }
  double agree = 0.0;
  for (size_t i = 0; i < n; ++i) {
    agree += ((spd[i] > 0.3) == (acc[i] > 0.5)) ? 1.0 : 0.0;
  }
  agree = n > 0 ? agree / static_cast<double>(n) : 0.0;

  return {
      pearson(spd, acc),
      pearson(abs_turn, abs_gz),
      pearson(turn, gz),
      pearson(spd, gyro_mag),
      2.0 * agree - 1.0,
      pearson(env_spd, env_acc),
      std::tanh(std::sqrt(population_variance(spd))),
      std::tanh(std::sqrt(population_variance(acc))),
  };
}

double LogisticModel::forward(const FeatureWindow& window,
                              Cache& cache) const {
  cache.model_version = version_;
  cache.f = features(window);
  double z = params_[kFeatureCount];  // bias
  for (int i = 0; i < kFeatureCount; ++i) z += params_[i] * cache.f[i];
  cache.p = sigmoid(z);
  return cache.p;
}

void LogisticModel::backward(const Cache& cache, double upstream,
                             std::vector<double>& grad) const {
  if (cache.model_version != version_) {
    throw StateError("backward: forward cache is stale for this model");
  }
  const double d = upstream * cache.p * (1.0 - cache.p);
  grad.assign(kFeatureCount + 1, 0.0);
  for (int i = 0; i < kFeatureCount; ++i) grad[i] = d * cache.f[i];
  grad[kFeatureCount] = d;
}

double LogisticModel::probability(const FeatureWindow& window) const {
  Cache cache;
  return forward(window, cache);
}

std::vector<double> LogisticModel::gradient(const FeatureWindow& window,
                                            double upstream) const {
  Cache cache;
  forward(window, cache);
  std::vector<double> g;
  backward(cache, upstream, g);
  return g;
}

// --- conv + attention model ---------------------------------------------------

namespace {

constexpr double kStandardizeEps = 1e-5;

void check_finite(std::span<const double> v, const char* layer) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw NumericError(std::string("non-finite activation in layer '") +
                         layer + "'");
    }
  }
}

}  // namespace

ConvAttentionModel::ConvAttentionModel(const ArchConfig& arch) : arch_(arch) {
  if (arch.window < arch.kernel_long || arch.maps < 1 || arch.attention < 1 ||
      arch.hidden < 1 || arch.kernel_short < 1 ||
      arch.kernel_long < arch.kernel_short) {
    throw ConfigError("ConvAttentionModel: invalid architecture descriptor");
  }
  const size_t c = arch.channels, f = arch.maps;
  const size_t cw = arch.concat_width(), a = arch.attention, h = arch.hidden;
  Layout l{};
  size_t off = 0;
  l.conv1_w = off; off += f * c * arch.kernel_short;
  l.conv1_b = off; off += f;
  l.conv2_w = off; off += f * c * arch.kernel_long;
  l.conv2_b = off; off += f;
  l.att_w = off; off += a * cw;
  l.att_b = off; off += a;
  l.att_v = off; off += a;
  l.dense_w = off; off += h * cw;
  l.dense_b = off; off += h;
  l.out_w = off; off += h;
  l.out_b = off; off += 1;
  l.total = off;
  layout_ = l;
  params_.assign(l.total, 0.0);
}

ConvAttentionModel ConvAttentionModel::seeded(const ArchConfig& arch,
                                              uint64_t seed) {
  ConvAttentionModel m(arch);
  std::mt19937_64 rng(seed);
  auto init = [&](size_t off, size_t count, size_t fan_in) {
    const double s = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-s, s);
    for (size_t i = 0; i < count; ++i) m.params_[off + i] = dist(rng);
  };
  const auto& l = m.layout_;
  const size_t c = arch.channels, f = arch.maps;
  const size_t cw = arch.concat_width(), a = arch.attention, h = arch.hidden;
  init(l.conv1_w, f * c * arch.kernel_short, c * arch.kernel_short);
  init(l.conv2_w, f * c * arch.kernel_long, c * arch.kernel_long);
  init(l.att_w, a * cw, cw);
  init(l.att_v, a, a);
  init(l.dense_w, h * cw, cw);
  init(l.out_w, h, h);
  ++m.version_;
  return m;
}

double ConvAttentionModel::forward(const FeatureWindow& window,
                                   Cache& cache) const {
  const int W = arch_.window;
  if (window.length != W) {
    throw ShapeError("forward: window length " + std::to_string(window.length) +
                     " does not match model window " + std::to_string(W));
  }
  const int C = arch_.channels, F = arch_.maps;
  const int CW = arch_.concat_width(), A = arch_.attention, H = arch_.hidden;
  const double* th = params_.data();
  const auto& l = layout_;

  cache.model_version = version_;
  cache.length = W;

  // Standardize with the (frozen or current) running statistics.
  cache.input.assign(static_cast<size_t>(C) * W, 0.0);
  for (int c = 0; c < C; ++c) {
    const double inv =
        1.0 / std::sqrt(stats_.var[c] + kStandardizeEps);
    const double mu = stats_.mean[c];
    const auto src = window.channel(static_cast<Channel>(c));
    double* dst = cache.input.data() + static_cast<size_t>(c) * W;
    for (int t = 0; t < W; ++t) dst[t] = (src[t] - mu) * inv;
  }
  check_finite(cache.input, "standardize");

  // Two parallel temporal convolutions with same padding and tanh.
  auto conv_path = [&](int kernel, size_t w_off, size_t b_off,
                       std::vector<double>& out, const char* name) {
    out.assign(static_cast<size_t>(F) * W, 0.0);
    const int half = kernel / 2;
    for (int f = 0; f < F; ++f) {
      double* row = out.data() + static_cast<size_t>(f) * W;
      const double bias = th[b_off + f];
      for (int t = 0; t < W; ++t) row[t] = bias;
      for (int c = 0; c < C; ++c) {
        const double* in = cache.input.data() + static_cast<size_t>(c) * W;
        const double* wseg = th + w_off + (static_cast<size_t>(f) * C + c) * kernel;
        for (int j = 0; j < kernel; ++j) {
          const double wv = wseg[j];
          const int o = j - half;
          const int t0 = std::max(0, -o);
          const int t1 = std::min(W, W - o);
          const double* src = in + o;
          for (int t = t0; t < t1; ++t) row[t] += wv * src[t];
        }
      }
      for (int t = 0; t < W; ++t) row[t] = std::tanh(row[t]);
    }
    check_finite(out, name);
  };
  conv_path(arch_.kernel_short, l.conv1_w, l.conv1_b, cache.conv_a, "conv_short");
  conv_path(arch_.kernel_long, l.conv2_w, l.conv2_b, cache.conv_b, "conv_long");

  // h[i][t]: concatenation of the two paths, accessed by row.
  auto concat_row = [&](int i) -> const double* {
    return i < F ? cache.conv_a.data() + static_cast<size_t>(i) * W
                 : cache.conv_b.data() + static_cast<size_t>(i - F) * W;
  };

  // Additive attention scores over time.
  cache.att_u.assign(static_cast<size_t>(A) * W, 0.0);
  for (int a = 0; a < A; ++a) {
    double* row = cache.att_u.data() + static_cast<size_t>(a) * W;
    const double bias = th[l.att_b + a];
    for (int t = 0; t < W; ++t) row[t] = bias;
    for (int i = 0; i < CW; ++i) {
      const double wv = th[l.att_w + static_cast<size_t>(a) * CW + i];
      const double* h = concat_row(i);
      for (int t = 0; t < W; ++t) row[t] += wv * h[t];
    }
    for (int t = 0; t < W; ++t) row[t] = std::tanh(row[t]);
  }
  cache.att_score.assign(W, 0.0);
  for (int a = 0; a < A; ++a) {
    const double va = th[l.att_v + a];
    const double* row = cache.att_u.data() + static_cast<size_t>(a) * W;
    for (int t = 0; t < W; ++t) cache.att_score[t] += va * row[t];
  }
  check_finite(cache.att_score, "attention_score");

  cache.att_alpha.assign(W, 0.0);
  const double smax =
      *std::max_element(cache.att_score.begin(), cache.att_score.end());
  double ssum = 0.0;
  for (int t = 0; t < W; ++t) {
    cache.att_alpha[t] = std::exp(cache.att_score[t] - smax);
    ssum += cache.att_alpha[t];
  }
  for (int t = 0; t < W; ++t) cache.att_alpha[t] /= ssum;

  cache.pooled.assign(CW, 0.0);
  for (int i = 0; i < CW; ++i) {
    const double* h = concat_row(i);
    double acc = 0.0;
    for (int t = 0; t < W; ++t) acc += cache.att_alpha[t] * h[t];
    cache.pooled[i] = acc;
  }
  check_finite(cache.pooled, "attention_pool");

  cache.dense.assign(H, 0.0);
  for (int q = 0; q < H; ++q) {
    double acc = th[l.dense_b + q];
    const double* wrow = th + l.dense_w + static_cast<size_t>(q) * CW;
    for (int i = 0; i < CW; ++i) acc += wrow[i] * cache.pooled[i];
    cache.dense[q] = std::tanh(acc);
  }
  check_finite(cache.dense, "dense");

  double logit = th[l.out_b];
  for (int q = 0; q < H; ++q) logit += th[l.out_w + q] * cache.dense[q];
  if (!std::isfinite(logit)) {
    throw NumericError("non-finite activation in layer 'output'");
  }
  cache.logit = logit;
  cache.p = sigmoid(logit);
  return cache.p;
}

void ConvAttentionModel::backward(const Cache& cache, double upstream,
                                  std::vector<double>& grad) const {
  if (cache.model_version != version_) {
    throw StateError("backward: forward cache is stale for this model");
  }
  const int W = arch_.window;
  const int C = arch_.channels, F = arch_.maps;
  const int CW = arch_.concat_width(), A = arch_.attention, H = arch_.hidden;
  const double* th = params_.data();
  const auto& l = layout_;
  grad.assign(params_.size(), 0.0);

  auto concat_row = [&](int i) -> const double* {
    return i < F ? cache.conv_a.data() + static_cast<size_t>(i) * W
                 : cache.conv_b.data() + static_cast<size_t>(i - F) * W;
  };

  const double dlogit = upstream * cache.p * (1.0 - cache.p);

  // Output layer.
  std::vector<double> d_dense(H);
  grad[l.out_b] = dlogit;
  for (int q = 0; q < H; ++q) {
    grad[l.out_w + q] = dlogit * cache.dense[q];
    d_dense[q] = dlogit * th[l.out_w + q];
  }

  // Dense hidden layer.
  std::vector<double> d_pooled(CW, 0.0);
  for (int q = 0; q < H; ++q) {
    const double dpre = d_dense[q] * (1.0 - cache.dense[q] * cache.dense[q]);
    grad[l.dense_b + q] = dpre;
    double* wgrad = grad.data() + l.dense_w + static_cast<size_t>(q) * CW;
    const double* wrow = th + l.dense_w + static_cast<size_t>(q) * CW;
    for (int i = 0; i < CW; ++i) {
      wgrad[i] = dpre * cache.pooled[i];
      d_pooled[i] += dpre * wrow[i];
    }
  }

  // Attention pooling: g[i] = sum_t alpha[t] h[i][t].
  std::vector<double> d_alpha(W, 0.0);
  for (int i = 0; i < CW; ++i) {
    const double* h = concat_row(i);
    const double dg = d_pooled[i];
    for (int t = 0; t < W; ++t) d_alpha[t] += dg * h[t];
  }
  double alpha_dot = 0.0;
  for (int t = 0; t < W; ++t) alpha_dot += cache.att_alpha[t] * d_alpha[t];
  std::vector<double> d_score(W);
  for (int t = 0; t < W; ++t) {
    d_score[t] = cache.att_alpha[t] * (d_alpha[t] - alpha_dot);
  }

  // Attention scorer: s[t] = sum_a v[a] tanh(Wa h + ba)[a][t].
  std::vector<double> d_pre_u(static_cast<size_t>(A) * W);
  for (int a = 0; a < A; ++a) {
    const double* urow = cache.att_u.data() + static_cast<size_t>(a) * W;
    double* drow = d_pre_u.data() + static_cast<size_t>(a) * W;
    const double va = th[l.att_v + a];
    double dv = 0.0;
    for (int t = 0; t < W; ++t) {
      dv += d_score[t] * urow[t];
      drow[t] = d_score[t] * va * (1.0 - urow[t] * urow[t]);
    }
    grad[l.att_v + a] = dv;
    double db = 0.0;
    for (int t = 0; t < W; ++t) db += drow[t];
    grad[l.att_b + a] = db;
  }

  // d h picks up both the pooling path and the scorer path.
  std::vector<double> d_h(static_cast<size_t>(CW) * W);
  for (int i = 0; i < CW; ++i) {
    double* row = d_h.data() + static_cast<size_t>(i) * W;
    const double dg = d_pooled[i];
    for (int t = 0; t < W; ++t) row[t] = dg * cache.att_alpha[t];
  }
  for (int a = 0; a < A; ++a) {
    const double* drow = d_pre_u.data() + static_cast<size_t>(a) * W;
    for (int i = 0; i < CW; ++i) {
      const double wv = th[l.att_w + static_cast<size_t>(a) * CW + i];
      const double* h = concat_row(i);
      double dw = 0.0;
      double* dhrow = d_h.data() + static_cast<size_t>(i) * W;
      for (int t = 0; t < W; ++t) {
        dw += drow[t] * h[t];
        dhrow[t] += wv * drow[t];
      }
      grad[l.att_w + static_cast<size_t>(a) * CW + i] = dw;
    }
  }

  // Convolution paths.
  auto conv_back = [&](int kernel, size_t w_off, size_t b_off,
                       const std::vector<double>& act, int row_offset) {
    const int half = kernel / 2;
    std::vector<double> d_pre(W);
    for (int f = 0; f < F; ++f) {
      const double* arow = act.data() + static_cast<size_t>(f) * W;
      const double* dhrow =
          d_h.data() + static_cast<size_t>(row_offset + f) * W;
      double db = 0.0;
      for (int t = 0; t < W; ++t) {
        d_pre[t] = dhrow[t] * (1.0 - arow[t] * arow[t]);
        db += d_pre[t];
      }
      grad[b_off + f] = db;
      for (int c = 0; c < C; ++c) {
        const double* in = cache.input.data() + static_cast<size_t>(c) * W;
        double* wgrad =
            grad.data() + w_off + (static_cast<size_t>(f) * C + c) * kernel;
        for (int j = 0; j < kernel; ++j) {
          const int o = j - half;
          const int t0 = std::max(0, -o);
          const int t1 = std::min(W, W - o);
          const double* src = in + o;
          double acc = 0.0;
          for (int t = t0; t < t1; ++t) acc += d_pre[t] * src[t];
          wgrad[j] = acc;
        }
      }
    }
  };
  conv_back(arch_.kernel_short, l.conv1_w, l.conv1_b, cache.conv_a, 0);
  conv_back(arch_.kernel_long, l.conv2_w, l.conv2_b, cache.conv_b, F);
}

double ConvAttentionModel::probability(const FeatureWindow& window) const {
  Cache cache;
  return forward(window, cache);
}

std::vector<double> ConvAttentionModel::gradient(const FeatureWindow& window,
                                                 double upstream) const {
  Cache cache;
  forward(window, cache);
  std::vector<double> g;
  backward(cache, upstream, g);
  return g;
}

// --- checkpoints --------------------------------------------------------------

namespace {

nlohmann::json stats_to_json(const RunningStats& s) {
  return nlohmann::json{{"mean", s.mean},
                        {"var", s.var},
                        {"momentum", s.momentum},
                        {"frozen", s.frozen}};
}

RunningStats stats_from_json(const nlohmann::json& j) {
  RunningStats s;
  const auto mean = j.at("mean").get<std::vector<double>>();
  const auto var = j.at("var").get<std::vector<double>>();
  if (mean.size() != s.mean.size() || var.size() != s.var.size()) {
    throw DataError("checkpoint: running stats have wrong channel count");
  }
  std::copy(mean.begin(), mean.end(), s.mean.begin());
  std::copy(var.begin(), var.end(), s.var.begin());
  s.momentum = j.at("momentum").get<double>();
  s.frozen = j.at("frozen").get<bool>();
  return s;
}

}  // namespace

Checkpoint Checkpoint::from_model(const ConvAttentionModel& m, int epochs) {
  Checkpoint c;
  c.kind = "nn";
  c.arch = m.arch();
  c.params = m.params();
  c.stats = m.stats();
  c.trained_window = m.arch().window;
  c.epochs_trained = epochs;
  return c;
}

Checkpoint Checkpoint::from_model(const LogisticModel& m, int window,
                                  int epochs) {
  Checkpoint c;
  c.kind = "logistic";
  c.params = m.params();
  c.stats = m.stats();
  c.trained_window = window;
  c.epochs_trained = epochs;
  return c;
}

ConvAttentionModel Checkpoint::to_nn() const {
  if (kind != "nn" || !arch) {
    throw DataError("checkpoint: kind '" + kind + "' is not an nn checkpoint");
  }
  ConvAttentionModel m(*arch);
  m.set_params(params);
  m.set_stats(stats);
  return m;
}

LogisticModel Checkpoint::to_logistic() const {
  if (kind != "logistic") {
    throw DataError("checkpoint: kind '" + kind +
                    "' is not a logistic checkpoint");
  }
  LogisticModel m;
  m.set_params(params);
  m.set_stats(stats);
  return m;
}

std::string Checkpoint::to_json() const {
  nlohmann::json j;
  j["format"] = "corrmatch-checkpoint";
  j["version"] = kVersion;
  j["kind"] = kind;
  if (arch) {
    j["arch"] = {{"window", arch->window},
                 {"channels", arch->channels},
                 {"kernel_short", arch->kernel_short},
                 {"kernel_long", arch->kernel_long},
                 {"maps", arch->maps},
                 {"attention", arch->attention},
                 {"hidden", arch->hidden}};
  }
  j["params"] = params;
  j["stats"] = stats_to_json(stats);
  j["trained_window"] = trained_window;
  j["epochs_trained"] = epochs_trained;
  return j.dump(2);
}

Checkpoint Checkpoint::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint: invalid JSON: ") + e.what());
  }
  try {
    Checkpoint c;
    if (j.value("format", "") != "corrmatch-checkpoint") {
      throw DataError("checkpoint: missing or wrong format tag");
    }
    c.kind = j.at("kind").get<std::string>();
    if (j.contains("arch")) {
      const auto& a = j.at("arch");
      ArchConfig arch;
      arch.window = a.at("window").get<int>();
      arch.channels = a.at("channels").get<int>();
      arch.kernel_short = a.at("kernel_short").get<int>();
      arch.kernel_long = a.at("kernel_long").get<int>();
      arch.maps = a.at("maps").get<int>();
      arch.attention = a.at("attention").get<int>();
      arch.hidden = a.at("hidden").get<int>();
      c.arch = arch;
    }
    c.params = j.at("params").get<std::vector<double>>();
    c.stats = stats_from_json(j.at("stats"));
    c.trained_window = j.at("trained_window").get<int>();
    c.epochs_trained = j.at("epochs_trained").get<int>();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint: missing field: ") + e.what());
  }
}

void Checkpoint::save(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw DataError("checkpoint: cannot open '" + path + "' for write");
  f << to_json() << '\n';
  if (!f) throw DataError("checkpoint: write to '" + path + "' failed");
}

Checkpoint Checkpoint::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DataError("checkpoint: cannot open '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(f)),
                   std::istreambuf_iterator<char>());
  return from_json(text);
}

}  // namespace corrmatch::estimator
