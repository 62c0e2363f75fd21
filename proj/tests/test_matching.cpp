#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>

#include "corrmatch/matching.hpp"

using namespace corrmatch;
using namespace corrmatch::matching;

namespace {

StepScore score(int64_t step, std::string t, std::string m, double p,
                double r = 1.0) {
  return {step, std::move(t), std::move(m), p, r};
}

// Feeds a pair a constant probability for `n` steps.
void feed(MatchState& state, const std::string& t, const std::string& m,
          double p, int n = 1, int64_t step0 = 0, double r = 1.0) {
  for (int i = 0; i < n; ++i) state.ingest(score(step0 + i, t, m, p, r));
}

int count_kind(const std::vector<Decision>& ds, DecisionKind k) {
  return static_cast<int>(
      std::count_if(ds.begin(), ds.end(),
                    [&](const Decision& d) { return d.kind == k; }));
}

}  // namespace

TEST_CASE("ingest: reliability filter is strict") {
  MatchState state({0.3, 0.7, 1});
  state.ingest(score(0, "t", "m", 0.9, 0.3));  // r == R_csdr: not counted
  CHECK(!state.reliable_mean("t", "m").has_value());
  state.ingest(score(1, "t", "m", 0.9, 0.300001));
  CHECK(state.reliable_mean("t", "m") == doctest::Approx(0.9));
}

TEST_CASE("ingest: reliable mean accumulates") {
  MatchState state({0.1, 0.7, 1});
  feed(state, "t", "m", 0.9);
  CHECK(*state.reliable_mean("t", "m") == doctest::Approx(0.9));

  MatchState two({0.1, 0.7, 1});
  two.ingest(score(0, "t", "m", 0.8));
  two.ingest(score(1, "t", "m", 0.6));
  CHECK(*two.reliable_mean("t", "m") == doctest::Approx(0.7));
}

TEST_CASE("ingest: out-of-order step is an ordering error") {
  MatchState state({0.1, 0.7, 1});
  state.ingest(score(5, "t", "m", 0.5));
  CHECK_THROWS_AS(state.ingest(score(5, "t", "m", 0.5)), OrderingError);
  CHECK_THROWS_AS(state.ingest(score(4, "t", "m", 0.5)), OrderingError);
  state.ingest(score(6, "t", "m", 0.5));  // strictly increasing is fine
}

TEST_CASE("decide: unique acceptance after same-call negative removal") {
  // Thresholds adopted for mid-size windows: (R_csdr, P_acpt) = (0.1, 0.7).
  MatchState state({0.1, 0.7, 1});
  feed(state, "t", "m1", 0.95, 3);
  feed(state, "t", "m2", 0.10, 3);
  const auto decisions = state.decide();
  REQUIRE(decisions.size() == 2);
  CHECK(decisions[0].kind == DecisionKind::negative);
  CHECK(decisions[0].sensor_id == "m2");
  CHECK(decisions[1].kind == DecisionKind::positive);
  CHECK(decisions[1].sensor_id == "m1");
  const auto a = state.finalize();
  CHECK(a.at("t").state == Assignment::State::assigned);
  CHECK(a.at("t").sensor_id == "m1");
}

TEST_CASE("decide: two candidates above the bar defer") {
  MatchState state({0.1, 0.9, 1});
  feed(state, "t", "m1", 0.95, 3);
  feed(state, "t", "m2", 0.92, 3);
  const auto decisions = state.decide();
  REQUIRE(decisions.size() == 1);
  CHECK(decisions[0].kind == DecisionKind::deferred);
  CHECK(state.finalize().at("t").state == Assignment::State::undefined);
}

TEST_CASE("decide: probability inside the threshold band defers") {
  MatchState state({0.1, 0.7, 1});
  feed(state, "t", "m1", 0.6, 3);  // neither > 0.7 nor < 0.3
  const auto decisions = state.decide();
  REQUIRE(decisions.size() == 1);
  CHECK(decisions[0].kind == DecisionKind::deferred);
}

TEST_CASE("decide: undefined competitors do not block acceptance") {
  MatchState state({0.1, 0.7, 2});
  feed(state, "t", "m1", 0.95, 4);
  feed(state, "t", "m2", 0.95, 1);  // below n_min: undefined, non-exceeding
  const auto decisions = state.decide();
  REQUIRE(decisions.size() == 1);
  CHECK(decisions[0].kind == DecisionKind::positive);
  CHECK(decisions[0].sensor_id == "m1");
}

TEST_CASE("decide: n_min gates every decision") {
  MatchState state({0.1, 0.7, 3});
  feed(state, "t", "m1", 0.95, 2);
  CHECK(state.decide().empty());  // no candidate is decidable yet
  feed(state, "t", "m1", 0.95, 1, 10);
  const auto decisions = state.decide();
  REQUIRE(decisions.size() == 1);
  CHECK(decisions[0].kind == DecisionKind::positive);
}

TEST_CASE("decisions are permanent") {
  MatchState state({0.1, 0.7, 1});
  feed(state, "t", "m1", 0.95, 2);
  feed(state, "t", "m2", 0.05, 2);
  state.decide();
  REQUIRE(state.confirmed_positive().at("t") == "m1");

  // Contradictory evidence afterwards: logged for the negative pair,
  // accumulated but decision-neutral for the positive pair.
  feed(state, "t", "m1", 0.01, 20, 100);
  feed(state, "t", "m2", 0.99, 20, 100);
  CHECK(state.contradiction_count() == 20);
  const auto decisions = state.decide();
  CHECK(count_kind(decisions, DecisionKind::positive) == 0);
  CHECK(state.confirmed_positive().at("t") == "m1");
  CHECK(state.confirmed_negative().contains({"t", "m2"}));
  CHECK(state.finalize().at("t").sensor_id == "m1");
}

TEST_CASE("finalize: exhausted candidates map to null, no evidence to undefined") {
  MatchState state({0.1, 0.7, 1});
  feed(state, "t_null", "m1", 0.05, 2);
  feed(state, "t_null", "m2", 0.10, 2);
  // Only unreliable points for t_und: candidate exists but stays undefined.
  feed(state, "t_und", "m1", 0.9, 3, 0, 0.05);
  state.decide();
  const auto a = state.finalize();
  CHECK(a.at("t_null").state == Assignment::State::null_id);
  CHECK(a.at("t_und").state == Assignment::State::undefined);
}

TEST_CASE("a sensor may win several tracks; a track never two sensors") {
  MatchState state({0.1, 0.7, 1});
  feed(state, "t1", "m", 0.95, 2);
  feed(state, "t2", "m", 0.93, 2);  // duplicated track of the same person
  feed(state, "t3", "m1", 0.92, 2);
  feed(state, "t3", "m2", 0.91, 2);
  state.decide();
  const auto a = state.finalize();
  CHECK(a.at("t1").sensor_id == "m");
  CHECK(a.at("t2").sensor_id == "m");
  CHECK(a.at("t3").state == Assignment::State::undefined);  // two above bar
}

TEST_CASE("with R_csdr = 0 and positive reliabilities the filter degenerates") {
  MatchState state({0.0, 0.7, 1});
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> up(0.0, 1.0);
  std::uniform_real_distribution<double> ur(1e-6, 1.0);
  double sum = 0.0;
  const int n = 50;
  for (int i = 0; i < n; ++i) {
    const double p = up(rng);
    sum += p;
    state.ingest(score(i, "t", "m", p, ur(rng)));
  }
  CHECK(*state.reliable_mean("t", "m") == doctest::Approx(sum / n));
}

TEST_CASE("raising p_acpt never promotes a single-candidate deferral") {
  // With one defined candidate, acceptance is monotone in the threshold.
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> up(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double p = up(rng);
    MatchState low({0.1, 0.6, 1});
    MatchState high({0.1, 0.9, 1});
    feed(low, "t", "m", p, 3);
    feed(high, "t", "m", p, 3);
    low.decide();
    high.decide();
    const bool low_positive = low.confirmed_positive().contains("t");
    const bool high_positive = high.confirmed_positive().contains("t");
    if (!low_positive) CHECK(!high_positive);
  }
}

TEST_CASE("final assignments are ingestion-order independent") {
  // Random score sequences per pair; arbitrary interleavings across pairs
  // must produce identical final assignments when decisions are taken on
  // the full evidence.
  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> up(0.0, 1.0);
  const std::vector<std::string> tracks = {"t1", "t2", "t3"};
  const std::vector<std::string> sensors = {"m1", "m2", "m3", "m4"};

  std::map<std::pair<std::string, std::string>, std::vector<StepScore>> seqs;
  for (const auto& t : tracks) {
    for (const auto& m : sensors) {
      auto& seq = seqs[{t, m}];
      const int n = 3 + static_cast<int>(up(gen) * 8);
      for (int i = 0; i < n; ++i) {
        seq.push_back(score(i, t, m, up(gen), up(gen)));
      }
    }
  }

  auto run = [&](std::mt19937_64& order_rng) {
    MatchState state({0.3, 0.7, 1});
    // Random interleaving that preserves each pair's step order.
    std::vector<std::pair<const std::vector<StepScore>*, size_t>> queues;
    for (const auto& [key, seq] : seqs) queues.push_back({&seq, 0});
    size_t remaining = 0;
    for (const auto& [seq, pos] : queues) remaining += seq->size();
    while (remaining > 0) {
      std::uniform_int_distribution<size_t> pick(0, queues.size() - 1);
      auto& [seq, pos] = queues[pick(order_rng)];
      if (pos < seq->size()) {
        state.ingest((*seq)[pos++]);
        --remaining;
      }
    }
    state.decide();
    return state.finalize();
  };

  std::mt19937_64 first_rng(1000);
  const auto reference = run(first_rng);
  for (int shuffle = 1; shuffle <= 100; ++shuffle) {
    std::mt19937_64 rng(1000 + shuffle);
    const auto got = run(rng);
    REQUIRE(got.size() == reference.size());
    for (const auto& [track, a] : reference) {
      CHECK(got.at(track).state == a.state);
      CHECK(got.at(track).sensor_id == a.sensor_id);
    }
  }
}

TEST_CASE("match config validation") {
  CHECK_THROWS_AS(MatchState({0.1, 0.4, 1}), ConfigError);
  CHECK_THROWS_AS(MatchState({-0.1, 0.7, 1}), ConfigError);
  CHECK_THROWS_AS(MatchState({0.1, 0.7, 0}), ConfigError);
  CHECK(default_thresholds(100).r_csdr == doctest::Approx(0.3));
  CHECK(default_thresholds(100).p_acpt == doctest::Approx(0.7));
  CHECK(default_thresholds(300).r_csdr == doctest::Approx(0.1));
  CHECK(default_thresholds(600).p_acpt == doctest::Approx(0.9));
}

TEST_CASE("ingest rejects out-of-range values") {
  MatchState state({0.1, 0.7, 1});
  CHECK_THROWS_AS(state.ingest(score(0, "t", "m", 1.2)), DataError);
  CHECK_THROWS_AS(state.ingest(score(0, "t", "m", 0.5, -0.1)), DataError);
}
