#include <doctest.h>

#include <algorithm>
#include <random>

#include "corrmatch/metrics.hpp"

using namespace corrmatch;
using namespace corrmatch::metrics;

namespace {

LabeledOutcome outcome(std::string id, Prediction pred,
                       std::optional<std::string> actual,
                       double duration = 1.0) {
  return {std::move(id), std::move(pred), std::move(actual), duration};
}

// Independent brute-force oracle: builds the index sets of the defining
// formulas explicitly, then measures them (by count or duration) in outcome
// order.
struct OracleResult {
  Metric pp, pr, pf;
};

OracleResult brute_force(const std::vector<LabeledOutcome>& outcomes,
                         const std::set<std::string>& lp, bool weighted) {
  std::vector<size_t> predicted_p, actual_p, correct;
  for (size_t j = 0; j < outcomes.size(); ++j) {
    const auto& o = outcomes[j];
    const bool pred_in_lp =
        o.predicted.kind == Prediction::Kind::id && lp.contains(o.predicted.id);
    const bool act_in_lp = o.actual && lp.contains(*o.actual);
    if (pred_in_lp) predicted_p.push_back(j);
    if (act_in_lp) actual_p.push_back(j);
    if (pred_in_lp && o.actual && o.predicted.id == *o.actual) {
      correct.push_back(j);
    }
  }
  const auto measure = [&](const std::vector<size_t>& set) {
    double m = 0.0;
    for (size_t j : set) m += weighted ? outcomes[j].duration_s : 1.0;
    return m;
  };
  OracleResult r;
  const double den_p = measure(predicted_p);
  const double den_r = measure(actual_p);
  const double num = measure(correct);
  if (den_p > 0.0) r.pp = num / den_p;
  if (den_r > 0.0) r.pr = num / den_r;
  if (r.pp && r.pr) {
    r.pf = (*r.pp == 0.0 && *r.pr == 0.0) ? 0.0
                                          : 2.0 * *r.pp * *r.pr / (*r.pp + *r.pr);
  }
  return r;
}

}  // namespace

TEST_CASE("hand-computed three-track case") {
  const std::set<std::string> lp = {"A", "B"};
  const std::vector<LabeledOutcome> outcomes = {
      outcome("t1", Prediction::of("A"), "A"),
      outcome("t2", Prediction::null_id(), "B"),
      outcome("t3", Prediction::of("B"), "B"),
  };
  const auto pp = participant_precision(outcomes, lp);
  const auto pr = participant_recall(outcomes, lp);
  const auto pf = participant_f1(pp, pr);
  REQUIRE(pp.has_value());
  REQUIRE(pr.has_value());
  REQUIRE(pf.has_value());
  CHECK(*pp == 1.0);
  CHECK(*pr == doctest::Approx(2.0 / 3.0));
  CHECK(*pf == doctest::Approx(0.8));
}

TEST_CASE("empty denominators are undefined, not numbers") {
  const std::set<std::string> lp = {"A", "B"};
  const std::vector<LabeledOutcome> all_null = {
      outcome("t1", Prediction::null_id(), "A"),
      outcome("t2", Prediction::null_id(), std::nullopt),
  };
  CHECK(!participant_precision(all_null, lp).has_value());
  CHECK(participant_recall(all_null, lp) == 0.0);

  const std::vector<LabeledOutcome> no_participants = {
      outcome("t1", Prediction::null_id(), std::nullopt),
  };
  CHECK(!participant_recall(no_participants, lp).has_value());

  // Undefined propagates through PF.
  CHECK(!participant_f1(std::nullopt, 0.5).has_value());
  CHECK(!participant_f1(0.5, std::nullopt).has_value());
}

TEST_CASE("undefined predictions count as incorrect") {
  const std::set<std::string> lp = {"A", "B"};
  const std::vector<LabeledOutcome> outcomes = {
      outcome("t1", Prediction::undefined(), "A"),
      outcome("t2", Prediction::undefined(), "B"),
  };
  CHECK(*participant_recall(outcomes, lp) == 0.0);
  CHECK(!participant_precision(outcomes, lp).has_value());
}

TEST_CASE("perfect predictions give 1.0, degenerate f1 convention") {
  const std::set<std::string> lp = {"A", "B"};
  const std::vector<LabeledOutcome> outcomes = {
      outcome("t1", Prediction::of("A"), "A"),
      outcome("t2", Prediction::of("B"), "B"),
  };
  CHECK(*participant_precision(outcomes, lp) == 1.0);
  CHECK(*participant_recall(outcomes, lp) == 1.0);
  CHECK(*participant_f1(1.0, 1.0) == 1.0);
  CHECK(*participant_f1(0.0, 0.0) == 0.0);
  CHECK(*participant_f1(1.0, 2.0 / 3.0) == doctest::Approx(0.8));
}

TEST_CASE("time weighting: equal durations reduce to unweighted") {
  const std::set<std::string> lp = {"A", "B", "C"};
  const std::vector<LabeledOutcome> outcomes = {
      outcome("t1", Prediction::of("A"), "A", 7.0),
      outcome("t2", Prediction::of("B"), "C", 7.0),
      outcome("t3", Prediction::null_id(), "B", 7.0),
      outcome("t4", Prediction::of("C"), "C", 7.0),
  };
  const auto r = compute_metrics(outcomes, lp);
  CHECK(std::fabs(*r.pp - *r.pp_w) < 1e-12);
  CHECK(std::fabs(*r.pr - *r.pr_w) < 1e-12);
  CHECK(std::fabs(*r.pf - *r.pf_w) < 1e-12);
}

TEST_CASE("time weighting: a long correct track outweighs a short error") {
  const std::set<std::string> lp = {"A", "B", "C"};
  const std::vector<LabeledOutcome> outcomes = {
      outcome("t1", Prediction::of("A"), "A", 400.0),
      outcome("t2", Prediction::of("B"), "C", 5.0),  // short wrong track
  };
  const auto r = compute_metrics(outcomes, lp);
  CHECK(*r.pp == doctest::Approx(0.5));
  CHECK(*r.pp_w == doctest::Approx(400.0 / 405.0));
  CHECK(*r.pp_w > *r.pp);
}

TEST_CASE("time weighting: scale invariance") {
  const std::set<std::string> lp = {"A", "B"};
  std::vector<LabeledOutcome> outcomes = {
      outcome("t1", Prediction::of("A"), "A", 12.0),
      outcome("t2", Prediction::of("A"), "B", 31.0),
      outcome("t3", Prediction::null_id(), "B", 5.0),
  };
  const auto before = compute_metrics(outcomes, lp);
  for (auto& o : outcomes) o.duration_s *= 10.0;
  const auto after = compute_metrics(outcomes, lp);
  CHECK(std::fabs(*before.pp_w - *after.pp_w) < 1e-12);
  CHECK(std::fabs(*before.pr_w - *after.pr_w) < 1e-12);
  CHECK(std::fabs(*before.pf_w - *after.pf_w) < 1e-12);
}

TEST_CASE("brute-force oracle equivalence on random outcome sets") {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> nd(0, 20);
  std::uniform_int_distribution<int> pid(0, 4);
  std::uniform_int_distribution<int> kind(0, 5);
  std::uniform_real_distribution<double> dur(0.5, 100.0);
  const std::set<std::string> lp = {"P0", "P1", "P2", "P3", "P4"};

  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<LabeledOutcome> outcomes;
    const int n = nd(rng);
    for (int j = 0; j < n; ++j) {
      std::optional<std::string> actual;
      if (kind(rng) > 0) actual = "P" + std::to_string(pid(rng));
      Prediction pred;
      switch (kind(rng)) {
        case 0: pred = Prediction::undefined(); break;
        case 1: pred = Prediction::null_id(); break;
        case 2: pred = actual ? Prediction::of(*actual)
                              : Prediction::null_id(); break;
        default: pred = Prediction::of("P" + std::to_string(pid(rng)));
      }
      outcomes.push_back(outcome("t" + std::to_string(j), pred, actual,
                                 dur(rng)));
    }
    const auto report = compute_metrics(outcomes, lp);
    const auto plain = brute_force(outcomes, lp, false);
    const auto weighted = brute_force(outcomes, lp, true);
    CHECK(report.pp == plain.pp);  // exact, including undefined-ness
    CHECK(report.pr == plain.pr);
    CHECK(report.pf == plain.pf);
    CHECK(report.pp_w == weighted.pp);
    CHECK(report.pr_w == weighted.pr);
    CHECK(report.pf_w == weighted.pf);

    // Harmonic-mean bounds and range.
    if (report.pf) {
      CHECK(*report.pf >= std::min(*report.pp, *report.pr) - 1e-15);
      CHECK(*report.pf <= std::max(*report.pp, *report.pr) + 1e-15);
    }
    for (const Metric& m :
         {report.pp, report.pr, report.pf, report.pp_w, report.pr_w,
          report.pf_w}) {
      if (m) {
        CHECK(*m >= 0.0);
        CHECK(*m <= 1.0);
      }
    }

    // Permutation invariance (counting metrics are exact; weighted sums are
    // float-order sensitive only at rounding level).
    std::vector<LabeledOutcome> shuffled = outcomes;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto again = compute_metrics(shuffled, lp);
    CHECK(again.pp == report.pp);
    CHECK(again.pr == report.pr);
    if (report.pp_w) {
      CHECK(*again.pp_w == doctest::Approx(*report.pp_w).epsilon(1e-12));
    }
    if (report.pr_w) {
      CHECK(*again.pr_w == doctest::Approx(*report.pr_w).epsilon(1e-12));
    }
  }
}

TEST_CASE("report counts null and undefined predictions") {
  const std::set<std::string> lp = {"A"};
  const std::vector<LabeledOutcome> outcomes = {
      outcome("t1", Prediction::of("A"), "A"),
      outcome("t2", Prediction::null_id(), std::nullopt),
      outcome("t3", Prediction::null_id(), std::nullopt),
      outcome("t4", Prediction::undefined(), "A"),
  };
  const auto r = compute_metrics(outcomes, lp);
  CHECK(r.null_predictions == 2);
  CHECK(r.undefined_predictions == 1);
}
