#include "corrmatch/metrics.hpp"

namespace corrmatch::metrics {

namespace {

bool predicted_participant(const LabeledOutcome& o,
                           const std::set<std::string>& participants) {
  return o.predicted.kind == Prediction::Kind::id &&
         participants.contains(o.predicted.id);
}

bool actual_participant(const LabeledOutcome& o,
                        const std::set<std::string>& participants) {
  return o.actual.has_value() && participants.contains(*o.actual);
}

bool correct(const LabeledOutcome& o,
             const std::set<std::string>& participants) {
  return predicted_participant(o, participants) && o.actual.has_value() &&
         o.predicted.id == *o.actual;
}

// One precision/recall pass; `weight` is 1 for counting or the duration for
// the time-weighted variants.
template <typename WeightFn>
Metric ratio(std::span<const LabeledOutcome> outcomes,
             const std::set<std::string>& participants, bool recall,
             WeightFn weight) {
  double num = 0.0, den = 0.0;
  for (const auto& o : outcomes) {
    const bool in_denominator = recall ? actual_participant(o, participants)
                                       : predicted_participant(o, participants);
    if (!in_denominator) continue;
    den += weight(o);
    if (correct(o, participants)) num += weight(o);
  }
  if (den == 0.0) return std::nullopt;
  return num / den;
}

}  // namespace

Metric participant_precision(std::span<const LabeledOutcome> outcomes,
                             const std::set<std::string>& participants) {
  return ratio(outcomes, participants, /*recall=*/false,
               [](const LabeledOutcome&) { return 1.0; });
}

Metric participant_recall(std::span<const LabeledOutcome> outcomes,
                          const std::set<std::string>& participants) {
  return ratio(outcomes, participants, /*recall=*/true,
               [](const LabeledOutcome&) { return 1.0; });
}

Metric participant_f1(Metric pp, Metric pr) {
  if (!pp || !pr) return std::nullopt;
  if (*pp == 0.0 && *pr == 0.0) return 0.0;
  return 2.0 * (*pp) * (*pr) / (*pp + *pr);
}

MetricsReport compute_metrics(std::span<const LabeledOutcome> outcomes,
                              const std::set<std::string>& participants) {
  MetricsReport r;
  r.pp = participant_precision(outcomes, participants);
  r.pr = participant_recall(outcomes, participants);
  r.pf = participant_f1(r.pp, r.pr);
  const auto duration = [](const LabeledOutcome& o) { return o.duration_s; };
  r.pp_w = ratio(outcomes, participants, /*recall=*/false, duration);
  r.pr_w = ratio(outcomes, participants, /*recall=*/true, duration);
  r.pf_w = participant_f1(r.pp_w, r.pr_w);
  for (const auto& o : outcomes) {
    if (o.predicted.kind == Prediction::Kind::null_id) ++r.null_predictions;
    if (o.predicted.kind == Prediction::Kind::undefined) {
      ++r.undefined_predictions;
    }
  }
  return r;
}

}  // namespace corrmatch::metrics
