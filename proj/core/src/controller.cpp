#include "mtag/controller.hpp"

#include <stdexcept>

namespace mtag {

namespace {

void validate_policy(const StopPolicy& policy) {
  if (!(policy.threshold > 0.0 && policy.threshold < 1.0)) {
    throw std::invalid_argument("threshold must lie strictly in (0, 1)");
  }
  if (policy.min_sessions < 2) {
    throw std::invalid_argument(
        "min_sessions must be at least 2: the estimators need two sessions");
  }
  if (policy.max_sessions < policy.min_sessions) {
    throw std::invalid_argument("max_sessions must be >= min_sessions");
  }
  // p_hat^R underflows double precision long before 64 sessions for any
  // realistic error probability; further sessions carry no information.
  if (policy.max_sessions > 64) {
    throw std::invalid_argument("max_sessions must be at most 64");
  }
  if (policy.margin_sessions < 0) {
    throw std::invalid_argument("margin_sessions must be non-negative");
  }
  if (policy.bias_addend < 0.0) {
    throw std::invalid_argument("bias_addend must be non-negative");
  }
}

}  // namespace

bool should_continue(const EstimateReport& report, const StopPolicy& policy) {
  return report.p_m_hat + policy.bias_addend > policy.threshold;
}

SessionLog run_sequential(SessionSource& source, Estimator estimator,
                          const StopPolicy& policy) {
  if (estimator == Estimator::TwoSession) {
    throw std::invalid_argument(
        "sequential control needs an estimator defined for any session "
        "count; use rme, regm or schnabel");
  }
  validate_policy(policy);

  SessionLog log;
  log.estimator = estimator;
  log.history = ReadHistory(source.tag_count());

  RunningTally tally(source.tag_count());
  int decision_at = -1;
  int sessions = 0;
  while (sessions < policy.max_sessions) {
    auto row = source.next_session();
    tally.add_session(row);
    log.history.append_session(std::move(row));
    ++sessions;

    if (sessions < policy.min_sessions) continue;

    log.reports.push_back(
        estimate(estimator, tally.multiplicity(), tally.schnabel()));
    if (decision_at < 0 && !should_continue(log.reports.back(), policy)) {
      decision_at = sessions;
    }
    if (decision_at >= 0 &&
        sessions >= decision_at + policy.margin_sessions) {
      break;
    }
  }

  log.stopped_at = sessions;
  log.cap_reached = decision_at < 0;
  return log;
}

}  // namespace mtag
