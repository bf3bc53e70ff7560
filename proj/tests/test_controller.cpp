#include <doctest.h>

#include <algorithm>
#include <iterator>
#include <stdexcept>

#include "mtag/controller.hpp"

using namespace mtag;

namespace {

EstimateReport report_with(double p_m_hat) {
  EstimateReport report;
  report.p_m_hat = p_m_hat;
  report.sessions = 2;
  return report;
}

}  // namespace

TEST_CASE("threshold rule") {
  StopPolicy policy;
  policy.threshold = 1e-5;
  CHECK_FALSE(should_continue(report_with(2e-6), policy));
  CHECK(should_continue(report_with(1.02e-5), policy));

  policy.bias_addend = 1e-5;
  CHECK(should_continue(report_with(5e-6), policy));
}

TEST_CASE("error-free population stops at the session minimum") {
  StopPolicy policy;
  IndependentSessionSource source({500, 0.0}, 1);
  const SessionLog log = run_sequential(source, Estimator::Regm, policy);
  CHECK(log.stopped_at == 2);
  CHECK_FALSE(log.cap_reached);
  CHECK(log.reports.size() == 1);
  CHECK(log.reports.front().p_m_hat == 0.0);
}

TEST_CASE("margin adds sessions after the decision") {
  StopPolicy policy;
  policy.margin_sessions = 3;
  IndependentSessionSource source({500, 0.0}, 1);
  const SessionLog log = run_sequential(source, Estimator::Regm, policy);
  CHECK(log.stopped_at == 5);
  CHECK(log.reports.size() == 4);
  CHECK_FALSE(log.cap_reached);
}

TEST_CASE("margin shifts the stop by exactly its size") {
  for (const int margin : {0, 1, 2}) {
    StopPolicy policy;
    policy.margin_sessions = margin;
    IndependentSessionSource source({500, 0.1}, 42);
    const SessionLog log = run_sequential(source, Estimator::Regm, policy);
    StopPolicy bare;
    IndependentSessionSource same({500, 0.1}, 42);
    const SessionLog reference = run_sequential(same, Estimator::Regm, bare);
    CHECK(log.stopped_at == reference.stopped_at + margin);
  }
}

TEST_CASE("unreadable population runs into the session cap") {
  StopPolicy policy;
  policy.max_sessions = 6;
  IndependentSessionSource source({100, 1.0}, 5);
  const SessionLog log = run_sequential(source, Estimator::Regm, policy);
  CHECK(log.stopped_at == 6);
  CHECK(log.cap_reached);
  for (const EstimateReport& report : log.reports) {
    CHECK(report.p_m_hat == 1.0);
  }
}

TEST_CASE("stop session stays within policy bounds") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    StopPolicy policy;
    policy.max_sessions = 32;
    IndependentSessionSource source({300, 0.15}, seed);
    const SessionLog log = run_sequential(source, Estimator::Regm, policy);
    CHECK(log.stopped_at >= policy.min_sessions);
    CHECK(log.stopped_at <= policy.max_sessions);
  }
}

TEST_CASE("tighter thresholds never stop earlier") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    StopPolicy loose;
    loose.threshold = 1e-3;
    StopPolicy tight;
    tight.threshold = 1e-7;
    IndependentSessionSource a({400, 0.1}, seed);
    IndependentSessionSource b({400, 0.1}, seed);
    const SessionLog loose_log = run_sequential(a, Estimator::Regm, loose);
    const SessionLog tight_log = run_sequential(b, Estimator::Regm, tight);
    CHECK(tight_log.stopped_at >= loose_log.stopped_at);
  }
}

TEST_CASE("correlated sources drive the controller as well") {
  StopPolicy policy;
  policy.margin_sessions = 2;
  CorrelatedSessionSource source(derive_correlation(0.1, 0.3), 500, 7);
  const SessionLog log = run_sequential(source, Estimator::Schnabel, policy);
  CHECK(log.stopped_at >= 4);
  CHECK(log.history.sessions() == log.stopped_at);
}

TEST_CASE("median stop session tracks the true threshold crossing") {
  // Full-scale version (1000 trials) lives in the acceptance suite.
  StopPolicy policy;
  int stops[100];
  for (int trial = 0; trial < 100; ++trial) {
    IndependentSessionSource source({500, 0.1},
                                    500 + static_cast<std::uint64_t>(trial));
    stops[trial] = run_sequential(source, Estimator::Regm, policy).stopped_at;
  }
  std::sort(std::begin(stops), std::end(stops));
  const double median = 0.5 * (stops[49] + stops[50]);
  CHECK(median >= 7.0);
  CHECK(median <= 9.0);
}

TEST_CASE("policy and estimator validation") {
  IndependentSessionSource source({10, 0.1}, 1);
  StopPolicy policy;
  CHECK_THROWS_AS(run_sequential(source, Estimator::TwoSession, policy),
                  std::invalid_argument);
  policy.min_sessions = 1;
  CHECK_THROWS_AS(run_sequential(source, Estimator::Regm, policy),
                  std::invalid_argument);
  policy.min_sessions = 4;
  policy.max_sessions = 3;
  CHECK_THROWS_AS(run_sequential(source, Estimator::Regm, policy),
                  std::invalid_argument);
  policy = StopPolicy{};
  policy.max_sessions = 100;
  CHECK_THROWS_AS(run_sequential(source, Estimator::Regm, policy),
                  std::invalid_argument);
  policy = StopPolicy{};
  policy.threshold = 0.0;
  CHECK_THROWS_AS(run_sequential(source, Estimator::Regm, policy),
                  std::invalid_argument);
}
