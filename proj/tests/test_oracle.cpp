#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "mtag/estimators.hpp"
#include "mtag/oracle.hpp"
#include "mtag/session_sim.hpp"

using namespace mtag;

namespace {

double weight_of(const std::vector<OutcomeWeight>& outcomes,
                 std::int64_t both, std::int64_t one) {
  for (const OutcomeWeight& outcome : outcomes) {
    if (outcome.read_in_both == both && outcome.read_in_one == one) {
      return outcome.probability;
    }
  }
  return -1.0;
}

}  // namespace

TEST_CASE("single-tag outcome distribution at p=0.5") {
  const auto outcomes = enumerate_two_session_outcomes(1, 0.5);
  CHECK(outcomes.size() == 3);
  CHECK(weight_of(outcomes, 1, 0) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(weight_of(outcomes, 0, 1) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(weight_of(outcomes, 0, 0) == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("error-free population concentrates on the all-read outcome") {
  const auto outcomes = enumerate_two_session_outcomes(2, 0.0);
  double total = 0.0;
  for (const OutcomeWeight& outcome : outcomes) total += outcome.probability;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(weight_of(outcomes, 2, 0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("outcome weights are normalized over the full grid") {
  for (std::int64_t n = 1; n <= kMaxEnumerationTags; ++n) {
    for (int step = 0; step <= 10; ++step) {
      const double p = step / 10.0;
      double total = 0.0;
      for (const OutcomeWeight& outcome :
           enumerate_two_session_outcomes(n, p)) {
        total += outcome.probability;
      }
      CHECK(std::fabs(total - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("population size outside 1..12 is rejected") {
  CHECK_THROWS_AS(enumerate_two_session_outcomes(0, 0.5), std::out_of_range);
  CHECK_THROWS_AS(enumerate_two_session_outcomes(13, 0.5), std::out_of_range);
  CHECK_THROWS_AS(exact_expected_cardinality_estimate(5, 1.0),
                  std::invalid_argument);
}

TEST_CASE("exact estimator mean at fixed points") {
  CHECK(std::fabs(exact_expected_error_estimate(3, 0.5) - 0.596875) <= 1e-12);
  CHECK(exact_expected_error_estimate(1, 0.0) == 0.0);
  CHECK(exact_expected_error_estimate(1, 1.0) == 1.0);
}

TEST_CASE("enumerated estimator mean equals the closed form") {
  for (std::int64_t n = 1; n <= 6; ++n) {
    for (int step = 1; step <= 9; ++step) {
      const double p = step / 10.0;
      const double enumerated = exact_expected_error_estimate(n, p);
      const double closed =
          expected_two_session_estimate(static_cast<double>(n), p);
      CHECK(std::fabs(enumerated - closed) <= 1e-12);
    }
  }
}

TEST_CASE("cardinality estimate is unbiased under the true p") {
  for (std::int64_t n = 1; n <= 6; ++n) {
    for (int step = 1; step <= 9; ++step) {
      const double p = step / 10.0;
      CHECK(std::fabs(exact_expected_cardinality_estimate(n, p) -
                      static_cast<double>(n)) <= 1e-9);
    }
  }
  CHECK(exact_expected_cardinality_estimate(5, 0.3) ==
        doctest::Approx(5.0).epsilon(1e-12));
  CHECK(std::fabs(exact_expected_cardinality_estimate(12, 0.9) - 12.0) <=
        1e-9);
  CHECK(exact_expected_cardinality_estimate(1, 0.0) ==
        doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("the error estimator is biased high for small populations") {
  for (std::int64_t n = 1; n <= 8; ++n) {
    for (int step = 1; step <= 9; ++step) {
      const double p = step / 10.0;
      CHECK(exact_expected_error_estimate(n, p) >= p);
    }
  }
}

TEST_CASE("enumeration agrees with a Monte Carlo run of the estimator") {
  const std::int64_t n_tags = 5;
  const double p = 0.3;
  const int trials = 20000;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    const ReadHistory history = simulate_independent(
        PopulationParams{n_tags, p}, 2, 9000 + static_cast<std::uint64_t>(trial));
    const TallyResult tallied = tally(history);
    const double estimate = two_session_error_probability(
        tallied.multiplicity.counts[0], tallied.multiplicity.counts[1]);
    sum += estimate;
    sum_sq += estimate * estimate;
  }
  const double mean = sum / trials;
  const double variance = sum_sq / trials - mean * mean;
  const double standard_error = std::sqrt(variance / trials);
  const double exact = exact_expected_error_estimate(n_tags, p);
  CHECK(std::fabs(mean - exact) <= 4.0 * standard_error);
}
