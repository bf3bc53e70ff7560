#include "mtag/oracle.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace mtag {

namespace {

// Exact factorials up to the enumeration cap; multinomial coefficients are
// computed in integer arithmetic before conversion to double.
constexpr std::array<std::uint64_t, 13> kFactorial = {
    1,       1,        2,        6,         24,        120,      720,
    5040,    40320,    362880,   3628800,   39916800,  479001600};

double multinomial_coefficient(std::int64_t n, std::int64_t a, std::int64_t b,
                               std::int64_t c) {
  return static_cast<double>(
      kFactorial[static_cast<std::size_t>(n)] /
      (kFactorial[static_cast<std::size_t>(a)] *
       kFactorial[static_cast<std::size_t>(b)] *
       kFactorial[static_cast<std::size_t>(c)]));
}

// The two-session estimator itself, restated here so the enumeration stays
// an independent check of the closed form.
double error_estimate(std::int64_t read_in_both, std::int64_t read_in_one) {
  if (read_in_one == 0) return read_in_both == 0 ? 1.0 : 0.0;
  return static_cast<double>(read_in_one) /
         static_cast<double>(2 * read_in_both + read_in_one);
}

void check_supported(std::int64_t n_tags) {
  if (n_tags < 1 || n_tags > kMaxEnumerationTags) {
    throw std::out_of_range("exact enumeration supports 1..12 tags");
  }
}

}  // namespace

std::vector<OutcomeWeight> enumerate_two_session_outcomes(std::int64_t n_tags,
                                                          double p) {
  check_supported(n_tags);
  std::vector<OutcomeWeight> outcomes;
  outcomes.reserve(
      static_cast<std::size_t>((n_tags + 1) * (n_tags + 2) / 2));
  const double read_both = (1.0 - p) * (1.0 - p);
  const double read_one = 2.0 * (1.0 - p) * p;
  const double read_none = p * p;
  for (std::int64_t both = 0; both <= n_tags; ++both) {
    for (std::int64_t one = 0; one <= n_tags - both; ++one) {
      const std::int64_t none = n_tags - both - one;
      const double probability =
          multinomial_coefficient(n_tags, both, one, none) *
          std::pow(read_both, static_cast<double>(both)) *
          std::pow(read_one, static_cast<double>(one)) *
          std::pow(read_none, static_cast<double>(none));
      outcomes.push_back(OutcomeWeight{both, one, none, probability});
    }
  }
  return outcomes;
}

double exact_expected_error_estimate(std::int64_t n_tags, double p) {
  double expected = 0.0;
  for (const OutcomeWeight& outcome :
       enumerate_two_session_outcomes(n_tags, p)) {
    expected += error_estimate(outcome.read_in_both, outcome.read_in_one) *
                outcome.probability;
  }
  return expected;
}

double exact_expected_cardinality_estimate(std::int64_t n_tags, double p) {
  if (p >= 1.0) {
    throw std::invalid_argument(
        "the cardinality estimator is undefined at p == 1");
  }
  const double resolved = 1.0 - p * p;
  double expected = 0.0;
  for (const OutcomeWeight& outcome :
       enumerate_two_session_outcomes(n_tags, p)) {
    expected += static_cast<double>(outcome.read_in_both +
                                    outcome.read_in_one) /
                resolved * outcome.probability;
  }
  return expected;
}

}  // namespace mtag
