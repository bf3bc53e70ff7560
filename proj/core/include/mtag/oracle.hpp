#pragma once

#include <cstdint>
#include <vector>

namespace mtag {

// Largest population the exact two-session enumeration supports. The
// outcome space is O(N^2) and every multinomial coefficient stays exactly
// representable, so the enumeration sums carry no combinatorial rounding.
inline constexpr std::int64_t kMaxEnumerationTags = 12;

// One point of the two-session outcome distribution: read_in_both tags read
// in both sessions, read_in_one in exactly one, unread in neither.
struct OutcomeWeight {
  std::int64_t read_in_both = 0;
  std::int64_t read_in_one = 0;
  std::int64_t unread = 0;
  double probability = 0.0;
};

// Full outcome distribution for a population of n_tags under per-session
// error probability p, ordered by (read_in_both, read_in_one). Weights sum
// to 1. Throws std::out_of_range when n_tags is outside 1..12.
std::vector<OutcomeWeight> enumerate_two_session_outcomes(std::int64_t n_tags,
                                                          double p);

// Exact expected value of the two-session error-probability estimator,
// computed by enumeration. Checks the closed form in
// expected_two_session_estimate.
double exact_expected_error_estimate(std::int64_t n_tags, double p);

// Exact expected value of the two-session cardinality estimator evaluated
// with the true p; equals n_tags (the estimator is unbiased). Throws
// std::invalid_argument at p == 1.
double exact_expected_cardinality_estimate(std::int64_t n_tags, double p);

}  // namespace mtag
