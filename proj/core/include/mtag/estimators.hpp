#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace mtag {

// Multiplicity vector over R reader sessions: counts[i-1] is the number of
// distinct tags read in exactly R-(i-1) sessions, so counts.front() counts
// the tags seen in every session and counts.back() the tags seen once.
// Tags read in no session are unobservable and have no entry.
//
// Entries are integral when produced by tallying real histories, but the
// estimators accept real-valued entries so that model expectations can be
// fed through them directly.
struct MultiplicityVector {
  std::vector<double> counts;

  int sessions() const { return static_cast<int>(counts.size()); }
  double observed_total() const;
};

// Subset-normalized view of a multiplicity vector: entry i-1 is
// counts[i-1] / C(R, R-(i-1)), the average tag count per same-size session
// subset. Kept as exact numerator/denominator pairs so the original counts
// are recoverable without rounding.
struct NormalizedMultiplicityVector {
  std::vector<double> numerators;
  std::vector<double> denominators;

  std::size_t size() const { return numerators.size(); }
  double value(std::size_t index) const {
    return numerators[index] / denominators[index];
  }
  double count(std::size_t index) const { return numerators[index]; }
};

NormalizedMultiplicityVector normalize(const MultiplicityVector& kbar);

// 0/1 window masks selecting which multiplicity entries enter the numerator
// and denominator of the moment ratio solved for the error probability.
struct WindowPair {
  std::vector<bool> numerator;
  std::vector<bool> denominator;
};

enum class Estimator { TwoSession, Rme, Regm, Schnabel };

std::string_view to_string(Estimator estimator);
std::optional<Estimator> parse_estimator(std::string_view name);

// One estimation outcome after `sessions` reader sessions. n_hat is empty
// when the cardinality is undefined (estimated error probability of 1, or a
// recapture-free Schnabel history); consumers treat that as "population size
// unknown" and the missing-tag probability as 1.
struct EstimateReport {
  double p_hat = 0.0;
  std::optional<double> n_hat;
  double p_m_hat = 0.0;
  Estimator estimator = Estimator::Regm;
  int sessions = 0;
};

// Per-session capture-recapture tallies. reads[i] is the number of tags read
// in session i, recaptures[i] how many of those had been read before, and
// seen_before[i] the number of distinct tags read in sessions 0..i-1.
struct SchnabelTallies {
  std::vector<std::int64_t> reads;
  std::vector<std::int64_t> recaptures;
  std::vector<std::int64_t> seen_before;

  int sessions() const { return static_cast<int>(reads.size()); }
};

// Closed-form error probability from two sessions: tags read twice vs tags
// read once. Total on all non-negative inputs: no observations at all gives
// 1 (nothing is known), observations without singletons give 0.
double two_session_error_probability(double read_twice, double read_once);

// Cardinality from two sessions. Empty when p_hat == 1.
std::optional<double> two_session_cardinality(double read_twice,
                                              double read_once, double p_hat);

// Expected fraction of tags read in exactly sessions-(index-1) of `sessions`
// sessions under per-session error probability p. Indices run 1..sessions;
// the remaining mass p^sessions is the unobservable fraction.
double expected_multiplicity_fraction(int index, int sessions, double p);

// Window rules. Both require at least two sessions.
//   rme_windows:  denominator drops zero entries and the largest entry
//                 (lowest index on ties).
//   regm_windows: denominator drops zero entries and normalized entries not
//                 strictly below the mean of the nonzero normalized entries.
WindowPair rme_windows(const MultiplicityVector& kbar);
WindowPair regm_windows(const MultiplicityVector& kbar);

// Solves the moment ratio defined by the window pair for the error
// probability. All-zero counts return 1 (no information); an empty or
// all-zero denominator window returns 0 (every observed tag was read in
// every session). Otherwise scans a 1024-point grid on [1e-6, 1-1e-6],
// refines every sign-change bracket by bisection to 1e-9, and of the
// candidate roots keeps the one whose implied multiplicity vector fits the
// observed counts best in least squares. Roots a couple of grid steps apart
// (and the no-crossing fallback, found by golden-section on the ratio
// mismatch) are treated as one tangent root and polished through that same
// least-squares fit, which stays well-conditioned where the ratio is not.
double solve_error_probability(const MultiplicityVector& kbar,
                               const WindowPair& windows);

// Generalized cardinality estimate: observed total divided by the resolved
// fraction 1 - p_hat^R. Empty when p_hat == 1.
std::optional<double> estimate_cardinality(const MultiplicityVector& kbar,
                                           double p_hat);

// Probability that at least one tag was read in none of the sessions.
// Returns 1 when the cardinality is undefined or p_hat == 1.
double missing_tag_probability(double p_hat, const std::optional<double>& n_hat,
                               int sessions);

// Schnabel cardinality: recapture-weighted average of per-session
// Lincoln-Petersen estimates. Empty when no tag was ever recaptured.
std::optional<double> schnabel_cardinality(const SchnabelTallies& tallies);

// Mean per-session error probability implied by a Schnabel cardinality,
// clamped to [0, 1]. Empty when n_hat is undefined or non-positive.
std::optional<double> schnabel_error_probability(
    const SchnabelTallies& tallies, const std::optional<double>& n_hat);

// Expected value of the two-session error-probability estimator for a known
// population of n_tags and true error probability p. The estimator is biased
// high for small populations; the bias vanishes as n_tags grows.
double expected_two_session_estimate(double n_tags, double p);

// Bias of the two-session estimator at the given population size:
// expected estimate minus true probability.
double two_session_estimator_bias(double n_tags, double p);

// Runs one estimator against tallied session data and assembles the full
// report including the missing-tag probability.
EstimateReport estimate(Estimator estimator, const MultiplicityVector& kbar,
                        const SchnabelTallies& tallies);

// Exact binomial coefficient as a double; n up to 64.
double binomial_coefficient(int n, int k);

}  // namespace mtag
