#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "mtag/estimators.hpp"
#include "mtag/rng.hpp"

namespace mtag {

// Closed population of n_tags tags; each tag independently misses a given
// session (blind spot) with probability error_probability.
struct PopulationParams {
  std::int64_t n_tags = 0;
  double error_probability = 0.0;
};

// One-session-deep Markov error model. error_given_error is the error
// probability when the tag also erred in the previous session,
// error_given_read when it was read. Derived so that the per-session
// marginal error probability stays at error_probability for every session.
struct CorrelationParams {
  double error_probability = 0.0;
  double correlation = 0.0;
  double error_given_error = 0.0;
  double error_given_read = 0.0;
};

// Builds the conditional probabilities for a marginal error probability in
// [0, 1) and a correlation coefficient in [0, 1]. correlation == 0 yields
// both conditionals equal to the marginal, so the correlated source then
// reproduces the independent one draw for draw. Throws std::invalid_argument
// outside the supported ranges (error_probability == 1 leaves
// error_given_read undefined).
CorrelationParams derive_correlation(double error_probability,
                                     double correlation);

// Dense boolean read matrix: one row per session, one column per tag,
// true where the tag was read.
class ReadHistory {
 public:
  explicit ReadHistory(std::int64_t tags) : tags_(tags) {}

  void append_session(std::vector<std::uint8_t> reads);

  std::int64_t tags() const { return tags_; }
  int sessions() const { return static_cast<int>(rows_.size()); }
  bool read(int session, std::int64_t tag) const {
    return rows_[static_cast<std::size_t>(session)]
               [static_cast<std::size_t>(tag)] != 0;
  }
  const std::vector<std::uint8_t>& session(int index) const {
    return rows_[static_cast<std::size_t>(index)];
  }

 private:
  std::int64_t tags_;
  std::vector<std::vector<std::uint8_t>> rows_;
};

// Produces one session outcome per call against a fixed population. Stateful
// (owns its RNG); use one instance per trial and run trials in parallel on
// distinct instances.
class SessionSource {
 public:
  virtual ~SessionSource() = default;

  virtual std::int64_t tag_count() const = 0;
  // Row of length tag_count(), 1 where the tag was read.
  virtual std::vector<std::uint8_t> next_session() = 0;
};

class IndependentSessionSource final : public SessionSource {
 public:
  IndependentSessionSource(const PopulationParams& params, std::uint64_t seed)
      : params_(params), rng_(seed) {}

  std::int64_t tag_count() const override { return params_.n_tags; }
  std::vector<std::uint8_t> next_session() override;

 private:
  PopulationParams params_;
  Rng rng_;
};

class CorrelatedSessionSource final : public SessionSource {
 public:
  CorrelatedSessionSource(const CorrelationParams& params,
                          std::int64_t n_tags, std::uint64_t seed)
      : params_(params), n_tags_(n_tags), rng_(seed) {}

  std::int64_t tag_count() const override { return n_tags_; }
  std::vector<std::uint8_t> next_session() override;

 private:
  CorrelationParams params_;
  std::int64_t n_tags_;
  Rng rng_;
  std::vector<std::uint8_t> last_error_;
};

ReadHistory simulate_independent(const PopulationParams& params, int sessions,
                                 std::uint64_t seed);
ReadHistory simulate_correlated(const CorrelationParams& params,
                                std::int64_t n_tags, int sessions,
                                std::uint64_t seed);

struct TallyResult {
  MultiplicityVector multiplicity;
  SchnabelTallies schnabel;
  std::int64_t distinct = 0;
};

// Incremental tally over sessions: per-tag read counts, multiplicity vector
// and Schnabel tallies kept in sync as rows arrive.
class RunningTally {
 public:
  explicit RunningTally(std::int64_t tags);

  void add_session(const std::vector<std::uint8_t>& reads);

  int sessions() const { return sessions_; }
  std::int64_t distinct() const { return distinct_; }
  MultiplicityVector multiplicity() const;
  const SchnabelTallies& schnabel() const { return tallies_; }

 private:
  std::vector<std::int32_t> read_counts_;
  std::int64_t distinct_ = 0;
  int sessions_ = 0;
  SchnabelTallies tallies_;
};

TallyResult tally(const ReadHistory& history);

// Debugging export: header row of tag ids, then one 0/1 row per session.
void write_history_csv(const ReadHistory& history, std::ostream& out);

}  // namespace mtag
