#include "mtag/session_sim.hpp"

#include <ostream>
#include <stdexcept>
#include <utility>

namespace mtag {

CorrelationParams derive_correlation(double error_probability,
                                     double correlation) {
  if (!(error_probability >= 0.0 && error_probability < 1.0)) {
    throw std::invalid_argument(
        "error probability must lie in [0, 1) to derive conditional "
        "probabilities");
  }
  if (!(correlation >= 0.0 && correlation <= 1.0)) {
    throw std::invalid_argument("correlation must lie in [0, 1]");
  }
  CorrelationParams params;
  params.error_probability = error_probability;
  params.correlation = correlation;
  if (correlation == 0.0) {
    // Independence limit, kept exact so the correlated source reproduces the
    // independent one draw for draw.
    params.error_given_error = error_probability;
    params.error_given_read = error_probability;
    return params;
  }
  params.error_given_error =
      correlation * (1.0 - error_probability) + error_probability;
  params.error_given_read = error_probability *
                            (1.0 - params.error_given_error) /
                            (1.0 - error_probability);
  return params;
}

void ReadHistory::append_session(std::vector<std::uint8_t> reads) {
  if (static_cast<std::int64_t>(reads.size()) != tags_) {
    throw std::invalid_argument("session row length must equal the tag count");
  }
  rows_.push_back(std::move(reads));
}

std::vector<std::uint8_t> IndependentSessionSource::next_session() {
  std::vector<std::uint8_t> row(static_cast<std::size_t>(params_.n_tags));
  for (auto& cell : row) {
    cell = rng_.bernoulli(params_.error_probability) ? 0 : 1;
  }
  return row;
}

std::vector<std::uint8_t> CorrelatedSessionSource::next_session() {
  std::vector<std::uint8_t> row(static_cast<std::size_t>(n_tags_));
  if (last_error_.empty()) {
    last_error_.resize(static_cast<std::size_t>(n_tags_));
    for (std::size_t t = 0; t < row.size(); ++t) {
      const bool error = rng_.bernoulli(params_.error_probability);
      last_error_[t] = error ? 1 : 0;
      row[t] = error ? 0 : 1;
    }
    return row;
  }
  for (std::size_t t = 0; t < row.size(); ++t) {
    const double prob = last_error_[t] ? params_.error_given_error
                                       : params_.error_given_read;
    const bool error = rng_.bernoulli(prob);
    last_error_[t] = error ? 1 : 0;
    row[t] = error ? 0 : 1;
  }
  return row;
}

namespace {

ReadHistory collect(SessionSource& source, int sessions) {
  ReadHistory history(source.tag_count());
  for (int s = 0; s < sessions; ++s) {
    history.append_session(source.next_session());
  }
  return history;
}

}  // namespace

ReadHistory simulate_independent(const PopulationParams& params, int sessions,
                                 std::uint64_t seed) {
  IndependentSessionSource source(params, seed);
  return collect(source, sessions);
}

ReadHistory simulate_correlated(const CorrelationParams& params,
                                std::int64_t n_tags, int sessions,
                                std::uint64_t seed) {
  CorrelatedSessionSource source(params, n_tags, seed);
  return collect(source, sessions);
}

RunningTally::RunningTally(std::int64_t tags)
    : read_counts_(static_cast<std::size_t>(tags), 0) {}

void RunningTally::add_session(const std::vector<std::uint8_t>& reads) {
  if (reads.size() != read_counts_.size()) {
    throw std::invalid_argument("session row length must equal the tag count");
  }
  const std::int64_t seen_before = distinct_;
  std::int64_t session_reads = 0;
  std::int64_t recaptured = 0;
  for (std::size_t t = 0; t < reads.size(); ++t) {
    if (!reads[t]) continue;
    ++session_reads;
    if (read_counts_[t] > 0) {
      ++recaptured;
    } else {
      ++distinct_;
    }
    ++read_counts_[t];
  }
  tallies_.reads.push_back(session_reads);
  tallies_.recaptures.push_back(recaptured);
  tallies_.seen_before.push_back(seen_before);
  ++sessions_;
}

MultiplicityVector RunningTally::multiplicity() const {
  MultiplicityVector kbar;
  kbar.counts.assign(static_cast<std::size_t>(sessions_), 0.0);
  for (std::int32_t count : read_counts_) {
    if (count > 0) {
      // Read in exactly `count` sessions -> entry sessions - count.
      kbar.counts[static_cast<std::size_t>(sessions_ - count)] += 1.0;
    }
  }
  return kbar;
}

TallyResult tally(const ReadHistory& history) {
  RunningTally running(history.tags());
  for (int s = 0; s < history.sessions(); ++s) {
    running.add_session(history.session(s));
  }
  return TallyResult{running.multiplicity(), running.schnabel(),
                     running.distinct()};
}

void write_history_csv(const ReadHistory& history, std::ostream& out) {
  for (std::int64_t t = 0; t < history.tags(); ++t) {
    if (t > 0) out << ',';
    out << "tag_" << (t + 1);
  }
  out << '\n';
  for (int s = 0; s < history.sessions(); ++s) {
    const auto& row = history.session(s);
    for (std::size_t t = 0; t < row.size(); ++t) {
      if (t > 0) out << ',';
      out << (row[t] ? '1' : '0');
    }
    out << '\n';
  }
}

}  // namespace mtag
