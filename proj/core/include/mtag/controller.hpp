#pragma once

#include <vector>

#include "mtag/estimators.hpp"
#include "mtag/session_sim.hpp"

namespace mtag {

// Stopping rule for the sequential reading process. Reading continues while
// the estimated missing-tag probability (plus bias_addend) exceeds
// threshold; once it does not, margin_sessions extra sessions are performed
// as a safety margin. min_sessions must be at least 2 (the estimators need
// two sessions); max_sessions caps the run unconditionally.
struct StopPolicy {
  double threshold = 1e-5;
  int margin_sessions = 0;
  double bias_addend = 0.0;
  int max_sessions = 64;
  int min_sessions = 2;
};

// Trace of one sequential run: an estimate per session from min_sessions on,
// the session count at which reading stopped, and whether the cap was hit
// without the stopping criterion ever being met. The generated history is
// kept so callers can check ground truth (e.g. whether a tag was missed).
struct SessionLog {
  std::vector<EstimateReport> reports;
  int stopped_at = 0;
  bool cap_reached = false;
  Estimator estimator = Estimator::Regm;
  ReadHistory history{0};
};

// True when another session is required under the policy. Margin handling
// lives in run_sequential, not here.
bool should_continue(const EstimateReport& report, const StopPolicy& policy);

// Drives the source session by session: after each session from
// min_sessions on, tallies, estimates, and applies the stopping rule. After
// the first negative decision, margin_sessions further sessions are read and
// the run stops; it stops at max_sessions regardless. Degenerate estimates
// (no observations) report a missing-tag probability of 1 and therefore keep
// the run going. The two-session estimator is rejected: the controller needs
// an estimator defined for any session count.
SessionLog run_sequential(SessionSource& source, Estimator estimator,
                          const StopPolicy& policy);

}  // namespace mtag
