#include "mtag/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace mtag {

namespace {

constexpr double kGridEdge = 1e-6;
constexpr int kGridPoints = 1024;
constexpr double kRootTolerance = 1e-9;

// Model-side multiplicity fractions c_i(p), i = 1..sessions, by upward
// recurrence from c_1 = (1-p)^R. Requires p strictly inside (0, 1).
void multiplicity_fractions(int sessions, double p, std::vector<double>& out) {
  out.resize(static_cast<std::size_t>(sessions));
  const double odds = p / (1.0 - p);
  double value = std::pow(1.0 - p, sessions);
  for (int i = 1; i <= sessions; ++i) {
    out[static_cast<std::size_t>(i - 1)] = value;
    value *= odds * static_cast<double>(sessions - i + 1) /
             static_cast<double>(i);
  }
}

double masked_sum(const std::vector<double>& values,
                  const std::vector<bool>& mask) {
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (mask[i]) total += values[i];
  }
  return total;
}

// Sum of squared deviations between observed counts and the multiplicity
// vector implied by candidate probability p. Used to pick among multiple
// exact roots of the moment ratio: mode-removing windows can make the ratio
// non-injective, but only the root consistent with the full vector fits.
double fit_residual(const MultiplicityVector& kbar, double p,
                    std::vector<double>& scratch) {
  const int sessions = kbar.sessions();
  multiplicity_fractions(sessions, p, scratch);
  const double coverage = 1.0 - std::pow(p, sessions);
  const double implied_n = kbar.observed_total() / coverage;
  double residual = 0.0;
  for (std::size_t i = 0; i < kbar.counts.size(); ++i) {
    const double diff = kbar.counts[i] - implied_n * scratch[i];
    residual += diff * diff;
  }
  return residual;
}

class RatioMismatch {
 public:
  RatioMismatch(int sessions, double observed, const WindowPair& windows)
      : sessions_(sessions), observed_(observed), windows_(windows) {}

  double operator()(double p) {
    multiplicity_fractions(sessions_, p, scratch_);
    const double numerator = masked_sum(scratch_, windows_.numerator);
    const double denominator = masked_sum(scratch_, windows_.denominator);
    return numerator / denominator - observed_;
  }

 private:
  int sessions_;
  double observed_;
  const WindowPair& windows_;
  std::vector<double> scratch_;
};

double bisect(RatioMismatch& mismatch, double lo, double hi, double flo) {
  while (hi - lo > kRootTolerance) {
    const double mid = 0.5 * (lo + hi);
    const double fmid = mismatch(mid);
    if (fmid == 0.0) return mid;
    if (std::signbit(fmid) == std::signbit(flo)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Golden-section minimization on [lo, hi] down to kRootTolerance width.
template <typename F>
double golden_minimize(F&& value, double lo, double hi) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo;
  double b = hi;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = value(x1);
  double f2 = value(x2);
  while (b - a > kRootTolerance) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = value(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = value(x2);
    }
  }
  return 0.5 * (a + b);
}

// The moment ratio can run tangent to the observed value (the removed-
// maximum window does this when the mode of the multiplicity fractions sits
// at the true p). The ratio root is then ill-conditioned and rounding splits
// it into a close pair of shadow roots, while the full multiplicity vector
// still determines p sharply. Minimizing the fit residual over the cluster
// recovers it.
double polish_by_residual(const MultiplicityVector& kbar, double lo,
                          double hi) {
  std::vector<double> scratch;
  return golden_minimize(
      [&](double p) { return fit_residual(kbar, p, scratch); }, lo, hi);
}

const std::vector<std::vector<double>>& binomial_table() {
  static const std::vector<std::vector<double>> table = [] {
    std::vector<std::vector<std::uint64_t>> rows(65);
    rows[0] = {1};
    for (std::size_t n = 1; n < rows.size(); ++n) {
      rows[n].assign(n + 1, 1);
      for (std::size_t k = 1; k < n; ++k) {
        rows[n][k] = rows[n - 1][k - 1] + rows[n - 1][k];
      }
    }
    std::vector<std::vector<double>> out(rows.size());
    for (std::size_t n = 0; n < rows.size(); ++n) {
      out[n].assign(rows[n].begin(), rows[n].end());
    }
    return out;
  }();
  return table;
}

}  // namespace

double MultiplicityVector::observed_total() const {
  double total = 0.0;
  for (double c : counts) total += c;
  return total;
}

double binomial_coefficient(int n, int k) {
  if (n < 0 || k < 0 || k > n) return 0.0;
  if (n > 64) {
    throw std::out_of_range("binomial_coefficient supports n up to 64");
  }
  return binomial_table()[static_cast<std::size_t>(n)]
                         [static_cast<std::size_t>(k)];
}

NormalizedMultiplicityVector normalize(const MultiplicityVector& kbar) {
  const int sessions = kbar.sessions();
  NormalizedMultiplicityVector out;
  out.numerators = kbar.counts;
  out.denominators.resize(kbar.counts.size());
  for (int i = 0; i < sessions; ++i) {
    // C(R, R-i) == C(R, i) for the 0-based entry i.
    out.denominators[static_cast<std::size_t>(i)] =
        binomial_coefficient(sessions, i);
  }
  return out;
}

std::string_view to_string(Estimator estimator) {
  switch (estimator) {
    case Estimator::TwoSession:
      return "two-session";
    case Estimator::Rme:
      return "rme";
    case Estimator::Regm:
      return "regm";
    case Estimator::Schnabel:
      return "schnabel";
  }
  return "unknown";
}

std::optional<Estimator> parse_estimator(std::string_view name) {
  if (name == "two-session") return Estimator::TwoSession;
  if (name == "rme") return Estimator::Rme;
  if (name == "regm") return Estimator::Regm;
  if (name == "schnabel") return Estimator::Schnabel;
  return std::nullopt;
}

double two_session_error_probability(double read_twice, double read_once) {
  if (read_once <= 0.0) return read_twice <= 0.0 ? 1.0 : 0.0;
  return read_once / (2.0 * read_twice + read_once);
}

std::optional<double> two_session_cardinality(double read_twice,
                                              double read_once, double p_hat) {
  if (p_hat >= 1.0) return std::nullopt;
  return (read_twice + read_once) / (1.0 - p_hat * p_hat);
}

double expected_multiplicity_fraction(int index, int sessions, double p) {
  if (sessions < 1 || index < 1 || index > sessions) {
    throw std::out_of_range(
        "multiplicity index must lie in 1..sessions with sessions >= 1");
  }
  const int reads = sessions - (index - 1);
  return binomial_coefficient(sessions, reads) * std::pow(1.0 - p, reads) *
         std::pow(p, index - 1);
}

WindowPair rme_windows(const MultiplicityVector& kbar) {
  if (kbar.sessions() < 2) {
    throw std::invalid_argument("window rules need at least two sessions");
  }
  const auto& counts = kbar.counts;
  WindowPair windows{std::vector<bool>(counts.size(), false),
                     std::vector<bool>(counts.size(), false)};
  std::size_t max_index = 0;
  for (std::size_t i = 1; i < counts.size(); ++i) {
    if (counts[i] > counts[max_index]) max_index = i;
  }
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const bool nonzero = counts[i] != 0.0;
    windows.numerator[i] = nonzero;
    windows.denominator[i] = nonzero && i != max_index;
  }
  return windows;
}

WindowPair regm_windows(const MultiplicityVector& kbar) {
  if (kbar.sessions() < 2) {
    throw std::invalid_argument("window rules need at least two sessions");
  }
  const NormalizedMultiplicityVector normalized = normalize(kbar);
  double total = 0.0;
  int nonzero = 0;
  for (std::size_t i = 0; i < normalized.size(); ++i) {
    if (normalized.count(i) != 0.0) {
      total += normalized.value(i);
      ++nonzero;
    }
  }
  const double mean = nonzero > 0 ? total / nonzero : 0.0;
  WindowPair windows{std::vector<bool>(kbar.counts.size(), false),
                     std::vector<bool>(kbar.counts.size(), false)};
  for (std::size_t i = 0; i < kbar.counts.size(); ++i) {
    const bool entry_nonzero = kbar.counts[i] != 0.0;
    windows.numerator[i] = entry_nonzero;
    windows.denominator[i] = entry_nonzero && normalized.value(i) < mean;
  }
  return windows;
}

double solve_error_probability(const MultiplicityVector& kbar,
                               const WindowPair& windows) {
  const std::size_t size = kbar.counts.size();
  if (windows.numerator.size() != size || windows.denominator.size() != size) {
    throw std::invalid_argument(
        "window masks must match the multiplicity vector length");
  }
  if (kbar.observed_total() <= 0.0) return 1.0;

  const double observed_num = masked_sum(kbar.counts, windows.numerator);
  const double observed_den = masked_sum(kbar.counts, windows.denominator);
  if (observed_den <= 0.0) return 0.0;
  const double observed = observed_num / observed_den;

  RatioMismatch mismatch(kbar.sessions(), observed, windows);

  std::vector<double> grid_p(kGridPoints);
  std::vector<double> grid_f(kGridPoints);
  const double step = (1.0 - 2.0 * kGridEdge) / (kGridPoints - 1);
  for (int j = 0; j < kGridPoints; ++j) {
    grid_p[static_cast<std::size_t>(j)] = kGridEdge + step * j;
    grid_f[static_cast<std::size_t>(j)] =
        mismatch(grid_p[static_cast<std::size_t>(j)]);
  }

  std::vector<double> roots;
  for (int j = 0; j + 1 < kGridPoints; ++j) {
    const double fa = grid_f[static_cast<std::size_t>(j)];
    const double fb = grid_f[static_cast<std::size_t>(j + 1)];
    if (std::isnan(fa) || std::isnan(fb)) continue;
    if (fa == 0.0) {
      roots.push_back(grid_p[static_cast<std::size_t>(j)]);
      continue;
    }
    if (std::signbit(fa) != std::signbit(fb)) {
      roots.push_back(bisect(mismatch, grid_p[static_cast<std::size_t>(j)],
                             grid_p[static_cast<std::size_t>(j + 1)], fa));
    }
  }
  if (grid_f.back() == 0.0) roots.push_back(grid_p.back());

  const auto clamp_to_grid = [&](double value) {
    return std::clamp(value, grid_p.front(), grid_p.back());
  };

  if (roots.empty()) {
    std::size_t best = 0;
    double best_abs = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < grid_f.size(); ++j) {
      const double value = std::fabs(grid_f[j]);
      if (value < best_abs) {
        best_abs = value;
        best = j;
      }
    }
    const double lo = best > 0 ? grid_p[best - 1] : grid_p.front();
    const double hi =
        best + 1 < grid_p.size() ? grid_p[best + 1] : grid_p.back();
    const double near =
        golden_minimize([&](double p) { return std::fabs(mismatch(p)); }, lo,
                        hi);
    return polish_by_residual(kbar, clamp_to_grid(near - step),
                              clamp_to_grid(near + step));
  }

  // Roots within a couple of grid steps of each other are shadows of one
  // tangent root; polish those through the residual. Isolated roots are kept
  // as bisected.
  std::sort(roots.begin(), roots.end());
  std::vector<double> candidates;
  for (std::size_t i = 0; i < roots.size();) {
    std::size_t j = i;
    while (j + 1 < roots.size() && roots[j + 1] - roots[j] <= 2.0 * step) {
      ++j;
    }
    if (j == i) {
      candidates.push_back(roots[i]);
    } else {
      candidates.push_back(polish_by_residual(
          kbar, clamp_to_grid(roots[i] - step), clamp_to_grid(roots[j] + step)));
    }
    i = j + 1;
  }

  std::vector<double> scratch;
  double best_root = candidates.front();
  double best_residual = fit_residual(kbar, best_root, scratch);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const double residual = fit_residual(kbar, candidates[i], scratch);
    if (residual < best_residual) {
      best_residual = residual;
      best_root = candidates[i];
    }
  }
  return std::clamp(best_root, 0.0, 1.0);
}

std::optional<double> estimate_cardinality(const MultiplicityVector& kbar,
                                           double p_hat) {
  if (p_hat >= 1.0) return std::nullopt;
  return kbar.observed_total() / (1.0 - std::pow(p_hat, kbar.sessions()));
}

double missing_tag_probability(double p_hat, const std::optional<double>& n_hat,
                               int sessions) {
  if (!n_hat.has_value() || p_hat >= 1.0) return 1.0;
  if (p_hat <= 0.0) return 0.0;
  const double miss_all = std::pow(p_hat, sessions);
  return -std::expm1(*n_hat * std::log1p(-miss_all));
}

std::optional<double> schnabel_cardinality(const SchnabelTallies& tallies) {
  double recaptured = 0.0;
  double weighted = 0.0;
  for (std::size_t i = 0; i < tallies.reads.size(); ++i) {
    recaptured += static_cast<double>(tallies.recaptures[i]);
    weighted += static_cast<double>(tallies.reads[i]) *
                static_cast<double>(tallies.seen_before[i]);
  }
  if (recaptured <= 0.0) return std::nullopt;
  return weighted / recaptured;
}

std::optional<double> schnabel_error_probability(
    const SchnabelTallies& tallies, const std::optional<double>& n_hat) {
  if (!n_hat.has_value() || *n_hat <= 0.0 || tallies.reads.empty()) {
    return std::nullopt;
  }
  double total = 0.0;
  for (std::int64_t reads : tallies.reads) {
    total += 1.0 - static_cast<double>(reads) / *n_hat;
  }
  return std::clamp(total / static_cast<double>(tallies.reads.size()), 0.0,
                    1.0);
}

double expected_two_session_estimate(double n_tags, double p) {
  const double twice = 2.0 * n_tags;
  const double tail = std::pow(p, twice);
  return twice * (p - tail) / (twice - 1.0) + tail;
}

double two_session_estimator_bias(double n_tags, double p) {
  return expected_two_session_estimate(n_tags, p) - p;
}

EstimateReport estimate(Estimator estimator, const MultiplicityVector& kbar,
                        const SchnabelTallies& tallies) {
  EstimateReport report;
  report.estimator = estimator;
  report.sessions = kbar.sessions();

  switch (estimator) {
    case Estimator::TwoSession: {
      if (kbar.sessions() != 2) {
        throw std::invalid_argument(
            "the two-session estimator requires exactly two sessions");
      }
      report.p_hat =
          two_session_error_probability(kbar.counts[0], kbar.counts[1]);
      report.n_hat =
          two_session_cardinality(kbar.counts[0], kbar.counts[1], report.p_hat);
      break;
    }
    case Estimator::Rme:
    case Estimator::Regm: {
      const WindowPair windows = estimator == Estimator::Rme
                                     ? rme_windows(kbar)
                                     : regm_windows(kbar);
      report.p_hat = solve_error_probability(kbar, windows);
      report.n_hat = estimate_cardinality(kbar, report.p_hat);
      break;
    }
    case Estimator::Schnabel: {
      report.n_hat = schnabel_cardinality(tallies);
      // No recaptures: nothing is known, keep reading.
      report.p_hat =
          schnabel_error_probability(tallies, report.n_hat).value_or(1.0);
      break;
    }
  }

  report.p_m_hat =
      missing_tag_probability(report.p_hat, report.n_hat, report.sessions);
  return report;
}

}  // namespace mtag
