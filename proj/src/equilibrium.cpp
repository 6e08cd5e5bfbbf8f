#include "allpay/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "allpay/toeplitz_solver.hpp"

namespace allpay {

Strategy::Strategy(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw Error(ErrorCode::kInvalidStrategy, "strategy must not be empty");
  double sum = 0.0;
  for (double& p : probs_) {
    if (!std::isfinite(p) || p < -kClampTolerance) {
      throw Error(ErrorCode::kInvalidStrategy, "negative or non-finite probability");
    }
    if (p < 0.0) p = 0.0;
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw Error(ErrorCode::kInvalidStrategy, "probabilities sum to " + std::to_string(sum));
  }
}

Strategy Strategy::pure(int bid, int cap) {
  if (bid < 0 || bid > cap) throw Error(ErrorCode::kInvalidParameter, "pure bid out of range");
  std::vector<double> probs(static_cast<std::size_t>(cap) + 1, 0.0);
  probs[bid] = 1.0;
  return Strategy(std::move(probs));
}

Strategy Strategy::from_weights(std::span<const double> weights, int cap) {
  if (weights.size() > static_cast<std::size_t>(cap) + 1) {
    throw Error(ErrorCode::kDimensionMismatch, "weights exceed the bid cap");
  }
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(sum > 0.0) || !std::isfinite(sum)) {
    throw Error(ErrorCode::kInvalidStrategy, "weights do not have a positive sum");
  }
  std::vector<double> probs(static_cast<std::size_t>(cap) + 1, 0.0);
  for (std::size_t i = 0; i < weights.size(); ++i) {
    double p = weights[i] / sum;
    if (p < -kClampTolerance) {
      throw Error(ErrorCode::kInvalidStrategy,
                  "weight for bid " + std::to_string(i) + " is negative (" + std::to_string(p) + ")");
    }
    probs[i] = std::max(p, 0.0);
  }
  const double clamped = std::accumulate(probs.begin(), probs.end(), 0.0);
  for (double& p : probs) p /= clamped;
  return Strategy(std::move(probs));
}

int Strategy::length() const {
  for (int i = cap(); i >= 0; --i) {
    if (probs_[i] != 0.0) return i + 1;
  }
  return 0;
}

bool Strategy::gap_free() const {
  const int len = length();
  int first = 0;
  while (first < len && probs_[first] == 0.0) ++first;
  for (int i = first; i < len; ++i) {
    if (probs_[i] == 0.0) return false;
  }
  return true;
}

Strategy Strategy::padded(int new_cap) const {
  if (new_cap + 1 < length()) throw Error(ErrorCode::kDimensionMismatch, "cap below length");
  std::vector<double> probs(static_cast<std::size_t>(new_cap) + 1, 0.0);
  std::copy_n(probs_.begin(), std::min<std::size_t>(probs_.size(), probs.size()), probs.begin());
  return Strategy(std::move(probs));
}

bool nonneg_solution_test(const ToeplitzPayoff& m, int k) {
  ToeplitzPayoff minor = restrict(m, k);
  std::vector<double> ones(static_cast<std::size_t>(k), 1.0);
  auto report = solve_toeplitz(minor, ones);
  if (!report) return false;
  const double tau = kNonnegTolerance * minor.scale();
  return std::all_of(report->solution.begin(), report->solution.end(),
                     [tau](double y) { return y >= -tau; });
}

ToeplitzPayoff search_form(const ToeplitzPayoff& m) {
  const double lo = m.min_entry();
  const double range = m.max_entry() - lo;
  std::vector<double> diag(m.diagonals().begin(), m.diagonals().end());
  const bool flat = !(range > 1e-15 * std::max(1.0, m.scale()));
  for (double& v : diag) v = flat ? 1.0 : 1.0 + (v - lo) / range;
  return ToeplitzPayoff(m.rows(), m.cols(), std::move(diag), 3.0);
}

int find_length(const ToeplitzPayoff& m) {
  if (m.rows() < 2 || m.cols() < 2) {
    throw Error(ErrorCode::kDegenerateChips, "length search needs both bid caps >= 1");
  }
  const ToeplitzPayoff form = search_form(m);
  // Invariant: `low` passes the test and nothing at or above `high` does.
  int low = 1;
  int high = std::min(m.rows(), m.cols()) + 1;
  while (low + 1 != high) {
    const int k = (low + high) / 2;
    if (nonneg_solution_test(form, k)) {
      low = k;
    } else {
      high = k;
    }
  }
  return low;
}

Strategy advantage_strategy(const ToeplitzPayoff& m, int length) {
  ToeplitzPayoff minor = restrict(search_form(m), length);
  std::vector<double> ones(static_cast<std::size_t>(length), 1.0);
  auto report = solve_toeplitz(minor, ones);
  if (!report) {
    throw Error(ErrorCode::kSingular,
                "restricted matrix of length " + std::to_string(length) + " is singular");
  }
  // Weights the length test already accepted as nonnegative are zeroed here,
  // before normalization can push them past the strategy clamp.
  const double tau = kNonnegTolerance * minor.scale();
  for (double& y : report->solution) {
    if (y < 0.0 && y >= -tau) y = 0.0;
  }
  return Strategy::from_weights(report->solution, m.cols() - 1);
}

Strategy reverse(const Strategy& s, int opponent_cap) {
  const int len = s.length();
  if (len - 1 > opponent_cap) {
    throw Error(ErrorCode::kDimensionMismatch, "reversed strategy exceeds the opponent's chips");
  }
  std::vector<double> probs(static_cast<std::size_t>(opponent_cap) + 1, 0.0);
  for (int i = 0; i < len; ++i) probs[i] = s[len - 1 - i];
  return Strategy(std::move(probs));
}

Strategy shift(const Strategy& s, int cap) {
  if (s.length() > cap) throw Error(ErrorCode::kDimensionMismatch, "shifted strategy exceeds cap");
  std::vector<double> probs(static_cast<std::size_t>(cap) + 1, 0.0);
  for (int i = 0; i < s.length(); ++i) probs[i + 1] = s[i];
  return Strategy(std::move(probs));
}

double best_response_gap(const ToeplitzPayoff& m, const Strategy& owner, const Strategy& opponent) {
  PayoffVector guarantees = apply(m, owner);
  const double guaranteed = *std::min_element(guarantees.begin(), guarantees.end());
  double best_deviation = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < m.cols(); ++j) {
    double acc = 0.0;
    for (int i = 0; i < m.rows(); ++i) acc += opponent[i] * m(i, j);
    best_deviation = std::max(best_deviation, acc);
  }
  return std::max(0.0, best_deviation - guaranteed);
}

namespace {

EquilibriumResult solve_degenerate(const ToeplitzPayoff& m) {
  EquilibriumResult r;
  if (m.cols() == 1) {
    // Owner can only bid 0; the opponent picks the worst row for it.
    int worst = 0;
    for (int i = 1; i < m.rows(); ++i) {
      if (m(i, 0) < m(worst, 0)) worst = i;
    }
    r.value = m(worst, 0);
    r.advantage = Strategy::pure(0, 0);
    r.opponent = Strategy::pure(worst, m.rows() - 1);
  } else {
    int best = 0;
    for (int j = 1; j < m.cols(); ++j) {
      if (m(0, j) > m(0, best)) best = j;
    }
    r.value = m(0, best);
    r.advantage = Strategy::pure(best, m.cols() - 1);
    r.opponent = Strategy::pure(0, 0);
  }
  r.length = r.advantage.length();
  r.best_response_gap = best_response_gap(m, r.advantage, r.opponent);
  return r;
}

EquilibriumResult result_for_length(const ToeplitzPayoff& m, int length) {
  EquilibriumResult r;
  r.length = length;
  r.advantage = advantage_strategy(m, length);
  r.opponent = reverse(r.advantage, m.rows() - 1);
  PayoffVector guarantees = apply(m, r.advantage);
  r.value = *std::min_element(guarantees.begin(), guarantees.end());
  r.best_response_gap = best_response_gap(m, r.advantage, r.opponent);
  return r;
}

}  // namespace

EquilibriumResult solve_turn(const ToeplitzPayoff& m) {
  if (m.rows() == 1 || m.cols() == 1) return solve_degenerate(m);
  EquilibriumResult best = result_for_length(m, find_length(m));
  if (best.best_response_gap <= kGapTolerance) return best;

  // Round-off can flip a marginal nonnegativity decision on nearly singular
  // minors; fall back to checking every candidate length.
  const ToeplitzPayoff form = search_form(m);
  for (int k = 1; k <= std::min(m.rows(), m.cols()); ++k) {
    if (!nonneg_solution_test(form, k)) continue;
    try {
      EquilibriumResult candidate = result_for_length(m, k);
      if (candidate.best_response_gap < best.best_response_gap) best = std::move(candidate);
    } catch (const Error&) {
      continue;
    }
  }
  return best;
}

VerificationReport verify_equilibrium(const ToeplitzPayoff& m, const Strategy& owner,
                                      const Strategy& opponent) {
  if (owner.cap() + 1 != m.cols() || opponent.cap() + 1 != m.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "strategies do not fit the matrix");
  }
  VerificationReport report;
  PayoffVector guarantees = apply(m, owner);
  report.value = *std::min_element(guarantees.begin(), guarantees.end());
  const double played = expected_payoff(opponent, m, owner);
  for (int i = 0; i < m.rows(); ++i) {
    if (opponent[i] > 0.0) {
      report.equalization_error =
          std::max(report.equalization_error, std::abs(guarantees[i] - report.value));
    }
  }
  double best_owner = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < m.cols(); ++j) {
    double acc = 0.0;
    for (int i = 0; i < m.rows(); ++i) acc += opponent[i] * m(i, j);
    best_owner = std::max(best_owner, acc);
  }
  report.owner_gap = std::max(0.0, best_owner - played);
  report.opponent_gap = std::max(0.0, played - report.value);
  report.owner_gap_free = owner.gap_free();
  report.opponent_gap_free = opponent.gap_free();
  report.owner_bids_zero = owner[0] > 0.0;
  report.opponent_bids_one = opponent[1] > 0.0;
  report.length = owner.length();
  return report;
}

TurnSolution solve_position(const ToeplitzPayoff& matrix_a, Player advantage) {
  TurnSolution out;
  out.advantage = advantage;
  if (advantage == Player::kA) {
    EquilibriumResult r = solve_turn(matrix_a);
    out.value_a = r.value;
    out.strategy_a = std::move(r.advantage);
    out.strategy_b = std::move(r.opponent);
    out.length = r.length;
    out.best_response_gap = r.best_response_gap;
  } else {
    ToeplitzPayoff matrix_b = opponent_matrix(matrix_a);
    EquilibriumResult r = solve_turn(matrix_b);
    out.value_a = matrix_a.total() - r.value;
    out.strategy_b = std::move(r.advantage);
    out.strategy_a = std::move(r.opponent);
    out.length = r.length;
    out.best_response_gap = r.best_response_gap;
  }
  return out;
}

}  // namespace allpay
