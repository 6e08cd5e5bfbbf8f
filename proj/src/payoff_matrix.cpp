#include "allpay/payoff_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "allpay/equilibrium.hpp"

namespace allpay {

ToeplitzPayoff::ToeplitzPayoff(int rows, int cols, std::vector<double> diag, double total)
    : rows_(rows), cols_(cols), diag_(std::move(diag)), total_(total) {
  if (rows < 1 || cols < 1) {
    throw Error(ErrorCode::kDimensionMismatch, "matrix needs at least one row and column");
  }
  if (diag_.size() != static_cast<std::size_t>(rows + cols - 1)) {
    throw Error(ErrorCode::kDimensionMismatch,
                "diagonal vector must have rows + cols - 1 = " +
                    std::to_string(rows + cols - 1) + " entries");
  }
}

double ToeplitzPayoff::scale() const {
  double s = 0.0;
  for (double v : diag_) s = std::max(s, std::abs(v));
  return s;
}

double ToeplitzPayoff::min_entry() const { return *std::min_element(diag_.begin(), diag_.end()); }

double ToeplitzPayoff::max_entry() const { return *std::max_element(diag_.begin(), diag_.end()); }

std::vector<std::vector<double>> ToeplitzPayoff::dense() const {
  std::vector<std::vector<double>> out(rows_, std::vector<double>(cols_));
  for (int i = 0; i < rows_; ++i) {
    for (int j = 0; j < cols_; ++j) out[i][j] = (*this)(i, j);
  }
  return out;
}

ToeplitzPayoff matrix_from_outcomes(const TurnOutcomes& outcomes, ChipState chips,
                                    Player advantage) {
  const int a = chips.a;
  const int b = chips.b;
  if (a < 0 || b < 0) throw Error(ErrorCode::kInvalidParameter, "negative chip count");
  if (outcomes.a_wins.size() < static_cast<std::size_t>(a + b + 1) ||
      outcomes.b_wins.size() < static_cast<std::size_t>(a + b + 1)) {
    throw Error(ErrorCode::kDimensionMismatch, "outcome table shorter than chip total");
  }
  std::vector<double> diag(static_cast<std::size_t>(a + b + 1));
  for (int d = -b; d <= a; ++d) {
    const bool a_wins = d > 0 || (d == 0 && advantage == Player::kA);
    const auto c = static_cast<std::size_t>(a - d);
    diag[static_cast<std::size_t>(d + b)] = a_wins ? outcomes.a_wins[c] : outcomes.b_wins[c];
  }
  return ToeplitzPayoff(b + 1, a + 1, std::move(diag));
}

ToeplitzPayoff opponent_matrix(const ToeplitzPayoff& m) {
  // Owner's offset d' is the negated offset of m.
  const int rows = m.cols();
  const int cols = m.rows();
  std::vector<double> diag(m.diagonals().size());
  for (int d = -(rows - 1); d <= cols - 1; ++d) {
    diag[static_cast<std::size_t>(d + rows - 1)] = m.total() - m.diagonal(-d);
  }
  return ToeplitzPayoff(rows, cols, std::move(diag), m.total());
}

ToeplitzPayoff adjust_precision(const ToeplitzPayoff& m, double x, ChipState chips) {
  if (!(x > 0.0)) throw Error(ErrorCode::kInvalidParameter, "precision bonus x must be > 0");
  if (chips.a != m.cols() - 1 || chips.b != m.rows() - 1) {
    throw Error(ErrorCode::kDimensionMismatch, "chip counts do not match matrix shape");
  }
  std::vector<double> diag(m.diagonals().begin(), m.diagonals().end());
  for (int d = m.min_offset(); d <= m.max_offset(); ++d) {
    diag[static_cast<std::size_t>(d + m.rows() - 1)] += x * (chips.a - d);
  }
  return ToeplitzPayoff(m.rows(), m.cols(), std::move(diag), m.total() + chips.total() * x);
}

ToeplitzPayoff restrict(const ToeplitzPayoff& m, int length) {
  if (length < 1 || length > std::min(m.rows(), m.cols())) {
    throw Error(ErrorCode::kInvalidLength,
                "restriction length " + std::to_string(length) + " outside 1.." +
                    std::to_string(std::min(m.rows(), m.cols())));
  }
  auto first = m.diagonals().begin() + (m.rows() - length);
  std::vector<double> diag(first, first + (2 * length - 1));
  return ToeplitzPayoff(length, length, std::move(diag), m.total());
}

PayoffVector apply(const ToeplitzPayoff& m, std::span<const double> s) {
  if (s.size() != static_cast<std::size_t>(m.cols())) {
    throw Error(ErrorCode::kDimensionMismatch,
                "strategy has " + std::to_string(s.size()) + " entries, matrix has " +
                    std::to_string(m.cols()) + " columns");
  }
  PayoffVector out(static_cast<std::size_t>(m.rows()), 0.0);
  for (int i = 0; i < m.rows(); ++i) {
    double acc = 0.0;
    for (int j = 0; j < m.cols(); ++j) {
      if (s[j] != 0.0) acc += m(i, j) * s[j];
    }
    out[i] = acc;
  }
  return out;
}

PayoffVector apply(const ToeplitzPayoff& m, const Strategy& s) { return apply(m, s.probs()); }

double expected_payoff(std::span<const double> sb, const ToeplitzPayoff& m,
                       std::span<const double> sa) {
  if (sb.size() != static_cast<std::size_t>(m.rows())) {
    throw Error(ErrorCode::kDimensionMismatch, "row strategy does not match matrix rows");
  }
  PayoffVector column_payoffs = apply(m, sa);
  double acc = 0.0;
  for (std::size_t i = 0; i < sb.size(); ++i) acc += sb[i] * column_payoffs[i];
  return acc;
}

double expected_payoff(const Strategy& sb, const ToeplitzPayoff& m, const Strategy& sa) {
  return expected_payoff(sb.probs(), m, sa.probs());
}

}  // namespace allpay
