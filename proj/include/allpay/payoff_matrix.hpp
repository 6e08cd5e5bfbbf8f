#pragma once

#include <limits>
#include <span>
#include <vector>

#include "allpay/error.hpp"
#include "allpay/game_graph.hpp"

namespace allpay {

class Strategy;

// Diagonal-constant payoff matrix of one bidding turn, seen from the column
// player. Rows are the opponent's bids 0..rows-1, columns the owner's bids
// 0..cols-1, and entry (i, j) only depends on the bid difference d = j - i.
//
// Layout: one contiguous vector holding the diagonals for d = -(rows-1) ..
// cols-1, so diag_[d + rows - 1] is the payoff when the owner outbids the
// opponent by d. This is the only matrix layout in the library.
//
// `total` is the constant sum of both players' payoffs: 1 for a plain game,
// 1 + (a+b)x after precision adjustment.
class ToeplitzPayoff {
 public:
  ToeplitzPayoff() = default;
  ToeplitzPayoff(int rows, int cols, std::vector<double> diag, double total = 1.0);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int min_offset() const { return -(rows_ - 1); }
  int max_offset() const { return cols_ - 1; }
  double total() const { return total_; }

  double diagonal(int d) const { return diag_[static_cast<std::size_t>(d + rows_ - 1)]; }
  double operator()(int i, int j) const { return diagonal(j - i); }
  std::span<const double> diagonals() const { return diag_; }

  // Largest absolute entry; the reference for every relative tolerance.
  double scale() const;
  double min_entry() const;
  double max_entry() const;

  std::vector<std::vector<double>> dense() const;

  friend bool operator==(const ToeplitzPayoff&, const ToeplitzPayoff&) = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> diag_;
  double total_ = 1.0;
};

using PayoffVector = std::vector<double>;

// Outcome of a turn as a function of A's chips c after the bid exchange:
// `a_wins[c]` is A's value when A won the bid, `b_wins[c]` when B won it.
// Both are indexed c = 0..total.
struct TurnOutcomes {
  std::vector<double> a_wins;
  std::vector<double> b_wins;
};

inline constexpr double kNoMove = std::numeric_limits<double>::quiet_NaN();

// Combines successor values into bid-winner outcomes: the winner designates
// the mover, so A winning is worth max(best A move, worst B move) and B
// winning min(worst B move, best A move). `value_of(succ, c)` returns A's
// value at successor `succ` with A holding c chips.
template <class ValueOf>
TurnOutcomes turn_outcomes(const GameGraph& g, VertexId v, int total, ValueOf&& value_of) {
  auto moves_a = g.successors(v, Player::kA);
  auto moves_b = g.successors(v, Player::kB);
  constexpr double kInf = std::numeric_limits<double>::infinity();
  TurnOutcomes out;
  out.a_wins.resize(static_cast<std::size_t>(total) + 1);
  out.b_wins.resize(static_cast<std::size_t>(total) + 1);
  for (int c = 0; c <= total; ++c) {
    double best_a = -kInf;
    for (VertexId w : moves_a) best_a = std::max(best_a, value_of(w, c));
    double worst_b = kInf;
    for (VertexId w : moves_b) worst_b = std::min(worst_b, value_of(w, c));
    // A side without edges cannot be chosen, so only the other side counts.
    if (moves_a.empty()) {
      out.a_wins[c] = out.b_wins[c] = worst_b;
    } else if (moves_b.empty()) {
      out.a_wins[c] = out.b_wins[c] = best_a;
    } else {
      out.a_wins[c] = std::max(best_a, worst_b);
      out.b_wins[c] = std::min(worst_b, best_a);
    }
  }
  return out;
}

// A's (b+1)x(a+1) payoff matrix from precomputed outcomes. A wins the bid
// when d > 0, or d == 0 and A has the advantage; chips move to (a-d, b+d).
ToeplitzPayoff matrix_from_outcomes(const TurnOutcomes& outcomes, ChipState chips,
                                    Player advantage);

// Builds A's payoff matrix for vertex v. `lookup(succ, c)` must return an
// std::optional<double> with A's value at successor succ when A holds c chips
// (total fixed at chips.total()); terminals are answered here (1 and 0).
// Throws kMissingValue if the lookup has no entry.
template <class Lookup>
ToeplitzPayoff build_matrix(const GameGraph& g, VertexId v, ChipState chips, Lookup&& lookup,
                            Player advantage) {
  auto value_of = [&](VertexId w, int c) -> double {
    if (w == g.win_a()) return 1.0;
    if (w == g.win_b()) return 0.0;
    auto value = lookup(w, c);
    if (!value) {
      throw Error(ErrorCode::kMissingValue,
                  "no value for '" + g.name(w) + "' at a=" + std::to_string(c));
    }
    return *value;
  };
  return matrix_from_outcomes(turn_outcomes(g, v, chips.total(), value_of), chips, advantage);
}

// Lemma-style identity M_B = total - M_A^T, returned in B's own orientation.
ToeplitzPayoff opponent_matrix(const ToeplitzPayoff& m);

// Adds x per chip held by the column player after the turn; `chips` are the
// endowments (column owner first). Raises the zero-sum total by (a+b)x.
ToeplitzPayoff adjust_precision(const ToeplitzPayoff& m, double x, ChipState chips);

// Top-left length x length minor. Throws kInvalidLength.
ToeplitzPayoff restrict(const ToeplitzPayoff& m, int length);

// m * s. Throws kDimensionMismatch.
PayoffVector apply(const ToeplitzPayoff& m, std::span<const double> s);
PayoffVector apply(const ToeplitzPayoff& m, const Strategy& s);

// sb^T m sa. Throws kDimensionMismatch.
double expected_payoff(std::span<const double> sb, const ToeplitzPayoff& m,
                       std::span<const double> sa);
double expected_payoff(const Strategy& sb, const ToeplitzPayoff& m, const Strategy& sa);

}  // namespace allpay
