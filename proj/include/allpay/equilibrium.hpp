#pragma once

#include <span>
#include <vector>

#include "allpay/payoff_matrix.hpp"

namespace allpay {

// Probability vector over bids 0..cap.
class Strategy {
 public:
  Strategy() = default;
  // Entries in [-kClampTolerance, 0) are zeroed, then the vector must sum to
  // 1 within 1e-9. Throws kInvalidStrategy otherwise.
  explicit Strategy(std::vector<double> probs);

  static Strategy pure(int bid, int cap);
  // Clamps tiny negatives and rescales to sum 1; `cap` pads with zeros.
  static Strategy from_weights(std::span<const double> weights, int cap);

  int cap() const { return static_cast<int>(probs_.size()) - 1; }
  // One plus the largest bid with nonzero probability.
  int length() const;
  bool gap_free() const;
  double operator[](int bid) const { return bid <= cap() ? probs_[bid] : 0.0; }
  std::span<const double> probs() const { return probs_; }
  Strategy padded(int cap) const;

  friend bool operator==(const Strategy&, const Strategy&) = default;

 private:
  std::vector<double> probs_;
};

inline constexpr double kClampTolerance = 1e-9;
inline constexpr double kNonnegTolerance = 1e-9;
inline constexpr double kGapTolerance = 1e-7;

struct EquilibriumResult {
  // Equalized payoff of the matrix owner (the player with advantage).
  double value = 0.0;
  Strategy advantage;  // owner, bids 0..cols-1
  Strategy opponent;   // bids 0..rows-1, the reverse of `advantage`
  int length = 1;
  double best_response_gap = 0.0;
};

// True iff restrict(m, k) is invertible and its inverse applied to the ones
// vector has no entry below -1e-9 * scale. Singular restrictions give false.
bool nonneg_solution_test(const ToeplitzPayoff& m, int k);

// Positive affine image of m with entries spanning [1, 2]. Equilibrium
// strategies are unchanged and the length search runs on this form, so its
// tolerances do not depend on how far payoffs sit from zero.
ToeplitzPayoff search_form(const ToeplitzPayoff& m);

// Binary search over 1..min(rows, cols) for the largest k passing
// nonneg_solution_test on search_form(m). Needs rows, cols >= 2
// (kDegenerateChips otherwise).
int find_length(const ToeplitzPayoff& m);

// Normalized solution of restrict(m, length) y = 1, zero padded to cols - 1.
// Throws kSingular, or kInvalidStrategy if an entry is clearly negative.
Strategy advantage_strategy(const ToeplitzPayoff& m, int length);

// Reverses the support 0..length-1 and pads to opponent_cap.
Strategy reverse(const Strategy& s, int opponent_cap);
// Moves every bid up by one: (0, s).
Strategy shift(const Strategy& s, int cap);

// Single-turn equilibrium for the owner of m, who must hold the advantage.
// Shapes with a single row or column are solved as pure best responses.
EquilibriumResult solve_turn(const ToeplitzPayoff& m);

// max(0, best owner deviation against `opponent` - owner guarantee).
double best_response_gap(const ToeplitzPayoff& m, const Strategy& owner, const Strategy& opponent);

struct VerificationReport {
  double value = 0.0;               // owner's guarantee min_i (m s)_i
  double equalization_error = 0.0;  // on the opponent's support
  double owner_gap = 0.0;           // best pure deviation of the owner
  double opponent_gap = 0.0;        // best pure deviation of the opponent
  bool owner_gap_free = false;
  bool opponent_gap_free = false;
  bool owner_bids_zero = false;
  bool opponent_bids_one = false;   // required only when length >= 2
  int length = 0;

  bool equalized() const { return equalization_error <= 1e-8; }
  bool structural() const {
    return owner_gap_free && opponent_gap_free && owner_bids_zero &&
           (length < 2 || opponent_bids_one);
  }
  bool passed() const {
    return equalized() && owner_gap <= kGapTolerance && opponent_gap <= kGapTolerance &&
           structural();
  }
};

VerificationReport verify_equilibrium(const ToeplitzPayoff& m, const Strategy& owner,
                                      const Strategy& opponent);

// Both players' strategies at one position, from A's matrix.
struct TurnSolution {
  double value_a = 0.0;  // A's adjusted value
  Strategy strategy_a;
  Strategy strategy_b;
  int length = 1;
  Player advantage = Player::kA;
  double best_response_gap = 0.0;
};

// Solves the turn from the advantage holder's side; B's matrix comes from
// opponent_matrix when B has the advantage.
TurnSolution solve_position(const ToeplitzPayoff& matrix_a, Player advantage);

}  // namespace allpay
