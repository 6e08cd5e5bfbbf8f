#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "allpay/equilibrium.hpp"
#include "allpay/game_graph.hpp"

namespace allpay {

struct SolveOptions {
  // Per-chip precision bonus; <= 0 selects default_precision().
  double x = 0.0;
  bool store_strategies = false;
  // Refuse tables with more (vertex, chips) cells than this.
  std::size_t max_entries = 50'000'000;
  // Worker threads per level; 0 means hardware concurrency.
  unsigned threads = 0;
};

// 1e-6 / (depth * total), floored at 1e-9.
double default_precision(const GameGraph& g, int total);
// depth * x * total: how far adjusted values may sit from true win chances.
double adjustment_error_bound(const GameGraph& g, int total, double x);

// Values (and optionally strategies) for every (vertex, A's chips) pair at a
// fixed chip total. Terminal vertices are anchored at exactly 1 and 0.
class ValueTable {
 public:
  int total() const { return total_; }
  double x() const { return x_; }
  std::uint64_t graph_hash() const { return graph_hash_; }
  std::size_t vertex_count() const { return vertex_count_; }
  const std::string& game_label() const { return game_label_; }
  bool has_strategies() const { return !strategy_offset_.empty(); }

  double value(VertexId v, int a) const { return values_.at(cell(v, a)); }
  // Length of the advantage holder's strategy; 0 at terminals.
  int length(VertexId v, int a) const { return lengths_.at(cell(v, a)); }
  // Stored equilibrium bid distribution of `p` at (v, a). Throws
  // kInvalidParameter without stored strategies, kTerminalVertex at terminals.
  Strategy strategy(VertexId v, int a, Player p) const;

  // Number of turn solves performed while building the table.
  std::size_t computed_cells() const { return computed_cells_; }

  friend bool operator==(const ValueTable&, const ValueTable&) = default;

 private:
  friend ValueTable solve_game(const GameGraph&, int, const SolveOptions&);
  friend ValueTable load_table(const std::string&, const GameGraph&);
  friend void save_table(const ValueTable&, const std::string&);

  std::size_t cell(VertexId v, int a) const;

  int total_ = 0;
  double x_ = 0.0;
  std::uint64_t graph_hash_ = 0;
  std::size_t vertex_count_ = 0;
  std::string game_label_;
  std::vector<double> values_;
  std::vector<std::int32_t> lengths_;
  // Per cell: offset into strategy_pool_, then A's and B's trimmed lengths.
  std::vector<std::uint64_t> strategy_offset_;
  std::vector<std::uint32_t> strategy_len_a_;
  std::vector<std::uint32_t> strategy_len_b_;
  std::vector<double> strategy_pool_;
  std::size_t computed_cells_ = 0;
};

// Retrograde pass over the graph: vertices are processed by increasing
// height, each (vertex, a) cell builds the adjusted payoff matrix from
// finished successors and solves the turn. Throws kGraphTooLarge.
ValueTable solve_game(const GameGraph& g, int total, const SolveOptions& options = {});

// A's value at (v, a), including terminals.
double value_at(const GameGraph& g, const ValueTable& table, VertexId v, int a);

// A's adjusted payoff matrix at (v, a), rebuilt from the table's values.
ToeplitzPayoff position_matrix(const GameGraph& g, const ValueTable& table, VertexId v, int a);

// Re-solves the turn at (v, a) from the table's successor values. Bitwise
// identical to what solve_game computed for that cell.
TurnSolution position_solution(const GameGraph& g, const ValueTable& table, VertexId v, int a);

// Stored strategy when available, otherwise recomputed.
Strategy strategy_at(const GameGraph& g, const ValueTable& table, VertexId v, int a, Player p);

// Best successor for `mover` at the post-exchange chips: argmax of A's value
// for A, argmin for B, first in successor order on ties. Throws
// kTerminalVertex, kNoLegalMove.
VertexId best_move(const GameGraph& g, const ValueTable& table, VertexId v, ChipState chips,
                   Player mover);

// The bid winner's choice of mover: compare its own best move with the
// opponent's best reply and keep the better one (self on ties).
Player designate_mover(const GameGraph& g, const ValueTable& table, VertexId v, ChipState chips,
                       Player winner);

struct BidResult {
  Player winner = Player::kA;
  bool by_advantage = false;
  ChipState next_chips;
};

// All-pay exchange: A ends with a - bid_a + bid_b. Throws kInvalidParameter on
// out-of-range bids.
BidResult resolve_bid(ChipState chips, int bid_a, int bid_b);

struct BidOutcome {
  int bid_a = 0;
  int bid_b = 0;
  Player winner = Player::kA;
  bool by_advantage = false;
  Player mover = Player::kA;
  VertexId next_vertex = 0;
  ChipState next_chips;
};

// One full turn with optimal designation and move.
BidOutcome play_turn(const GameGraph& g, const ValueTable& table, VertexId v, ChipState chips,
                     int bid_a, int bid_b);

using Rng = std::mt19937_64;

// Generator for a 64-bit seed. The seed is scrambled first: Mersenne Twister
// streams from neighbouring raw seeds are visibly correlated.
Rng seeded_rng(std::uint64_t seed);

// Inverse-CDF draw; the same seed and strategy always give the same bid.
int sample_bid(const Strategy& s, Rng& rng);
int sample_bid(const Strategy& s, std::uint64_t seed);

// Versioned binary format: magic, version, graph hash, total, x, label, then
// the cell arrays. Throws kIoError, kFormatMismatch, kGraphHashMismatch.
void save_table(const ValueTable& table, const std::string& path);
ValueTable load_table(const std::string& path, const GameGraph& g);

struct TableHeader {
  std::uint32_t version = 0;
  std::uint64_t graph_hash = 0;
  int total = 0;
  double x = 0.0;
  std::string game_label;
  bool has_strategies = false;
};
TableHeader read_table_header(const std::string& path);

}  // namespace allpay
