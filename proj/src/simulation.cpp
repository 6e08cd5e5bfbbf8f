#include "allpay/simulation.hpp"

#include <cmath>

namespace allpay {

GameRecord simulate_game(const GameGraph& g, const ValueTable& table, VertexId start, int a,
                         Rng& rng) {
  if (a < 0 || a > table.total()) throw Error(ErrorCode::kInvalidParameter, "chips out of range");
  GameRecord record;
  VertexId v = start;
  ChipState chips{a, table.total() - a};
  while (!g.is_terminal(v)) {
    const int bid_a = sample_bid(strategy_at(g, table, v, chips.a, Player::kA), rng);
    const int bid_b = sample_bid(strategy_at(g, table, v, chips.a, Player::kB), rng);
    const BidOutcome outcome = play_turn(g, table, v, chips, bid_a, bid_b);
    record.turns.push_back({v, chips, outcome});
    v = outcome.next_vertex;
    chips = outcome.next_chips;
  }
  record.winner = v == g.win_a() ? Player::kA : Player::kB;
  return record;
}

SimulationResult simulate(const GameGraph& g, const ValueTable& table, VertexId start, int a,
                          std::uint64_t trials, std::uint64_t seed) {
  if (trials == 0) throw Error(ErrorCode::kInvalidParameter, "need at least one trial");
  SimulationResult result;
  result.trials = trials;
  result.table_value = value_at(g, table, start, a);
  for (std::uint64_t i = 0; i < trials; ++i) {
    Rng rng = seeded_rng(seed + i);
    if (simulate_game(g, table, start, a, rng).winner == Player::kA) ++result.wins_a;
  }
  result.win_rate = static_cast<double>(result.wins_a) / static_cast<double>(trials);
  result.std_error =
      std::sqrt(result.win_rate * (1.0 - result.win_rate) / static_cast<double>(trials));
  return result;
}

}  // namespace allpay
