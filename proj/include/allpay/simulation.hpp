#pragma once

#include <cstdint>
#include <vector>

#include "allpay/dag_solver.hpp"

namespace allpay {

// One turn of a self-play game, as recorded in the trajectory log.
struct TurnRecord {
  VertexId vertex = 0;
  ChipState chips;
  BidOutcome outcome;
};

struct GameRecord {
  std::vector<TurnRecord> turns;
  Player winner = Player::kA;
};

// Both players bid by sampling their equilibrium strategies and move with
// best_move until a terminal is reached.
GameRecord simulate_game(const GameGraph& g, const ValueTable& table, VertexId start, int a,
                         Rng& rng);

struct SimulationResult {
  std::uint64_t trials = 0;
  std::uint64_t wins_a = 0;
  double win_rate = 0.0;
  // Binomial standard error of win_rate at the empirical rate.
  double std_error = 0.0;
  double table_value = 0.0;
};

// Trial i uses its own generator seeded with seed + i, so results do not
// depend on how trials are scheduled.
SimulationResult simulate(const GameGraph& g, const ValueTable& table, VertexId start, int a,
                          std::uint64_t trials, std::uint64_t seed);

}  // namespace allpay
