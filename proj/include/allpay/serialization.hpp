#pragma once

#include <string>

#include "json.hpp"

#include "allpay/game_graph.hpp"
#include "allpay/payoff_matrix.hpp"

namespace allpay {

// Game spec: {"vertices":[...], "edges":[{"from","to","player"}], "win_a",
// "win_b", optional "start"}.
GraphSpec graph_spec_from_json(const nlohmann::json& j);
nlohmann::json graph_to_json(const GameGraph& g);

// Matrix: {"rows", "cols", "diag"[, "total"]}, diag ordered from offset
// -(rows-1) to cols-1.
ToeplitzPayoff matrix_from_json(const nlohmann::json& j);
nlohmann::json matrix_to_json(const ToeplitzPayoff& m);

nlohmann::json read_json_file(const std::string& path);

// Rounds to `digits` significant digits so that dumps are short and stable.
double round_significant(double value, int digits = 9);

}  // namespace allpay
