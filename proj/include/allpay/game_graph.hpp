#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace allpay {

enum class Player : std::uint8_t { kA, kB };

constexpr Player opponent(Player p) { return p == Player::kA ? Player::kB : Player::kA; }
std::string_view player_name(Player p);
Player parse_player(std::string_view text);

using VertexId = std::uint32_t;

// Chip endowments at the start of a turn. The sum is the fixed game total.
struct ChipState {
  int a = 0;
  int b = 0;

  int total() const { return a + b; }
  // The player winning tied bids: more chips, A on equal chips.
  Player advantage() const { return a >= b ? Player::kA : Player::kB; }
  int of(Player p) const { return p == Player::kA ? a : b; }

  friend bool operator==(const ChipState&, const ChipState&) = default;
};

inline constexpr std::string_view kWinA = "WIN_A";
inline constexpr std::string_view kWinB = "WIN_B";

// Unvalidated graph description, as read from JSON or produced by generators.
struct GraphSpec {
  struct Edge {
    std::string from;
    std::string to;
    Player player = Player::kA;
  };

  std::vector<std::string> vertices;
  std::vector<Edge> edges;
  std::string win_a{kWinA};
  std::string win_b{kWinB};
  std::optional<std::string> start;
  std::string label;
};

// Acyclic two-colored move graph with a win vertex for each player. Instances
// only exist in validated form and are immutable afterwards.
class GameGraph {
 public:
  // Checks every structural invariant and precomputes a topological order.
  // Throws Error with kCyclicGraph, kDanglingTerminalEdge, kDeadEndVertex,
  // kUnreachableTerminal, kUnknownVertex or kInvalidParameter.
  static GameGraph validate(const GraphSpec& spec);

  std::size_t size() const { return names_.size(); }
  VertexId win_a() const { return win_a_; }
  VertexId win_b() const { return win_b_; }
  VertexId start() const { return start_; }
  bool is_terminal(VertexId v) const { return v == win_a_ || v == win_b_; }

  const std::string& name(VertexId v) const { return names_.at(v); }
  std::optional<VertexId> find(std::string_view name) const;
  // Throws kUnknownVertex.
  VertexId id(std::string_view name) const;

  // Moves available to `p` from `v`, in insertion order. Throws kTerminalVertex.
  std::span<const VertexId> successors(VertexId v, Player p) const;

  // Every vertex appears after all of its successors (terminals first).
  std::span<const VertexId> reverse_topological_order() const { return order_; }
  // Longest path (in moves) from v to a terminal.
  int height(VertexId v) const { return height_.at(v); }
  // Longest path in the whole graph.
  int depth() const { return depth_; }

  std::uint64_t hash() const { return hash_; }
  const std::string& label() const { return label_; }
  GraphSpec to_spec() const;

 private:
  GameGraph() = default;

  std::vector<std::string> names_;
  std::unordered_map<std::string, VertexId> index_;
  std::vector<std::vector<VertexId>> edges_a_;
  std::vector<std::vector<VertexId>> edges_b_;
  std::vector<VertexId> order_;
  std::vector<int> height_;
  VertexId win_a_ = 0;
  VertexId win_b_ = 0;
  VertexId start_ = 0;
  int depth_ = 0;
  std::uint64_t hash_ = 0;
  std::string label_;
};

inline GameGraph validate_graph(const GraphSpec& spec) { return GameGraph::validate(spec); }

inline std::span<const VertexId> successors(const GameGraph& g, VertexId v, Player p) {
  return g.successors(v, p);
}

// Race to k A-moves versus m B-moves. Vertex "(i,j)" means A still needs i
// moves and B needs j; the start is "(k,m)".
GameGraph race_graph(int k, int m);

// Tic-Tac-Toe under bidding: A places X, B places O, any number of times in a
// row. Vertices are raw boards "XO.X....." in row-major order; completed lines
// collapse to the owner's win vertex and drawn full boards to draw_winner's.
GameGraph tictactoe_graph(Player draw_winner = Player::kB);

// Vertex reached when `mover` marks `cell` (0..8) on `board`: a board, or a
// win vertex name. Throws kInvalidParameter for an occupied cell.
std::string tictactoe_target(std::string_view board, int cell, Player mover,
                             Player draw_winner = Player::kB);

// Builds a graph from a selector: "race:k,m", "ttt", "ttt:A", "ttt:B" or
// "file:<path>" (JSON game spec).
GameGraph make_game(std::string_view selector);

}  // namespace allpay
