#include "allpay/game_graph.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <deque>
#include <unordered_map>

#include "allpay/error.hpp"
#include "allpay/serialization.hpp"

namespace allpay {

std::string_view player_name(Player p) { return p == Player::kA ? "A" : "B"; }

Player parse_player(std::string_view text) {
  if (text == "A" || text == "a") return Player::kA;
  if (text == "B" || text == "b") return Player::kB;
  throw Error(ErrorCode::kInvalidParameter, "unknown player '" + std::string(text) + "'");
}

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

void fnv_mix(std::uint64_t& h, std::string_view bytes) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnvPrime;
  }
  h ^= 0xff;
  h *= kFnvPrime;
}

void append_unique(std::vector<VertexId>& list, VertexId v) {
  if (std::find(list.begin(), list.end(), v) == list.end()) list.push_back(v);
}

}  // namespace

GameGraph GameGraph::validate(const GraphSpec& spec) {
  GameGraph g;
  g.label_ = spec.label;
  auto& index = g.index_;
  auto add_vertex = [&](const std::string& name) {
    auto [it, inserted] = index.emplace(name, static_cast<VertexId>(g.names_.size()));
    if (inserted) g.names_.push_back(name);
    return inserted;
  };
  for (const auto& v : spec.vertices) {
    if (!add_vertex(v)) {
      throw Error(ErrorCode::kInvalidParameter, "duplicate vertex '" + v + "'");
    }
  }
  // Terminals may be left out of the vertex list.
  add_vertex(spec.win_a);
  add_vertex(spec.win_b);
  if (spec.win_a == spec.win_b) {
    throw Error(ErrorCode::kInvalidParameter, "win_a and win_b must differ");
  }
  g.win_a_ = index.at(spec.win_a);
  g.win_b_ = index.at(spec.win_b);

  const std::size_t n = g.names_.size();
  g.edges_a_.assign(n, {});
  g.edges_b_.assign(n, {});
  auto lookup = [&](const std::string& name) {
    auto it = index.find(name);
    if (it == index.end()) {
      throw Error(ErrorCode::kUnknownVertex, "edge references unknown vertex '" + name + "'");
    }
    return it->second;
  };
  for (const auto& e : spec.edges) {
    VertexId from = lookup(e.from);
    VertexId to = lookup(e.to);
    if (from == g.win_a_ || from == g.win_b_) {
      throw Error(ErrorCode::kDanglingTerminalEdge,
                  "terminal vertex '" + e.from + "' has an outgoing edge");
    }
    append_unique(e.player == Player::kA ? g.edges_a_[from] : g.edges_b_[from], to);
  }

  for (VertexId v = 0; v < n; ++v) {
    if (!g.is_terminal(v) && g.edges_a_[v].empty() && g.edges_b_[v].empty()) {
      throw Error(ErrorCode::kDeadEndVertex, "vertex '" + g.names_[v] + "' has no moves");
    }
  }

  // Kahn's algorithm on the reversed graph yields sinks first.
  std::vector<std::vector<VertexId>> preds(n);
  std::vector<int> out_degree(n, 0);
  for (VertexId v = 0; v < n; ++v) {
    for (const auto* list : {&g.edges_a_[v], &g.edges_b_[v]}) {
      for (VertexId w : *list) {
        preds[w].push_back(v);
        ++out_degree[v];
      }
    }
  }
  std::deque<VertexId> ready;
  for (VertexId v = 0; v < n; ++v) {
    if (out_degree[v] == 0) ready.push_back(v);
  }
  g.height_.assign(n, 0);
  while (!ready.empty()) {
    VertexId w = ready.front();
    ready.pop_front();
    g.order_.push_back(w);
    for (VertexId v : preds[w]) {
      g.height_[v] = std::max(g.height_[v], g.height_[w] + 1);
      if (--out_degree[v] == 0) ready.push_back(v);
    }
  }
  if (g.order_.size() != n) {
    throw Error(ErrorCode::kCyclicGraph, "game graph contains a cycle");
  }

  // With no cycles and no dead ends every walk ends in a terminal, but a
  // disconnected terminal-free component would still be caught here.
  std::vector<char> reaches(n, 0);
  reaches[g.win_a_] = reaches[g.win_b_] = 1;
  for (VertexId v : g.order_) {
    for (const auto* list : {&g.edges_a_[v], &g.edges_b_[v]}) {
      for (VertexId w : *list) reaches[v] = reaches[v] || reaches[w];
    }
  }
  for (VertexId v = 0; v < n; ++v) {
    if (!reaches[v]) {
      throw Error(ErrorCode::kUnreachableTerminal,
                  "no terminal reachable from '" + g.names_[v] + "'");
    }
  }

  g.depth_ = *std::max_element(g.height_.begin(), g.height_.end());
  if (spec.start) {
    g.start_ = lookup(*spec.start);
  } else {
    g.start_ = 0;
    while (g.start_ < n && g.is_terminal(g.start_)) ++g.start_;
    if (g.start_ == n) g.start_ = 0;
  }

  std::uint64_t h = kFnvOffset;
  for (VertexId v = 0; v < n; ++v) {
    fnv_mix(h, g.names_[v]);
    for (VertexId w : g.edges_a_[v]) fnv_mix(h, "A" + std::to_string(w));
    for (VertexId w : g.edges_b_[v]) fnv_mix(h, "B" + std::to_string(w));
  }
  fnv_mix(h, std::to_string(g.win_a_) + "/" + std::to_string(g.win_b_));
  g.hash_ = h;
  return g;
}

std::optional<VertexId> GameGraph::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

VertexId GameGraph::id(std::string_view name) const {
  if (auto v = find(name)) return *v;
  throw Error(ErrorCode::kUnknownVertex, "unknown vertex '" + std::string(name) + "'");
}

std::span<const VertexId> GameGraph::successors(VertexId v, Player p) const {
  if (v >= names_.size()) {
    throw Error(ErrorCode::kUnknownVertex, "vertex id out of range");
  }
  if (is_terminal(v)) {
    throw Error(ErrorCode::kTerminalVertex, "'" + names_[v] + "' is terminal");
  }
  return p == Player::kA ? edges_a_[v] : edges_b_[v];
}

GraphSpec GameGraph::to_spec() const {
  GraphSpec spec;
  spec.vertices = names_;
  for (VertexId v = 0; v < names_.size(); ++v) {
    for (VertexId w : edges_a_[v]) spec.edges.push_back({names_[v], names_[w], Player::kA});
    for (VertexId w : edges_b_[v]) spec.edges.push_back({names_[v], names_[w], Player::kB});
  }
  spec.win_a = names_[win_a_];
  spec.win_b = names_[win_b_];
  spec.start = names_[start_];
  spec.label = label_;
  return spec;
}

GameGraph race_graph(int k, int m) {
  if (k < 1 || m < 1) {
    throw Error(ErrorCode::kInvalidParameter, "race_graph needs k, m >= 1");
  }
  auto name = [&](int i, int j) -> std::string {
    if (i == 0) return std::string(kWinA);
    if (j == 0) return std::string(kWinB);
    return "(" + std::to_string(i) + "," + std::to_string(j) + ")";
  };
  GraphSpec spec;
  for (int i = k; i >= 1; --i) {
    for (int j = m; j >= 1; --j) {
      spec.vertices.push_back(name(i, j));
      spec.edges.push_back({name(i, j), name(i - 1, j), Player::kA});
      spec.edges.push_back({name(i, j), name(i, j - 1), Player::kB});
    }
  }
  spec.vertices.emplace_back(kWinA);
  spec.vertices.emplace_back(kWinB);
  spec.start = name(k, m);
  spec.label = "race:" + std::to_string(k) + "," + std::to_string(m);
  return GameGraph::validate(spec);
}

namespace {

constexpr std::array<std::array<int, 3>, 8> kLines{{
    {0, 1, 2}, {3, 4, 5}, {6, 7, 8},
    {0, 3, 6}, {1, 4, 7}, {2, 5, 8},
    {0, 4, 8}, {2, 4, 6},
}};

bool has_line(const std::string& board, char mark) {
  return std::any_of(kLines.begin(), kLines.end(), [&](const auto& line) {
    return board[line[0]] == mark && board[line[1]] == mark && board[line[2]] == mark;
  });
}

}  // namespace

std::string tictactoe_target(std::string_view board, int cell, Player mover, Player draw_winner) {
  if (board.size() != 9 || cell < 0 || cell > 8 || board[cell] != '.') {
    throw Error(ErrorCode::kInvalidParameter, "cell " + std::to_string(cell) + " is not free");
  }
  const char mark = mover == Player::kA ? 'X' : 'O';
  std::string next(board);
  next[cell] = mark;
  if (has_line(next, mark)) return std::string(mover == Player::kA ? kWinA : kWinB);
  if (next.find('.') == std::string::npos) {
    return std::string(draw_winner == Player::kA ? kWinA : kWinB);
  }
  return next;
}

GameGraph tictactoe_graph(Player draw_winner) {
  GraphSpec spec;
  std::unordered_map<std::string, bool> seen;
  std::deque<std::string> frontier{std::string(9, '.')};
  seen.emplace(frontier.front(), true);
  while (!frontier.empty()) {
    std::string board = std::move(frontier.front());
    frontier.pop_front();
    spec.vertices.push_back(board);
    for (Player player : {Player::kA, Player::kB}) {
      for (int cell = 0; cell < 9; ++cell) {
        if (board[cell] != '.') continue;
        std::string to = tictactoe_target(board, cell, player, draw_winner);
        const bool is_board = to != kWinA && to != kWinB;
        spec.edges.push_back({board, to, player});
        if (is_board && seen.emplace(to, true).second) frontier.push_back(to);
      }
    }
  }
  spec.vertices.emplace_back(kWinA);
  spec.vertices.emplace_back(kWinB);
  spec.start = std::string(9, '.');
  spec.label = draw_winner == Player::kA ? "ttt:A" : "ttt";
  return GameGraph::validate(spec);
}

namespace {

int parse_positive(std::string_view text) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::kInvalidParameter, "bad integer '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

GameGraph make_game(std::string_view selector) {
  if (selector.starts_with("race:")) {
    auto args = selector.substr(5);
    auto comma = args.find(',');
    if (comma == std::string_view::npos) {
      throw Error(ErrorCode::kInvalidParameter, "race selector must be race:k,m");
    }
    return race_graph(parse_positive(args.substr(0, comma)), parse_positive(args.substr(comma + 1)));
  }
  if (selector == "ttt" || selector == "ttt:B") return tictactoe_graph(Player::kB);
  if (selector == "ttt:A") return tictactoe_graph(Player::kA);
  if (selector.starts_with("file:")) {
    std::string path(selector.substr(5));
    GraphSpec spec = graph_spec_from_json(read_json_file(path));
    spec.label = std::string(selector);
    return GameGraph::validate(spec);
  }
  throw Error(ErrorCode::kInvalidParameter, "unknown game '" + std::string(selector) + "'");
}

}  // namespace allpay
