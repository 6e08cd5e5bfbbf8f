#include "allpay/session.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "allpay/serialization.hpp"

namespace allpay {

using nlohmann::json;

std::string_view phase_name(Phase p) {
  switch (p) {
    case Phase::kAwaitingBid: return "awaiting_bid";
    case Phase::kAwaitingHumanMove: return "awaiting_human_move";
    case Phase::kFinished: return "finished";
  }
  return "unknown";
}

namespace {

Phase parse_phase(std::string_view text) {
  for (Phase p : {Phase::kAwaitingBid, Phase::kAwaitingHumanMove, Phase::kFinished}) {
    if (phase_name(p) == text) return p;
  }
  throw Error(ErrorCode::kFormatMismatch, "unknown phase '" + std::string(text) + "'");
}

bool is_tictactoe(const GameGraph& g) { return g.label().starts_with("ttt"); }

Player ttt_draw_winner(const GameGraph& g) {
  return g.label() == "ttt:A" ? Player::kA : Player::kB;
}

// Cells whose mark leads from board v to vertex `to`.
std::vector<int> ttt_cells(const GameGraph& g, VertexId v, Player mover, VertexId to) {
  std::vector<int> cells;
  const std::string& board = g.name(v);
  for (int cell = 0; cell < 9; ++cell) {
    if (board[cell] != '.') continue;
    if (tictactoe_target(board, cell, mover, ttt_draw_winner(g)) == g.name(to)) cells.push_back(cell);
  }
  return cells;
}

double round_places(double value, int places) {
  const double f = std::pow(10.0, places);
  return std::round(value * f) / f;
}

json moves_json(const GameGraph& g, VertexId v, Player p) {
  json out = json::array();
  if (g.is_terminal(v)) return out;
  for (VertexId w : g.successors(v, p)) {
    json m = {{"vertex", g.name(w)}};
    if (is_tictactoe(g)) m["cells"] = ttt_cells(g, v, p, w);
    out.push_back(std::move(m));
  }
  return out;
}

json turn_json(const GameGraph& g, const SessionTurn& t) {
  json j = {{"vertex", g.name(t.vertex)},
            {"chips", {{"A", t.chips.a}, {"B", t.chips.b}}},
            {"bid_A", t.bid_a},
            {"bid_B", t.bid_b},
            {"winner", player_name(t.winner)},
            {"by_advantage", t.by_advantage},
            {"chips_after", {{"A", t.chips_after.a}, {"B", t.chips_after.b}}},
            {"mover", t.mover ? json(player_name(*t.mover)) : json(nullptr)},
            {"move", t.move ? json(g.name(*t.move)) : json(nullptr)}};
  if (t.cell) j["cell"] = *t.cell;
  return j;
}

std::vector<Player> designations(const GameSession& s) {
  const GameGraph& g = *s.game.graph;
  if (s.phase != Phase::kAwaitingHumanMove) return {};
  if (s.human_forced) return {s.human};
  std::vector<Player> out;
  for (Player p : {s.human, opponent(s.human)}) {
    if (!g.successors(s.vertex, p).empty()) out.push_back(p);
  }
  return out;
}

void apply_move(GameSession& s, Player mover, VertexId next) {
  const GameGraph& g = *s.game.graph;
  SessionTurn& turn = s.history.back();
  turn.mover = mover;
  turn.move = next;
  if (is_tictactoe(g)) {
    const int cell = ttt_cells(g, s.vertex, mover, next).front();
    turn.cell = cell;
    s.board[cell] = mover == Player::kA ? 'X' : 'O';
  }
  s.vertex = next;
  s.human_forced = false;
  if (g.is_terminal(next)) {
    s.phase = Phase::kFinished;
    s.winner = next == g.win_a() ? Player::kA : Player::kB;
  } else {
    s.phase = Phase::kAwaitingBid;
  }
}

int require_int(const json& body, const char* key, const char* code) {
  auto it = body.find(key);
  if (it == body.end() || !it->is_number_integer()) {
    throw ApiError(422, code, std::string("'") + key + "' must be an integer");
  }
  return it->get<int>();
}

Player require_player(const json& value, int status, const char* code) {
  if (!value.is_string()) throw ApiError(status, code, "player must be \"A\" or \"B\"");
  try {
    return parse_player(value.get<std::string>());
  } catch (const Error&) {
    throw ApiError(status, code, "player must be \"A\" or \"B\"");
  }
}

}  // namespace

json session_state(const GameSession& s) {
  const GameGraph& g = *s.game.graph;
  const Player engine = opponent(s.human);
  json history = json::array();
  for (const SessionTurn& t : s.history) history.push_back(turn_json(g, t));
  json designate = json::array();
  for (Player p : designations(s)) designate.push_back(player_name(p));
  json state = {{"session_id", s.id},
                {"game", s.game.selector},
                {"vertex", g.name(s.vertex)},
                {"chips", {{"A", s.chips.a}, {"B", s.chips.b}}},
                {"chips_total", s.chips.total()},
                {"human", player_name(s.human)},
                {"engine", player_name(engine)},
                {"advantage", player_name(s.chips.advantage())},
                {"phase", phase_name(s.phase)},
                {"winner", s.winner ? json(player_name(*s.winner)) : json(nullptr)},
                {"seed", s.seed},
                {"designations", std::move(designate)},
                {"moves", {{"A", moves_json(g, s.vertex, Player::kA)},
                           {"B", moves_json(g, s.vertex, Player::kB)}}},
                {"history", std::move(history)}};
  if (is_tictactoe(g)) state["board"] = s.board;
  return state;
}

SessionManager::SessionManager(SessionOptions options)
    : options_(std::move(options)), id_rng_(std::random_device{}()) {
  if (options_.snapshot_dir) std::filesystem::create_directories(*options_.snapshot_dir);
}

void SessionManager::add_table(const std::string& selector, const std::string& path) {
  const TableHeader header = read_table_header(path);
  auto graph = std::make_shared<const GameGraph>(make_game(selector));
  auto table = std::make_shared<const ValueTable>(load_table(path, *graph));
  std::promise<SolvedGame> ready;
  ready.set_value(SolvedGame{selector, graph, table});
  std::lock_guard lock(mutex_);
  graphs_[selector] = graph;
  games_[{selector, header.total}] = ready.get_future().share();
}

SolvedGame SessionManager::solved_game(const std::string& selector, int total) {
  const auto key = std::make_pair(selector, total);
  std::promise<SolvedGame> promise;
  std::shared_future<SolvedGame> result;
  bool build = false;
  {
    std::lock_guard lock(mutex_);
    if (auto it = games_.find(key); it != games_.end()) {
      result = it->second;
    } else {
      result = promise.get_future().share();
      games_[key] = result;
      build = true;
    }
  }
  if (build) {
    try {
      std::shared_ptr<const GameGraph> graph;
      {
        std::lock_guard lock(mutex_);
        if (auto it = graphs_.find(selector); it != graphs_.end()) graph = it->second;
      }
      if (!graph) {
        graph = std::make_shared<const GameGraph>(make_game(selector));
        std::lock_guard lock(mutex_);
        graphs_[selector] = graph;
      }
      SolveOptions opts;
      opts.max_entries = options_.max_entries;
      auto table = std::make_shared<const ValueTable>(solve_game(*graph, total, opts));
      promise.set_value(SolvedGame{selector, graph, table});
    } catch (...) {
      promise.set_exception(std::current_exception());
      std::lock_guard lock(mutex_);
      games_.erase(key);
    }
  }
  return result.get();
}

std::string SessionManager::new_id() {
  std::lock_guard lock(mutex_);
  std::ostringstream out;
  out << std::hex << id_rng_() << '-' << ++counter_;
  return out.str();
}

std::shared_ptr<GameSession> SessionManager::find(const std::string& id) {
  {
    std::lock_guard lock(mutex_);
    if (auto it = sessions_.find(id); it != sessions_.end()) return it->second;
  }
  if (auto restored = restore(id)) return restored;
  throw ApiError(404, "SessionNotFound", "no session '" + id + "'");
}

json SessionManager::create(const json& body) {
  if (!body.is_object()) throw ApiError(400, "InvalidRequest", "body must be a JSON object");
  std::string selector = options_.default_game;
  int total = options_.default_chips;
  Player human = Player::kA;
  std::uint64_t seed = std::random_device{}();
  if (body.contains("game")) {
    if (!body["game"].is_string()) throw ApiError(400, "InvalidRequest", "'game' must be a string");
    selector = body["game"].get<std::string>();
  }
  if (body.contains("chips_total")) {
    if (!body["chips_total"].is_number_integer() || body["chips_total"].get<long long>() < 0 ||
        body["chips_total"].get<long long>() > 1'000'000) {
      throw ApiError(400, "InvalidRequest", "'chips_total' must be a nonnegative integer");
    }
    total = body["chips_total"].get<int>();
  }
  if (body.contains("human_player")) {
    human = require_player(body["human_player"], 400, "InvalidRequest");
  } else if (body.contains("human")) {
    human = require_player(body["human"], 400, "InvalidRequest");
  }
  if (body.contains("seed")) {
    if (!body["seed"].is_number_unsigned()) {
      throw ApiError(400, "InvalidRequest", "'seed' must be a nonnegative integer");
    }
    seed = body["seed"].get<std::uint64_t>();
  }
  if (selector.starts_with("file:")) {
    throw ApiError(400, "UnknownGame", "file games must be preloaded by the server");
  }

  SolvedGame game;
  try {
    game = solved_game(selector, total);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kGraphTooLarge) throw ApiError(507, std::string(e.name()), e.what());
    throw ApiError(400, "UnknownGame", e.what());
  }

  auto s = std::make_shared<GameSession>();
  s->id = new_id();
  s->game = game;
  s->human = human;
  s->vertex = game.graph->start();
  s->chips = {(total + 1) / 2, total / 2};
  s->seed = seed;
  s->rng = seeded_rng(seed);
  if (is_tictactoe(*game.graph)) s->board = game.graph->name(s->vertex);
  {
    std::lock_guard lock(mutex_);
    sessions_[s->id] = s;
  }
  std::lock_guard lock(s->mutex);
  snapshot(*s);
  return {{"session_id", s->id}, {"state", session_state(*s)}};
}

json SessionManager::bid(const std::string& id, const json& body) {
  auto s = find(id);
  std::lock_guard lock(s->mutex);
  if (s->phase != Phase::kAwaitingBid) {
    throw ApiError(409, "WrongPhase", "session is " + std::string(phase_name(s->phase)));
  }
  if (!body.is_object()) throw ApiError(422, "InvalidBid", "body must be a JSON object");
  const int human_bid = require_int(body, "bid", "InvalidBid");
  if (human_bid < 0 || human_bid > s->chips.of(s->human)) {
    throw ApiError(422, "InvalidBid",
                   "bid must be between 0 and " + std::to_string(s->chips.of(s->human)));
  }
  const GameGraph& g = *s->game.graph;
  const ValueTable& table = *s->game.table;
  const Player engine = opponent(s->human);
  const Strategy engine_strategy = strategy_at(g, table, s->vertex, s->chips.a, engine);
  const int engine_bid = sample_bid(engine_strategy, s->rng);
  const int bid_a = s->human == Player::kA ? human_bid : engine_bid;
  const int bid_b = s->human == Player::kA ? engine_bid : human_bid;
  const BidResult r = resolve_bid(s->chips, bid_a, bid_b);

  s->history.push_back(
      {s->vertex, s->chips, bid_a, bid_b, r.winner, r.by_advantage, r.next_chips, {}, {}, {}});
  s->chips = r.next_chips;
  json outcome = {{"winner", player_name(r.winner)}};
  if (r.winner == engine) {
    const Player mover = designate_mover(g, table, s->vertex, s->chips, engine);
    outcome["mover"] = player_name(mover);
    if (mover == engine) {
      const VertexId from = s->vertex;
      const VertexId next = best_move(g, table, from, s->chips, engine);
      apply_move(*s, engine, next);
      outcome["move"] = g.name(next);
      if (s->history.back().cell) outcome["cell"] = *s->history.back().cell;
    } else {
      // The engine prefers to make the human move.
      s->history.back().mover = mover;
      s->human_forced = true;
      s->phase = Phase::kAwaitingHumanMove;
    }
  } else {
    s->human_forced = false;
    s->phase = Phase::kAwaitingHumanMove;
  }
  snapshot(*s);

  json reveal = {{"bid_A", bid_a},
                 {"bid_B", bid_b},
                 {"human_bid", human_bid},
                 {"engine_bid", engine_bid},
                 {"winner", player_name(r.winner)},
                 {"by_advantage", r.by_advantage},
                 {"reason", r.by_advantage ? "advantage" : "higher_bid"},
                 {"net_transfer_to_A", bid_b - bid_a}};
  return {{"reveal", std::move(reveal)}, {"outcome", std::move(outcome)}, {"state", session_state(*s)}};
}

json SessionManager::move(const std::string& id, const json& body) {
  auto s = find(id);
  std::lock_guard lock(s->mutex);
  if (s->phase != Phase::kAwaitingHumanMove) {
    throw ApiError(409, "WrongPhase", "session is " + std::string(phase_name(s->phase)));
  }
  if (!body.is_object()) throw ApiError(422, "InvalidMove", "body must be a JSON object");
  const GameGraph& g = *s->game.graph;
  const ValueTable& table = *s->game.table;
  const Player engine = opponent(s->human);

  Player designate = s->human;
  if (body.contains("designate")) {
    designate = require_player(body["designate"], 422, "InvalidMove");
  } else if (!s->human_forced) {
    throw ApiError(422, "InvalidMove", "'designate' is required");
  }
  const auto allowed = designations(*s);
  if (std::find(allowed.begin(), allowed.end(), designate) == allowed.end()) {
    throw ApiError(422, "IllegalMove",
                   std::string(player_name(designate)) + " cannot be designated to move");
  }
  const bool has_move = body.contains("move") || body.contains("cell");

  if (designate == engine) {
    if (has_move) throw ApiError(422, "InvalidMove", "the engine chooses its own move");
    apply_move(*s, engine, best_move(g, table, s->vertex, s->chips, engine));
  } else {
    if (!has_move) throw ApiError(422, "InvalidMove", "'move' or 'cell' is required");
    std::optional<VertexId> target;
    if (body.contains("move")) {
      if (!body["move"].is_string()) throw ApiError(422, "InvalidMove", "'move' must be a vertex");
      target = g.find(body["move"].get<std::string>());
    } else {
      if (!is_tictactoe(g) || !body["cell"].is_number_integer()) {
        throw ApiError(422, "InvalidMove", "'cell' needs an integer on a Tic-Tac-Toe board");
      }
      const int cell = body["cell"].get<int>();
      if (cell < 0 || cell > 8 || g.name(s->vertex)[cell] != '.') {
        throw ApiError(422, "IllegalMove", "cell " + std::to_string(cell) + " is not free");
      }
      target = g.find(tictactoe_target(g.name(s->vertex), cell, s->human, ttt_draw_winner(g)));
    }
    auto moves = g.successors(s->vertex, s->human);
    if (!target || std::find(moves.begin(), moves.end(), *target) == moves.end()) {
      throw ApiError(422, "IllegalMove", "not a legal move for the human");
    }
    apply_move(*s, s->human, *target);
    if (body.contains("cell")) {
      // Keep the cell the human actually clicked when several lead to one terminal.
      const int cell = body["cell"].get<int>();
      const int recorded = *s->history.back().cell;
      if (recorded != cell) {
        s->board[recorded] = '.';
        s->board[cell] = s->human == Player::kA ? 'X' : 'O';
        s->history.back().cell = cell;
      }
    }
  }
  snapshot(*s);
  return session_state(*s);
}

json SessionManager::state(const std::string& id) {
  auto s = find(id);
  std::lock_guard lock(s->mutex);
  return session_state(*s);
}

json SessionManager::hint(const std::string& id) {
  auto s = find(id);
  std::lock_guard lock(s->mutex);
  if (s->phase != Phase::kAwaitingBid) {
    throw ApiError(409, "WrongPhase", "hints are given before a bid");
  }
  const GameGraph& g = *s->game.graph;
  const ValueTable& table = *s->game.table;
  const Strategy strategy = strategy_at(g, table, s->vertex, s->chips.a, s->human);
  const double value_a = table.value(s->vertex, s->chips.a);
  const double mine = std::clamp(s->human == Player::kA ? value_a : 1.0 - value_a, 0.0, 1.0);
  std::vector<double> probs;
  for (double p : strategy.probs()) probs.push_back(round_significant(p));
  return {{"player", player_name(s->human)},
          {"strategy", std::move(probs)},
          {"length", strategy.length()},
          {"advantage", player_name(s->chips.advantage())},
          {"value", round_places(mine, 6)},
          {"value_a", round_places(value_a, 6)},
          {"error_bound", round_significant(adjustment_error_bound(g, table.total(), table.x()))}};
}

void SessionManager::snapshot(const GameSession& s) const {
  if (!options_.snapshot_dir) return;
  const GameGraph& g = *s.game.graph;
  json turns = json::array();
  for (const SessionTurn& t : s.history) turns.push_back(turn_json(g, t));
  std::ostringstream rng_state;
  rng_state << s.rng;
  json snap = {{"id", s.id},
               {"game", s.game.selector},
               {"chips_total", s.chips.total()},
               {"human", player_name(s.human)},
               {"vertex", g.name(s.vertex)},
               {"chips", {s.chips.a, s.chips.b}},
               {"phase", phase_name(s.phase)},
               {"human_forced", s.human_forced},
               {"winner", s.winner ? json(player_name(*s.winner)) : json(nullptr)},
               {"board", s.board},
               {"seed", s.seed},
               {"rng", rng_state.str()},
               {"history", std::move(turns)}};
  const auto path = *options_.snapshot_dir / (s.id + ".json");
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    out << snap.dump();
    if (!out) throw ApiError(500, "IoError", "cannot write session snapshot");
  }
  std::filesystem::rename(tmp, path);
}

std::shared_ptr<GameSession> SessionManager::restore(const std::string& id) {
  if (!options_.snapshot_dir) return nullptr;
  if (id.empty() || id.find_first_not_of("0123456789abcdef-") != std::string::npos) return nullptr;
  const auto path = *options_.snapshot_dir / (id + ".json");
  if (!std::filesystem::exists(path)) return nullptr;
  try {
    const json snap = read_json_file(path.string());
    auto s = std::make_shared<GameSession>();
    s->id = id;
    s->game = solved_game(snap.at("game").get<std::string>(), snap.at("chips_total").get<int>());
    const GameGraph& g = *s->game.graph;
    s->human = parse_player(snap.at("human").get<std::string>());
    s->vertex = g.id(snap.at("vertex").get<std::string>());
    s->chips = {snap.at("chips").at(0).get<int>(), snap.at("chips").at(1).get<int>()};
    s->phase = parse_phase(snap.at("phase").get<std::string>());
    s->human_forced = snap.at("human_forced").get<bool>();
    if (!snap.at("winner").is_null()) s->winner = parse_player(snap["winner"].get<std::string>());
    s->board = snap.at("board").get<std::string>();
    s->seed = snap.at("seed").get<std::uint64_t>();
    std::istringstream rng_state(snap.at("rng").get<std::string>());
    rng_state >> s->rng;
    for (const json& t : snap.at("history")) {
      SessionTurn turn;
      turn.vertex = g.id(t.at("vertex").get<std::string>());
      turn.chips = {t.at("chips").at("A").get<int>(), t.at("chips").at("B").get<int>()};
      turn.bid_a = t.at("bid_A").get<int>();
      turn.bid_b = t.at("bid_B").get<int>();
      turn.winner = parse_player(t.at("winner").get<std::string>());
      turn.by_advantage = t.at("by_advantage").get<bool>();
      turn.chips_after = {t.at("chips_after").at("A").get<int>(),
                          t.at("chips_after").at("B").get<int>()};
      if (!t.at("mover").is_null()) turn.mover = parse_player(t["mover"].get<std::string>());
      if (!t.at("move").is_null()) turn.move = g.id(t["move"].get<std::string>());
      if (t.contains("cell")) turn.cell = t["cell"].get<int>();
      s->history.push_back(turn);
    }
    std::lock_guard lock(mutex_);
    auto [it, inserted] = sessions_.emplace(id, s);
    return it->second;
  } catch (const std::exception&) {
    return nullptr;
  }
}

}  // namespace allpay
