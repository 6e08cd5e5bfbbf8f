#pragma once

#include <cstdint>
#include <filesystem>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "allpay/dag_solver.hpp"

namespace allpay {

// Error carrying the HTTP status the API layer should answer with.
class ApiError : public std::runtime_error {
 public:
  ApiError(int status, std::string code, const std::string& message)
      : std::runtime_error(message), status_(status), code_(std::move(code)) {}
  int status() const { return status_; }
  const std::string& code() const { return code_; }

 private:
  int status_;
  std::string code_;
};

enum class Phase { kAwaitingBid, kAwaitingHumanMove, kFinished };
std::string_view phase_name(Phase p);

// A solved game shared read-only by every session playing it.
struct SolvedGame {
  std::string selector;
  std::shared_ptr<const GameGraph> graph;
  std::shared_ptr<const ValueTable> table;
};

struct SessionTurn {
  VertexId vertex = 0;
  ChipState chips;
  int bid_a = 0;
  int bid_b = 0;
  Player winner = Player::kA;
  bool by_advantage = false;
  ChipState chips_after;
  std::optional<Player> mover;
  std::optional<VertexId> move;
  std::optional<int> cell;  // Tic-Tac-Toe only
};

struct GameSession {
  std::string id;
  SolvedGame game;
  Player human = Player::kA;
  VertexId vertex = 0;
  ChipState chips;
  Phase phase = Phase::kAwaitingBid;
  std::vector<SessionTurn> history;
  std::uint64_t seed = 0;
  Rng rng;
  // Set while the human must move because the engine designated them.
  bool human_forced = false;
  std::optional<Player> winner;
  // Tic-Tac-Toe: the board including the final mark, which terminals lose.
  std::string board;
  std::mutex mutex;
};

struct SessionOptions {
  std::size_t max_entries = 50'000'000;
  // Used when a create request leaves them out.
  std::string default_game = "ttt";
  int default_chips = 200;
  // Session snapshots are written here after every change when set.
  std::optional<std::filesystem::path> snapshot_dir;
};

// In-memory session store behind the /v1 API. All methods take and return
// JSON bodies and throw ApiError.
class SessionManager {
 public:
  explicit SessionManager(SessionOptions options = {});

  // Makes a precomputed table available for `selector`.
  void add_table(const std::string& selector, const std::string& path);

  nlohmann::json create(const nlohmann::json& body);
  nlohmann::json bid(const std::string& id, const nlohmann::json& body);
  nlohmann::json move(const std::string& id, const nlohmann::json& body);
  nlohmann::json state(const std::string& id);
  nlohmann::json hint(const std::string& id);

  SolvedGame solved_game(const std::string& selector, int total);

 private:
  std::shared_ptr<GameSession> find(const std::string& id);
  std::string new_id();
  void snapshot(const GameSession& s) const;
  std::shared_ptr<GameSession> restore(const std::string& id);

  SessionOptions options_;
  std::mutex mutex_;
  std::map<std::string, std::shared_ptr<GameSession>> sessions_;
  std::map<std::pair<std::string, int>, std::shared_future<SolvedGame>> games_;
  std::map<std::string, std::shared_ptr<const GameGraph>> graphs_;
  std::uint64_t counter_ = 0;
  std::mt19937_64 id_rng_;
};

// Full client-facing view of a session.
nlohmann::json session_state(const GameSession& s);

}  // namespace allpay
