#include "allpay/dag_solver.hpp"

#include <algorithm>
#include <atomic>
#include <cstring>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

namespace allpay {

double default_precision(const GameGraph& g, int total) {
  const double scale = static_cast<double>(std::max(1, g.depth())) * std::max(1, total);
  return std::max(1e-9, 1e-6 / scale);
}

double adjustment_error_bound(const GameGraph& g, int total, double x) {
  return static_cast<double>(g.depth()) * x * total;
}

std::size_t ValueTable::cell(VertexId v, int a) const {
  if (v >= vertex_count_) throw Error(ErrorCode::kUnknownVertex, "vertex id out of range");
  if (a < 0 || a > total_) {
    throw Error(ErrorCode::kInvalidParameter,
                "chips " + std::to_string(a) + " outside 0.." + std::to_string(total_));
  }
  return static_cast<std::size_t>(v) * (total_ + 1) + a;
}

Strategy ValueTable::strategy(VertexId v, int a, Player p) const {
  if (!has_strategies()) throw Error(ErrorCode::kInvalidParameter, "table has no strategies");
  const std::size_t c = cell(v, a);
  if (lengths_[c] == 0) throw Error(ErrorCode::kTerminalVertex, "no strategy at a terminal");
  const std::size_t len_a = strategy_len_a_[c];
  const std::size_t len_b = strategy_len_b_[c];
  const double* base = strategy_pool_.data() + strategy_offset_[c];
  const int cap = p == Player::kA ? a : total_ - a;
  std::vector<double> probs(static_cast<std::size_t>(cap) + 1, 0.0);
  if (p == Player::kA) {
    std::copy_n(base, len_a, probs.begin());
  } else {
    std::copy_n(base + len_a, len_b, probs.begin());
  }
  return Strategy(std::move(probs));
}

namespace {

// Trailing zeros are implied by the bid cap.
std::size_t trimmed(const Strategy& s) { return static_cast<std::size_t>(std::max(1, s.length())); }

struct CellResult {
  double value = 0.0;
  int length = 0;
  std::vector<double> probs_a;
  std::vector<double> probs_b;
};

ToeplitzPayoff adjusted_matrix(const TurnOutcomes& outcomes, int a, int total, double x) {
  const ChipState chips{a, total - a};
  return adjust_precision(matrix_from_outcomes(outcomes, chips, chips.advantage()), x, chips);
}

TurnOutcomes outcomes_from(const GameGraph& g, const ValueTable& table, VertexId v) {
  return turn_outcomes(g, v, table.total(),
                       [&](VertexId w, int c) { return table.value(w, c); });
}

void check_table_matches(const GameGraph& g, const ValueTable& table) {
  if (table.graph_hash() != g.hash() || table.vertex_count() != g.size()) {
    throw Error(ErrorCode::kGraphHashMismatch, "value table was built for a different graph");
  }
}

}  // namespace

ValueTable solve_game(const GameGraph& g, int total, const SolveOptions& options) {
  if (total < 0) throw Error(ErrorCode::kInvalidParameter, "chip total must be nonnegative");
  const std::size_t cells = g.size() * (static_cast<std::size_t>(total) + 1);
  if (cells > options.max_entries) {
    throw Error(ErrorCode::kGraphTooLarge, std::to_string(cells) + " table entries exceed the cap of " +
                                               std::to_string(options.max_entries));
  }

  ValueTable table;
  table.total_ = total;
  table.x_ = options.x > 0.0 ? options.x : default_precision(g, total);
  table.graph_hash_ = g.hash();
  table.vertex_count_ = g.size();
  table.game_label_ = g.label();
  table.values_.assign(cells, 0.0);
  table.lengths_.assign(cells, 0);
  for (int a = 0; a <= total; ++a) table.values_[table.cell(g.win_a(), a)] = 1.0;
  if (options.store_strategies) {
    table.strategy_offset_.assign(cells, 0);
    table.strategy_len_a_.assign(cells, 0);
    table.strategy_len_b_.assign(cells, 0);
  }

  std::vector<std::vector<VertexId>> levels(static_cast<std::size_t>(g.depth()) + 1);
  for (VertexId v : g.reverse_topological_order()) {
    if (!g.is_terminal(v)) levels[g.height(v)].push_back(v);
  }

  const unsigned threads =
      options.threads > 0 ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  std::atomic<std::size_t> computed{0};

  for (const auto& level : levels) {
    if (level.empty()) continue;
    // Vertices of one level only read finished lower levels, so each worker
    // writes its own cells without locking.
    std::vector<std::vector<CellResult>> results(options.store_strategies ? level.size() : 0);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto work = [&] {
      for (;;) {
        const std::size_t idx = next.fetch_add(1);
        if (idx >= level.size()) return;
        try {
          const VertexId v = level[idx];
          const TurnOutcomes outcomes = outcomes_from(g, table, v);
          for (int a = 0; a <= total; ++a) {
            const ChipState chips{a, total - a};
            TurnSolution sol =
                solve_position(adjusted_matrix(outcomes, a, total, table.x_), chips.advantage());
            const std::size_t c = table.cell(v, a);
            table.values_[c] = sol.value_a;
            table.lengths_[c] = sol.length;
            if (options.store_strategies) {
              auto pa = sol.strategy_a.probs().first(trimmed(sol.strategy_a));
              auto pb = sol.strategy_b.probs().first(trimmed(sol.strategy_b));
              results[idx].push_back(
                  {sol.value_a, sol.length, {pa.begin(), pa.end()}, {pb.begin(), pb.end()}});
            }
          }
          computed.fetch_add(static_cast<std::size_t>(total) + 1);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next.store(level.size());
        }
      }
    };

    const unsigned n_workers = static_cast<unsigned>(std::min<std::size_t>(threads, level.size()));
    if (n_workers <= 1) {
      work();
    } else {
      std::vector<std::jthread> pool;
      for (unsigned t = 0; t < n_workers; ++t) pool.emplace_back(work);
    }
    if (failure) std::rethrow_exception(failure);

    if (options.store_strategies) {
      for (std::size_t idx = 0; idx < level.size(); ++idx) {
        for (int a = 0; a <= total; ++a) {
          const CellResult& r = results[idx][a];
          const std::size_t c = table.cell(level[idx], a);
          table.strategy_offset_[c] = table.strategy_pool_.size();
          table.strategy_len_a_[c] = static_cast<std::uint32_t>(r.probs_a.size());
          table.strategy_len_b_[c] = static_cast<std::uint32_t>(r.probs_b.size());
          table.strategy_pool_.insert(table.strategy_pool_.end(), r.probs_a.begin(), r.probs_a.end());
          table.strategy_pool_.insert(table.strategy_pool_.end(), r.probs_b.begin(), r.probs_b.end());
        }
      }
    }
  }
  table.computed_cells_ = computed.load();
  return table;
}

double value_at(const GameGraph& g, const ValueTable& table, VertexId v, int a) {
  check_table_matches(g, table);
  return table.value(v, a);
}

ToeplitzPayoff position_matrix(const GameGraph& g, const ValueTable& table, VertexId v, int a) {
  check_table_matches(g, table);
  if (g.is_terminal(v)) throw Error(ErrorCode::kTerminalVertex, "no turn at a terminal vertex");
  if (a < 0 || a > table.total()) throw Error(ErrorCode::kInvalidParameter, "chips out of range");
  return adjusted_matrix(outcomes_from(g, table, v), a, table.total(), table.x());
}

TurnSolution position_solution(const GameGraph& g, const ValueTable& table, VertexId v, int a) {
  const ChipState chips{a, table.total() - a};
  return solve_position(position_matrix(g, table, v, a), chips.advantage());
}

Strategy strategy_at(const GameGraph& g, const ValueTable& table, VertexId v, int a, Player p) {
  check_table_matches(g, table);
  if (table.has_strategies()) return table.strategy(v, a, p);
  TurnSolution sol = position_solution(g, table, v, a);
  return p == Player::kA ? sol.strategy_a : sol.strategy_b;
}

VertexId best_move(const GameGraph& g, const ValueTable& table, VertexId v, ChipState chips,
                   Player mover) {
  check_table_matches(g, table);
  if (g.is_terminal(v)) throw Error(ErrorCode::kTerminalVertex, "no moves from a terminal vertex");
  auto moves = g.successors(v, mover);
  if (moves.empty()) {
    throw Error(ErrorCode::kNoLegalMove,
                std::string(player_name(mover)) + " has no move at '" + g.name(v) + "'");
  }
  // Adjusted values of won positions can exceed the bare terminal's 1, so an
  // immediate win is taken first.
  const VertexId own_win = mover == Player::kA ? g.win_a() : g.win_b();
  if (std::find(moves.begin(), moves.end(), own_win) != moves.end()) return own_win;
  VertexId best = moves.front();
  double best_value = value_at(g, table, best, chips.a);
  for (VertexId w : moves.subspan(1)) {
    const double value = value_at(g, table, w, chips.a);
    if (mover == Player::kA ? value > best_value : value < best_value) {
      best = w;
      best_value = value;
    }
  }
  return best;
}

Player designate_mover(const GameGraph& g, const ValueTable& table, VertexId v, ChipState chips,
                       Player winner) {
  const Player other = opponent(winner);
  const bool own = !g.successors(v, winner).empty();
  const bool forced = !g.successors(v, other).empty();
  if (!own) return other;
  if (!forced) return winner;
  const VertexId own_move = best_move(g, table, v, chips, winner);
  if (g.is_terminal(own_move) && own_move == (winner == Player::kA ? g.win_a() : g.win_b())) {
    return winner;
  }
  const double own_value = value_at(g, table, own_move, chips.a);
  const double forced_value = value_at(g, table, best_move(g, table, v, chips, other), chips.a);
  const bool prefer_forcing =
      winner == Player::kA ? forced_value > own_value : forced_value < own_value;
  return prefer_forcing ? other : winner;
}

BidResult resolve_bid(ChipState chips, int bid_a, int bid_b) {
  if (bid_a < 0 || bid_a > chips.a || bid_b < 0 || bid_b > chips.b) {
    throw Error(ErrorCode::kInvalidParameter,
                "bids " + std::to_string(bid_a) + "/" + std::to_string(bid_b) +
                    " exceed chips " + std::to_string(chips.a) + "/" + std::to_string(chips.b));
  }
  BidResult r;
  if (bid_a != bid_b) {
    r.winner = bid_a > bid_b ? Player::kA : Player::kB;
  } else {
    r.winner = chips.advantage();
    r.by_advantage = true;
  }
  r.next_chips = {chips.a - bid_a + bid_b, chips.b - bid_b + bid_a};
  return r;
}

BidOutcome play_turn(const GameGraph& g, const ValueTable& table, VertexId v, ChipState chips,
                     int bid_a, int bid_b) {
  const BidResult bid = resolve_bid(chips, bid_a, bid_b);
  BidOutcome out;
  out.bid_a = bid_a;
  out.bid_b = bid_b;
  out.winner = bid.winner;
  out.by_advantage = bid.by_advantage;
  out.next_chips = bid.next_chips;
  out.mover = designate_mover(g, table, v, bid.next_chips, bid.winner);
  out.next_vertex = best_move(g, table, v, bid.next_chips, out.mover);
  return out;
}

int sample_bid(const Strategy& s, Rng& rng) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  double acc = 0.0;
  int last = 0;
  for (int bid = 0; bid <= s.cap(); ++bid) {
    if (s[bid] <= 0.0) continue;
    last = bid;
    acc += s[bid];
    if (u < acc) return bid;
  }
  // Rounding can leave the cumulative sum just below u.
  return last;
}

Rng seeded_rng(std::uint64_t seed) {
  // splitmix64 finalizer
  seed += 0x9e3779b97f4a7c15ULL;
  seed = (seed ^ (seed >> 30)) * 0xbf58476d1ce4e5b9ULL;
  seed = (seed ^ (seed >> 27)) * 0x94d049bb133111ebULL;
  return Rng(seed ^ (seed >> 31));
}

int sample_bid(const Strategy& s, std::uint64_t seed) {
  Rng rng = seeded_rng(seed);
  return sample_bid(s, rng);
}

namespace {

constexpr char kMagic[8] = {'A', 'P', 'V', 'T', 'A', 'B', 'L', '1'};
constexpr std::uint32_t kFormatVersion = 1;

class Writer {
 public:
  explicit Writer(const std::string& path) : out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw Error(ErrorCode::kIoError, "cannot write '" + path + "'");
  }
  template <class T>
  void pod(const T& value) {
    out_.write(reinterpret_cast<const char*>(&value), sizeof(T));
  }
  template <class T>
  void array(const std::vector<T>& values) {
    pod<std::uint64_t>(values.size());
    out_.write(reinterpret_cast<const char*>(values.data()),
               static_cast<std::streamsize>(values.size() * sizeof(T)));
  }
  void string(const std::string& s) {
    pod<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  void finish(const std::string& path) {
    out_.flush();
    if (!out_) throw Error(ErrorCode::kIoError, "failed writing '" + path + "'");
  }

 private:
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::string& path) : in_(path, std::ios::binary) {
    if (!in_) throw Error(ErrorCode::kIoError, "cannot read '" + path + "'");
  }
  template <class T>
  T pod() {
    T value{};
    in_.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in_) truncated();
    return value;
  }
  template <class T>
  std::vector<T> array(std::uint64_t expected) {
    const auto n = pod<std::uint64_t>();
    if (n != expected) throw Error(ErrorCode::kFormatMismatch, "table array has the wrong size");
    std::vector<T> values(n);
    in_.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(n * sizeof(T)));
    if (!in_) truncated();
    return values;
  }
  std::string string() {
    const auto n = pod<std::uint32_t>();
    if (n > (1u << 20)) throw Error(ErrorCode::kFormatMismatch, "table label is implausibly long");
    std::string s(n, '\0');
    in_.read(s.data(), n);
    if (!in_) truncated();
    return s;
  }
  bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }

 private:
  [[noreturn]] static void truncated() {
    throw Error(ErrorCode::kFormatMismatch, "table file is truncated");
  }
  std::ifstream in_;
};

struct RawHeader {
  TableHeader header;
  std::uint64_t vertex_count = 0;
  std::uint64_t computed_cells = 0;
};

RawHeader read_header(Reader& in) {
  char magic[8];
  for (char& ch : magic) ch = in.pod<char>();
  if (std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw Error(ErrorCode::kFormatMismatch, "not a value table file");
  }
  RawHeader raw;
  raw.header.version = in.pod<std::uint32_t>();
  if (raw.header.version != kFormatVersion) {
    throw Error(ErrorCode::kFormatMismatch,
                "unsupported table version " + std::to_string(raw.header.version));
  }
  raw.header.graph_hash = in.pod<std::uint64_t>();
  raw.header.total = in.pod<std::int32_t>();
  raw.header.x = in.pod<double>();
  raw.header.game_label = in.string();
  raw.header.has_strategies = in.pod<std::uint8_t>() != 0;
  raw.vertex_count = in.pod<std::uint64_t>();
  raw.computed_cells = in.pod<std::uint64_t>();
  if (raw.header.total < 0) throw Error(ErrorCode::kFormatMismatch, "negative chip total");
  return raw;
}

}  // namespace

void save_table(const ValueTable& table, const std::string& path) {
  Writer out(path);
  for (char ch : kMagic) out.pod(ch);
  out.pod(kFormatVersion);
  out.pod(table.graph_hash_);
  out.pod<std::int32_t>(table.total_);
  out.pod(table.x_);
  out.string(table.game_label_);
  out.pod<std::uint8_t>(table.has_strategies() ? 1 : 0);
  out.pod<std::uint64_t>(table.vertex_count_);
  out.pod<std::uint64_t>(table.computed_cells_);
  out.array(table.values_);
  out.array(table.lengths_);
  if (table.has_strategies()) {
    out.array(table.strategy_offset_);
    out.array(table.strategy_len_a_);
    out.array(table.strategy_len_b_);
    out.array(table.strategy_pool_);
  }
  out.finish(path);
}

TableHeader read_table_header(const std::string& path) {
  Reader in(path);
  return read_header(in).header;
}

ValueTable load_table(const std::string& path, const GameGraph& g) {
  Reader in(path);
  const RawHeader raw = read_header(in);
  if (raw.header.graph_hash != g.hash() || raw.vertex_count != g.size()) {
    throw Error(ErrorCode::kGraphHashMismatch, "table '" + path + "' belongs to another graph");
  }
  ValueTable table;
  table.total_ = raw.header.total;
  table.x_ = raw.header.x;
  table.graph_hash_ = raw.header.graph_hash;
  table.vertex_count_ = raw.vertex_count;
  table.game_label_ = raw.header.game_label;
  table.computed_cells_ = raw.computed_cells;
  const std::uint64_t cells = raw.vertex_count * (static_cast<std::uint64_t>(table.total_) + 1);
  table.values_ = in.array<double>(cells);
  table.lengths_ = in.array<std::int32_t>(cells);
  if (raw.header.has_strategies) {
    table.strategy_offset_ = in.array<std::uint64_t>(cells);
    table.strategy_len_a_ = in.array<std::uint32_t>(cells);
    table.strategy_len_b_ = in.array<std::uint32_t>(cells);
    std::uint64_t pool = 0;
    for (std::uint64_t c = 0; c < cells; ++c) {
      pool = std::max<std::uint64_t>(
          pool, table.strategy_offset_[c] + table.strategy_len_a_[c] + table.strategy_len_b_[c]);
    }
    table.strategy_pool_ = in.array<double>(pool);
  }
  if (!in.at_end()) throw Error(ErrorCode::kFormatMismatch, "trailing bytes after table data");
  return table;
}

}  // namespace allpay
