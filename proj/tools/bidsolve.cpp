// bidsolve: solve, inspect and play discrete all-pay bidding games.
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "allpay/api_server.hpp"
#include "allpay/dag_solver.hpp"
#include "allpay/error.hpp"
#include "allpay/serialization.hpp"
#include "allpay/simulation.hpp"

using namespace allpay;
using nlohmann::json;

namespace {

json strategy_json(const Strategy& s) {
  json out = json::array();
  for (double p : s.probs()) out.push_back(round_significant(p));
  return out;
}

std::vector<double> parse_probs(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (end == item.c_str() || *end != '\0') {
      throw Error(ErrorCode::kInvalidStrategy, "cannot parse probability '" + item + "'");
    }
    out.push_back(v);
  }
  return out;
}

std::string cache_name(const GameGraph& g, int total, double x, bool strategies) {
  std::string stem = g.label();
  for (char& c : stem) {
    if (!std::isalnum(static_cast<unsigned char>(c))) c = '_';
  }
  char buf[128];
  std::snprintf(buf, sizeof buf, "_%016llx_N%d_x%.6g%s.bin",
                static_cast<unsigned long long>(g.hash()), total, x, strategies ? "_s" : "");
  return stem + buf;
}

// Solves, or loads a matching table from BIDSOLVE_CACHE_DIR when set.
ValueTable solve_cached(const GameGraph& g, int total, const SolveOptions& options) {
  const char* dir = std::getenv("BIDSOLVE_CACHE_DIR");
  if (!dir || !*dir) return solve_game(g, total, options);
  const double x = options.x > 0.0 ? options.x : default_precision(g, total);
  const auto path = std::filesystem::path(dir) / cache_name(g, total, x, options.store_strategies);
  if (std::filesystem::exists(path)) {
    try {
      return load_table(path.string(), g);
    } catch (const Error&) {
      // Stale or damaged cache entries are rebuilt below.
    }
  }
  ValueTable t = solve_game(g, total, options);
  std::filesystem::create_directories(dir);
  save_table(t, path.string());
  return t;
}

VertexId vertex_or_start(const GameGraph& g, const std::string& name) {
  return name.empty() ? g.start() : g.id(name);
}

json vertex_row(const GameGraph& g, const ValueTable& t, VertexId v) {
  json values = json::array(), lengths = json::array();
  for (int a = 0; a <= t.total(); ++a) {
    values.push_back(round_significant(value_at(g, t, v, a)));
    lengths.push_back(t.length(v, a));
  }
  return {{"vertex", g.name(v)}, {"values", std::move(values)}, {"lengths", std::move(lengths)}};
}

json table_summary(const GameGraph& g, const ValueTable& t) {
  return {{"game", g.label()},
          {"chips_total", t.total()},
          {"x", round_significant(t.x())},
          {"error_bound", round_significant(adjustment_error_bound(g, t.total(), t.x()))},
          {"vertices", g.size()},
          {"depth", g.depth()},
          {"computed_cells", t.computed_cells()},
          {"strategies", t.has_strategies()}};
}

struct Loaded {
  GameGraph graph;
  ValueTable table;
};

// A table from --in, or a fresh solve of --game at --chips.
Loaded load_or_solve(const std::string& in, std::string game, std::optional<int> chips,
                     const SolveOptions& options) {
  if (!in.empty()) {
    if (game.empty()) game = read_table_header(in).game_label;
    GameGraph g = make_game(game);
    ValueTable t = load_table(in, g);
    return {std::move(g), std::move(t)};
  }
  if (game.empty() || !chips) {
    throw Error(ErrorCode::kInvalidParameter, "give --in, or --game with --chips");
  }
  GameGraph g = make_game(game);
  ValueTable t = solve_cached(g, *chips, options);
  return {std::move(g), std::move(t)};
}

void print(const json& j) { std::cout << j.dump(2) << '\n'; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nash equilibria and live play for discrete all-pay bidding games"};
  app.require_subcommand(1);

  std::string game, in, out, vertex, matrix_path, profile_a, profile_b, format = "json";
  std::optional<int> chips;
  double x = 0.0;
  bool strategies = false;
  unsigned threads = 0;

  auto add_solve_flags = [&](CLI::App* cmd) {
    cmd->add_option("--x", x, "precision bonus per chip (default: automatic)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--threads", threads, "worker threads, 0 for all cores");
  };

  auto* solve = app.add_subcommand("solve", "solve a game and print root values");
  solve->add_option("--game", game, "race:k,m | ttt | ttt:A | ttt:B | file:<spec.json>")->required();
  solve->add_option("--chips", chips, "total chips N")->required()->check(CLI::NonNegativeNumber);
  solve->add_option("--out", out, "write the value table here");
  solve->add_option("--vertex", vertex, "report this vertex instead of the start");
  solve->add_flag("--strategies", strategies, "store equilibrium strategies in the table");
  add_solve_flags(solve);

  auto* eq = app.add_subcommand("eq", "equilibrium of one turn matrix");
  eq->add_option("--matrix", matrix_path, "matrix JSON {rows, cols, diag, total}")->required();
  eq->add_option("--profile-a", profile_a, "also evaluate this owner strategy, e.g. 0.5,0.5");
  eq->add_option("--profile-b", profile_b, "and this opponent strategy");

  auto* table = app.add_subcommand("table", "dump value rows from a saved table");
  table->add_option("--in", in, "table file")->required();
  table->add_option("--game", game, "game selector (default: the label stored in the table)");
  table->add_option("--vertex", vertex, "only this vertex");
  table->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  auto* verify = app.add_subcommand("verify", "check every position's equilibrium");
  verify->add_option("--in", in, "table file");
  verify->add_option("--game", game, "game selector");
  verify->add_option("--chips", chips, "total chips N")->check(CLI::NonNegativeNumber);
  add_solve_flags(verify);

  int chips_a = -1, port = 8080;
  std::uint64_t trials = 10'000, seed = 1;
  auto* sim = app.add_subcommand("simulate", "self-play games sampled from the equilibrium");
  sim->add_option("--table", in, "table file with strategies");
  sim->add_option("--game", game, "game selector");
  sim->add_option("--chips", chips, "total chips N")->check(CLI::NonNegativeNumber);
  sim->add_option("--vertex", vertex, "start vertex (default: the game's start)");
  sim->add_option("--chips-a", chips_a, "A's chips at the start (default: ceil(N/2))")
      ->check(CLI::NonNegativeNumber);
  sim->add_option("--trials", trials, "number of games")->check(CLI::PositiveNumber);
  sim->add_option("--seed", seed, "seed of the first trial");
  add_solve_flags(sim);

  std::string host = "127.0.0.1", pretable, snapshots, cors = "*";
  int serve_chips = 200;
  std::string serve_game = "ttt";
  auto* serve = app.add_subcommand("serve", "HTTP API for live play");
  serve->add_option("--host", host, "bind address");
  serve->add_option("--port", port, "port, 0 for any free port")->check(CLI::Range(0, 65535));
  serve->add_option("--game", serve_game, "default game for new sessions");
  serve->add_option("--chips", serve_chips, "default chip total")->check(CLI::NonNegativeNumber);
  serve->add_option("--pretable", pretable, "preload this table for --game");
  serve->add_option("--snapshots", snapshots, "directory for session snapshots");
  serve->add_option("--cors", cors, "allowed browser origin");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  SolveOptions options;
  options.x = x;
  options.threads = threads;

  try {
    if (*solve) {
      options.store_strategies = strategies;
      GameGraph g = make_game(game);
      ValueTable t = solve_cached(g, *chips, options);
      if (!out.empty()) save_table(t, out);
      json report = table_summary(g, t);
      report["position"] = vertex_row(g, t, vertex_or_start(g, vertex));
      if (!out.empty()) report["table"] = out;
      print(report);
    } else if (*eq) {
      ToeplitzPayoff m = matrix_from_json(read_json_file(matrix_path));
      EquilibriumResult r = solve_turn(m);
      VerificationReport check = verify_equilibrium(m, r.advantage, r.opponent);
      json report = {{"value", round_significant(r.value)},
                     {"length", r.length},
                     {"strategy_owner", strategy_json(r.advantage)},
                     {"strategy_opponent", strategy_json(r.opponent)},
                     {"best_response_gap", round_significant(r.best_response_gap)},
                     {"verified", check.passed()}};
      if (!profile_a.empty() || !profile_b.empty()) {
        if (profile_a.empty() || profile_b.empty()) {
          throw Error(ErrorCode::kInvalidParameter, "--profile-a and --profile-b go together");
        }
        const Strategy sa(parse_probs(profile_a));
        const Strategy sb(parse_probs(profile_b));
        report["profile_payoff"] = round_significant(expected_payoff(sb, m, sa));
      }
      print(report);
    } else if (*table) {
      Loaded l = load_or_solve(in, game, std::nullopt, options);
      std::vector<VertexId> rows;
      if (!vertex.empty()) {
        rows.push_back(l.graph.id(vertex));
      } else {
        for (VertexId v = 0; v < l.graph.size(); ++v) rows.push_back(v);
      }
      if (format == "csv") {
        std::cout << "vertex,a,value,length\n";
        for (VertexId v : rows) {
          for (int a = 0; a <= l.table.total(); ++a) {
            std::printf("\"%s\",%d,%.9g,%d\n", l.graph.name(v).c_str(), a,
                        value_at(l.graph, l.table, v, a), l.table.length(v, a));
          }
        }
      } else {
        json report = table_summary(l.graph, l.table);
        json dumped = json::array();
        for (VertexId v : rows) dumped.push_back(vertex_row(l.graph, l.table, v));
        report["rows"] = std::move(dumped);
        print(report);
      }
    } else if (*verify) {
      Loaded l = load_or_solve(in, game, chips, options);
      std::size_t cells = 0, failures = 0;
      double worst_gap = 0.0, worst_equalization = 0.0;
      json failed = json::array();
      for (VertexId v = 0; v < l.graph.size(); ++v) {
        if (l.graph.is_terminal(v)) continue;
        for (int a = 0; a <= l.table.total(); ++a) {
          ToeplitzPayoff ma = position_matrix(l.graph, l.table, v, a);
          TurnSolution s = position_solution(l.graph, l.table, v, a);
          const bool a_owns = s.advantage == Player::kA;
          ToeplitzPayoff owner_matrix = a_owns ? ma : opponent_matrix(ma);
          VerificationReport r = verify_equilibrium(owner_matrix, a_owns ? s.strategy_a : s.strategy_b,
                                                    a_owns ? s.strategy_b : s.strategy_a);
          ++cells;
          worst_gap = std::max({worst_gap, r.owner_gap, r.opponent_gap});
          worst_equalization = std::max(worst_equalization, r.equalization_error);
          if (!r.passed()) {
            ++failures;
            if (failed.size() < 20) failed.push_back({{"vertex", l.graph.name(v)}, {"a", a}});
          }
        }
      }
      print({{"game", l.graph.label()},
             {"chips_total", l.table.total()},
             {"cells", cells},
             {"failures", failures},
             {"failed", std::move(failed)},
             {"max_best_response_gap", round_significant(worst_gap)},
             {"max_equalization_error", round_significant(worst_equalization)},
             {"passed", failures == 0}});
      if (failures > 0) {
        std::cerr << json{{"error", "VerificationFailed"},
                          {"message", std::to_string(failures) + " positions failed"}}.dump()
                  << '\n';
        return 1;
      }
    } else if (*sim) {
      options.store_strategies = true;
      Loaded l = load_or_solve(in, game, chips, options);
      const VertexId start = vertex_or_start(l.graph, vertex);
      const int a = chips_a >= 0 ? chips_a : (l.table.total() + 1) / 2;
      SimulationResult r = simulate(l.graph, l.table, start, a, trials, seed);
      print({{"game", l.graph.label()},
             {"vertex", l.graph.name(start)},
             {"chips", {{"A", a}, {"B", l.table.total() - a}}},
             {"trials", r.trials},
             {"seed", seed},
             {"wins_A", r.wins_a},
             {"win_rate", round_significant(r.win_rate)},
             {"std_error", round_significant(r.std_error)},
             {"table_value", round_significant(r.table_value)}});
    } else if (*serve) {
      SessionOptions so;
      so.default_game = serve_game;
      so.default_chips = serve_chips;
      if (!snapshots.empty()) so.snapshot_dir = snapshots;
      auto sessions = std::make_shared<SessionManager>(so);
      if (!pretable.empty()) sessions->add_table(serve_game, pretable);
      ApiServer server(sessions, cors);
      const int bound = port == 0 ? server.bind_any_port(host) : port;
      if (port != 0) {
        std::cout << json{{"listening", host}, {"port", bound}}.dump() << std::endl;
        if (!server.listen(host, port)) throw Error(ErrorCode::kIoError, "cannot listen on port " + std::to_string(port));
      } else {
        if (bound < 0) throw Error(ErrorCode::kIoError, "cannot bind " + host);
        std::cout << json{{"listening", host}, {"port", bound}}.dump() << std::endl;
        server.listen_after_bind();
      }
    }
  } catch (const Error& e) {
    std::cerr << json{{"error", e.name()}, {"message", e.what()}}.dump() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "InternalError"}, {"message", e.what()}}.dump() << '\n';
    return 1;
  }
  return 0;
}
