#include <optional>
#include <random>

#include "doctest.h"

#include "allpay/dag_solver.hpp"
#include "oracle.hpp"

using namespace allpay;

namespace {

ToeplitzPayoff random_toeplitz(std::mt19937_64& rng, int rows, int cols) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> diag(static_cast<std::size_t>(rows + cols - 1));
  for (double& v : diag) v = unit(rng);
  return ToeplitzPayoff(rows, cols, std::move(diag));
}

std::vector<double> random_probs(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> p(static_cast<std::size_t>(n));
  double sum = 0.0;
  for (double& v : p) sum += (v = unit(rng));
  for (double& v : p) v /= sum;
  return p;
}

void check_same(const ToeplitzPayoff& m, const std::vector<std::vector<double>>& dense,
                double tol = 0.0) {
  REQUIRE(dense.size() == static_cast<std::size_t>(m.rows()));
  for (int i = 0; i < m.rows(); ++i) {
    REQUIRE(dense[i].size() == static_cast<std::size_t>(m.cols()));
    for (int j = 0; j < m.cols(); ++j) CHECK(std::abs(m(i, j) - dense[i][j]) <= tol);
  }
}

auto table_lookup(const ValueTable& t) {
  return [&t](VertexId w, int c) -> std::optional<double> { return t.value(w, c); };
}

}  // namespace

TEST_CASE("race 2,1 at a=5, b=3 follows the bid rules entry by entry") {
  GameGraph g = race_graph(2, 1);
  ValueTable t = solve_game(g, 8, {.x = 1e-6});
  const ChipState chips{5, 3};
  // Unadjusted successor values: (1,1) is won by whoever holds more chips,
  // A on ties.
  auto unadjusted = [&](VertexId w, int c) -> std::optional<double> {
    CHECK(g.name(w) == "(1,1)");
    return c >= 8 - c ? 1.0 : 0.0;
  };
  ToeplitzPayoff m = build_matrix(g, g.start(), chips, unadjusted, Player::kA);
  CHECK(m.rows() == 4);
  CHECK(m.cols() == 6);
  check_same(m, oracle::naive_matrix(
                    g, g.start(), chips, [&](VertexId w, int c) { return *unadjusted(w, c); },
                    Player::kA));
  // A must win the bid (d >= 0) and keep at least 4 of the 8 chips (d <= 1).
  for (int d = -3; d <= 5; ++d) CHECK(m.diagonal(d) == (d == 0 || d == 1 ? 1.0 : 0.0));
}

TEST_CASE("forced win gives the all-ones matrix") {
  GraphSpec spec;
  spec.vertices = {"s"};
  spec.edges = {{"s", "WIN_A", Player::kA}, {"s", "WIN_A", Player::kB}};
  GameGraph g = validate_graph(spec);
  auto none = [](VertexId, int) -> std::optional<double> { return std::nullopt; };
  ToeplitzPayoff m = build_matrix(g, g.start(), {3, 2}, none, Player::kA);
  for (double v : m.diagonals()) CHECK(v == 1.0);
}

TEST_CASE("missing successor value throws MissingValue") {
  GameGraph g = race_graph(2, 1);
  auto none = [](VertexId, int) -> std::optional<double> { return std::nullopt; };
  try {
    build_matrix(g, g.start(), {2, 2}, none, Player::kA);
    FAIL("expected MissingValue");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kMissingValue);
  }
}

TEST_CASE("build_matrix equals the naive construction") {
  SUBCASE("every race game with k, m <= 3 and N <= 8") {
    for (int k = 1; k <= 3; ++k) {
      for (int mm = 1; mm <= 3; ++mm) {
        GameGraph g = race_graph(k, mm);
        for (int n = 0; n <= 8; ++n) {
          ValueTable t = solve_game(g, n, {.x = 1e-3});
          for (VertexId v = 0; v < g.size(); ++v) {
            if (g.is_terminal(v)) continue;
            for (int a = 0; a <= n; ++a) {
              const ChipState chips{a, n - a};
              ToeplitzPayoff m = build_matrix(g, v, chips, table_lookup(t), chips.advantage());
              auto naive = oracle::naive_matrix(
                  g, v, chips, [&](VertexId w, int c) { return t.value(w, c); },
                  chips.advantage());
              check_same(m, naive);
              // And with the precision bonus, against the table's own matrix.
              check_same(position_matrix(g, t, v, a), oracle::naive_adjust(naive, t.x(), chips),
                         1e-12);
            }
          }
        }
      }
    }
  }
  SUBCASE("vertices where only one player can move") {
    GraphSpec spec;
    spec.vertices = {"s", "p", "q"};
    spec.edges = {{"s", "p", Player::kA},
                  {"s", "q", Player::kB},
                  {"p", "WIN_B", Player::kB},
                  {"q", "WIN_A", Player::kA}};
    GameGraph g = validate_graph(spec);
    ValueTable t = solve_game(g, 5, {.x = 1e-3});
    for (VertexId v = 0; v < g.size(); ++v) {
      if (g.is_terminal(v)) continue;
      for (int a = 0; a <= 5; ++a) {
        const ChipState chips{a, 5 - a};
        ToeplitzPayoff m = build_matrix(g, v, chips, table_lookup(t), chips.advantage());
        check_same(m, oracle::naive_matrix(
                          g, v, chips, [&](VertexId w, int c) { return t.value(w, c); },
                          chips.advantage()));
      }
    }
  }
  SUBCASE("tictactoe vertex one X short of a line, N=4, a=2") {
    GameGraph g = tictactoe_graph();
    ValueTable t = solve_game(g, 4, {.x = 1e-6});
    const VertexId v = g.id("XX..O....");
    const ChipState chips{2, 2};
    ToeplitzPayoff m = build_matrix(g, v, chips, table_lookup(t), Player::kA);
    check_same(m, oracle::naive_matrix(
                      g, v, chips, [&](VertexId w, int c) { return t.value(w, c); }, Player::kA));
  }
}

TEST_CASE("built matrices are diagonal-constant") {
  GameGraph g = race_graph(3, 2);
  ValueTable t = solve_game(g, 7, {.x = 1e-3});
  for (VertexId v = 0; v < g.size(); ++v) {
    if (g.is_terminal(v)) continue;
    for (int a = 0; a <= 7; ++a) {
      auto dense = position_matrix(g, t, v, a).dense();
      for (std::size_t i = 0; i + 1 < dense.size(); ++i) {
        for (std::size_t j = 0; j + 1 < dense[i].size(); ++j) CHECK(dense[i][j] == dense[i + 1][j + 1]);
      }
    }
  }
}

TEST_CASE("opponent_matrix") {
  std::mt19937_64 rng(7);
  SUBCASE("all ones maps to all zeros") {
    ToeplitzPayoff ones(3, 4, std::vector<double>(6, 1.0));
    ToeplitzPayoff b = opponent_matrix(ones);
    CHECK(b.rows() == 4);
    CHECK(b.cols() == 3);
    for (double v : b.diagonals()) CHECK(v == 0.0);
  }
  SUBCASE("involution on a random 5x7") {
    ToeplitzPayoff m = random_toeplitz(rng, 5, 7);
    ToeplitzPayoff back = opponent_matrix(opponent_matrix(m));
    CHECK(back.rows() == m.rows());
    CHECK(back.cols() == m.cols());
    CHECK(back.total() == m.total());
    for (std::size_t i = 0; i < m.diagonals().size(); ++i) {
      CHECK(back.diagonals()[i] == doctest::Approx(m.diagonals()[i]).epsilon(1e-14));
    }
  }
  SUBCASE("adds up to the zero-sum total with the transpose") {
    for (int trial = 0; trial < 20; ++trial) {
      const ChipState chips{static_cast<int>(rng() % 6), static_cast<int>(rng() % 6)};
      ToeplitzPayoff m = random_toeplitz(rng, chips.b + 1, chips.a + 1);
      for (double x : {0.0, 0.01}) {
        ToeplitzPayoff adj = x > 0 ? adjust_precision(m, x, chips) : m;
        ToeplitzPayoff b = opponent_matrix(adj);
        CHECK(b.total() == doctest::Approx(1.0 + chips.total() * x));
        for (int i = 0; i < b.rows(); ++i) {
          for (int j = 0; j < b.cols(); ++j) CHECK(std::abs(b(i, j) + adj(j, i) - b.total()) <= 1e-12);
        }
      }
    }
  }
}

TEST_CASE("adjust_precision") {
  GameGraph g = race_graph(2, 1);
  const ChipState chips{5, 3};
  auto unadjusted = [](VertexId, int c) -> std::optional<double> { return c >= 4 ? 1.0 : 0.0; };
  ToeplitzPayoff m = build_matrix(g, g.start(), chips, unadjusted, Player::kA);

  SUBCASE("vanishing x leaves the matrix") {
    ToeplitzPayoff adj = adjust_precision(m, 1e-12, chips);
    for (int i = 0; i < m.rows(); ++i) {
      for (int j = 0; j < m.cols(); ++j) CHECK(std::abs(adj(i, j) - m(i, j)) <= 1e-11);
    }
  }
  SUBCASE("corners at x=1") {
    ToeplitzPayoff adj = adjust_precision(m, 1.0, chips);
    CHECK(adj(0, 0) == m(0, 0) + 5);
    CHECK(adj(3, 5) == m(3, 5) + 3);
    CHECK(adj.total() == 9.0);
  }
  SUBCASE("x=0.01 makes both diagonal halves strictly decreasing") {
    ToeplitzPayoff adj = adjust_precision(m, 0.01, chips);
    for (int d = 0; d < adj.max_offset(); ++d) CHECK(adj.diagonal(d) > adj.diagonal(d + 1));
    for (int d = adj.min_offset(); d < -1; ++d) CHECK(adj.diagonal(d) > adj.diagonal(d + 1));
  }
  SUBCASE("rejects bad inputs") {
    CHECK_THROWS_AS(adjust_precision(m, 0.0, chips), Error);
    CHECK_THROWS_AS(adjust_precision(m, 0.1, ChipState{4, 4}), Error);
  }
}

TEST_CASE("precise matrices from the adjusted recursion decrease along d") {
  // Advantage holder's matrix: both halves strictly decreasing.
  for (const char* sel : {"race:2,2", "race:3,2"}) {
    GameGraph g = make_game(sel);
    ValueTable t = solve_game(g, 7, {.x = 1e-3});
    for (VertexId v = 0; v < g.size(); ++v) {
      if (g.is_terminal(v)) continue;
      for (int a = 0; a <= 7; ++a) {
        const ChipState chips{a, 7 - a};
        ToeplitzPayoff m = position_matrix(g, t, v, a);
        if (chips.advantage() == Player::kB) m = opponent_matrix(m);
        for (int d = 0; d < m.max_offset(); ++d) CHECK(m.diagonal(d) > m.diagonal(d + 1));
        for (int d = m.min_offset(); d < -1; ++d) CHECK(m.diagonal(d) > m.diagonal(d + 1));
      }
    }
  }
}

TEST_CASE("restrict") {
  std::mt19937_64 rng(3);
  ToeplitzPayoff sq = random_toeplitz(rng, 4, 4);
  CHECK(restrict(sq, 4) == sq);

  ToeplitzPayoff m = random_toeplitz(rng, 4, 6);
  for (int len = 1; len <= 4; ++len) {
    ToeplitzPayoff r = restrict(m, len);
    CHECK(r.rows() == len);
    for (int i = 0; i < len; ++i) {
      for (int j = 0; j < len; ++j) CHECK(r(i, j) == m(i, j));
    }
  }
  CHECK_THROWS_AS(restrict(m, 0), Error);
  CHECK_THROWS_AS(restrict(m, 5), Error);

  // Race example minor.
  GameGraph g = race_graph(2, 1);
  auto unadjusted = [](VertexId, int c) -> std::optional<double> { return c >= 4 ? 1.0 : 0.0; };
  ToeplitzPayoff race = restrict(build_matrix(g, g.start(), {5, 3}, unadjusted, Player::kA), 2);
  CHECK(race.dense() == std::vector<std::vector<double>>{{1, 1}, {0, 1}});
}

TEST_CASE("apply and expected_payoff") {
  ToeplitzPayoff m(2, 2, {0.0, 1.0, 0.5});
  const std::vector<double> half{0.5, 0.5};
  CHECK(allpay::apply(m, half) == PayoffVector{0.75, 0.5});
  CHECK(expected_payoff(half, m, half) == 0.625);

  std::mt19937_64 rng(11);
  ToeplitzPayoff r = random_toeplitz(rng, 4, 6);
  CHECK(allpay::apply(r, std::vector<double>{1, 0, 0, 0, 0, 0}) == PayoffVector{r(0, 0), r(1, 0), r(2, 0), r(3, 0)});
  for (int trial = 0; trial < 10; ++trial) {
    auto sa = random_probs(rng, 6);
    auto sb = random_probs(rng, 4);
    PayoffVector out = allpay::apply(r, sa);
    double bilinear = 0.0;
    for (int i = 0; i < 4; ++i) {
      double row = 0.0;
      for (int j = 0; j < 6; ++j) row += r.dense()[i][j] * sa[j];
      CHECK(std::abs(out[i] - row) <= 1e-15);
      bilinear += sb[i] * row;
    }
    CHECK(std::abs(expected_payoff(sb, r, sa) - bilinear) <= 1e-14);
    std::vector<double> pure(4, 0.0);
    pure[2] = 1.0;
    CHECK(expected_payoff(pure, r, sa) == doctest::Approx(out[2]).epsilon(1e-15));
  }
  CHECK_THROWS_AS(allpay::apply(r, half), Error);
  CHECK_THROWS_AS(expected_payoff(half, r, half), Error);
}
