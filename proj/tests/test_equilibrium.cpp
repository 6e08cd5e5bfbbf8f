#include <random>

#include "doctest.h"

#include "allpay/dag_solver.hpp"
#include "oracle.hpp"

using namespace allpay;

namespace {

double max_diff(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < std::max(a.size(), b.size()); ++i) {
    const double x = i < a.size() ? a[i] : 0.0;
    const double y = i < b.size() ? b[i] : 0.0;
    d = std::max(d, std::abs(x - y));
  }
  return d;
}

// Distance from q to the segment between r and its zero-prefixed shift.
double segment_distance(const std::vector<double>& q, const Strategy& r, const Strategy& shifted) {
  const std::size_t n = q.size();
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dir = r[static_cast<int>(i)] - shifted[static_cast<int>(i)];
    num += (q[i] - shifted[static_cast<int>(i)]) * dir;
    den += dir * dir;
  }
  const double t = den > 0 ? std::clamp(num / den, 0.0, 1.0) : 0.0;
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = t * r[static_cast<int>(i)] + (1 - t) * shifted[static_cast<int>(i)];
    worst = std::max(worst, std::abs(q[i] - p));
  }
  return worst;
}

ToeplitzPayoff example_2x2() { return ToeplitzPayoff(2, 2, {0.0, 1.0, 0.5}); }

ToeplitzPayoff race_root(double x) {
  GameGraph g = race_graph(2, 1);
  ValueTable t = solve_game(g, 8, {.x = x});
  return position_matrix(g, t, g.start(), 5);
}

}  // namespace

TEST_CASE("Strategy validation") {
  CHECK_THROWS_AS(Strategy({0.5, -0.1, 0.6}), Error);
  CHECK_THROWS_AS(Strategy({0.5, 0.4}), Error);
  CHECK_THROWS_AS(Strategy(std::vector<double>{}), Error);
  Strategy s({0.5, -1e-13, 0.5});
  CHECK(s[1] == 0.0);
  CHECK(s.length() == 3);
  CHECK_FALSE(s.gap_free());
  CHECK(Strategy({0.0, 0.3, 0.7, 0.0}).gap_free());
  CHECK(Strategy({0.0, 0.3, 0.7, 0.0}).length() == 3);
  CHECK(Strategy::pure(2, 4).length() == 3);
}

TEST_CASE("2x2 example solved exactly") {
  ToeplitzPayoff m = example_2x2();
  auto exact = oracle::support_enumeration(oracle::to_rational(m));
  CHECK(exact.value == mpq_class(2, 3));
  REQUIRE(exact.owner_strategies().size() == 1);

  EquilibriumResult r = solve_turn(m);
  CHECK(r.length == 2);
  CHECK(std::abs(r.value - exact.value.get_d()) <= 1e-12);
  CHECK(max_diff(r.advantage.probs(), oracle::to_double(exact.owner_strategies()[0])) <= 1e-12);
  CHECK(max_diff(r.opponent.probs(), oracle::to_double(exact.opponent_strategies()[0])) <= 1e-12);
  CHECK(r.best_response_gap <= 1e-12);
}

TEST_CASE("advantage_strategy") {
  SUBCASE("length 1 is the pure zero bid") {
    ToeplitzPayoff m(3, 4, {0.1, 0.2, 0.3, 0.9, 0.8, 0.7});
    Strategy s = advantage_strategy(m, 1);
    CHECK(s.cap() == 3);
    CHECK(s[0] == 1.0);
    CHECK(s.length() == 1);
  }
  SUBCASE("adjusted 2x2 fixture matches the exact oracle") {
    ToeplitzPayoff m = adjust_precision(example_2x2(), 0.01, {1, 1});
    CHECK(m.dense() == std::vector<std::vector<double>>{{1.01, 0.5}, {0.02, 1.01}});
    auto exact = oracle::support_enumeration(oracle::to_rational(m));
    REQUIRE(exact.owner_strategies().size() == 1);
    const int len = find_length(m);
    Strategy s = advantage_strategy(m, len);
    CHECK(max_diff(s.probs(), oracle::to_double(exact.owner_strategies()[0])) <= 1e-9);
  }
  SUBCASE("race root at x=1e-3 matches the exact oracle") {
    ToeplitzPayoff m = race_root(1e-3);
    auto exact = oracle::support_enumeration(oracle::to_rational(m));
    REQUIRE(exact.owner_strategies().size() == 1);
    Strategy s = advantage_strategy(m, find_length(m));
    CHECK(max_diff(s.probs(), oracle::to_double(exact.owner_strategies()[0])) <= 1e-6);
  }
}

TEST_CASE("length search") {
  SUBCASE("race root profile matches the linear scan") {
    ToeplitzPayoff m = race_root(1e-3);
    const int len = find_length(m);
    CHECK(len == oracle::scan_length(m));
    const ToeplitzPayoff form = search_form(m);
    CHECK(nonneg_solution_test(form, len));
    for (int k = len + 1; k <= std::min(m.rows(), m.cols()); ++k) {
      CHECK_FALSE(nonneg_solution_test(form, k));
    }
    for (int k = 1; k <= len; ++k) CHECK(nonneg_solution_test(form, k));
  }
  SUBCASE("tictactoe root at N=10, a=b=5, x=1e-4") {
    GameGraph g = tictactoe_graph();
    ValueTable t = solve_game(g, 10, {.x = 1e-4});
    ToeplitzPayoff m = position_matrix(g, t, g.start(), 5);
    CHECK(find_length(m) == oracle::scan_length(m));
  }
  SUBCASE("a 1x1 restriction that cannot grow") {
    ToeplitzPayoff ones(2, 2, std::vector<double>(3, 1.0));
    CHECK(find_length(ones) == 1);
    CHECK(oracle::scan_length(ones) == 1);
  }
  SUBCASE("degenerate chips") {
    ToeplitzPayoff row(1, 3, {0.2, 0.5, 0.9});
    try {
      find_length(row);
      FAIL("expected DegenerateChips");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kDegenerateChips);
    }
  }
}

TEST_CASE("reverse and shift") {
  CHECK(reverse(Strategy::pure(0, 3), 2) == Strategy::pure(0, 2));
  Strategy s({0.3, 0.7, 0.0, 0.0});
  Strategy r = reverse(s, 5);
  CHECK(r == Strategy({0.7, 0.3, 0.0, 0.0, 0.0, 0.0}));
  CHECK(reverse(r, 3) == s);
  CHECK(shift(s, 3) == Strategy({0.0, 0.3, 0.7, 0.0}));
  CHECK_THROWS_AS(reverse(Strategy({0.2, 0.2, 0.6}), 1), Error);

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> unit(0.01, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> w(1 + rng() % 6);
    for (double& v : w) v = unit(rng);
    Strategy x = Strategy::from_weights(w, 8);
    Strategy back = reverse(reverse(x, 8), 8);
    CHECK(max_diff(back.probs(), x.probs()) == 0.0);
  }
}

TEST_CASE("solve_turn special cases") {
  SUBCASE("constant matrix") {
    ToeplitzPayoff ones(4, 5, std::vector<double>(8, 1.0));
    EquilibriumResult r = solve_turn(ones);
    CHECK(r.value == 1.0);
    CHECK(r.advantage[0] == 1.0);
    CHECK(r.length == 1);
  }
  SUBCASE("race 1,1 with a=3, b=2") {
    GameGraph g = race_graph(1, 1);
    ValueTable t = solve_game(g, 5, {.x = 1e-3});
    EquilibriumResult r = solve_turn(position_matrix(g, t, g.start(), 3));
    CHECK(std::abs(r.value - 1.0) <= adjustment_error_bound(g, 5, 1e-3));
  }
  SUBCASE("single column") {
    ToeplitzPayoff col(3, 1, {0.4, 0.2, 0.9});
    EquilibriumResult r = solve_turn(col);
    CHECK(r.value == 0.2);
    CHECK(r.opponent[1] == 1.0);
  }
  SUBCASE("B holds the advantage") {
    // A has 2 chips, B has 3: B's own matrix is solved and A gets the rest.
    std::mt19937_64 rng(4);
    ToeplitzPayoff mb = oracle::random_precise_matrix(rng, 2, 3, 1e-2);
    ToeplitzPayoff ma = opponent_matrix(mb);
    CHECK(ma.rows() == 4);
    CHECK(ma.cols() == 3);
    TurnSolution s = solve_position(ma, Player::kB);
    CHECK(s.value_a == doctest::Approx(ma.total() - solve_turn(mb).value).epsilon(1e-14));
    auto exact = oracle::support_enumeration(oracle::to_rational(ma));
    CHECK(std::abs(s.value_a - exact.value.get_d()) <= 1e-9);
    CHECK(s.strategy_a.cap() == 2);
    CHECK(s.strategy_b.cap() == 3);
  }
}

TEST_CASE("verify_equilibrium") {
  ToeplitzPayoff m = race_root(1e-3);
  EquilibriumResult r = solve_turn(m);
  VerificationReport ok = verify_equilibrium(m, r.advantage, r.opponent);
  CHECK(ok.passed());
  CHECK(ok.length == r.length);

  SUBCASE("perturbed strategy breaks equalization") {
    std::vector<double> w(r.advantage.probs().begin(), r.advantage.probs().end());
    w[0] += 0.05;
    Strategy bent = Strategy::from_weights(w, r.advantage.cap());
    VerificationReport bad = verify_equilibrium(m, bent, r.opponent);
    CHECK_FALSE(bad.equalized());
    CHECK_FALSE(bad.passed());
  }
  SUBCASE("oracle equilibrium of a random 6x6 adjusted matrix passes") {
    std::mt19937_64 rng(21);
    ToeplitzPayoff rm = oracle::random_precise_matrix(rng, 5, 5, 1e-2);
    auto exact = oracle::support_enumeration(oracle::to_rational(rm));
    const auto& eq = exact.equilibria.front();
    Strategy sa(oracle::to_double(eq.col));
    Strategy sb(oracle::to_double(eq.row));
    CHECK(verify_equilibrium(rm, sa, sb).passed());
  }
  CHECK_THROWS_AS(verify_equilibrium(m, r.opponent, r.advantage), Error);
}

TEST_CASE("equilibrium properties on random precise matrices") {
  std::mt19937_64 rng(1234);
  int nondegenerate = 0;
  for (int trial = 0; trial < 80; ++trial) {
    const int a = 1 + static_cast<int>(rng() % 7);
    const int b = 1 + static_cast<int>(rng() % 7);
    const double x = trial % 2 ? 1e-2 : 1e-3;
    ToeplitzPayoff m = oracle::random_precise_matrix(rng, a, b, x);
    CAPTURE(trial);
    EquilibriumResult r = solve_turn(m);
    auto exact = oracle::support_enumeration(oracle::to_rational(m));
    const auto owners = exact.owner_strategies();

    // Uniqueness for the advantage holder, and agreement with it.
    REQUIRE(owners.size() == 1);
    CHECK(std::abs(r.value - exact.value.get_d()) <= 1e-6);
    CHECK(max_diff(r.advantage.probs(), oracle::to_double(owners[0])) <= 1e-6);
    CHECK(r.length == oracle::scan_length(m));

    // Structure of the advantage strategy.
    CHECK(r.advantage.gap_free());
    CHECK(r.advantage[0] > 0.0);
    // Degenerate when outbidding a zero bid does not hurt the owner; bid 0 is then pure.
    if (m.rows() > 1 && m(1, 0) < m(0, 0)) {
      CHECK(r.length >= 2);
      ++nondegenerate;
    }

    // The reverse guarantees the opponent the rest of the total.
    const double opponent_share = m.total() - r.value;
    for (int j = 0; j < m.cols(); ++j) {
      double owner_payoff = 0.0;
      for (int i = 0; i < m.rows(); ++i) owner_payoff += r.opponent[i] * m(i, j);
      CHECK(m.total() - owner_payoff >= opponent_share - 1e-7);
    }
    CHECK(r.best_response_gap <= 1e-7);

    // Every exact opponent equilibrium sits on the reverse/shift segment.
    if (r.length + 1 <= m.rows()) {
      const Strategy shifted = shift(r.opponent, m.rows() - 1);
      for (const auto& q : exact.opponent_strategies()) {
        CHECK(segment_distance(oracle::to_double(q), r.opponent, shifted) <= 1e-6);
      }
    } else {
      for (const auto& q : exact.opponent_strategies()) {
        CHECK(max_diff(oracle::to_double(q), r.opponent.probs()) <= 1e-6);
      }
    }

    // The restricted game is equalized at the same value.
    PayoffVector restricted = allpay::apply(restrict(m, r.length),
                                    r.advantage.probs().first(static_cast<std::size_t>(r.length)));
    CHECK(std::abs(*std::min_element(restricted.begin(), restricted.end()) - r.value) <= 1e-9);
  }
  CHECK(nondegenerate >= 20);
}
