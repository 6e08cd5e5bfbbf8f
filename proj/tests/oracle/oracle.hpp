#pragma once

// Independent ground truth for tests. Nothing here is used by the library.

#include <functional>
#include <map>
#include <random>
#include <vector>

#include <gmpxx.h>

#include "allpay/payoff_matrix.hpp"

namespace allpay::oracle {

using RationalMatrix = std::vector<std::vector<mpq_class>>;

// Exact copy: every double is a dyadic rational.
RationalMatrix to_rational(const ToeplitzPayoff& m);
RationalMatrix to_rational(const std::vector<std::vector<double>>& m);

// Column player maximizes, row player minimizes (the column player owns the
// matrix, as everywhere in the library).
struct ExactEquilibrium {
  std::vector<mpq_class> col;  // owner, one entry per column
  std::vector<mpq_class> row;  // opponent, one entry per row
};

struct EnumerationResult {
  mpq_class value;
  std::vector<ExactEquilibrium> equilibria;
  // Distinct owner strategies among the equilibria.
  std::vector<std::vector<mpq_class>> owner_strategies() const;
  std::vector<std::vector<mpq_class>> opponent_strategies() const;
};

// Support enumeration over equal-size support pairs. Each candidate is screened
// in floating point, then solved and checked exactly (nonnegativity and every
// pure best response). Throws Error(kTooLarge) when there are more support
// pairs than in a 9x9 game, so long thin matrices such as 2x10 still pass.
EnumerationResult support_enumeration(const RationalMatrix& m);

std::vector<double> to_double(const std::vector<mpq_class>& v);

// Largest k in 1..min(rows, cols) whose restriction of the search form has a
// dense-solved inverse-times-ones with no entry below -1e-9 * scale. Linear
// scan, no Levinson.
int scan_length(const ToeplitzPayoff& m);

using ValueLookup = std::function<double(VertexId, int)>;

// Entry by entry, straight from the bid rules: (B bids i, A bids j), A wins on
// j > i or on a tie with the advantage; chips then are (a - j + i, b - i + j).
std::vector<std::vector<double>> naive_matrix(const GameGraph& g, VertexId v, ChipState chips,
                                              const ValueLookup& value_of, Player advantage);

// Adds x * (A's chips after the exchange) to every entry.
std::vector<std::vector<double>> naive_adjust(std::vector<std::vector<double>> m, double x,
                                              ChipState chips);

// Random advantage-holder matrix of a precise game: successor outcomes are
// nondecreasing in A's chips, A winning the bid is never worse for A, and the
// x adjustment is applied.
ToeplitzPayoff random_precise_matrix(std::mt19937_64& rng, int a, int b, double x);

// A's adjusted value at (v, chips) by plain recursion: naive matrices,
// naive adjustment and exact support enumeration at every position. Terminals
// are 1 and 0. `memo` only caches this function's own results.
double recursive_value(const GameGraph& g, VertexId v, ChipState chips, double x,
                       std::map<std::pair<VertexId, int>, double>& memo);

}  // namespace allpay::oracle
