#pragma once

#include <optional>
#include <span>
#include <vector>

#include "allpay/payoff_matrix.hpp"

namespace allpay {

enum class SolveMethod { kLevinson, kDenseFallback };

struct SolveReport {
  std::vector<double> solution;
  SolveMethod method = SolveMethod::kLevinson;
  // Smallest |pivot| met on the way, in matrix units.
  double min_pivot = 0.0;
};

// Relative thresholds; scale is the largest absolute matrix entry.
inline constexpr double kPivotTolerance = 1e-12;
inline constexpr double kResidualTolerance = 1e-8;

// O(n^2) Levinson-Trench-Zohar recursion for a square non-symmetric Toeplitz
// system. Returns nullopt on breakdown: a leading principal minor is
// numerically singular, or the result misses the residual bound.
std::optional<SolveReport> try_levinson_solve(const ToeplitzPayoff& t, std::span<const double> rhs);

// Gaussian elimination with partial pivoting. Returns nullopt when the matrix
// is singular at tolerance.
std::optional<SolveReport> try_dense_solve(const ToeplitzPayoff& t, std::span<const double> rhs);

// Throwing variants: kBreakdown and kSingular respectively.
SolveReport levinson_solve(const ToeplitzPayoff& t, std::span<const double> rhs);
SolveReport dense_solve(const ToeplitzPayoff& t, std::span<const double> rhs);

// Levinson first, dense elimination on breakdown; nullopt means singular.
std::optional<SolveReport> solve_toeplitz(const ToeplitzPayoff& t, std::span<const double> rhs);

// max |t x - rhs|
double residual_norm(const ToeplitzPayoff& t, std::span<const double> x,
                     std::span<const double> rhs);

}  // namespace allpay
