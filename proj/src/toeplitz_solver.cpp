#include "allpay/toeplitz_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace allpay {

namespace {

void require_square(const ToeplitzPayoff& t, std::span<const double> rhs) {
  if (t.rows() != t.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "Toeplitz solve needs a square matrix");
  }
  if (rhs.size() != static_cast<std::size_t>(t.rows())) {
    throw Error(ErrorCode::kDimensionMismatch, "right-hand side length differs from matrix size");
  }
}

double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

bool residual_ok(const ToeplitzPayoff& t, std::span<const double> x, std::span<const double> rhs) {
  const double r = residual_norm(t, x, rhs);
  return std::isfinite(r) && r <= kResidualTolerance * (1.0 + inf_norm(rhs));
}

}  // namespace

double residual_norm(const ToeplitzPayoff& t, std::span<const double> x,
                     std::span<const double> rhs) {
  double worst = 0.0;
  for (int i = 0; i < t.rows(); ++i) {
    double acc = -rhs[i];
    for (int j = 0; j < t.cols(); ++j) acc += t(i, j) * x[j];
    worst = std::max(worst, std::abs(acc));
  }
  return worst;
}

std::optional<SolveReport> try_levinson_solve(const ToeplitzPayoff& t,
                                              std::span<const double> rhs) {
  require_square(t, rhs);
  const int n = t.rows();
  const double tol = kPivotTolerance * t.scale();

  // forward: T_k f = e_first, backward: T_k b = e_last, x: T_k x = rhs[0..k)
  std::vector<double> forward(n), backward(n), x(n), scratch(n);
  double pivot = t.diagonal(0);
  double min_pivot = std::abs(pivot);
  if (!(std::abs(pivot) > tol)) return std::nullopt;
  forward[0] = backward[0] = 1.0 / pivot;
  x[0] = rhs[0] / pivot;

  for (int k = 1; k < n; ++k) {
    double err_f = 0.0, err_b = 0.0, err_x = 0.0;
    for (int j = 0; j < k; ++j) {
      err_f += t.diagonal(j - k) * forward[j];
      err_b += t.diagonal(j + 1) * backward[j];
      err_x += t.diagonal(j - k) * x[j];
    }
    const double denom = 1.0 - err_f * err_b;
    pivot *= denom;
    min_pivot = std::min(min_pivot, std::abs(pivot));
    if (!(std::abs(pivot) > tol) || !std::isfinite(pivot)) return std::nullopt;

    // new_f = ([f;0] - err_f [0;b]) / denom, new_b = ([0;b] - err_b [f;0]) / denom
    for (int j = k; j >= 0; --j) {
      const double f_j = j < k ? forward[j] : 0.0;
      const double b_shift = j > 0 ? backward[j - 1] : 0.0;
      scratch[j] = (f_j - err_f * b_shift) / denom;
      backward[j] = (b_shift - err_b * f_j) / denom;  // walks down: backward[j-1] still old
    }
    std::copy(scratch.begin(), scratch.begin() + k + 1, forward.begin());

    const double correction = rhs[k] - err_x;
    x[k] = 0.0;
    for (int j = 0; j <= k; ++j) x[j] += correction * backward[j];
  }

  if (!residual_ok(t, x, rhs)) return std::nullopt;
  return SolveReport{std::move(x), SolveMethod::kLevinson, min_pivot};
}

std::optional<SolveReport> try_dense_solve(const ToeplitzPayoff& t, std::span<const double> rhs) {
  require_square(t, rhs);
  const int n = t.rows();
  const double tol = kPivotTolerance * t.scale();
  std::vector<double> a(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a[i * n + j] = t(i, j);
  }
  std::vector<double> x(rhs.begin(), rhs.end());
  double min_pivot = std::numeric_limits<double>::infinity();
  for (int col = 0; col < n; ++col) {
    int best = col;
    for (int r = col + 1; r < n; ++r) {
      if (std::abs(a[r * n + col]) > std::abs(a[best * n + col])) best = r;
    }
    const double p = a[best * n + col];
    min_pivot = std::min(min_pivot, std::abs(p));
    if (!(std::abs(p) > tol)) return std::nullopt;
    if (best != col) {
      std::swap_ranges(a.begin() + best * n, a.begin() + best * n + n, a.begin() + col * n);
      std::swap(x[best], x[col]);
    }
    for (int r = col + 1; r < n; ++r) {
      const double factor = a[r * n + col] / p;
      if (factor == 0.0) continue;
      for (int c = col; c < n; ++c) a[r * n + c] -= factor * a[col * n + c];
      x[r] -= factor * x[col];
    }
  }
  for (int i = n - 1; i >= 0; --i) {
    double acc = x[i];
    for (int j = i + 1; j < n; ++j) acc -= a[i * n + j] * x[j];
    x[i] = acc / a[i * n + i];
  }
  // A result that misses the residual bound is singular at working precision.
  if (!residual_ok(t, x, rhs)) return std::nullopt;
  return SolveReport{std::move(x), SolveMethod::kDenseFallback, min_pivot};
}

SolveReport levinson_solve(const ToeplitzPayoff& t, std::span<const double> rhs) {
  if (auto report = try_levinson_solve(t, rhs)) return *std::move(report);
  throw Error(ErrorCode::kBreakdown, "Levinson recursion broke down");
}

SolveReport dense_solve(const ToeplitzPayoff& t, std::span<const double> rhs) {
  if (auto report = try_dense_solve(t, rhs)) return *std::move(report);
  throw Error(ErrorCode::kSingular, "matrix is singular at tolerance");
}

std::optional<SolveReport> solve_toeplitz(const ToeplitzPayoff& t, std::span<const double> rhs) {
  if (auto report = try_levinson_solve(t, rhs)) return report;
  return try_dense_solve(t, rhs);
}

}  // namespace allpay
