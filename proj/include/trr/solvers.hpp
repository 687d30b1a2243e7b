#pragma once

#include <optional>
#include <vector>

#include "trr/sensing.hpp"

namespace trr {

// Trimmed-ridge problem in the lifted nonnegative space: x = u - v,
// z = [u; v], A = [Phi, -Phi], and
//   F(z) = 1/2 ||y - A z||^2 + rho (||z||^2 - ||z||^2_{K,2})  on z >= 0.
struct TrrProblem {
  Mat a_matrix;      // M x 2N
  Vec measurement;   // y, length M
  double rho = 1.0;
  int top_k = 0;     // K in [0, 2N]
  double lipschitz = 0.0;  // k >= lambda_max(A^T A)
};

struct SolverOptions {
  double eps = 1e-10;
  int max_iter = 3000;
  bool zero_init = false;            // default init is [(Phi^T y)+; (-Phi^T y)+]
  std::optional<Vec> label;          // enables the error trace
  std::vector<double> alpha_schedule;  // when set, overrides the step rule
  std::optional<double> beta_fixed;    // when set, overrides beta = t/(t+3)
};

struct SolverReport {
  Vec solution;                      // x_hat = u - v, length N
  int iterations_run = 0;
  std::vector<double> objective_trace;  // F(z^(t)), t = 0..iterations_run
  std::vector<double> error_trace;      // ||x - x_hat||^2 / ||x||^2, if labeled
  std::vector<double> norm_trace;       // ||x_hat||_2 per iterate
  bool converged = false;
};

/// Indices of the k largest-magnitude entries, ties to the lowest index.
std::vector<int> top_k_indices(const Vec& v, int k);

/// Sum of squares of the k largest-magnitude entries.
double top_k2_norm(const Vec& x, int k);

/// Keep the entries among the k largest magnitudes, zero the rest; ties
/// resolve to the lowest index. Shares its selection with top_k2_norm and
/// gradient so the three stay mutually consistent.
Vec trim_top_k(const Vec& z, int k);

double objective(const TrrProblem& p, const Vec& z);

/// Gradient A^T (A z - y) + 2 rho (z - trim(z, K)); exact wherever the
/// top-K active set is locally stable.
Vec gradient(const TrrProblem& p, const Vec& z);

/// lambda_max(A^T A) by power iteration (1e-8 relative tolerance),
/// inflated by 1.001 so the majorization step size stays safe.
double lipschitz_constant(const Mat& a_matrix);

/// Assemble A = [Phi, -Phi] and the Lipschitz constant for one solve.
TrrProblem make_trr_problem(const MeasurementMatrix& phi, const Vec& y,
                            double rho, int top_k);

/// Fixed-step projected gradient descent, step 1/(k + 2 rho). The
/// objective trace is nonincreasing.
SolverReport itrr(const TrrProblem& p, const SolverOptions& opt = {});

/// Barzilai-Borwein step: ||dz||^2 / (dz . dg), falling back to
/// `fallback` when the curvature estimate is not positive.
double bb_step(const Vec& z, const Vec& z_prev, const Vec& g,
               const Vec& g_prev, double fallback);

/// BB-accelerated variant with extrapolation z <- z + beta (w - z),
/// beta = t/(t+3); the first step uses 1/(k + 2 rho).
SolverReport itrr_bb(const TrrProblem& p, const SolverOptions& opt = {});

enum class StepRule { fixed, bb };

/// Ridge regression 1/2 ||y - Phi x||^2 + lambda2 ||x||^2 solved in the
/// lifted space (a TrrProblem with K = 0).
SolverReport pgd_ridge(const MeasurementMatrix& phi, const Vec& y,
                       double lambda2, StepRule step_rule,
                       const SolverOptions& opt = {});

/// Lasso ||y - Phi x||^2 + lambda1 ||x||_1; the l1 term is linear on the
/// lifted nonnegative orthant. BB steps.
SolverReport pgd_lasso(const MeasurementMatrix& phi, const Vec& y,
                       double lambda1, const SolverOptions& opt = {});

/// Orthogonal matching pursuit, `sparsity` greedy selections with a
/// least-squares refit on the active set each round.
Vec omp(const MeasurementMatrix& phi, const Vec& y, int sparsity);

}  // namespace trr
