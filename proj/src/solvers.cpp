#include "trr/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace trr {

// objective / gradient / trim (and the network's trimmed layers) all
// select through here, so tie-breaking stays consistent.
std::vector<int> top_k_indices(const Vec& v, int k) {
  const int n = static_cast<int>(v.size());
  if (k < 0 || k > n) throw std::invalid_argument("top-k: k out of range");
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::partial_sort(idx.begin(), idx.begin() + k, idx.end(), [&](int a, int b) {
    const double ma = std::abs(v[a]), mb = std::abs(v[b]);
    if (ma != mb) return ma > mb;
    return a < b;
  });
  idx.resize(k);
  return idx;
}

double top_k2_norm(const Vec& x, int k) {
  double s = 0.0;
  for (int i : top_k_indices(x, k)) s += x[i] * x[i];
  return s;
}

Vec trim_top_k(const Vec& z, int k) {
  Vec out = Vec::Zero(z.size());
  for (int i : top_k_indices(z, k)) out[i] = z[i];
  return out;
}

double objective(const TrrProblem& p, const Vec& z) {
  if (z.size() != p.a_matrix.cols())
    throw std::invalid_argument("objective: dimension mismatch");
  const Vec r = p.a_matrix * z - p.measurement;
  return 0.5 * r.squaredNorm() +
         p.rho * (z.squaredNorm() - top_k2_norm(z, p.top_k));
}

Vec gradient(const TrrProblem& p, const Vec& z) {
  if (z.size() != p.a_matrix.cols())
    throw std::invalid_argument("gradient: dimension mismatch");
  const Vec r = p.a_matrix * z - p.measurement;
  return p.a_matrix.transpose() * r + 2.0 * p.rho * (z - trim_top_k(z, p.top_k));
}

double lipschitz_constant(const Mat& a_matrix) {
  if (a_matrix.size() == 0 || a_matrix.norm() == 0.0)
    throw std::invalid_argument("lipschitz_constant: zero matrix");
  Rng rng(0x11b5);
  Vec v(a_matrix.cols());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.normal();
  v.normalize();
  double lam_prev = 0.0;
  for (int it = 0; it < 10000; ++it) {
    Vec w = a_matrix.transpose() * (a_matrix * v);
    const double lam = v.dot(w);
    const double wn = w.norm();
    if (wn == 0.0) {
      // start landed in the null space; redraw
      for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.normal();
      v.normalize();
      lam_prev = 0.0;
      continue;
    }
    v = w / wn;
    if (it > 0 && std::abs(lam - lam_prev) <= 1e-8 * std::max(std::abs(lam), 1e-300))
      return lam * 1.001;
    lam_prev = lam;
  }
  throw std::runtime_error("lipschitz_constant: power iteration did not converge");
}

TrrProblem make_trr_problem(const MeasurementMatrix& phi, const Vec& y,
                            double rho, int top_k) {
  if (phi.m_rows() != y.size())
    throw std::invalid_argument("make_trr_problem: dimension mismatch");
  TrrProblem p;
  p.a_matrix.resize(phi.m_rows(), 2 * phi.n_cols());
  p.a_matrix << phi.entries, -phi.entries;
  p.measurement = y;
  p.rho = rho;
  if (top_k < 0 || top_k > p.a_matrix.cols())
    throw std::invalid_argument("make_trr_problem: top_k out of range");
  p.top_k = top_k;
  p.lipschitz = lipschitz_constant(p.a_matrix);
  return p;
}

double bb_step(const Vec& z, const Vec& z_prev, const Vec& g,
               const Vec& g_prev, double fallback) {
  const Vec dz = z - z_prev;
  const double dz2 = dz.squaredNorm();
  if (dz2 == 0.0) throw std::invalid_argument("bb_step: degenerate step");
  const double denom = dz.dot(g - g_prev);
  if (denom <= 0.0) return fallback;
  return dz2 / denom;
}

namespace {

// Trimmed-ridge pieces; pgd_ridge reuses them with K = 0.
struct TrimmedRidgeModel {
  const TrrProblem& p;

  double eval(const Vec& z, const Vec& r, Vec& g) const {
    const Vec trimmed = trim_top_k(z, p.top_k);
    g = p.a_matrix.transpose() * r + 2.0 * p.rho * (z - trimmed);
    return 0.5 * r.squaredNorm() +
           p.rho * (z.squaredNorm() - trimmed.squaredNorm());
  }
  double fallback_step() const { return 1.0 / (p.lipschitz + 2.0 * p.rho); }
  const Mat& a() const { return p.a_matrix; }
  const Vec& y() const { return p.measurement; }
};

// Lasso on the lifted orthant: ||y - A z||^2 + lambda1 1'z, z >= 0.
struct LassoModel {
  const Mat& a_matrix;
  const Vec& measurement;
  double lambda1;
  double lipschitz;

  double eval(const Vec& z, const Vec& r, Vec& g) const {
    g = 2.0 * (a_matrix.transpose() * r);
    g.array() += lambda1;
    return r.squaredNorm() + lambda1 * z.sum();
  }
  double fallback_step() const { return 1.0 / (2.0 * lipschitz); }
  const Mat& a() const { return a_matrix; }
  const Vec& y() const { return measurement; }
};

Vec default_init(const Mat& a, const Vec& y, bool zero_init) {
  if (zero_init) return Vec::Zero(a.cols());
  return (a.transpose() * y).cwiseMax(0.0);
}

// every lifted iterate must stay in the nonnegative orthant
void check_feasible(const Vec& z) {
  if (z.minCoeff() < 0.0)
    throw std::logic_error("solver: iterate left the nonnegative orthant");
}

template <class Model>
void record(SolverReport& rep, const Model& m, const SolverOptions& opt,
            double f, const Vec& z) {
  rep.objective_trace.push_back(f);
  const Eigen::Index n = m.a().cols() / 2;
  const Vec x_hat = z.head(n) - z.tail(n);
  rep.norm_trace.push_back(x_hat.norm());
  if (opt.label)
    rep.error_trace.push_back((x_hat - *opt.label).squaredNorm() /
                              opt.label->squaredNorm());
}

template <class Model>
SolverReport finish(SolverReport rep, const Model& m, const Vec& z) {
  const Eigen::Index n = m.a().cols() / 2;
  rep.solution = z.head(n) - z.tail(n);
  return rep;
}

template <class Model>
SolverReport run_fixed_step(const Model& m, double step,
                            const SolverOptions& opt) {
  if (opt.eps <= 0.0 || opt.max_iter < 1)
    throw std::invalid_argument("solver: eps must be > 0 and max_iter >= 1");
  SolverReport rep;
  Vec z = default_init(m.a(), m.y(), opt.zero_init);
  Vec g;
  for (int t = 1; t <= opt.max_iter; ++t) {
    const Vec r = m.a() * z - m.y();
    record(rep, m, opt, m.eval(z, r, g), z);
    Vec z_next = (z - step * g).cwiseMax(0.0);
    check_feasible(z_next);
    const double delta = (z_next - z).norm();
    z = std::move(z_next);
    rep.iterations_run = t;
    if (delta <= opt.eps) {
      rep.converged = true;
      break;
    }
  }
  Vec g_final;
  record(rep, m, opt, m.eval(z, Vec(m.a() * z - m.y()), g_final), z);
  return finish(std::move(rep), m, z);
}

template <class Model>
SolverReport run_mogpd_bb(const Model& m, const SolverOptions& opt) {
  if (opt.eps <= 0.0 || opt.max_iter < 1)
    throw std::invalid_argument("solver: eps must be > 0 and max_iter >= 1");
  SolverReport rep;
  const double fallback = m.fallback_step();
  Vec z = default_init(m.a(), m.y(), opt.zero_init);
  Vec g;
  double f = m.eval(z, Vec(m.a() * z - m.y()), g);
  Vec z_prev, g_prev;
  for (int t = 1; t <= opt.max_iter; ++t) {
    record(rep, m, opt, f, z);
    double alpha;
    if (!opt.alpha_schedule.empty()) {
      const std::size_t i = std::min<std::size_t>(t - 1, opt.alpha_schedule.size() - 1);
      alpha = opt.alpha_schedule[i];
    } else if (t == 1) {
      alpha = fallback;
    } else {
      alpha = bb_step(z, z_prev, g, g_prev, fallback);
    }
    const Vec w = (z - alpha * g).cwiseMax(0.0);
    const double beta = opt.beta_fixed ? *opt.beta_fixed : t / (t + 3.0);
    Vec z_next = z + beta * (w - z);  // convex mix of feasible points
    check_feasible(z_next);
    const double delta = (z_next - z).norm();
    z_prev = std::move(z);
    g_prev = g;
    z = std::move(z_next);
    f = m.eval(z, Vec(m.a() * z - m.y()), g);
    rep.iterations_run = t;
    if (delta <= opt.eps) {
      rep.converged = true;
      break;
    }
  }
  record(rep, m, opt, f, z);
  return finish(std::move(rep), m, z);
}

}  // namespace

SolverReport itrr(const TrrProblem& p, const SolverOptions& opt) {
  TrimmedRidgeModel m{p};
  return run_fixed_step(m, m.fallback_step(), opt);
}

SolverReport itrr_bb(const TrrProblem& p, const SolverOptions& opt) {
  return run_mogpd_bb(TrimmedRidgeModel{p}, opt);
}

SolverReport pgd_ridge(const MeasurementMatrix& phi, const Vec& y,
                       double lambda2, StepRule step_rule,
                       const SolverOptions& opt) {
  const TrrProblem p = make_trr_problem(phi, y, lambda2, 0);
  TrimmedRidgeModel m{p};
  if (step_rule == StepRule::fixed)
    return run_fixed_step(m, m.fallback_step(), opt);
  return run_mogpd_bb(m, opt);
}

SolverReport pgd_lasso(const MeasurementMatrix& phi, const Vec& y,
                       double lambda1, const SolverOptions& opt) {
  Mat a(phi.m_rows(), 2 * phi.n_cols());
  a << phi.entries, -phi.entries;
  LassoModel m{a, y, lambda1, lipschitz_constant(a)};
  return run_mogpd_bb(m, opt);
}

Vec omp(const MeasurementMatrix& phi, const Vec& y, int sparsity) {
  const int m_rows = phi.m_rows();
  const int n_cols = phi.n_cols();
  if (sparsity < 1 || sparsity > std::min(m_rows, n_cols))
    throw std::invalid_argument("omp: sparsity out of range");
  if (y.size() != m_rows) throw std::invalid_argument("omp: dimension mismatch");

  Vec x = Vec::Zero(n_cols);
  Vec residual = y;
  std::vector<int> active;
  std::vector<char> in_active(n_cols, 0);
  Vec coef;
  for (int s = 0; s < sparsity; ++s) {
    if (residual.norm() == 0.0) break;
    // columns have unit norm, so raw inner products rank correlation
    const Vec corr = phi.entries.transpose() * residual;
    int best = -1;
    double best_mag = -1.0;
    for (int j = 0; j < n_cols; ++j) {
      if (in_active[j]) continue;
      const double mag = std::abs(corr[j]);
      if (mag > best_mag) {
        best_mag = mag;
        best = j;
      }
    }
    active.push_back(best);
    in_active[best] = 1;

    Mat sub(m_rows, active.size());
    for (std::size_t c = 0; c < active.size(); ++c)
      sub.col(c) = phi.entries.col(active[c]);
    Eigen::ColPivHouseholderQR<Mat> qr(sub);
    if (qr.rank() < static_cast<Eigen::Index>(active.size()))
      throw std::runtime_error("omp: singular active-set system");
    coef = qr.solve(y);
    residual = y - sub * coef;
  }
  for (std::size_t c = 0; c < active.size(); ++c) x[active[c]] = coef[c];
  return x;
}

}  // namespace trr
