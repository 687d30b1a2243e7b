#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_util.hpp"
#include "trr/solvers.hpp"

using namespace trr;

namespace {

MeasurementMatrix random_phi(int m, int n, std::uint64_t seed) {
  Rng rng(seed);
  return bernoulli_matrix(m, n, rng);
}

Vec random_vec(int n, std::uint64_t seed) {
  Rng rng(seed);
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}

// S-sparse vector with well-separated magnitudes in [0.5, 1.5]
Vec separated_sparse(int n, int s, std::uint64_t seed) {
  Rng rng(seed);
  Vec x = Vec::Zero(n);
  std::vector<int> picked;
  while (static_cast<int>(picked.size()) < s) {
    const int idx = static_cast<int>(rng.next_u64() % n);
    bool fresh = true;
    for (int p : picked) fresh &= (p != idx);
    if (!fresh) continue;
    picked.push_back(idx);
    const double mag = 0.5 + static_cast<double>(picked.size()) / s;
    x[idx] = rng.coin() ? mag : -mag;
  }
  return x;
}

Vec lift(const Vec& x) {
  Vec z(2 * x.size());
  z.head(x.size()) = x.cwiseMax(0.0);
  z.tail(x.size()) = (-x).cwiseMax(0.0);
  return z;
}

}  // namespace

TEST_CASE("top_k2_norm against subset enumeration") {
  Vec v(3);
  v << 3, -1, 2;
  CHECK(top_k2_norm(v, 2) == 13.0);
  CHECK(top_k2_norm(v, 0) == 0.0);
  CHECK(top_k2_norm(v, 3) == v.squaredNorm());
  CHECK_THROWS_AS(top_k2_norm(v, 4), std::invalid_argument);
  CHECK_THROWS_AS(top_k2_norm(v, -1), std::invalid_argument);

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Vec x = random_vec(9, 100 + seed);
    for (int k : {0, 1, 3, 5, 9}) {
      CHECK(top_k2_norm(x, k) ==
            doctest::Approx(oracle::top_k2_enumerate(x, k)).epsilon(1e-13));
    }
  }
}

TEST_CASE("trim_top_k with lowest-index tie break") {
  Vec z(4);
  z << 0.5, 2, 0, 1;
  const Vec trimmed = trim_top_k(z, 2);
  CHECK(trimmed[0] == 0.0);
  CHECK(trimmed[1] == 2.0);
  CHECK(trimmed[2] == 0.0);
  CHECK(trimmed[3] == 1.0);

  CHECK(trim_top_k(z, 0).norm() == 0.0);
  CHECK(trim_top_k(z, 4) == z);

  Vec ties = Vec::Ones(3);
  const Vec kept = trim_top_k(ties, 2);
  CHECK(kept[0] == 1.0);
  CHECK(kept[1] == 1.0);
  CHECK(kept[2] == 0.0);
}

TEST_CASE("objective matches a scalar-loop evaluation") {
  const MeasurementMatrix phi = random_phi(2, 3, 5);
  TrrProblem p = make_trr_problem(phi, random_vec(2, 6), 1.0, 2);
  const Vec z = lift(random_vec(3, 7)).cwiseAbs();

  CHECK(objective(p, Vec::Zero(6)) ==
        doctest::Approx(0.5 * p.measurement.squaredNorm()).epsilon(1e-15));

  TrrProblem all = p;
  all.top_k = 6;
  const Vec r = p.a_matrix * z - p.measurement;
  CHECK(objective(all, z) == doctest::Approx(0.5 * r.squaredNorm()).epsilon(1e-13));

  CHECK(objective(p, z) ==
        doctest::Approx(oracle::objective_scalar(p.a_matrix, p.measurement,
                                                 p.rho, p.top_k, z))
            .epsilon(1e-12));

  CHECK_THROWS_AS(objective(p, Vec::Zero(5)), std::invalid_argument);
}

TEST_CASE("gradient agrees with finite differences off magnitude ties") {
  const MeasurementMatrix phi = random_phi(3, 4, 11);
  TrrProblem p = make_trr_problem(phi, random_vec(3, 12), 0.7, 3);

  // z = 0, K = 0: gradient is -A^T y
  TrrProblem k0 = p;
  k0.top_k = 0;
  CHECK((gradient(k0, Vec::Zero(8)) + p.a_matrix.transpose() * p.measurement).norm() <
        1e-14);

  // K = 2N: trim is the identity
  TrrProblem all = p;
  all.top_k = 8;
  const Vec z = lift(random_vec(4, 13)).cwiseAbs();
  CHECK((gradient(all, z) -
         p.a_matrix.transpose() * (p.a_matrix * z - p.measurement))
            .norm() < 1e-13);

  int checked = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const MeasurementMatrix mphi = random_phi(3, 4, 200 + seed);
    TrrProblem prob = make_trr_problem(mphi, random_vec(3, 300 + seed), 0.9, 2);
    Vec zz = random_vec(8, 400 + seed).cwiseAbs();
    // keep away from top-K ties so the active set is locally stable
    bool separated = true;
    Vec sorted = zz;
    std::sort(sorted.data(), sorted.data() + 8, std::greater<double>());
    for (int i = 0; i < 7; ++i) separated &= (sorted[i] - sorted[i + 1] > 1e-3);
    if (!separated) continue;
    ++checked;
    const Vec g = gradient(prob, zz);
    for (int i = 0; i < 8; ++i) {
      const double fd = oracle::central_diff(
          [&](double v) {
            Vec zp = zz;
            zp[i] = v;
            return objective(prob, zp);
          },
          zz[i], 1e-6);
      CHECK(std::abs(g[i] - fd) < 1e-5 * std::max(1.0, std::abs(fd)));
    }
  }
  CHECK(checked > 50);
}

TEST_CASE("lipschitz constant via power iteration") {
  CHECK(lipschitz_constant(Mat::Identity(5, 5)) == doctest::Approx(1.001).epsilon(1e-9));
  CHECK(lipschitz_constant(2.0 * Mat::Identity(4, 4)) ==
        doctest::Approx(4.0 * 1.001).epsilon(1e-9));
  CHECK_THROWS_AS(lipschitz_constant(Mat::Zero(3, 3)), std::invalid_argument);

  Rng rng(31);
  Mat a(8, 12);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 12; ++j) a(i, j) = rng.normal();
  const double lam = oracle::jacobi_lambda_max(a.transpose() * a);
  CHECK(lipschitz_constant(a) / 1.001 == doctest::Approx(lam).epsilon(1e-6));

  // lifted matrix doubles the spectral radius of Phi^T Phi
  const MeasurementMatrix phi = random_phi(6, 10, 77);
  const TrrProblem p = make_trr_problem(phi, Vec::Zero(6), 1.0, 0);
  const double lam_phi = oracle::jacobi_lambda_max(phi.entries.transpose() * phi.entries);
  CHECK(p.lipschitz / 1.001 == doctest::Approx(2.0 * lam_phi).epsilon(1e-6));
}

TEST_CASE("lift consistency: the split never overlaps") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Vec x = random_vec(7, 500 + seed);
    const Vec z = lift(x);
    CHECK(z.minCoeff() >= 0.0);
    CHECK(z.norm() == doctest::Approx(x.norm()).epsilon(1e-15));
    for (int k = 0; k <= 7; ++k)
      CHECK(top_k2_norm(x, k) == doctest::Approx(top_k2_norm(z, k)).epsilon(1e-13));
  }
}

TEST_CASE("itrr fixed points and monotone descent") {
  const MeasurementMatrix phi = random_phi(8, 16, 41);
  TrrProblem p = make_trr_problem(phi, Vec::Zero(8), 1.0, 4);

  SolverOptions opt;
  opt.eps = 1e-12;
  opt.max_iter = 50;
  opt.zero_init = true;
  const SolverReport at_zero = itrr(p, opt);
  CHECK(at_zero.converged);
  CHECK(at_zero.iterations_run == 1);
  CHECK(at_zero.solution.norm() == 0.0);

  // exact-sparse instance: the lift of the truth is a fixed point
  const Vec x = separated_sparse(16, 3, 42);
  const Vec y = phi.entries * x;
  for (int k : {3, 5, 16}) {
    TrrProblem ps = make_trr_problem(phi, y, 1.0, k);
    const Vec z_star = lift(x);
    const Vec step = (z_star - gradient(ps, z_star) / (ps.lipschitz + 2.0 * ps.rho))
                         .cwiseMax(0.0);
    CHECK((step - z_star).norm() < 1e-12);
  }

  // monotone descent on random noisy instances
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    TrrProblem pr = make_trr_problem(random_phi(6, 12, 600 + seed),
                                     random_vec(6, 700 + seed), 1.0, 3);
    SolverOptions o;
    o.eps = 1e-10;
    o.max_iter = 300;
    const SolverReport rep = itrr(pr, o);
    for (std::size_t t = 1; t < rep.objective_trace.size(); ++t)
      CHECK(rep.objective_trace[t] <= rep.objective_trace[t - 1] + 1e-12);
  }
}

TEST_CASE("itrr recovers a separated exact-sparse instance") {
  const MeasurementMatrix phi = random_phi(32, 64, 90);
  const Vec x = separated_sparse(64, 4, 91);
  const Vec y = phi.entries * x;
  TrrProblem p = make_trr_problem(phi, y, 1.0, 4);
  SolverOptions opt;
  opt.eps = 1e-14;
  opt.max_iter = 3000;
  opt.label = x;
  const SolverReport rep = itrr(p, opt);
  CHECK(rep.converged);
  CHECK(rep.error_trace.back() < 1e-20);
}

TEST_CASE("bb_step spectral estimates and guards") {
  const Vec z1 = random_vec(5, 800);
  const Vec z0 = random_vec(5, 801);

  // Hessian I: g = z - c, so dg = dz and alpha = 1
  CHECK(bb_step(z1, z0, z1, z0, 0.123) == doctest::Approx(1.0).epsilon(1e-14));

  // Hessian 4I
  const Vec g1 = 4.0 * z1, g0 = 4.0 * z0;
  CHECK(bb_step(z1, z0, g1, g0, 0.123) == doctest::Approx(0.25).epsilon(1e-14));

  // negative curvature falls back
  CHECK(bb_step(z1, z0, -z1, -z0, 0.123) == 0.123);

  CHECK_THROWS_AS(bb_step(z1, z1, g1, g0, 0.123), std::invalid_argument);
}

TEST_CASE("itrr_bb accelerates and matches the fixed-step solution") {
  const MeasurementMatrix phi = random_phi(32, 64, 93);
  const Vec x = separated_sparse(64, 4, 94);
  const Vec y = phi.entries * x;
  TrrProblem p = make_trr_problem(phi, y, 1.0, 4);

  SolverOptions opt;
  opt.eps = 1e-14;
  opt.max_iter = 3000;
  opt.label = x;
  const SolverReport slow = itrr(p, opt);
  const SolverReport fast = itrr_bb(p, opt);
  CHECK(fast.error_trace.back() < 1e-20);
  CHECK(fast.iterations_run < slow.iterations_run);

  // BB reaches the fixed-step solver's final objective earlier
  const double target = slow.objective_trace.back();
  std::size_t hit = fast.objective_trace.size();
  for (std::size_t t = 0; t < fast.objective_trace.size(); ++t) {
    if (fast.objective_trace[t] <= target + 1e-18) {
      hit = t;
      break;
    }
  }
  CHECK(hit < static_cast<std::size_t>(slow.iterations_run));

  SolverOptions zero_opt;
  zero_opt.zero_init = true;
  zero_opt.eps = 1e-12;
  zero_opt.max_iter = 10;
  TrrProblem p0 = make_trr_problem(phi, Vec::Zero(32), 1.0, 4);
  const SolverReport trivial = itrr_bb(p0, zero_opt);
  CHECK(trivial.converged);
  CHECK(trivial.iterations_run == 1);
}

TEST_CASE("pgd_ridge shrinks and solves") {
  // lambda2 = 0 on a square invertible system reaches Phi^{-1} y
  Mat square(4, 4);
  square << 0.5, 0.5, 0.5, 0.5,
            0.5, -0.5, 0.5, -0.5,
            0.5, 0.5, -0.5, -0.5,
            0.5, -0.5, -0.5, 0.5;  // scaled Hadamard, orthogonal
  const MeasurementMatrix phi{square};
  const Vec y = random_vec(4, 95);
  SolverOptions opt;
  opt.eps = 1e-12;
  opt.max_iter = 5000;
  const SolverReport rep = pgd_ridge(phi, y, 0.0, StepRule::bb, opt);
  CHECK((rep.solution - square.inverse() * y).norm() < 1e-8);

  const SolverReport fixed = pgd_ridge(phi, y, 0.0, StepRule::fixed, opt);
  CHECK((fixed.solution - square.inverse() * y).norm() < 1e-8);

  // heavy shrinkage
  const MeasurementMatrix phi2 = random_phi(8, 12, 96);
  const Vec y2 = random_vec(8, 97);
  const SolverReport heavy = pgd_ridge(phi2, y2, 1e6, StepRule::bb, opt);
  CHECK(heavy.solution.norm() < 1e-3 * (phi2.entries.transpose() * y2).norm());
}

TEST_CASE("pgd_lasso thresholds and solves") {
  SolverOptions opt;
  opt.eps = 1e-12;
  opt.max_iter = 5000;

  // consistent overdetermined system, lambda1 = 0: least squares
  const MeasurementMatrix phi = random_phi(12, 6, 98);
  const Vec x_true = random_vec(6, 99);
  const Vec y = phi.entries * x_true;
  const SolverReport rep = pgd_lasso(phi, y, 0.0, opt);
  const Vec ls = oracle::normal_equations_solve(phi.entries, y);
  CHECK((rep.solution - ls).norm() < 1e-6);

  // lambda1 at the zero-solution threshold
  const MeasurementMatrix phi2 = random_phi(6, 10, 100);
  const Vec y2 = random_vec(6, 101);
  const double lam_max = (2.0 * phi2.entries.transpose() * y2).cwiseAbs().maxCoeff();
  const SolverReport zero = pgd_lasso(phi2, y2, lam_max * 1.0001, opt);
  CHECK(zero.solution.norm() < 1e-9);
  const SolverReport nonzero = pgd_lasso(phi2, y2, lam_max * 0.5, opt);
  CHECK(nonzero.solution.norm() > 1e-6);
}

TEST_CASE("omp recovers well-separated supports") {
  const MeasurementMatrix phi = random_phi(64, 128, 102);

  // single scaled column
  const Vec y1 = 2.0 * phi.entries.col(3);
  const Vec x1 = omp(phi, y1, 1);
  CHECK(x1[3] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK((phi.entries * x1 - y1).norm() < 1e-12);
  for (int j = 0; j < 128; ++j)
    if (j != 3) CHECK(x1[j] == 0.0);

  CHECK(omp(phi, Vec::Zero(64), 4).norm() == 0.0);

  const Vec x = separated_sparse(128, 4, 103);
  const Vec y = phi.entries * x;
  const Vec rec = omp(phi, y, 4);
  CHECK((rec - x).norm() < 1e-8);

  CHECK_THROWS_AS(omp(phi, y, 0), std::invalid_argument);
  CHECK_THROWS_AS(omp(phi, y, 65), std::invalid_argument);
  CHECK_THROWS_AS(omp(phi, Vec::Zero(63), 4), std::invalid_argument);
}
