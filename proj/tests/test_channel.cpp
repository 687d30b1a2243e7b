#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "trr/channel.hpp"

using namespace trr;

TEST_CASE("steering vector matches hand-evaluated phases") {
  CHECK(steering_vector(0.37, 1)[0] == std::complex<double>(1.0, 0.0));

  const CVec flat = steering_vector(0.0, 4);
  for (int m = 0; m < 4; ++m) {
    CHECK(flat[m].real() == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(flat[m].imag() == doctest::Approx(0.0).epsilon(1e-15));
  }

  // phi = 1/4: phases step by -pi/2, entries (1/2)[1, -j, -1, j]
  const CVec q = steering_vector(0.25, 4);
  const std::complex<double> expected[] = {{0.5, 0.0}, {0.0, -0.5}, {-0.5, 0.0}, {0.0, 0.5}};
  for (int m = 0; m < 4; ++m) {
    CHECK(std::abs(q[m] - expected[m]) < 1e-14);
  }
  CHECK(q.norm() == doctest::Approx(1.0).epsilon(1e-14));

  CHECK_THROWS_AS(steering_vector(0.1, 0), std::invalid_argument);
}

TEST_CASE("sample_paths is deterministic and correctly distributed") {
  Rng a(77), b(77);
  const PathSet pa = sample_paths(3, a);
  const PathSet pb = sample_paths(3, b);
  CHECK(pa.gains == pb.gains);
  CHECK(pa.angles == pb.angles);
  CHECK(pa.directions == pb.directions);

  Rng c(5);
  CHECK(sample_paths(1, c).n_paths() == 1);
  CHECK_THROWS_AS(sample_paths(0, c), std::invalid_argument);

  for (int l = 0; l < 3; ++l) {
    CHECK(pa.directions[l] == 0.5 * std::sin(pa.angles[l]));
    CHECK(std::abs(pa.angles[l]) <= 1.5707963267948966);
  }

  // unit-variance convention: mean |beta|^2 over 1e5 draws
  Rng mc(123);
  double acc = 0.0;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) acc += std::norm(mc.cnormal());
  CHECK(acc / draws == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("synthesize_channel superposes scaled steering vectors") {
  PathSet single;
  single.gains = CVec::Ones(1);
  single.directions = Vec::Zero(1);
  single.angles = Vec::Zero(1);
  const CVec h = synthesize_channel(single, 4);
  for (int m = 0; m < 4; ++m) CHECK(std::abs(h[m] - 1.0) < 1e-14);

  PathSet silent;
  silent.gains = CVec::Zero(2);
  silent.directions = Vec::LinSpaced(2, -0.3, 0.3);
  silent.angles = Vec::Zero(2);
  CHECK(synthesize_channel(silent, 8).norm() == 0.0);

  // linearity in the gains
  Rng rng(9);
  PathSet two = sample_paths(2, rng);
  PathSet first = two, second = two;
  first.gains[1] = 0.0;
  second.gains[0] = 0.0;
  const CVec sum = synthesize_channel(first, 16) + synthesize_channel(second, 16);
  CHECK((synthesize_channel(two, 16) - sum).norm() < 1e-14);
}

TEST_CASE("dft matrix rows are conjugated steering vectors on the grid") {
  const CMat u1 = dft_matrix(1);
  CHECK(std::abs(u1(0, 0) - 1.0) < 1e-15);

  for (int n : {1, 2, 4, 8, 16, 64, 256}) {
    const CMat u = dft_matrix(n);
    const CMat gram = u * u.adjoint();
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        worst = std::max(worst, std::abs(gram(i, j) - (i == j ? 1.0 : 0.0)));
    CHECK(worst < 1e-12);
  }

  const CMat u2 = dft_matrix(2);
  const CVec lo = steering_vector(-0.25, 2).conjugate();
  const CVec hi = steering_vector(0.25, 2).conjugate();
  CHECK((u2.row(0).transpose() - lo).norm() < 1e-15);
  CHECK((u2.row(1).transpose() - hi).norm() < 1e-15);
}

TEST_CASE("beamspace transform is unitary in practice") {
  const int n = 32;
  const CMat u = dft_matrix(n);
  CVec e3 = CVec::Zero(n);
  e3[3] = 1.0;
  CHECK((to_beamspace(u.adjoint() * e3, u) - e3).norm() < 1e-12);

  CHECK(to_beamspace(CVec::Zero(n), u).norm() == 0.0);

  Rng rng(4);
  CVec h(n);
  for (int i = 0; i < n; ++i) h[i] = rng.cnormal();
  const CVec hb = to_beamspace(h, u);
  CHECK(std::abs(hb.norm() - h.norm()) < 1e-10 * h.norm());
  CHECK((u.adjoint() * hb - h).norm() < 1e-10 * h.norm());

  CHECK_THROWS_AS(to_beamspace(CVec::Zero(n + 1), u), std::invalid_argument);
}

TEST_CASE("normalize_channel") {
  CVec v(2);
  v << std::complex<double>(3, 0), std::complex<double>(0, 4);
  const CVec unit = normalize_channel(v);
  CHECK(std::abs(unit[0] - std::complex<double>(0.6, 0.0)) < 1e-15);
  CHECK(std::abs(unit[1] - std::complex<double>(0.0, 0.8)) < 1e-15);

  CHECK((normalize_channel(unit) - unit).norm() < 1e-15);
  CHECK((normalize_channel(17.0 * v) - unit).norm() < 1e-14);
  CHECK_THROWS_AS(normalize_channel(CVec::Zero(5)), std::invalid_argument);
}

TEST_CASE("sparsify_top keeps the largest magnitudes") {
  Rng rng(11);
  CVec h(6);
  for (int i = 0; i < 6; ++i) h[i] = rng.cnormal();
  CHECK((sparsify_top(h, 6) - h).norm() == 0.0);
  CHECK(sparsify_top(h, 0).norm() == 0.0);

  CVec v(4);
  v << 1.0, -5.0, 2.0, 0.1;
  const CVec kept = sparsify_top(v, 2);
  CHECK(kept[0] == std::complex<double>(0, 0));
  CHECK(kept[1] == std::complex<double>(-5, 0));
  CHECK(kept[2] == std::complex<double>(2, 0));
  CHECK(kept[3] == std::complex<double>(0, 0));

  // ties resolve to the lowest index
  CVec ties = CVec::Ones(4);
  const CVec kept2 = sparsify_top(ties, 2);
  CHECK(kept2[0] == std::complex<double>(1, 0));
  CHECK(kept2[1] == std::complex<double>(1, 0));
  CHECK(kept2[2] == std::complex<double>(0, 0));

  // idempotence
  for (int s : {0, 1, 3, 5}) {
    const CVec once = sparsify_top(h, s);
    CHECK((sparsify_top(once, s) - once).norm() == 0.0);
  }

  CHECK_THROWS_AS(sparsify_top(v, 5), std::invalid_argument);
  CHECK_THROWS_AS(sparsify_top(v, -1), std::invalid_argument);
}
