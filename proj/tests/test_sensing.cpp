#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "trr/sensing.hpp"

using namespace trr;

TEST_CASE("bernoulli matrix entries are exactly +-1/sqrt(M)") {
  Rng rng(3);
  const MeasurementMatrix phi = bernoulli_matrix(4, 8, rng);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 8; ++j)
      CHECK((phi.entries(i, j) == 0.5 || phi.entries(i, j) == -0.5));

  Rng a(19), b(19);
  CHECK(bernoulli_matrix(6, 5, a).entries == bernoulli_matrix(6, 5, b).entries);

  CHECK_THROWS_AS(bernoulli_matrix(0, 3, rng), std::invalid_argument);

  // sign balance over 1e6 draws
  Rng mc(101);
  const MeasurementMatrix big = bernoulli_matrix(1000, 1000, mc);
  const double frac_pos =
      (big.entries.array() > 0).cast<double>().sum() / big.entries.size();
  CHECK(frac_pos == doctest::Approx(0.5).epsilon(0.004));
}

TEST_CASE("observe calibrates the noise to the per-sample SNR") {
  Rng rng(7);
  const MeasurementMatrix phi = bernoulli_matrix(128, 256, rng);
  CVec h = CVec::Zero(256);
  h[10] = std::complex<double>(0.6, -0.2);
  h[77] = std::complex<double>(-0.3, 0.7);

  const ComplexObservation clean = observe(phi, h, std::nullopt, rng);
  CHECK((clean.measurements - phi.entries * h).norm() == 0.0);
  CHECK(clean.noise_var == 0.0);

  CHECK(observe(phi, CVec::Zero(256), std::nullopt, rng).measurements.norm() == 0.0);

  CHECK_THROWS_AS(observe(phi, CVec::Zero(9), std::nullopt, rng), std::invalid_argument);

  // sigma^2 = ||Phi h||^2 / (M snr) exactly
  Rng nrng(15);
  const ComplexObservation noisy = observe(phi, h, 10.0, nrng);
  const double signal = (phi.entries * h).squaredNorm();
  CHECK(noisy.noise_var == signal / (128 * 10.0));

  // empirical SNR over 1e4 redraws
  Rng mc(999);
  double acc = 0.0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    const ComplexObservation obs = observe(phi, h, 10.0, mc);
    acc += signal / (obs.measurements - phi.entries * h).squaredNorm();
  }
  CHECK(acc / draws == doctest::Approx(10.0).epsilon(0.03));
}

TEST_CASE("split and merge round-trip the complex system") {
  Rng rng(21);
  const MeasurementMatrix phi = bernoulli_matrix(8, 16, rng);
  CVec h(16);
  for (int i = 0; i < 16; ++i) h[i] = rng.cnormal();

  const ComplexObservation obs = observe(phi, h, std::nullopt, rng);
  const auto [re, im] = split_real(obs, h);
  CHECK(re.part == Part::real);
  CHECK(im.part == Part::imag);
  CHECK((re.measurement - phi.entries * re.label).norm() < 1e-12);
  CHECK((im.measurement - phi.entries * im.label).norm() < 1e-12);
  CHECK((merge_complex(re.label, im.label) - h).norm() == 0.0);

  // real-valued channel: imaginary pair is identically zero
  const CVec h_real = h.real().cast<std::complex<double>>();
  const auto [re2, im2] = split_real(observe(phi, h_real, std::nullopt, rng), h_real);
  CHECK(im2.measurement.norm() == 0.0);
  CHECK(im2.label.norm() == 0.0);

  const Vec x = Vec::LinSpaced(4, 0.0, 3.0);
  CHECK(merge_complex(x, Vec::Zero(4)).imag().norm() == 0.0);
  CHECK(merge_complex(Vec::Zero(4), x).real().norm() == 0.0);
  CHECK_THROWS_AS(merge_complex(x, Vec::Zero(5)), std::invalid_argument);
}

TEST_CASE("build_dataset is a pure function of config and seed") {
  ExperimentConfig cfg;
  cfg.n_antennas = 16;
  cfg.n_measurements = 8;
  cfg.train_channels = 10;
  cfg.val_channels = 2;
  cfg.test_channels = 3;
  cfg.snr_db = 20.0;

  const DatasetBundle a = build_dataset(cfg, 12345);
  CHECK(a.train.pairs.size() == 20);
  CHECK(a.val.pairs.size() == 4);
  CHECK(a.test.pairs.size() == 6);

  const DatasetBundle b = build_dataset(cfg, 12345);
  CHECK(a.train.phi.entries == b.train.phi.entries);
  for (std::size_t i = 0; i < a.train.pairs.size(); ++i) {
    CHECK(a.train.pairs[i].measurement == b.train.pairs[i].measurement);
    CHECK(a.train.pairs[i].label == b.train.pairs[i].label);
  }

  // splits draw from disjoint seed streams
  CHECK(a.train.pairs[0].label != a.val.pairs[0].label);
  CHECK(a.val.pairs[0].label != a.test.pairs[0].label);

  // pairs come in (re, im) order per channel, unit-norm channels
  const CVec merged = merge_complex(a.test.pairs[0].label, a.test.pairs[1].label);
  CHECK(merged.norm() == doctest::Approx(1.0).epsilon(1e-12));

  // a different seed changes the data
  const DatasetBundle c = build_dataset(cfg, 54321);
  CHECK(a.train.pairs[0].label != c.train.pairs[0].label);

  // sparsified variant keeps exactly S nonzeros per channel
  ExperimentConfig scfg = cfg;
  scfg.sparsity = 4;
  const DatasetBundle s = build_dataset(scfg, 7);
  const CVec sparse = merge_complex(s.test.pairs[0].label, s.test.pairs[1].label);
  int nnz = 0;
  for (int i = 0; i < sparse.size(); ++i)
    if (std::abs(sparse[i]) > 0) ++nnz;
  CHECK(nnz == 4);
}
