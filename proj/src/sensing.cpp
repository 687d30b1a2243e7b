#include "trr/sensing.hpp"

#include <cmath>
#include <stdexcept>

namespace trr {

namespace {

// seed streams of the master seed
constexpr std::uint64_t kPhiStream = 0;
constexpr std::uint64_t kSplitStreamBase = 1;  // +0 train, +1 val, +2 test

}  // namespace

MeasurementMatrix bernoulli_matrix(int m_rows, int n_cols, Rng& rng) {
  if (m_rows < 1 || n_cols < 1)
    throw std::invalid_argument("bernoulli_matrix: dimensions must be >= 1");
  const double mag = 1.0 / std::sqrt(static_cast<double>(m_rows));
  Mat phi(m_rows, n_cols);
  // row-major fill so the draw order is independent of Eigen's storage
  for (int i = 0; i < m_rows; ++i)
    for (int j = 0; j < n_cols; ++j) phi(i, j) = rng.coin() ? mag : -mag;
  return MeasurementMatrix{std::move(phi)};
}

ComplexObservation observe(const MeasurementMatrix& phi, const CVec& h_b,
                           std::optional<double> snr_db, Rng& rng) {
  if (phi.n_cols() != h_b.size())
    throw std::invalid_argument("observe: dimension mismatch");
  ComplexObservation obs;
  obs.snr_db = snr_db;
  obs.measurements = phi.entries * h_b;
  if (!snr_db) return obs;
  if (!std::isfinite(*snr_db))
    throw std::invalid_argument("observe: snr_db must be finite");
  const double signal = obs.measurements.squaredNorm();
  const double snr_lin = std::pow(10.0, *snr_db / 10.0);
  obs.noise_var = signal / (phi.m_rows() * snr_lin);
  const double scale = std::sqrt(obs.noise_var);
  for (Eigen::Index m = 0; m < obs.measurements.size(); ++m)
    obs.measurements[m] += scale * rng.cnormal();
  return obs;
}

std::pair<RealPair, RealPair> split_real(const ComplexObservation& z,
                                         const CVec& h_b) {
  RealPair re{z.measurements.real(), h_b.real(), Part::real};
  RealPair im{z.measurements.imag(), h_b.imag(), Part::imag};
  return {std::move(re), std::move(im)};
}

CVec merge_complex(const Vec& x_re, const Vec& x_im) {
  if (x_re.size() != x_im.size())
    throw std::invalid_argument("merge_complex: length mismatch");
  CVec h(x_re.size());
  h.real() = x_re;
  h.imag() = x_im;
  return h;
}

DatasetBundle build_dataset(const ExperimentConfig& cfg, std::uint64_t master_seed) {
  validate_config(cfg);
  Rng phi_rng(derive_seed(master_seed, kPhiStream));
  MeasurementMatrix phi =
      bernoulli_matrix(cfg.n_measurements, cfg.n_antennas, phi_rng);
  const CMat u = dft_matrix(cfg.n_antennas);

  auto make_split = [&](Split split, int n_channels,
                        std::uint64_t split_stream) {
    Dataset ds;
    ds.phi = phi;
    ds.snr_db = cfg.snr_db;
    ds.split = split;
    ds.pairs.resize(2 * static_cast<std::size_t>(n_channels));
    const std::uint64_t split_seed = derive_seed(master_seed, split_stream);
    for (int i = 0; i < n_channels; ++i) {
      Rng rng(derive_seed(split_seed, static_cast<std::uint64_t>(i)));
      PathSet paths = sample_paths(cfg.n_paths, rng);
      CVec h_b = normalize_channel(to_beamspace(
          synthesize_channel(paths, cfg.n_antennas), u));
      if (cfg.sparsity > 0) h_b = sparsify_top(h_b, cfg.sparsity);
      ComplexObservation obs = observe(phi, h_b, cfg.snr_db, rng);
      auto [re, im] = split_real(obs, h_b);
      ds.pairs[2 * i] = std::move(re);
      ds.pairs[2 * i + 1] = std::move(im);
    }
    return ds;
  };

  DatasetBundle bundle;
  bundle.train = make_split(Split::train, cfg.train_channels, kSplitStreamBase);
  bundle.val = make_split(Split::val, cfg.val_channels, kSplitStreamBase + 1);
  bundle.test = make_split(Split::test, cfg.test_channels, kSplitStreamBase + 2);
  return bundle;
}

}  // namespace trr
