#pragma once

#include <optional>
#include <vector>

#include "trr/channel.hpp"
#include "trr/config.hpp"

namespace trr {

// M x N compression operator with entries exactly +-1/sqrt(M).
struct MeasurementMatrix {
  Mat entries;

  int m_rows() const { return static_cast<int>(entries.rows()); }
  int n_cols() const { return static_cast<int>(entries.cols()); }
};

// Noisy complex pilot observation z = Phi h_b + n.
struct ComplexObservation {
  CVec measurements;
  std::optional<double> snr_db;  // nullopt = noiseless
  double noise_var = 0.0;        // per complex entry
};

enum class Part { real, imag };

// One real-valued supervised sample of the split system y = Phi x + n.
struct RealPair {
  Vec measurement;  // y, length M
  Vec label;        // x, length N
  Part part = Part::real;
};

enum class Split { train, val, test };

struct Dataset {
  std::vector<RealPair> pairs;
  MeasurementMatrix phi;
  std::optional<double> snr_db;
  Split split = Split::train;
};

MeasurementMatrix bernoulli_matrix(int m_rows, int n_cols, Rng& rng);

/// z = Phi h_b + n with per-sample noise calibration
/// sigma^2 = ||Phi h_b||^2 / (M * 10^(snr_db/10)); nullopt snr means n = 0.
ComplexObservation observe(const MeasurementMatrix& phi, const CVec& h_b,
                           std::optional<double> snr_db, Rng& rng);

/// (Re z, Re h_b) and (Im z, Im h_b) as two independent real systems.
std::pair<RealPair, RealPair> split_real(const ComplexObservation& z,
                                         const CVec& h_b);

CVec merge_complex(const Vec& x_re, const Vec& x_im);

// Three splits sharing one measurement matrix; channels are generated,
// normalized, optionally sparsified, then observed at cfg.snr_db. Noise is
// baked into the stored measurements.
struct DatasetBundle {
  Dataset train;
  Dataset val;
  Dataset test;
};

/// Pure function of (cfg, master_seed); per-sample seeds keep the result
/// independent of generation order.
DatasetBundle build_dataset(const ExperimentConfig& cfg, std::uint64_t master_seed);

}  // namespace trr
