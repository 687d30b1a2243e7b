#pragma once

#include <Eigen/Dense>

#include "trr/rng.hpp"

namespace trr {

using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;

// One multipath realization: physical angles, spatial directions and
// complex gains. Antenna spacing is fixed at half a wavelength, so
// direction = sin(angle) / 2.
struct PathSet {
  CVec gains;       // beta, one per path
  Vec directions;   // phi in [-1/2, 1/2]
  Vec angles;       // theta in [-pi/2, pi/2]

  int n_paths() const { return static_cast<int>(gains.size()); }
};

/// Uniform-linear-array steering vector; entry m is exp(-j 2 pi phi m) / sqrt(N).
CVec steering_vector(double direction, int n_antennas);

/// Draw n_paths angles uniform on [-pi/2, pi/2] and unit-variance complex
/// Gaussian gains (the line-of-sight gain uses the same distribution).
PathSet sample_paths(int n_paths, Rng& rng);

/// Superpose steering vectors: h = sqrt(N / N_p) * sum_l beta_l a(phi_l).
CVec synthesize_channel(const PathSet& paths, int n_antennas);

/// Unitary beamspace transform; row i is the conjugated steering vector at
/// the grid direction (i - (N+1)/2) / N, i = 1..N.
CMat dft_matrix(int n_antennas);

/// h_b = U h. Energy preserving since U is unitary.
CVec to_beamspace(const CVec& h, const CMat& u);

/// Scale to unit l2 norm. Zero input is rejected.
CVec normalize_channel(const CVec& h_b);

/// Keep the n_keep largest-magnitude entries, zero the rest. Ties resolve
/// to the lowest index.
CVec sparsify_top(const CVec& h_b, int n_keep);

}  // namespace trr
