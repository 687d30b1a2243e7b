#include "trr/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace trr {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

CVec steering_vector(double direction, int n_antennas) {
  if (n_antennas < 1) throw std::invalid_argument("steering_vector: N must be >= 1");
  CVec a(n_antennas);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n_antennas));
  for (int m = 0; m < n_antennas; ++m) {
    const double phase = -2.0 * kPi * direction * m;
    a[m] = scale * std::complex<double>(std::cos(phase), std::sin(phase));
  }
  return a;
}

PathSet sample_paths(int n_paths, Rng& rng) {
  if (n_paths < 1) throw std::invalid_argument("sample_paths: N_p must be >= 1");
  PathSet p;
  p.gains.resize(n_paths);
  p.directions.resize(n_paths);
  p.angles.resize(n_paths);
  for (int l = 0; l < n_paths; ++l) {
    p.angles[l] = rng.uniform(-kPi / 2.0, kPi / 2.0);
    p.directions[l] = 0.5 * std::sin(p.angles[l]);
    p.gains[l] = rng.cnormal();
  }
  return p;
}

CVec synthesize_channel(const PathSet& paths, int n_antennas) {
  CVec h = CVec::Zero(n_antennas);
  for (int l = 0; l < paths.n_paths(); ++l)
    h += paths.gains[l] * steering_vector(paths.directions[l], n_antennas);
  h *= std::sqrt(static_cast<double>(n_antennas) / paths.n_paths());
  return h;
}

CMat dft_matrix(int n_antennas) {
  if (n_antennas < 1) throw std::invalid_argument("dft_matrix: N must be >= 1");
  const int n = n_antennas;
  CMat u(n, n);
  for (int i = 1; i <= n; ++i) {
    const double phi = (i - (n + 1) / 2.0) / n;
    u.row(i - 1) = steering_vector(phi, n).conjugate().transpose();
  }
  return u;
}

CVec to_beamspace(const CVec& h, const CMat& u) {
  if (u.cols() != h.size())
    throw std::invalid_argument("to_beamspace: dimension mismatch");
  return u * h;
}

CVec normalize_channel(const CVec& h_b) {
  const double norm = h_b.norm();
  if (norm == 0.0) throw std::invalid_argument("normalize_channel: zero input");
  return h_b / norm;
}

CVec sparsify_top(const CVec& h_b, int n_keep) {
  const int n = static_cast<int>(h_b.size());
  if (n_keep < 0 || n_keep > n)
    throw std::invalid_argument("sparsify_top: n_keep out of range");
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::partial_sort(idx.begin(), idx.begin() + n_keep, idx.end(),
                    [&](int a, int b) {
                      const double ma = std::abs(h_b[a]), mb = std::abs(h_b[b]);
                      if (ma != mb) return ma > mb;
                      return a < b;
                    });
  CVec out = CVec::Zero(n);
  for (int k = 0; k < n_keep; ++k) out[idx[k]] = h_b[idx[k]];
  return out;
}

}  // namespace trr
