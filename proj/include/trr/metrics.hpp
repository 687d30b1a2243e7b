#pragma once

#include <vector>

#include "trr/channel.hpp"

namespace trr {

// Columns are per-user beamspace channels.
using MultiUserChannel = CMat;

struct Precoder {
  CMat columns;  // N x U, Frobenius-normalized
  double unnormalized_frobenius = 0.0;
};

inline constexpr double kNmseFloorDb = -300.0;

/// ||x - x_hat||^2 / ||x||^2
double normalized_sq_error(const CVec& x, const CVec& x_hat);
double normalized_sq_error(const Vec& x, const Vec& x_hat);

/// 10 log10 of the mean per-sample normalized squared error, floored at
/// -300 dB so exact reconstructions stay finite.
double nmse_db(const std::vector<CVec>& truth, const std::vector<CVec>& estimate);

/// Fraction of errors strictly below the threshold.
double accurate_ratio(const std::vector<double>& errors, double threshold);

/// Zero-forcing: F = H (H^H H)^{-1}, then Frobenius-normalized so the
/// total transmit power is one. Rejects Gram matrices with condition
/// number at or above 1e12.
Precoder zf_precoder(const MultiUserChannel& h_est);

/// Sum over users of log2(1 + |h_u^H f_u|^2 / (sum_{i != u} |h_u^H f_i|^2
/// + 1/snr)), snr linear from dB.
double sum_rate(const MultiUserChannel& h_true, const Precoder& f,
                double snr_dl_db);

}  // namespace trr
