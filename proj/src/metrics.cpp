#include "trr/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace trr {

namespace {

template <class V>
double nse_impl(const V& x, const V& x_hat) {
  if (x.size() != x_hat.size())
    throw std::invalid_argument("normalized_sq_error: shape mismatch");
  const double denom = x.squaredNorm();
  if (denom == 0.0) throw std::invalid_argument("normalized_sq_error: zero truth");
  return (x - x_hat).squaredNorm() / denom;
}

}  // namespace

double normalized_sq_error(const CVec& x, const CVec& x_hat) {
  return nse_impl(x, x_hat);
}

double normalized_sq_error(const Vec& x, const Vec& x_hat) {
  return nse_impl(x, x_hat);
}

double nmse_db(const std::vector<CVec>& truth, const std::vector<CVec>& estimate) {
  if (truth.empty() || truth.size() != estimate.size())
    throw std::invalid_argument("nmse_db: shape mismatch");
  double mean = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i)
    mean += normalized_sq_error(truth[i], estimate[i]);
  mean /= static_cast<double>(truth.size());
  if (mean <= 0.0) return kNmseFloorDb;
  return std::max(kNmseFloorDb, 10.0 * std::log10(mean));
}

double accurate_ratio(const std::vector<double>& errors, double threshold) {
  if (errors.empty()) throw std::invalid_argument("accurate_ratio: empty list");
  if (threshold <= 0.0) throw std::invalid_argument("accurate_ratio: threshold must be > 0");
  std::size_t hits = 0;
  for (double e : errors)
    if (e < threshold) ++hits;
  return static_cast<double>(hits) / static_cast<double>(errors.size());
}

Precoder zf_precoder(const MultiUserChannel& h_est) {
  const Eigen::Index n = h_est.rows();
  const Eigen::Index users = h_est.cols();
  if (users < 1 || n < users)
    throw std::invalid_argument("zf_precoder: need N >= U >= 1");
  const CMat gram = h_est.adjoint() * h_est;
  Eigen::SelfAdjointEigenSolver<CMat> eig(gram);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (lo <= 0.0 || hi / lo >= 1e12)
    throw std::runtime_error("zf_precoder: Gram matrix is ill-conditioned");
  CMat f_tilde = h_est * gram.llt().solve(CMat::Identity(users, users));
  Precoder p;
  p.unnormalized_frobenius = f_tilde.norm();
  p.columns = f_tilde / p.unnormalized_frobenius;
  return p;
}

double sum_rate(const MultiUserChannel& h_true, const Precoder& f,
                double snr_dl_db) {
  if (h_true.rows() != f.columns.rows() || h_true.cols() != f.columns.cols())
    throw std::invalid_argument("sum_rate: dimension mismatch");
  const double inv_snr = std::pow(10.0, -snr_dl_db / 10.0);
  const Eigen::Index users = h_true.cols();
  // |h_u^H f_i|^2 for all pairs in one product
  const CMat cross = h_true.adjoint() * f.columns;
  double rate = 0.0;
  for (Eigen::Index u = 0; u < users; ++u) {
    const double signal = std::norm(cross(u, u));
    double interference = 0.0;
    for (Eigen::Index i = 0; i < users; ++i)
      if (i != u) interference += std::norm(cross(u, i));
    rate += std::log2(1.0 + signal / (interference + inv_snr));
  }
  return rate;
}

}  // namespace trr
