#include "trr/network.hpp"

#include <cmath>
#include <stdexcept>

#include "trr/solvers.hpp"

namespace trr {

std::int64_t UtrrParams::parameter_count() const {
  return static_cast<std::int64_t>(n_layers()) *
         (2LL * m_rows() * n_cols() + 2);
}

UtrrParams init_params(const MeasurementMatrix& phi, int n_layers, int top_k) {
  if (n_layers < 1) throw std::invalid_argument("init_params: L must be >= 1");
  if (top_k < 0 || top_k > 2 * phi.n_cols())
    throw std::invalid_argument("init_params: top_k out of range");
  UtrrParams params;
  params.phi = phi.entries;
  params.top_k_last = top_k;
  Mat a(phi.m_rows(), 2 * phi.n_cols());
  a << phi.entries, -phi.entries;
  params.layers.assign(n_layers, UtrrLayer{a, 1.0, 0.1});
  return params;
}

namespace {

int layer_top_k(const UtrrParams& params, int t) {
  if (params.top_k_all_layers) return params.top_k_last;
  return t == params.n_layers() - 1 ? params.top_k_last : 0;
}

// 0/1 mask of the per-column trimmed-in entries.
Mat keep_mask(const Mat& z, int k) {
  Mat mask = Mat::Zero(z.rows(), z.cols());
  for (Eigen::Index b = 0; b < z.cols(); ++b) {
    const Vec col = z.col(b);
    for (int i : top_k_indices(col, k)) mask(i, b) = 1.0;
  }
  return mask;
}

}  // namespace

Mat forward_batch(const UtrrParams& params, const Mat& y_batch,
                  ForwardTrace* trace) {
  if (params.phi.size() == 0)
    throw std::invalid_argument("forward: params.phi is not set");
  if (y_batch.rows() != params.m_rows())
    throw std::invalid_argument("forward: measurement dimension mismatch");
  const int n = params.n_cols();
  const int n_lift = 2 * n;
  const Eigen::Index batch = y_batch.cols();
  const int n_layers = params.n_layers();

  if (trace) {
    trace->z.assign(n_layers + 1, Mat());
    trace->grad_f.assign(n_layers, Mat());
    trace->residual.assign(n_layers, Mat());
    trace->relu_mask.assign(n_layers, Mat());
    trace->keep_mask.assign(n_layers, Mat());
  }

  const Mat x0 = params.phi.transpose() * y_batch;
  Mat z(n_lift, batch);
  z.topRows(n) = x0.cwiseMax(0.0);
  z.bottomRows(n) = (-x0).cwiseMax(0.0);

  for (int t = 0; t < n_layers; ++t) {
    const UtrrLayer& layer = params.layers[t];
    const int k = layer_top_k(params, t);
    const Mat residual = layer.a_matrix * z - y_batch;
    Mat g = layer.a_matrix.transpose() * residual;
    Mat keep;
    if (k > 0) {
      keep = keep_mask(z, k);
      g += layer.rho * (z - keep.cwiseProduct(z));
    } else {
      g += layer.rho * z;
    }
    const Mat pre = z - layer.alpha * g;
    const Mat relu = (pre.array() > 0.0).cast<double>().matrix();
    const Mat w = pre.cwiseProduct(relu);
    if (trace) {
      trace->z[t] = z;
      trace->grad_f[t] = std::move(g);
      trace->residual[t] = residual;
      trace->relu_mask[t] = relu;
      trace->keep_mask[t] = std::move(keep);
    }
    z = 0.5 * (w + z);
  }
  if (trace) trace->z[n_layers] = z;
  return z.topRows(n) - z.bottomRows(n);
}

Vec forward(const UtrrParams& params, const Vec& y) {
  return forward_batch(params, y, nullptr).col(0);
}

double loss(const Mat& x_hat_batch, const Mat& x_batch) {
  if (x_hat_batch.rows() != x_batch.rows() || x_hat_batch.cols() != x_batch.cols())
    throw std::invalid_argument("loss: shape mismatch");
  if (x_batch.cols() == 0) throw std::invalid_argument("loss: empty batch");
  return (x_hat_batch - x_batch).squaredNorm() / x_batch.cols();
}

Gradients backward(const UtrrParams& params, const ForwardTrace& trace,
                   const Mat& y_batch, const Mat& x_batch) {
  const int n_layers = params.n_layers();
  const int n = params.n_cols();
  const Eigen::Index batch = y_batch.cols();
  if (static_cast<int>(trace.z.size()) != n_layers + 1 ||
      trace.z.empty() || trace.z[0].cols() != batch)
    throw std::invalid_argument("backward: trace does not match this batch");

  Gradients grads;
  grads.d_a.assign(n_layers, Mat());
  grads.d_rho.assign(n_layers, 0.0);
  grads.d_alpha.assign(n_layers, 0.0);

  const Mat x_hat = trace.z[n_layers].topRows(n) - trace.z[n_layers].bottomRows(n);
  const Mat d_x_hat = (2.0 / batch) * (x_hat - x_batch);
  Mat d_z(2 * n, batch);
  d_z.topRows(n) = d_x_hat;
  d_z.bottomRows(n) = -d_x_hat;

  for (int t = n_layers - 1; t >= 0; --t) {
    const UtrrLayer& layer = params.layers[t];
    const Mat& z = trace.z[t];
    const Mat d_pre = (0.5 * d_z).cwiseProduct(trace.relu_mask[t]);
    grads.d_alpha[t] = -d_pre.cwiseProduct(trace.grad_f[t]).sum();
    const Mat d_g = -layer.alpha * d_pre;

    Mat untrimmed;  // z - trim(z), the rho-weighted term
    Mat d_g_untrimmed;
    if (trace.keep_mask[t].size() > 0) {
      untrimmed = z - trace.keep_mask[t].cwiseProduct(z);
      d_g_untrimmed = d_g - trace.keep_mask[t].cwiseProduct(d_g);
    } else {
      untrimmed = z;
      d_g_untrimmed = d_g;
    }
    grads.d_rho[t] = d_g.cwiseProduct(untrimmed).sum();
    grads.d_a[t] = (layer.a_matrix * d_g) * z.transpose() +
                   trace.residual[t] * d_g.transpose();
    d_z = 0.5 * d_z + d_pre +
          layer.a_matrix.transpose() * (layer.a_matrix * d_g) +
          layer.rho * d_g_untrimmed;
  }
  return grads;
}

void sgd_update(UtrrParams& params, const Gradients& grads, double lr) {
  if (lr <= 0.0) throw std::invalid_argument("sgd_update: lr must be > 0");
  if (static_cast<int>(grads.d_a.size()) != params.n_layers())
    throw std::invalid_argument("sgd_update: gradient/layer count mismatch");
  for (int t = 0; t < params.n_layers(); ++t) {
    params.layers[t].a_matrix -= lr * grads.d_a[t];
    params.layers[t].rho -= lr * grads.d_rho[t];
    params.layers[t].alpha -= lr * grads.d_alpha[t];
  }
}

namespace {

// (Y, X) column matrices from a dataset split
std::pair<Mat, Mat> stack_pairs(const Dataset& ds) {
  if (ds.pairs.empty()) throw std::invalid_argument("train: empty dataset");
  const Eigen::Index m = ds.pairs.front().measurement.size();
  const Eigen::Index n = ds.pairs.front().label.size();
  Mat y(m, ds.pairs.size()), x(n, ds.pairs.size());
  for (std::size_t i = 0; i < ds.pairs.size(); ++i) {
    y.col(i) = ds.pairs[i].measurement;
    x.col(i) = ds.pairs[i].label;
  }
  return {std::move(y), std::move(x)};
}

}  // namespace

std::pair<UtrrParams, TrainHistory> train(UtrrParams params,
                                          const Dataset& train_set,
                                          const Dataset& val_set,
                                          const TrainConfig& cfg) {
  if (cfg.batch_size < 1 || cfg.patience < 1 || cfg.max_epochs < 1 ||
      cfg.learning_rates.empty())
    throw std::invalid_argument("train: invalid TrainConfig");
  const auto [y_train, x_train] = stack_pairs(train_set);
  const auto [y_val, x_val] = stack_pairs(val_set);
  const Eigen::Index n_samples = y_train.cols();
  const int n_stages = static_cast<int>(cfg.learning_rates.size());

  TrainHistory history;
  UtrrParams best = params;
  history.best_val_loss = std::numeric_limits<double>::infinity();
  int epochs_since_best = 0;

  std::vector<Eigen::Index> order(n_samples);
  for (Eigen::Index i = 0; i < n_samples; ++i) order[i] = i;

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    const int stage = std::min<int>(
        n_stages - 1, static_cast<int>((static_cast<std::int64_t>(epoch) * n_stages) /
                                       cfg.max_epochs));
    const double lr = cfg.learning_rates[stage];

    // seeded Fisher-Yates, independent per epoch
    Rng shuffle_rng(derive_seed(cfg.seed, 0xE90C + static_cast<std::uint64_t>(epoch)));
    for (Eigen::Index i = n_samples - 1; i > 0; --i) {
      const Eigen::Index j =
          static_cast<Eigen::Index>(shuffle_rng.next_u64() % (i + 1));
      std::swap(order[i], order[j]);
    }

    double loss_sum = 0.0;
    for (Eigen::Index start = 0; start < n_samples; start += cfg.batch_size) {
      const Eigen::Index bsize = std::min<Eigen::Index>(cfg.batch_size, n_samples - start);
      Mat yb(y_train.rows(), bsize), xb(x_train.rows(), bsize);
      for (Eigen::Index c = 0; c < bsize; ++c) {
        yb.col(c) = y_train.col(order[start + c]);
        xb.col(c) = x_train.col(order[start + c]);
      }
      ForwardTrace trace;
      const Mat x_hat = forward_batch(params, yb, &trace);
      const double batch_loss = loss(x_hat, xb);
      if (!std::isfinite(batch_loss))
        throw std::runtime_error("train: loss diverged (non-finite)");
      sgd_update(params, backward(params, trace, yb, xb), lr);
      loss_sum += batch_loss * bsize;
    }

    EpochRecord rec;
    rec.train_loss = loss_sum / static_cast<double>(n_samples);
    rec.val_loss = loss(forward_batch(params, y_val, nullptr), x_val);
    rec.lr_stage = stage;
    if (rec.val_loss < history.best_val_loss) {
      history.best_val_loss = rec.val_loss;
      history.best_epoch = epoch;
      best = params;
      epochs_since_best = 0;
      rec.is_best = true;
    } else {
      ++epochs_since_best;
    }
    history.epochs.push_back(rec);
    if (epochs_since_best >= cfg.patience) {
      history.stopped_early = true;
      break;
    }
  }
  return {std::move(best), std::move(history)};
}

Vec ensemble_predict(const std::vector<UtrrParams>& models, const Vec& y) {
  if (models.empty()) throw std::invalid_argument("ensemble_predict: no models");
  Vec acc = forward(models.front(), y);
  for (std::size_t i = 1; i < models.size(); ++i) {
    Vec out = forward(models[i], y);
    if (out.size() != acc.size())
      throw std::invalid_argument("ensemble_predict: incompatible models");
    acc += out;
  }
  return acc / static_cast<double>(models.size());
}

}  // namespace trr
