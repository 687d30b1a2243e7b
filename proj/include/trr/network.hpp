#pragma once

#include <string>
#include <vector>

#include "trr/sensing.hpp"

namespace trr {

struct UtrrLayer {
  Mat a_matrix;  // M x 2N
  double rho = 1.0;
  double alpha = 0.1;
};

// Per-layer trainable parameters of the unfolded network. Intermediate
// layers run with K = 0; only the last layer applies top_k_last unless
// top_k_all_layers is set (the slower, untrimmed-everywhere variant used
// for the wall-clock comparison).
struct UtrrParams {
  std::vector<UtrrLayer> layers;
  int top_k_last = 0;
  Mat phi;  // frozen encoder / initializing matrix, M x N
  bool top_k_all_layers = false;  // not serialized

  int n_layers() const { return static_cast<int>(layers.size()); }
  int m_rows() const { return static_cast<int>(phi.rows()); }
  int n_cols() const { return static_cast<int>(phi.cols()); }
  /// L * (2MN + 2)
  std::int64_t parameter_count() const;
};

// Reverse-mode bookkeeping for one batch forward pass. States are stored
// column-per-sample; depth is n_layers + 1.
struct ForwardTrace {
  std::vector<Mat> z;          // z^(t), t = 0..L, each 2N x B
  std::vector<Mat> grad_f;     // g at layer t, 2N x B
  std::vector<Mat> residual;   // A^(t) z^(t) - y, M x B
  std::vector<Mat> relu_mask;  // 1 where the pre-activation was > 0
  std::vector<Mat> keep_mask;  // 1 on trimmed-in entries (empty when K = 0)
};

struct Gradients {
  std::vector<Mat> d_a;
  std::vector<double> d_rho;
  std::vector<double> d_alpha;
};

struct TrainConfig {
  std::vector<double> learning_rates = {0.005, 0.001, 0.0005, 0.0002, 0.0001};
  int max_epochs = 300;
  int patience = 10;
  int batch_size = 128;
  std::uint64_t seed = 0;
};

struct EpochRecord {
  double train_loss = 0.0;
  double val_loss = 0.0;
  int lr_stage = 0;
  bool is_best = false;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  int best_epoch = -1;
  double best_val_loss = 0.0;
  bool stopped_early = false;
};

/// Every layer starts at A = [Phi, -Phi], rho = 1, alpha = 0.1.
UtrrParams init_params(const MeasurementMatrix& phi, int n_layers, int top_k);

/// Batched forward pass: columns of y_batch are measurement vectors,
/// columns of the result are reconstructions.
Mat forward_batch(const UtrrParams& params, const Mat& y_batch,
                  ForwardTrace* trace = nullptr);

/// Single-sample convenience wrapper.
Vec forward(const UtrrParams& params, const Vec& y);

/// Mean over the batch of ||x - x_hat||^2 (columns are samples).
double loss(const Mat& x_hat_batch, const Mat& x_batch);

/// Analytical reverse-mode gradients of `loss` through the forward graph.
/// ReLU takes subgradient 0 at exactly-zero pre-activations; the top-K
/// selection mask is frozen at its forward value.
Gradients backward(const UtrrParams& params, const ForwardTrace& trace,
                   const Mat& y_batch, const Mat& x_batch);

void sgd_update(UtrrParams& params, const Gradients& grads, double lr);

/// Mini-batch gradient descent per the staged learning-rate schedule, with
/// early stopping on the full validation loss; returns the parameters of
/// the best validation epoch.
std::pair<UtrrParams, TrainHistory> train(UtrrParams params,
                                          const Dataset& train_set,
                                          const Dataset& val_set,
                                          const TrainConfig& cfg);

/// Arithmetic mean of per-model reconstructions.
Vec ensemble_predict(const std::vector<UtrrParams>& models, const Vec& y);

/// Binary model format: magic "UTRR", version, dims, per-layer matrices,
/// rho/alpha pairs, CRC32 trailer.
void save_model(const UtrrParams& params, const std::string& path);
UtrrParams load_model(const std::string& path);

}  // namespace trr
