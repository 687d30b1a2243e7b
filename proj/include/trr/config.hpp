#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace trr {

// Declarative description of a dataset / solve / train / evaluate run.
// Parsed from flat "key = value" text; see parse_config.
struct ExperimentConfig {
  // system geometry
  int n_antennas = 64;       // N
  int n_measurements = 32;   // M
  int n_users = 0;           // U, 0 when unused
  int n_blocks = 0;          // B, documentation constant
  int n_rf = 0;              // N_RF, documentation constant
  int n_paths = 3;           // N_p

  // dataset
  std::optional<double> snr_db;  // nullopt means noiseless
  int sparsity = 0;              // keep-S sparsification of channels, 0 = off
  int train_channels = 0;
  int val_channels = 0;
  int test_channels = 0;

  // iterative solvers
  std::string solver = "itrr-bb";
  double rho = 1.0;
  int top_k = 16;
  double eps = 1e-6;
  int max_iter = 600;
  double lambda1 = 1e-4;
  double lambda2 = 1.0;
  int omp_sparsity = 0;  // 0: fall back to sparsity, then top_k

  // unfolded network
  int layers = 10;
  std::vector<int> top_k_list;
  std::vector<double> learning_rates = {0.005, 0.001, 0.0005, 0.0002, 0.0001};
  int max_epochs = 300;
  int patience = 10;
  int batch_size = 128;

  // evaluation
  std::vector<double> thresholds = {0.01, 0.001};
  std::vector<double> snr_dl_list = {0.0, 10.0, 20.0};
  std::vector<std::string> estimators = {"itrr-bb"};

  std::uint64_t seed = 42;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Parse flat key = value text (# starts a comment, lists are
/// comma-separated). Unknown keys and malformed values raise with a
/// line diagnostic.
ExperimentConfig parse_config(const std::string& text);

ExperimentConfig load_config(const std::string& path);

/// Render every field in a fixed order such that
/// parse_config(print_config(c)) == c.
std::string print_config(const ExperimentConfig& cfg);

/// Enforce cross-field invariants (M <= N, non-negative sizes,
/// M = B * N_RF when both documentation constants are present).
void validate_config(const ExperimentConfig& cfg);

}  // namespace trr
