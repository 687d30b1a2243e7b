#include "trr/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace trr {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

[[noreturn]] void fail(int line, const std::string& what) {
  throw std::invalid_argument("config line " + std::to_string(line) + ": " + what);
}

int parse_int(const std::string& v, int line, const std::string& key) {
  try {
    std::size_t pos = 0;
    const int x = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return x;
  } catch (...) {
    fail(line, "field '" + key + "' expects an integer, got '" + v + "'");
  }
}

double parse_double(const std::string& v, int line, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return x;
  } catch (...) {
    fail(line, "field '" + key + "' expects a number, got '" + v + "'");
  }
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class T, class Fmt>
std::string join(const std::vector<T>& xs, Fmt fmt) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ", ";
    out += fmt(xs[i]);
  }
  return out;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  // reset list defaults so config-provided lists replace, not append
  bool saw_lr = false, saw_th = false, saw_dl = false, saw_est = false;

  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(line_no, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(line_no, "empty key");

    if (key == "n_antennas") cfg.n_antennas = parse_int(value, line_no, key);
    else if (key == "n_measurements") cfg.n_measurements = parse_int(value, line_no, key);
    else if (key == "n_users") cfg.n_users = parse_int(value, line_no, key);
    else if (key == "n_blocks") cfg.n_blocks = parse_int(value, line_no, key);
    else if (key == "n_rf") cfg.n_rf = parse_int(value, line_no, key);
    else if (key == "n_paths") cfg.n_paths = parse_int(value, line_no, key);
    else if (key == "snr_db") {
      if (value == "noiseless") cfg.snr_db.reset();
      else cfg.snr_db = parse_double(value, line_no, key);
    }
    else if (key == "sparsity") cfg.sparsity = parse_int(value, line_no, key);
    else if (key == "train_channels") cfg.train_channels = parse_int(value, line_no, key);
    else if (key == "val_channels") cfg.val_channels = parse_int(value, line_no, key);
    else if (key == "test_channels") cfg.test_channels = parse_int(value, line_no, key);
    else if (key == "solver") cfg.solver = value;
    else if (key == "rho") cfg.rho = parse_double(value, line_no, key);
    else if (key == "top_k") cfg.top_k = parse_int(value, line_no, key);
    else if (key == "eps") cfg.eps = parse_double(value, line_no, key);
    else if (key == "max_iter") cfg.max_iter = parse_int(value, line_no, key);
    else if (key == "lambda1") cfg.lambda1 = parse_double(value, line_no, key);
    else if (key == "lambda2") cfg.lambda2 = parse_double(value, line_no, key);
    else if (key == "omp_sparsity") cfg.omp_sparsity = parse_int(value, line_no, key);
    else if (key == "layers") cfg.layers = parse_int(value, line_no, key);
    else if (key == "top_k_list") {
      for (const auto& item : split_list(value))
        cfg.top_k_list.push_back(parse_int(item, line_no, key));
    }
    else if (key == "learning_rates") {
      if (!saw_lr) { cfg.learning_rates.clear(); saw_lr = true; }
      for (const auto& item : split_list(value))
        cfg.learning_rates.push_back(parse_double(item, line_no, key));
    }
    else if (key == "max_epochs") cfg.max_epochs = parse_int(value, line_no, key);
    else if (key == "patience") cfg.patience = parse_int(value, line_no, key);
    else if (key == "batch_size") cfg.batch_size = parse_int(value, line_no, key);
    else if (key == "thresholds") {
      if (!saw_th) { cfg.thresholds.clear(); saw_th = true; }
      for (const auto& item : split_list(value))
        cfg.thresholds.push_back(parse_double(item, line_no, key));
    }
    else if (key == "snr_dl_list") {
      if (!saw_dl) { cfg.snr_dl_list.clear(); saw_dl = true; }
      for (const auto& item : split_list(value))
        cfg.snr_dl_list.push_back(parse_double(item, line_no, key));
    }
    else if (key == "estimators") {
      if (!saw_est) { cfg.estimators.clear(); saw_est = true; }
      for (const auto& item : split_list(value)) cfg.estimators.push_back(item);
    }
    else if (key == "seed") {
      try {
        cfg.seed = std::stoull(value);
      } catch (...) {
        fail(line_no, "field 'seed' expects an unsigned integer");
      }
    }
    else fail(line_no, "unknown key '" + key + "'");
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

std::string print_config(const ExperimentConfig& cfg) {
  std::string out;
  auto kv = [&out](const std::string& k, const std::string& v) {
    out += k + " = " + v + "\n";
  };
  kv("n_antennas", std::to_string(cfg.n_antennas));
  kv("n_measurements", std::to_string(cfg.n_measurements));
  kv("n_users", std::to_string(cfg.n_users));
  kv("n_blocks", std::to_string(cfg.n_blocks));
  kv("n_rf", std::to_string(cfg.n_rf));
  kv("n_paths", std::to_string(cfg.n_paths));
  kv("snr_db", cfg.snr_db ? fmt_double(*cfg.snr_db) : std::string("noiseless"));
  kv("sparsity", std::to_string(cfg.sparsity));
  kv("train_channels", std::to_string(cfg.train_channels));
  kv("val_channels", std::to_string(cfg.val_channels));
  kv("test_channels", std::to_string(cfg.test_channels));
  kv("solver", cfg.solver);
  kv("rho", fmt_double(cfg.rho));
  kv("top_k", std::to_string(cfg.top_k));
  kv("eps", fmt_double(cfg.eps));
  kv("max_iter", std::to_string(cfg.max_iter));
  kv("lambda1", fmt_double(cfg.lambda1));
  kv("lambda2", fmt_double(cfg.lambda2));
  kv("omp_sparsity", std::to_string(cfg.omp_sparsity));
  kv("layers", std::to_string(cfg.layers));
  kv("top_k_list", join(cfg.top_k_list, [](int v) { return std::to_string(v); }));
  kv("learning_rates", join(cfg.learning_rates, fmt_double));
  kv("max_epochs", std::to_string(cfg.max_epochs));
  kv("patience", std::to_string(cfg.patience));
  kv("batch_size", std::to_string(cfg.batch_size));
  kv("thresholds", join(cfg.thresholds, fmt_double));
  kv("snr_dl_list", join(cfg.snr_dl_list, fmt_double));
  kv("estimators", join(cfg.estimators, [](const std::string& s) { return s; }));
  kv("seed", std::to_string(cfg.seed));
  return out;
}

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.n_antennas < 1) throw std::invalid_argument("config: N must be >= 1");
  if (cfg.n_measurements < 1) throw std::invalid_argument("config: M must be >= 1");
  if (cfg.n_measurements > cfg.n_antennas)
    throw std::invalid_argument("config: M must not exceed N");
  if (cfg.n_paths < 1) throw std::invalid_argument("config: N_p must be >= 1");
  if (cfg.train_channels < 0 || cfg.val_channels < 0 || cfg.test_channels < 0)
    throw std::invalid_argument("config: dataset sizes must be >= 0");
  if (cfg.sparsity < 0 || cfg.sparsity > cfg.n_antennas)
    throw std::invalid_argument("config: sparsity out of [0, N]");
  if (cfg.n_blocks > 0 && cfg.n_rf > 0 &&
      cfg.n_measurements != cfg.n_blocks * cfg.n_rf)
    throw std::invalid_argument("config: M must equal B * N_RF");
}

}  // namespace trr
