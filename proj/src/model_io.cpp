#include <zlib.h>

#include <fstream>
#include <stdexcept>

#include "binio.hpp"
#include "trr/network.hpp"

namespace trr {

namespace {

constexpr std::uint32_t kModelVersion = 1;

std::uint32_t crc_of(const std::string& buf) {
  return static_cast<std::uint32_t>(
      ::crc32(0L, reinterpret_cast<const Bytef*>(buf.data()),
              static_cast<uInt>(buf.size())));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw std::runtime_error("short write to " + path);
}

}  // namespace

void save_model(const UtrrParams& params, const std::string& path) {
  if (params.layers.empty()) throw std::invalid_argument("save_model: no layers");
  const int m = static_cast<int>(params.layers.front().a_matrix.rows());
  const int n2 = static_cast<int>(params.layers.front().a_matrix.cols());
  std::string buf;
  buf += "UTRR";
  detail::put_u32(buf, kModelVersion);
  detail::put_u32(buf, static_cast<std::uint32_t>(m));
  detail::put_u32(buf, static_cast<std::uint32_t>(n2 / 2));
  detail::put_u32(buf, static_cast<std::uint32_t>(params.n_layers()));
  detail::put_u32(buf, static_cast<std::uint32_t>(params.top_k_last));
  for (const UtrrLayer& layer : params.layers)
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n2; ++j) detail::put_f64(buf, layer.a_matrix(i, j));
  for (const UtrrLayer& layer : params.layers) {
    detail::put_f64(buf, layer.rho);
    detail::put_f64(buf, layer.alpha);
  }
  detail::put_u32(buf, crc_of(buf));
  write_file(path, buf);
}

UtrrParams load_model(const std::string& path) {
  const std::string buf = read_file(path);
  if (buf.size() < 4) throw std::runtime_error("model file too short: " + path);
  const std::string payload = buf.substr(0, buf.size() - 4);
  detail::Reader crc_reader(buf.data() + buf.size() - 4, 4);
  if (crc_reader.u32() != crc_of(payload))
    throw std::runtime_error("model file checksum mismatch: " + path);

  detail::Reader r(payload.data(), payload.size());
  r.magic("UTRR");
  const std::uint32_t version = r.u32();
  if (version != kModelVersion)
    throw std::runtime_error("unsupported model version in " + path);
  const int m = static_cast<int>(r.u32());
  const int n = static_cast<int>(r.u32());
  const int n_layers = static_cast<int>(r.u32());
  const int top_k_last = static_cast<int>(r.u32());

  UtrrParams params;
  params.top_k_last = top_k_last;
  params.layers.resize(n_layers);
  for (UtrrLayer& layer : params.layers) {
    layer.a_matrix.resize(m, 2 * n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < 2 * n; ++j) layer.a_matrix(i, j) = r.f64();
  }
  for (UtrrLayer& layer : params.layers) {
    layer.rho = r.f64();
    layer.alpha = r.f64();
  }
  if (!r.done()) throw std::runtime_error("trailing bytes in model file " + path);
  // phi is not part of the format; the caller wires it from the dataset
  return params;
}

}  // namespace trr
