#include "trr/dataset_io.hpp"

#include <zlib.h>

#include <fstream>
#include <stdexcept>

#include "binio.hpp"

namespace trr {

namespace {

constexpr std::uint32_t kDatasetVersion = 1;

std::uint32_t crc_of(const std::string& buf) {
  return static_cast<std::uint32_t>(
      ::crc32(0L, reinterpret_cast<const Bytef*>(buf.data()),
              static_cast<uInt>(buf.size())));
}

void put_pairs(std::string& buf, const Dataset& ds) {
  for (const RealPair& pair : ds.pairs) {
    for (Eigen::Index i = 0; i < pair.measurement.size(); ++i)
      detail::put_f64(buf, pair.measurement[i]);
    for (Eigen::Index i = 0; i < pair.label.size(); ++i)
      detail::put_f64(buf, pair.label[i]);
  }
}

void read_pairs(detail::Reader& r, Dataset& ds, std::uint32_t count, int m, int n) {
  ds.pairs.resize(count);
  for (std::uint32_t p = 0; p < count; ++p) {
    RealPair& pair = ds.pairs[p];
    pair.measurement.resize(m);
    pair.label.resize(n);
    for (int i = 0; i < m; ++i) pair.measurement[i] = r.f64();
    for (int i = 0; i < n; ++i) pair.label[i] = r.f64();
    pair.part = (p % 2 == 0) ? Part::real : Part::imag;
  }
}

}  // namespace

void write_dataset(const DatasetBundle& bundle, const std::string& path) {
  const Mat& phi = bundle.train.phi.entries;
  const int m = static_cast<int>(phi.rows());
  const int n = static_cast<int>(phi.cols());
  std::string buf;
  buf += "TRRD";
  detail::put_u32(buf, kDatasetVersion);
  detail::put_u32(buf, static_cast<std::uint32_t>(m));
  detail::put_u32(buf, static_cast<std::uint32_t>(n));
  detail::put_u32(buf, static_cast<std::uint32_t>(bundle.train.pairs.size()));
  detail::put_u32(buf, static_cast<std::uint32_t>(bundle.val.pairs.size()));
  detail::put_u32(buf, static_cast<std::uint32_t>(bundle.test.pairs.size()));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) detail::put_f64(buf, phi(i, j));
  put_pairs(buf, bundle.train);
  put_pairs(buf, bundle.val);
  put_pairs(buf, bundle.test);
  detail::put_u32(buf, crc_of(buf));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw std::runtime_error("short write to " + path);
}

DatasetBundle read_dataset(const std::string& path, std::optional<double> snr_db) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open dataset " + path);
  const std::string buf{std::istreambuf_iterator<char>(in),
                        std::istreambuf_iterator<char>()};
  if (buf.size() < 4) throw std::runtime_error("dataset file too short: " + path);
  const std::string payload = buf.substr(0, buf.size() - 4);
  detail::Reader crc_reader(buf.data() + buf.size() - 4, 4);
  if (crc_reader.u32() != crc_of(payload))
    throw std::runtime_error("dataset checksum mismatch: " + path);

  detail::Reader r(payload.data(), payload.size());
  r.magic("TRRD");
  if (r.u32() != kDatasetVersion)
    throw std::runtime_error("unsupported dataset version in " + path);
  const int m = static_cast<int>(r.u32());
  const int n = static_cast<int>(r.u32());
  const std::uint32_t n_train = r.u32();
  const std::uint32_t n_val = r.u32();
  const std::uint32_t n_test = r.u32();

  MeasurementMatrix phi;
  phi.entries.resize(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) phi.entries(i, j) = r.f64();

  DatasetBundle bundle;
  for (Dataset* ds : {&bundle.train, &bundle.val, &bundle.test}) {
    ds->phi = phi;
    ds->snr_db = snr_db;
  }
  bundle.train.split = Split::train;
  bundle.val.split = Split::val;
  bundle.test.split = Split::test;
  read_pairs(r, bundle.train, n_train, m, n);
  read_pairs(r, bundle.val, n_val, m, n);
  read_pairs(r, bundle.test, n_test, m, n);
  if (!r.done()) throw std::runtime_error("trailing bytes in dataset file " + path);
  return bundle;
}

}  // namespace trr
