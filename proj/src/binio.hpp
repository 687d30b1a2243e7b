#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>

// Little-endian binary encoding shared by the dataset and model formats.
namespace trr::detail {

inline void put_u32(std::string& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_f64(std::string& buf, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

class Reader {
 public:
  Reader(const char* data, std::size_t size) : p_(data), end_(data + size) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(*p_++)) << (8 * i);
    return v;
  }

  double f64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(*p_++)) << (8 * i);
    return std::bit_cast<double>(v);
  }

  void magic(const char* tag) {
    need(4);
    for (int i = 0; i < 4; ++i)
      if (*p_++ != tag[i]) throw std::runtime_error("bad magic, expected " + std::string(tag));
  }

  bool done() const { return p_ == end_; }

 private:
  void need(std::size_t n) {
    if (static_cast<std::size_t>(end_ - p_) < n)
      throw std::runtime_error("truncated binary payload");
  }
  const char* p_;
  const char* end_;
};

}  // namespace trr::detail
