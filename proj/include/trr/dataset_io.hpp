#pragma once

#include <string>

#include "trr/sensing.hpp"

namespace trr {

/// Binary dataset format: magic "TRRD", version, dims (M, N, per-split
/// pair counts), Phi row-major f64 LE, then each pair as y followed by x,
/// train/val/test in order, CRC32 trailer.
void write_dataset(const DatasetBundle& bundle, const std::string& path);

/// Verifies the checksum and dimensions. The stored file carries no SNR
/// field; pass the value recorded in the config snapshot.
DatasetBundle read_dataset(const std::string& path,
                           std::optional<double> snr_db = std::nullopt);

}  // namespace trr
