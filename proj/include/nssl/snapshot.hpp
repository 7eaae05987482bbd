#pragma once

#include <cstdint>
#include <string>

#include "nssl/field.hpp"

// Binary field snapshots: "NSSL", u32 version, u32 ndim, u32 ncomp,
// u32 dims[ndim], f64 lengths[ndim], then f64 samples component-major,
// row-major. Everything little-endian.

namespace nssl {

inline constexpr std::uint32_t kSnapshotVersion = 1;

struct SnapshotHeader {
  std::uint32_t version = kSnapshotVersion;
  std::vector<int> dims;
  std::vector<double> lengths;
  int ncomp = 0;
};

void write_snapshot(const std::string& path, const PhysicalField& f);
PhysicalField read_snapshot(const std::string& path);
SnapshotHeader read_snapshot_header(const std::string& path);

}  // namespace nssl
