#include "nssl/snapshot.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "nssl/error.hpp"

namespace nssl {

static_assert(std::endian::native == std::endian::little,
              "snapshot I/O assumes a little-endian host");

namespace {

template <typename T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& in, const std::string& path) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T)))
    throw ConfigError("snapshot " + path + ": truncated header");
  return v;
}

SnapshotHeader parse_header(std::ifstream& in, const std::string& path) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "NSSL", 4) != 0)
    throw ConfigError("snapshot " + path + ": bad magic");
  SnapshotHeader h;
  h.version = get<std::uint32_t>(in, path);
  if (h.version != kSnapshotVersion)
    throw ConfigError("snapshot " + path + ": unsupported version " + std::to_string(h.version));
  const auto ndim = get<std::uint32_t>(in, path);
  h.ncomp = static_cast<int>(get<std::uint32_t>(in, path));
  if (ndim < 2 || ndim > 3 || h.ncomp < 1)
    throw ConfigError("snapshot " + path + ": bad ndim/ncomp");
  for (std::uint32_t a = 0; a < ndim; ++a) h.dims.push_back(static_cast<int>(get<std::uint32_t>(in, path)));
  for (std::uint32_t a = 0; a < ndim; ++a) h.lengths.push_back(get<double>(in, path));
  return h;
}

}  // namespace

void write_snapshot(const std::string& path, const PhysicalField& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("snapshot: cannot open " + path + " for writing");
  const Grid& g = f.grid();
  out.write("NSSL", 4);
  put<std::uint32_t>(out, kSnapshotVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(g.ndim()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(f.ncomp()));
  for (int d : g.dims()) put<std::uint32_t>(out, static_cast<std::uint32_t>(d));
  for (double l : g.lengths()) put<double>(out, l);
  out.write(reinterpret_cast<const char*>(f.data().data()),
            static_cast<std::streamsize>(f.data().size() * sizeof(double)));
  if (!out) throw ConfigError("snapshot: write failed for " + path);
}

SnapshotHeader read_snapshot_header(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("snapshot: cannot open " + path);
  return parse_header(in, path);
}

PhysicalField read_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("snapshot: cannot open " + path);
  const SnapshotHeader h = parse_header(in, path);
  Grid g(h.dims, h.lengths);
  std::vector<double> data(g.size() * h.ncomp);
  if (!in.read(reinterpret_cast<char*>(data.data()),
               static_cast<std::streamsize>(data.size() * sizeof(double))))
    throw ConfigError("snapshot " + path + ": truncated sample data");
  return PhysicalField(g, h.ncomp, std::move(data));
}

}  // namespace nssl
