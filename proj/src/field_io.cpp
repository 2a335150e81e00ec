#include "field_io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

namespace lkpz {

namespace {

constexpr char kMagic[8] = {'L', 'K', 'P', 'Z', 'F', 'L', 'D', '1'};

}  // namespace

void write_snapshot(const Field& f, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error(ErrorCode::Io, "cannot open " + path + " for writing");
  char header[32] = {};
  std::memcpy(header, kMagic, 8);
  std::uint32_t dim = f.grid().dim, n = f.grid().n;
  double box = f.grid().box;
  std::memcpy(header + 8, &dim, 4);
  std::memcpy(header + 12, &n, 4);
  std::memcpy(header + 16, &box, 8);
  out.write(header, sizeof(header));
  out.write(reinterpret_cast<const char*>(f.data()),
            std::streamsize(f.size() * sizeof(double)));
  if (!out) throw Error(ErrorCode::Io, "short write to " + path);
  out.close();

  std::ofstream side(path + ".txt");
  if (!side)
    throw Error(ErrorCode::Io, "cannot open sidecar for " + path);
  side << "magic = LKPZFLD1\n"
       << "dim = " << dim << "\n"
       << "n = " << n << "\n"
       << "box = " << box << "\n";
}

Field read_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  char header[32];
  in.read(header, sizeof(header));
  if (!in || std::memcmp(header, kMagic, 8) != 0)
    throw Error(ErrorCode::Io, path + " is not a field snapshot");
  std::uint32_t dim, n;
  double box;
  std::memcpy(&dim, header + 8, 4);
  std::memcpy(&n, header + 12, 4);
  std::memcpy(&box, header + 16, 8);
  PeriodicGrid grid = PeriodicGrid::make(int(dim), int(n), box);
  Field f(grid);
  in.read(reinterpret_cast<char*>(f.data()),
          std::streamsize(f.size() * sizeof(double)));
  if (!in) throw Error(ErrorCode::Io, path + " is truncated");
  return f;
}

}  // namespace lkpz
