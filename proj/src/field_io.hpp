#pragma once

#include <string>

#include "spectral.hpp"

namespace lkpz {

/** Snapshot layout: 32-byte header (magic "LKPZFLD1", u32 dim, u32 n,
 * f64 box, 8 reserved bytes), then n^dim row-major little-endian f64
 * samples.  A plain-text sidecar `<path>.txt` repeats the metadata. */
void write_snapshot(const Field& f, const std::string& path);
Field read_snapshot(const std::string& path);

}  // namespace lkpz
