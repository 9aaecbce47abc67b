#pragma once

#include <filesystem>
#include <iosfwd>

#include "tnqc/mps/mps.hpp"

namespace tnqc::mps {

// Binary container, all integers and doubles little-endian:
//
//   bytes 0..7   magic "TNQCMPS1"
//   u32          number of sites N
//   u64          chi_max (0 means unbounded)
//   i64          gauge center (-1 means none)
//   N times:     u32 left, u32 physical, u32 right,
//                left*physical*right pairs of f64 (real, imag), row-major
void write_binary(std::ostream& out, const Mps& mps);
Mps read_binary(std::istream& in);
void save(const std::filesystem::path& path, const Mps& mps);
Mps load(const std::filesystem::path& path);

/// Human-readable dump with 17 significant digits, readable by read_text.
void write_text(std::ostream& out, const Mps& mps);
Mps read_text(std::istream& in);

}  // namespace tnqc::mps
