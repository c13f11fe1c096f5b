#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "gad/model.hpp"

namespace gad {

inline constexpr std::uint32_t kModelFormatVersion = 1;

// Binary model document, all integers and doubles little-endian:
//
//   magic        8 bytes  "GADMODEL"
//   version      u32      kModelFormatVersion
//   encoder_kind u32      0 = gat, 1 = gcn
//   self_loops   u8       0 or 1
//   lambda       f64
//   leaky_slope  f64
//   num_dims     u32
//   dims         u64 x num_dims       (d_in, hidden..., d_embed)
//   per layer l, in order:
//     weight     f64 x dims[l]*dims[l+1], row-major
//     attention  f64 x 2*dims[l+1]     (gat only; [a_src | a_dst])
//   checksum     u64      FNV-1a over every preceding byte
//
// Doubles are stored as their IEEE-754 bit patterns, so a round trip is
// bit-exact.
std::string serialize_model(const GAEModel& model);

// Throws FormatError on a bad magic, a version mismatch, truncation,
// trailing bytes, or a checksum mismatch. Never returns a partial model.
GAEModel deserialize_model(const std::string& bytes);

void save_model(const std::filesystem::path& path, const GAEModel& model);
// Also throws DataError if the file cannot be read.
GAEModel load_model(const std::filesystem::path& path);

}  // namespace gad
