#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace fqt::nn {

// FQTW weight file, all fields little-endian:
//
//   offset  size  field
//   0       4     magic "FQTW"
//   4       2     format version (u16, currently 1)
//   6       8     parameter count m (u64)
//   14      4*m   weights as IEEE-754 binary32
//
// The file carries only the target-model weights, so a consumer needs
// nothing beyond the classical model to run inference.

inline constexpr std::uint16_t kFqtwVersion = 1;
inline constexpr std::size_t kFqtwHeaderBytes = 14;

/// Serializes omega, rounding each weight to binary32.
std::vector<std::uint8_t> encode_fqtw(std::span<const double> omega);

/// Parses an FQTW image. Throws FormatError on a bad magic, unknown version,
/// or a payload whose length disagrees with the header.
std::vector<double> decode_fqtw(std::span<const std::uint8_t> bytes);

void write_fqtw(const std::filesystem::path& path, std::span<const double> omega);
std::vector<double> read_fqtw(const std::filesystem::path& path);

/// Rounds every entry to the nearest binary32 value, i.e. what a FQTW
/// round trip would return.
std::vector<double> round_to_export_precision(std::span<const double> omega);

}  // namespace fqt::nn
