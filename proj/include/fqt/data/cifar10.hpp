#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "fqt/data/dataset.hpp"

namespace fqt::data {

// CIFAR-10 binary batches: each record is one label byte followed by
// 3072 pixel bytes, stored as the R, G and B planes of a row-major 32x32
// image. Every batch file holds 10000 records.

inline constexpr std::size_t kCifarPixels = 3 * 32 * 32;
inline constexpr std::size_t kCifarRecordBytes = 1 + kCifarPixels;
inline constexpr std::size_t kCifarRecordsPerFile = 10000;

struct CifarRecord {
  std::uint8_t label = 0;
  std::array<std::uint8_t, kCifarPixels> pixels{};
};

/// Parses raw batch bytes. Throws FormatError (with the byte offset of the
/// first incomplete record) when the size is not a whole number of records,
/// when `expected_records` is given and disagrees, or when a label byte is
/// above 9. `source` names the file in error messages.
std::vector<CifarRecord> parse_cifar10(std::span<const std::uint8_t> bytes,
                                       std::optional<std::size_t> expected_records,
                                       const std::string& source);

std::vector<CifarRecord> read_cifar10_file(const std::filesystem::path& path,
                                           std::optional<std::size_t> expected_records =
                                               kCifarRecordsPerFile);

std::vector<std::uint8_t> serialize_cifar10(std::span<const CifarRecord> records);

/// Per-channel mean and standard deviation of pixels scaled to [0, 1].
struct ChannelStats {
  std::array<double, 3> mean{};
  std::array<double, 3> stddev{};
};

ChannelStats channel_stats(std::span<const CifarRecord> records);

/// Scales pixels to [0, 1] and standardizes each channel.
Dataset to_dataset(std::span<const CifarRecord> records, const ChannelStats& stats, Split split);

struct Cifar10 {
  Dataset train;
  Dataset test;
  ChannelStats stats;
};

/// Reads data_batch_1..5.bin and test_batch.bin from `directory`. When
/// `stats` is empty the normalization constants are computed from the
/// training split and returned alongside the data.
Cifar10 load_cifar10(const std::filesystem::path& directory,
                     std::optional<ChannelStats> stats = std::nullopt);

}  // namespace fqt::data
