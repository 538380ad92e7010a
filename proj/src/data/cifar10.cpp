#include "fqt/data/cifar10.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fqt/bytes.hpp"
#include "fqt/errors.hpp"

namespace fqt::data {

std::vector<CifarRecord> parse_cifar10(std::span<const std::uint8_t> bytes,
                                       std::optional<std::size_t> expected_records,
                                       const std::string& source) {
  const std::size_t whole = bytes.size() / kCifarRecordBytes;
  if (bytes.size() % kCifarRecordBytes != 0) {
    throw FormatError(source + ": truncated record at byte offset " +
                      std::to_string(whole * kCifarRecordBytes) + " (file is " +
                      std::to_string(bytes.size()) + " bytes, records are " +
                      std::to_string(kCifarRecordBytes) + " bytes)");
  }
  if (expected_records && whole != *expected_records) {
    throw FormatError(source + ": expected " + std::to_string(*expected_records) + " records (" +
                      std::to_string(*expected_records * kCifarRecordBytes) + " bytes), found " +
                      std::to_string(whole) + " (" + std::to_string(bytes.size()) + " bytes)");
  }
  std::vector<CifarRecord> records(whole);
  for (std::size_t r = 0; r < whole; ++r) {
    const std::size_t offset = r * kCifarRecordBytes;
    records[r].label = bytes[offset];
    if (records[r].label > 9) {
      throw FormatError(source + ": label byte " + std::to_string(records[r].label) +
                        " at byte offset " + std::to_string(offset) + " is not a CIFAR-10 class");
    }
    std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(offset + 1), kCifarPixels,
                records[r].pixels.begin());
  }
  return records;
}

std::vector<CifarRecord> read_cifar10_file(const std::filesystem::path& path,
                                           std::optional<std::size_t> expected_records) {
  if (!std::filesystem::exists(path)) throw FormatError(path.string() + ": file not found");
  return parse_cifar10(bytes::read_file(path), expected_records, path.string());
}

std::vector<std::uint8_t> serialize_cifar10(std::span<const CifarRecord> records) {
  std::vector<std::uint8_t> out;
  out.reserve(records.size() * kCifarRecordBytes);
  for (const auto& r : records) {
    out.push_back(r.label);
    out.insert(out.end(), r.pixels.begin(), r.pixels.end());
  }
  return out;
}

ChannelStats channel_stats(std::span<const CifarRecord> records) {
  if (records.empty()) throw InvalidArgumentError("no records to compute channel statistics");
  constexpr std::size_t plane = kCifarPixels / 3;
  ChannelStats stats;
  const double n = static_cast<double>(records.size() * plane);
  for (std::size_t c = 0; c < 3; ++c) {
    double sum = 0.0;
    double sum_sq = 0.0;
    for (const auto& r : records) {
      for (std::size_t p = 0; p < plane; ++p) {
        const double v = r.pixels[c * plane + p] / 255.0;
        sum += v;
        sum_sq += v * v;
      }
    }
    stats.mean[c] = sum / n;
    stats.stddev[c] = std::sqrt(std::max(sum_sq / n - stats.mean[c] * stats.mean[c], 1e-12));
  }
  return stats;
}

Dataset to_dataset(std::span<const CifarRecord> records, const ChannelStats& stats, Split split) {
  constexpr std::size_t plane = kCifarPixels / 3;
  Dataset d;
  d.sample_shape = {3, 32, 32};
  d.n_classes = 10;
  d.split = split;
  d.inputs.resize(records.size() * kCifarPixels);
  d.labels.resize(records.size());
  for (std::size_t r = 0; r < records.size(); ++r) {
    d.labels[r] = records[r].label;
    double* dst = d.inputs.data() + r * kCifarPixels;
    for (std::size_t c = 0; c < 3; ++c) {
      for (std::size_t p = 0; p < plane; ++p) {
        dst[c * plane + p] = (records[r].pixels[c * plane + p] / 255.0 - stats.mean[c]) / stats.stddev[c];
      }
    }
  }
  return d;
}

Cifar10 load_cifar10(const std::filesystem::path& directory, std::optional<ChannelStats> stats) {
  std::vector<CifarRecord> train;
  train.reserve(5 * kCifarRecordsPerFile);
  for (int b = 1; b <= 5; ++b) {
    auto part = read_cifar10_file(directory / ("data_batch_" + std::to_string(b) + ".bin"));
    train.insert(train.end(), part.begin(), part.end());
  }
  const auto test = read_cifar10_file(directory / "test_batch.bin");
  Cifar10 out;
  out.stats = stats ? *stats : channel_stats(train);
  out.train = to_dataset(train, out.stats, Split::kTrain);
  out.test = to_dataset(test, out.stats, Split::kTest);
  return out;
}

}  // namespace fqt::data
