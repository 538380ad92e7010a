#include "fqt/nn/weights_io.hpp"

#include <bit>
#include <cstring>

#include "fqt/bytes.hpp"
#include "fqt/errors.hpp"

namespace fqt::nn {

namespace {
constexpr char kMagic[4] = {'F', 'Q', 'T', 'W'};
}

std::vector<std::uint8_t> encode_fqtw(std::span<const double> omega) {
  std::vector<std::uint8_t> out;
  out.reserve(kFqtwHeaderBytes + 4 * omega.size());
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  bytes::put_le<std::uint16_t>(out, kFqtwVersion);
  bytes::put_le<std::uint64_t>(out, omega.size());
  for (double w : omega) {
    bytes::put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(w)));
  }
  return out;
}

std::vector<double> decode_fqtw(std::span<const std::uint8_t> data) {
  if (data.size() < kFqtwHeaderBytes) {
    throw FormatError("FQTW: file is " + std::to_string(data.size()) +
                      " bytes, shorter than the 14-byte header");
  }
  if (std::memcmp(data.data(), kMagic, 4) != 0) throw FormatError("FQTW: bad magic at offset 0");
  const auto version = bytes::get_le<std::uint16_t>(data, 4);
  if (version != kFqtwVersion) {
    throw FormatError("FQTW: unsupported version " + std::to_string(version));
  }
  const auto m = bytes::get_le<std::uint64_t>(data, 6);
  const std::size_t payload = data.size() - kFqtwHeaderBytes;
  if (payload % 4 != 0 || payload / 4 != m) {
    throw FormatError("FQTW: header declares m = " + std::to_string(m) + " but payload holds " +
                      std::to_string(payload) + " bytes");
  }
  std::vector<double> omega(m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto raw = bytes::get_le<std::uint32_t>(data, kFqtwHeaderBytes + 4 * i);
    omega[i] = static_cast<double>(std::bit_cast<float>(raw));
  }
  return omega;
}

void write_fqtw(const std::filesystem::path& path, std::span<const double> omega) {
  bytes::write_file(path, encode_fqtw(omega));
}

std::vector<double> read_fqtw(const std::filesystem::path& path) {
  try {
    return decode_fqtw(bytes::read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::vector<double> round_to_export_precision(std::span<const double> omega) {
  std::vector<double> out(omega.size());
  for (std::size_t i = 0; i < omega.size(); ++i) {
    out[i] = static_cast<double>(static_cast<float>(omega[i]));
  }
  return out;
}

}  // namespace fqt::nn
