#include "hetdepth/image_io.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hetdepth/error.h"

namespace hetdepth {
namespace {

template <typename T>
T ByteSwap(T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  std::reverse(bytes, bytes + sizeof(T));
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

template <typename T>
void WriteLittleEndian(std::ostream& os, T value) {
  if constexpr (std::endian::native == std::endian::big) value = ByteSwap(value);
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T ReadBinary(std::istream& is, bool little_endian) {
  T value;
  is.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!is) throw Error(ErrorCode::kIo, "truncated image payload");
  const bool native_little = std::endian::native == std::endian::little;
  if (little_endian != native_little) value = ByteSwap(value);
  return value;
}

std::ofstream OpenForWrite(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  return os;
}

std::ifstream OpenForRead(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return is;
}

// Next whitespace-delimited header token, skipping '#' comments.
std::string HeaderToken(std::istream& is) {
  std::string token;
  while (is >> token) {
    if (token[0] != '#') return token;
    std::string rest;
    std::getline(is, rest);
  }
  throw Error(ErrorCode::kIo, "truncated image header");
}

void CheckChannel(const FeatureMap& map, int channel) {
  if (channel < 0 || channel >= map.channels()) {
    throw Error(ErrorCode::kIndexOutOfRange, "channel " + std::to_string(channel) + " not in map");
  }
}

}  // namespace

void WritePfm(const std::filesystem::path& path, const FeatureMap& map, int channel) {
  CheckChannel(map, channel);
  std::ofstream os = OpenForWrite(path);
  os << "Pf\n" << map.width() << ' ' << map.height() << "\n-1.0\n";
  for (int v = map.height() - 1; v >= 0; --v) {
    for (int u = 0; u < map.width(); ++u) {
      WriteLittleEndian(os, static_cast<float>(map(v, u, channel)));
    }
  }
  if (!os) throw Error(ErrorCode::kIo, "failed writing " + path.string());
}

FeatureMap ReadPfm(const std::filesystem::path& path, MapRole role) {
  std::ifstream is = OpenForRead(path);
  const std::string magic = HeaderToken(is);
  int channels;
  if (magic == "Pf") {
    channels = 1;
  } else if (magic == "PF") {
    channels = 3;
  } else {
    throw Error(ErrorCode::kIo, path.string() + " is not a PFM file");
  }
  const int width = std::stoi(HeaderToken(is));
  const int height = std::stoi(HeaderToken(is));
  const double scale = std::stod(HeaderToken(is));
  is.get();
  if (width < 1 || height < 1 || scale == 0.0) {
    throw Error(ErrorCode::kIo, path.string() + " has an invalid PFM header");
  }
  const bool little = scale < 0.0;
  FeatureMap map(height, width, channels, role);
  for (int v = height - 1; v >= 0; --v) {
    for (int u = 0; u < width; ++u) {
      for (int c = 0; c < channels; ++c) map(v, u, c) = ReadBinary<float>(is, little);
    }
  }
  return map;
}

void WritePgm(const std::filesystem::path& path, const FeatureMap& map, int max_value,
              double scale, int channel) {
  CheckChannel(map, channel);
  if (max_value < 1 || max_value > 65535) {
    throw Error(ErrorCode::kInvalidConfig, "PGM max value must lie in [1, 65535]");
  }
  std::ofstream os = OpenForWrite(path);
  os << "P5\n" << map.width() << ' ' << map.height() << '\n' << max_value << '\n';
  for (int v = 0; v < map.height(); ++v) {
    for (int u = 0; u < map.width(); ++u) {
      const double scaled = map(v, u, channel) * scale;
      const int value = std::isfinite(scaled)
                            ? static_cast<int>(std::clamp(std::lround(scaled), 0L,
                                                          static_cast<long>(max_value)))
                            : 0;
      if (max_value > 255) {
        os.put(static_cast<char>((value >> 8) & 0xff));
        os.put(static_cast<char>(value & 0xff));
      } else {
        os.put(static_cast<char>(value));
      }
    }
  }
  if (!os) throw Error(ErrorCode::kIo, "failed writing " + path.string());
}

FeatureMap ReadPgm(const std::filesystem::path& path, MapRole role) {
  std::ifstream is = OpenForRead(path);
  if (HeaderToken(is) != "P5") throw Error(ErrorCode::kIo, path.string() + " is not a P5 PGM");
  const int width = std::stoi(HeaderToken(is));
  const int height = std::stoi(HeaderToken(is));
  const int max_value = std::stoi(HeaderToken(is));
  is.get();
  if (width < 1 || height < 1 || max_value < 1 || max_value > 65535) {
    throw Error(ErrorCode::kIo, path.string() + " has an invalid PGM header");
  }
  FeatureMap map(height, width, 1, role);
  for (int v = 0; v < height; ++v) {
    for (int u = 0; u < width; ++u) {
      int value;
      if (max_value > 255) {
        value = ReadBinary<std::uint8_t>(is, true) << 8;
        value |= ReadBinary<std::uint8_t>(is, true);
      } else {
        value = ReadBinary<std::uint8_t>(is, true);
      }
      map(v, u) = value;
    }
  }
  return map;
}

void WriteFeatureBlob(const std::filesystem::path& path, const FeatureMap& map) {
  std::ofstream os = OpenForWrite(path);
  os << "HDFEAT " << map.height() << ' ' << map.width() << ' ' << map.channels() << " f64le\n";
  for (const double value : map.data()) WriteLittleEndian(os, value);
  if (!os) throw Error(ErrorCode::kIo, "failed writing " + path.string());
}

FeatureMap ReadFeatureBlob(const std::filesystem::path& path) {
  std::ifstream is = OpenForRead(path);
  std::string line;
  std::getline(is, line);
  std::istringstream header(line);
  std::string magic, encoding;
  int height = 0, width = 0, channels = 0;
  header >> magic >> height >> width >> channels >> encoding;
  if (magic != "HDFEAT" || encoding != "f64le" || height < 1 || width < 1 || channels < 1) {
    throw Error(ErrorCode::kIo, path.string() + " has an invalid feature blob header");
  }
  FeatureMap map(height, width, channels);
  for (double& value : map.data()) value = ReadBinary<double>(is, true);
  return map;
}

}  // namespace hetdepth
