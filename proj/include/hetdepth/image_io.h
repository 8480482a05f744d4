#pragma once

#include <filesystem>

#include "hetdepth/feature_map.h"

namespace hetdepth {

// Single-channel float PFM ("Pf"), little-endian (scale -1.0), rows stored
// bottom to top as the format requires.
void WritePfm(const std::filesystem::path& path, const FeatureMap& map, int channel = 0);
FeatureMap ReadPfm(const std::filesystem::path& path, MapRole role = MapRole::kDepth);

// Binary PGM (P5). Values are rounded and clamped to [0, max_value]; a
// max_value above 255 writes 16-bit big-endian samples.
void WritePgm(const std::filesystem::path& path, const FeatureMap& map, int max_value = 255,
              double scale = 1.0, int channel = 0);
FeatureMap ReadPgm(const std::filesystem::path& path, MapRole role = MapRole::kFeature);

// Multi-channel feature blob: one text line "HDFEAT <H> <W> <C> f64le\n"
// followed by H*W*C little-endian doubles.
void WriteFeatureBlob(const std::filesystem::path& path, const FeatureMap& map);
FeatureMap ReadFeatureBlob(const std::filesystem::path& path);

}  // namespace hetdepth
