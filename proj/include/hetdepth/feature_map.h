#pragma once

#include <span>
#include <string_view>
#include <vector>

namespace hetdepth {

enum class MapRole { kFeature, kColor, kDepth, kDisparity };

std::string_view MapRoleName(MapRole role);

// H x W x C image, row-major with C contiguous channels per pixel. Depth and
// disparity maps use 0 as the invalid sentinel.
class FeatureMap {
 public:
  FeatureMap() = default;
  FeatureMap(int height, int width, int channels, MapRole role = MapRole::kFeature,
             double fill = 0.0);

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  int num_pixels() const { return height_ * width_; }
  MapRole role() const { return role_; }

  std::span<double> at(int v, int u) {
    return {data_.data() + Offset(v, u), static_cast<size_t>(channels_)};
  }
  std::span<const double> at(int v, int u) const {
    return {data_.data() + Offset(v, u), static_cast<size_t>(channels_)};
  }
  double& operator()(int v, int u, int c = 0) { return data_[Offset(v, u) + c]; }
  double operator()(int v, int u, int c = 0) const { return data_[Offset(v, u) + c]; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool SameShape(const FeatureMap& other) const {
    return height_ == other.height_ && width_ == other.width_ && channels_ == other.channels_;
  }

 private:
  size_t Offset(int v, int u) const {
    return (static_cast<size_t>(v) * width_ + u) * channels_;
  }

  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  MapRole role_ = MapRole::kFeature;
  std::vector<double> data_;
};

}  // namespace hetdepth
