#include "hetdepth/hsf.h"

#include <random>
#include <string>

#include "hetdepth/error.h"

namespace hetdepth {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstVolumeView = Eigen::Map<const RowMatrix>;
using VolumeView = Eigen::Map<RowMatrix>;

ConstVolumeView View(const VoxelGrid& grid) {
  return ConstVolumeView(grid.data().data(), grid.num_voxels(), grid.channels());
}

VolumeView View(VoxelGrid& grid) {
  return VolumeView(grid.data().data(), grid.num_voxels(), grid.channels());
}

void CheckTransform(const FeatureTransform& t, int in, int out, const char* what) {
  if (t.in_channels() != in || t.out_channels() != out || t.bias.size() != out) {
    throw Error(ErrorCode::kShapeMismatch,
                std::string(what) + " transform must map " + std::to_string(in) + " -> " +
                    std::to_string(out) + " channels");
  }
}

// out += transform(input) for every voxel.
void AccumulateTransformed(const RowMatrix& input, const FeatureTransform& t, VoxelGrid& out) {
  VolumeView view = View(out);
  view.noalias() += input * t.weight.transpose();
  view.rowwise() += t.bias.transpose();
}

}  // namespace

int OverlapMask::CountVisible(int view) const {
  int count = 0;
  for (const auto flag : views.at(view)) count += flag ? 1 : 0;
  return count;
}

int OverlapMask::CountOverlap(int i, int j) const {
  int count = 0;
  for (int s = 0; s < num_voxels(); ++s) count += Overlaps(i, j, s) ? 1 : 0;
  return count;
}

OverlapMask ComputeMasks(std::span<const CameraModel> cams, const GridSpec& spec) {
  if (cams.empty()) throw Error(ErrorCode::kInvalidConfig, "overlap masks need >= 1 camera");
  spec.Validate();
  OverlapMask masks;
  masks.views.assign(cams.size(), std::vector<std::uint8_t>(spec.num_voxels(), 0));
  for (int s = 0; s < spec.num_voxels(); ++s) {
    const Eigen::Vector3d center = spec.Center(s);
    for (size_t i = 0; i < cams.size(); ++i) {
      masks.views[i][s] = cams[i].ProjectVisible(center).has_value() ? 1 : 0;
    }
  }
  return masks;
}

FeatureTransform FeatureTransform::Identity(int channels) {
  return {Eigen::MatrixXd::Identity(channels, channels), Eigen::VectorXd::Zero(channels)};
}

FeatureTransform FeatureTransform::SumHalves(int channels) {
  FeatureTransform t{Eigen::MatrixXd::Zero(channels, 2 * channels),
                     Eigen::VectorXd::Zero(channels)};
  t.weight.leftCols(channels).setIdentity();
  t.weight.rightCols(channels).setIdentity();
  return t;
}

FeatureTransform FeatureTransform::Seeded(int in_channels, int out_channels, std::uint64_t seed,
                                          double scale) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-scale, scale);
  FeatureTransform t{Eigen::MatrixXd(out_channels, in_channels), Eigen::VectorXd(out_channels)};
  for (int r = 0; r < out_channels; ++r) {
    for (int c = 0; c < in_channels; ++c) t.weight(r, c) = dist(rng);
  }
  for (int r = 0; r < out_channels; ++r) t.bias(r) = dist(rng);
  return t;
}

FusionTransforms FusionTransforms::Identity(int channels) {
  return {FeatureTransform::Identity(channels), FeatureTransform::Identity(channels),
          FeatureTransform::SumHalves(channels)};
}

FusionTransforms FusionTransforms::Seeded(int channels, std::uint64_t seed) {
  return {FeatureTransform::Seeded(channels, channels, seed),
          FeatureTransform::Seeded(channels, channels, seed + 1),
          FeatureTransform::Seeded(2 * channels, channels, seed + 2)};
}

VoxelGrid Fuse(std::span<const VoxelGrid> volumes, const OverlapMask& masks,
               const FusionTransforms& transforms, const FusionOptions& options) {
  if (volumes.empty()) throw Error(ErrorCode::kShapeMismatch, "fusion needs >= 1 volume");
  const VoxelGrid& first = volumes.front();
  const int channels = first.channels();
  const int n = first.num_voxels();
  for (const auto& volume : volumes) {
    if (!volume.SameShape(first)) {
      throw Error(ErrorCode::kShapeMismatch, "view volumes differ in shape or channels");
    }
  }
  if (masks.num_views() != static_cast<int>(volumes.size()) || masks.num_voxels() != n) {
    throw Error(ErrorCode::kShapeMismatch, "overlap masks do not match the view volumes");
  }
  CheckTransform(transforms.overlap, channels, channels, "overlap");
  CheckTransform(transforms.non_overlap, channels, channels, "non-overlap");
  CheckTransform(transforms.mix, 2 * channels, channels, "mix");

  VoxelGrid overlap(first.spec(), channels);
  VoxelGrid non_overlap(first.spec(), channels);
  const int views = static_cast<int>(volumes.size());
  const int pairs = views == 1 ? 0 : (options.wrap_around && views > 2 ? views : views - 1);
  if (views == 1) {
    AccumulateTransformed(View(first), transforms.non_overlap, non_overlap);
  }
  RowMatrix overlapped(n, channels);
  RowMatrix separate(n, channels);
  for (int p = 0; p < pairs; ++p) {
    const int i = p;
    const int j = (p + 1) % views;
    const RowMatrix summed = View(volumes[i]) + View(volumes[j]);
    for (int s = 0; s < n; ++s) {
      if (masks.Overlaps(i, j, s)) {
        overlapped.row(s) = summed.row(s);
        separate.row(s).setZero();
      } else {
        overlapped.row(s).setZero();
        separate.row(s) = summed.row(s);
      }
    }
    AccumulateTransformed(overlapped, transforms.overlap, overlap);
    AccumulateTransformed(separate, transforms.non_overlap, non_overlap);
  }

  RowMatrix concat(n, 2 * channels);
  concat.leftCols(channels) = View(overlap);
  concat.rightCols(channels) = View(non_overlap);
  VoxelGrid mixed(first.spec(), channels);
  AccumulateTransformed(concat, transforms.mix, mixed);
  return mixed;
}

std::vector<VoxelGrid> OverlapAblationSwap(std::span<const VoxelGrid> volumes,
                                           const OverlapMask& masks, int source_view,
                                           int replacement_view) {
  const int views = static_cast<int>(volumes.size());
  if (source_view < 0 || source_view >= views || replacement_view < 0 ||
      replacement_view >= views) {
    throw Error(ErrorCode::kIndexOutOfRange,
                "view indices " + std::to_string(source_view) + ", " +
                    std::to_string(replacement_view) + " outside [0, " + std::to_string(views) +
                    ")");
  }
  if (masks.num_views() != views) {
    throw Error(ErrorCode::kShapeMismatch, "overlap masks do not match the view volumes");
  }
  std::vector<VoxelGrid> out(volumes.begin(), volumes.end());
  const VoxelGrid& replacement = volumes[replacement_view];
  VoxelGrid& target = out[source_view];
  for (int s = 0; s < target.num_voxels(); ++s) {
    if (!masks.Overlaps(source_view, replacement_view, s)) continue;
    const auto src = replacement.at(s);
    std::copy(src.begin(), src.end(), target.at(s).begin());
  }
  return out;
}

}  // namespace hetdepth
