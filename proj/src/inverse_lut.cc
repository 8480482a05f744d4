#include "hetdepth/inverse_lut.h"

#include <algorithm>
#include <string>

#include "hetdepth/error.h"

namespace hetdepth {

InverseLut::InverseLut(std::vector<double> xs, std::vector<double> ys)
    : xs_(std::move(xs)), ys_(std::move(ys)) {
  if (xs_.size() != ys_.size()) {
    throw Error(ErrorCode::kInvalidConfig, "inverse LUT abscissa/ordinate length mismatch");
  }
  if (static_cast<int>(xs_.size()) < kMinLutResolution) {
    throw Error(ErrorCode::kInvalidConfig,
                "inverse LUT needs at least " + std::to_string(kMinLutResolution) +
                    " samples, got " + std::to_string(xs_.size()));
  }
  for (size_t i = 1; i < xs_.size(); ++i) {
    if (!(xs_[i] > xs_[i - 1]) || !(ys_[i] > ys_[i - 1])) {
      throw Error(ErrorCode::kNonMonotoneDistortion,
                  "forward map not strictly increasing at sample " + std::to_string(i));
    }
  }
}

InverseLut InverseLut::Tabulate(const std::function<double(double)>& forward, double x_min,
                                double x_max, int resolution) {
  if (resolution < kMinLutResolution) {
    throw Error(ErrorCode::kInvalidConfig,
                "inverse LUT needs at least " + std::to_string(kMinLutResolution) +
                    " samples, got " + std::to_string(resolution));
  }
  if (!(x_max > x_min)) {
    throw Error(ErrorCode::kInvalidConfig, "inverse LUT domain is empty");
  }
  std::vector<double> xs(resolution);
  std::vector<double> ys(resolution);
  const double step = (x_max - x_min) / (resolution - 1);
  for (int i = 0; i < resolution; ++i) {
    xs[i] = i + 1 == resolution ? x_max : x_min + step * i;
    ys[i] = forward(xs[i]);
  }
  return InverseLut(std::move(xs), std::move(ys));
}

double InverseLut::Seed(double y) const {
  if (y <= ys_.front()) return xs_.front();
  if (y >= ys_.back()) return xs_.back();
  const auto it = std::upper_bound(ys_.begin(), ys_.end(), y);
  const size_t hi = static_cast<size_t>(it - ys_.begin());
  const size_t lo = hi - 1;
  const double t = (y - ys_[lo]) / (ys_[hi] - ys_[lo]);
  return xs_[lo] + t * (xs_[hi] - xs_[lo]);
}

}  // namespace hetdepth
