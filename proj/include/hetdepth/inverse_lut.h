#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

namespace hetdepth {

inline constexpr int kMinLutResolution = 16;

// Tabulated inverse of a strictly increasing scalar map y = f(x) on
// [x_min, x_max]. Inversion is a binary search plus linear interpolation; the
// result seeds a Newton polish through Refine().
class InverseLut {
 public:
  // Throws Error(kInvalidConfig) for fewer than kMinLutResolution samples or
  // mismatched lengths, Error(kNonMonotoneDistortion) unless both `xs` and
  // `ys` are strictly increasing.
  InverseLut(std::vector<double> xs, std::vector<double> ys);

  // Samples `forward` at `resolution` uniformly spaced x in [x_min, x_max].
  static InverseLut Tabulate(const std::function<double(double)>& forward, double x_min,
                             double x_max, int resolution);

  int resolution() const { return static_cast<int>(xs_.size()); }
  double x_min() const { return xs_.front(); }
  double x_max() const { return xs_.back(); }
  double y_min() const { return ys_.front(); }
  double y_max() const { return ys_.back(); }
  bool Contains(double y) const { return y >= ys_.front() && y <= ys_.back(); }
  std::span<const double> xs() const { return xs_; }
  std::span<const double> ys() const { return ys_; }

  // Interpolated inverse; y is clamped to the table range.
  double Seed(double y) const;

  struct Refined {
    double x = 0.0;
    double residual = 0.0;  // |f(x) - y|
    int iterations = 0;
  };

  // Seed() followed by at most `max_iterations` Newton steps on f(x) - y,
  // stopping once |f(x) - y| < tolerance. Steps are kept inside the table
  // domain.
  template <typename F, typename DF>
  Refined Refine(double y, F&& f, DF&& df, int max_iterations = 5,
                 double tolerance = 1e-10) const;

 private:
  std::vector<double> xs_;
  std::vector<double> ys_;
};

template <typename F, typename DF>
InverseLut::Refined InverseLut::Refine(double y, F&& f, DF&& df, int max_iterations,
                                       double tolerance) const {
  Refined out;
  out.x = Seed(y);
  double r = f(out.x) - y;
  while (out.iterations < max_iterations && !(std::abs(r) < tolerance)) {
    const double slope = df(out.x);
    if (!(slope > 0.0)) break;
    double next = out.x - r / slope;
    if (next < x_min()) next = x_min();
    if (next > x_max()) next = x_max();
    out.x = next;
    r = f(out.x) - y;
    ++out.iterations;
  }
  // One extra step once inside tolerance pushes the root to machine precision.
  if (std::abs(r) < tolerance && r != 0.0) {
    const double slope = df(out.x);
    if (slope > 0.0) {
      const double next = out.x - r / slope;
      const double r_next = f(next) - y;
      if (std::abs(r_next) <= std::abs(r) && next >= x_min() && next <= x_max()) {
        out.x = next;
        r = r_next;
      }
    }
  }
  out.residual = std::abs(r);
  return out;
}

}  // namespace hetdepth
