#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace epiland {

/// A point of the (u, v) state plane.
struct Point {
  double u = 0.0;
  double v = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

/// One quadratic well a * |p - center|^2 of the landscape.
struct Well {
  Point center;
  double weight = 1.0;
};

/// Min-of-quadratics potential F(p) = min_k a_k |p - c_k|^2, evaluated exactly.
class RawLandscape {
 public:
  RawLandscape(std::vector<Well> wells, std::vector<std::string> labels);

  double operator()(Point p) const;
  /// Value of the k-th quadratic alone.
  double branch(std::size_t k, Point p) const;
  /// Index of the minimizing branch; ties go to the lowest index.
  std::size_t classify(Point p) const;

  std::size_t size() const noexcept { return wells_.size(); }
  const std::vector<Well>& wells() const noexcept { return wells_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  double max_weight() const noexcept;

 private:
  std::vector<Well> wells_;
  std::vector<std::string> labels_;
};

/// Validates and builds a raw landscape. Throws ConfigError on an empty well
/// list, non-positive weights, duplicate centers or a label count mismatch.
/// Empty `labels` are replaced by "well0", "well1", ...
RawLandscape build_landscape(std::vector<Well> wells, std::vector<std::string> labels = {});

struct Bounds {
  double u_min = 0.0;
  double u_max = 1.0;
  double v_min = 0.0;
  double v_max = 1.0;

  bool contains(Point p) const noexcept {
    return p.u >= u_min && p.u <= u_max && p.v >= v_min && p.v <= v_max;
  }
  double diagonal() const noexcept;
};

/// Three times the bounding box of the well centers, centered on it (a unit
/// box around a single well).
Bounds default_bounds(const RawLandscape& raw);
/// 2% of the bounds diagonal.
double default_filter_width(const Bounds& bounds);

struct GridSpec {
  Bounds bounds;
  std::size_t resolution = 256;  ///< nodes per axis, >= 64
};

/// Gaussian-smoothed potential sampled on a regular M x M grid, with
/// centered-difference gradients. Queries use bilinear interpolation and never
/// extrapolate. Immutable after construction.
class MollifiedLandscape {
 public:
  double potential(Point p) const;
  /// (-dF/du, -dF/dv) at p.
  Point drift(Point p) const;
  /// Non-throwing drift for hot loops; returns false outside the bounds.
  bool try_drift(Point p, Point& out) const noexcept;

  /// Tolerance on |grad F| at the well centers: 10 * cell * max weight.
  double grad_tol() const noexcept;
  /// Largest interpolated |grad F| over the well centers.
  double max_center_gradient() const;

  const Bounds& bounds() const noexcept { return bounds_; }
  std::size_t resolution() const noexcept { return m_; }
  double cell_u() const noexcept { return du_; }
  double cell_v() const noexcept { return dv_; }
  double cell() const noexcept;
  double filter_width() const noexcept { return filter_width_; }
  const RawLandscape& source() const noexcept { return source_; }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

  Point node(std::size_t i, std::size_t j) const noexcept;
  /// Grid value at node (i, j); i runs along u. Storage is row-major in i.
  double value(std::size_t i, std::size_t j) const noexcept { return grid_[i * m_ + j]; }
  double grad_u(std::size_t i, std::size_t j) const noexcept { return grad_[2 * (i * m_ + j)]; }
  double grad_v(std::size_t i, std::size_t j) const noexcept {
    return grad_[2 * (i * m_ + j) + 1];
  }

 private:
  friend MollifiedLandscape mollify(const RawLandscape&, double, const GridSpec&);
  friend MollifiedLandscape from_grid(const RawLandscape&, const Bounds&, std::size_t,
                                      std::vector<double>);
  explicit MollifiedLandscape(RawLandscape source) : source_(std::move(source)) {}

  void compute_gradients();
  bool locate(Point p, std::size_t& i, std::size_t& j, double& s, double& t) const noexcept;

  RawLandscape source_;
  Bounds bounds_;
  std::size_t m_ = 0;
  double du_ = 0.0;
  double dv_ = 0.0;
  double filter_width_ = 0.0;
  std::vector<double> grid_;
  std::vector<double> grad_;  // interleaved (dF/du, dF/dv)
  std::vector<std::string> warnings_;
};

/// Separable Gaussian convolution (standard deviation `filter_width` in state
/// units, radius 4 standard deviations, replicate padding) of F sampled on the
/// grid. Throws ConfigError if the bounds leave less than 3 * filter_width of
/// margin around any center or if the resolution is below 64.
MollifiedLandscape mollify(const RawLandscape& raw, double filter_width, const GridSpec& grid);

/// Landscape over externally supplied node values (row-major in i, i along u),
/// with the same gradient and interpolation rules and no smoothing.
MollifiedLandscape from_grid(const RawLandscape& raw, const Bounds& bounds, std::size_t resolution,
                             std::vector<double> values);

/// Hessian determinants 4 a_k^2 of the raw wells.
std::vector<double> hessian_dets(const RawLandscape& raw);

struct LimitMeasure {
  std::vector<double> weights;
};

/// Small-noise limit weights, proportional to the inverse Hessian determinants.
LimitMeasure limit_measure(const RawLandscape& raw);

inline std::size_t classify_basin(const RawLandscape& raw, Point p) { return raw.classify(p); }

enum class WeightRule { reciprocal, inverse_sqrt };

/// Well weights from observed basin counts: a = 1/c or a = 1/(2 sqrt(c)).
std::vector<double> weights_from_counts(std::span<const double> counts, WeightRule rule);

}  // namespace epiland
