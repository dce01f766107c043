#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "epiland/rng.hpp"

namespace epiland {

enum class NoiseMode { qwiener, white };

/// Spatial covariance of the Q-Wiener increments on a uniform 1D grid.
///
/// In `qwiener` mode C_ij = exp(-|x_i - x_j| / l) and sampling goes through a
/// circulant embedding of size 2n whose spectrum is computed once here. In
/// `white` mode C = I / h (scaled iid approximation of space-time white noise).
class NoiseModel {
 public:
  /// Throws NonEmbeddableKernel if an embedding eigenvalue is below
  /// -clip_tol * max eigenvalue; smaller negative eigenvalues are set to 0.
  static NoiseModel qwiener(double correlation_length, std::span<const double> points,
                            double clip_tol = 1e-10);
  static NoiseModel white(std::size_t n, double h);

  NoiseMode mode() const noexcept { return mode_; }
  double correlation_length() const noexcept { return l_; }
  std::size_t size() const noexcept { return points_.size(); }
  const std::vector<double>& points() const noexcept { return points_; }
  double spacing() const noexcept { return h_; }
  /// Eigenvalues of the circulant embedding (empty in white mode).
  const std::vector<double>& spectrum() const noexcept { return spectrum_; }
  std::size_t embedding_size() const noexcept { return spectrum_.size(); }
  std::size_t clip_count() const noexcept { return clip_count_; }
  double min_raw_eigenvalue() const noexcept { return min_raw_eigenvalue_; }

  double kernel(double x, double y) const;
  /// Dense covariance matrix C of one unit-time increment.
  Eigen::MatrixXd covariance() const;

 private:
  NoiseModel() = default;

  NoiseMode mode_ = NoiseMode::qwiener;
  double l_ = 0.0;
  double h_ = 0.0;
  std::vector<double> points_;
  std::vector<double> spectrum_;
  std::size_t clip_count_ = 0;
  double min_raw_eigenvalue_ = 0.0;
};

/// Increments of the two independent channels over one time step.
struct NoiseIncrement {
  std::vector<double> dw1;
  std::vector<double> dw2;
  double dt = 0.0;
};

/// Draws increments N(0, dt C) for both channels from one spectral synthesis:
/// the real part of the transform feeds channel 1, the imaginary part channel 2.
/// Owns its transform buffers, so give each trajectory its own sampler.
class IncrementSampler {
 public:
  explicit IncrementSampler(std::shared_ptr<const NoiseModel> model);
  ~IncrementSampler();
  IncrementSampler(const IncrementSampler&) = delete;
  IncrementSampler& operator=(const IncrementSampler&) = delete;
  IncrementSampler(IncrementSampler&&) noexcept;
  IncrementSampler& operator=(IncrementSampler&&) noexcept;

  void sample(double dt, Rng& rng, NoiseIncrement& out);
  const NoiseModel& model() const noexcept { return *model_; }

 private:
  struct Fft;
  std::shared_ptr<const NoiseModel> model_;
  std::unique_ptr<Fft> fft_;
  std::normal_distribution<double> normal_;
};

NoiseIncrement sample_increment(const NoiseModel& model, double dt, Rng& rng);

/// Reference sampler through the lower Cholesky factor of C (with 1e-12
/// diagonal jitter if the plain factorization fails).
class CholeskySampler {
 public:
  explicit CholeskySampler(const NoiseModel& model);
  void sample(double dt, Rng& rng, NoiseIncrement& out);

 private:
  Eigen::MatrixXd lower_;
  Eigen::VectorXd z_;
  std::normal_distribution<double> normal_;
};

NoiseIncrement cholesky_oracle(const NoiseModel& model, double dt, Rng& rng);

}  // namespace epiland
