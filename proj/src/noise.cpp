#include "epiland/noise.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>

#include "epiland/errors.hpp"

namespace epiland {
namespace {

// FFTW planning is not thread-safe; execution on fresh buffers is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

double uniform_spacing(std::span<const double> points) {
  if (points.size() < 2) return 1.0;
  const double h = points[1] - points[0];
  if (!(h > 0.0)) throw ConfigError("noise grid must be strictly increasing");
  for (std::size_t i = 2; i < points.size(); ++i) {
    if (std::abs((points[i] - points[i - 1]) - h) > 1e-9 * h) {
      throw ConfigError("noise grid must be uniformly spaced");
    }
  }
  return h;
}

}  // namespace

NoiseModel NoiseModel::qwiener(double correlation_length, std::span<const double> points,
                               double clip_tol) {
  if (!(correlation_length > 0.0)) throw ConfigError("noise.l must be positive");
  if (points.empty()) throw ConfigError("noise grid is empty");
  NoiseModel nm;
  nm.mode_ = NoiseMode::qwiener;
  nm.l_ = correlation_length;
  nm.points_.assign(points.begin(), points.end());
  nm.h_ = uniform_spacing(points);

  // Padded even extension: r_k = q(h * min(k, m - k)), m = 2n.
  const std::size_t n = points.size();
  const std::size_t m = 2 * n;
  std::vector<std::complex<double>> row(m), eig(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double lag = nm.h_ * static_cast<double>(std::min(k, m - k));
    row[k] = std::exp(-lag / correlation_length);
  }
  {
    std::lock_guard lock(planner_mutex());
    fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(m), reinterpret_cast<fftw_complex*>(row.data()),
                                      reinterpret_cast<fftw_complex*>(eig.data()), FFTW_FORWARD,
                                      FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);
  }

  nm.spectrum_.resize(m);
  double lmax = 0.0;
  double lmin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < m; ++k) {
    nm.spectrum_[k] = eig[k].real();
    lmax = std::max(lmax, nm.spectrum_[k]);
    lmin = std::min(lmin, nm.spectrum_[k]);
  }
  nm.min_raw_eigenvalue_ = lmin;
  if (lmin < -clip_tol * lmax) throw NonEmbeddableKernel(lmin);
  for (double& lam : nm.spectrum_) {
    if (lam < 0.0) {
      lam = 0.0;
      ++nm.clip_count_;
    }
  }
  return nm;
}

NoiseModel NoiseModel::white(std::size_t n, double h) {
  if (n == 0) throw ConfigError("noise grid is empty");
  if (!(h > 0.0)) throw ConfigError("grid spacing must be positive");
  NoiseModel nm;
  nm.mode_ = NoiseMode::white;
  nm.h_ = h;
  nm.points_.resize(n);
  for (std::size_t i = 0; i < n; ++i) nm.points_[i] = static_cast<double>(i + 1) * h;
  return nm;
}

double NoiseModel::kernel(double x, double y) const {
  if (mode_ == NoiseMode::white) return x == y ? 1.0 / h_ : 0.0;
  return std::exp(-std::abs(x - y) / l_);
}

Eigen::MatrixXd NoiseModel::covariance() const {
  const auto n = static_cast<Eigen::Index>(points_.size());
  Eigen::MatrixXd c(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      c(i, j) = mode_ == NoiseMode::white ? (i == j ? 1.0 / h_ : 0.0)
                                          : kernel(points_[static_cast<std::size_t>(i)],
                                                   points_[static_cast<std::size_t>(j)]);
    }
  }
  return c;
}

struct IncrementSampler::Fft {
  std::size_t m = 0;
  fftw_complex* in = nullptr;
  fftw_complex* out = nullptr;
  fftw_plan plan = nullptr;

  explicit Fft(std::size_t size) : m(size) {
    in = fftw_alloc_complex(m);
    out = fftw_alloc_complex(m);
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_1d(static_cast<int>(m), in, out, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  ~Fft() {
    {
      std::lock_guard lock(planner_mutex());
      fftw_destroy_plan(plan);
    }
    fftw_free(in);
    fftw_free(out);
  }
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;
};

IncrementSampler::IncrementSampler(std::shared_ptr<const NoiseModel> model) : model_(std::move(model)) {
  if (model_->mode() == NoiseMode::qwiener) fft_ = std::make_unique<Fft>(model_->embedding_size());
}

IncrementSampler::~IncrementSampler() = default;
IncrementSampler::IncrementSampler(IncrementSampler&&) noexcept = default;
IncrementSampler& IncrementSampler::operator=(IncrementSampler&&) noexcept = default;

void IncrementSampler::sample(double dt, Rng& rng, NoiseIncrement& out) {
  const std::size_t n = model_->size();
  out.dt = dt;
  out.dw1.resize(n);
  out.dw2.resize(n);

  if (model_->mode() == NoiseMode::white) {
    const double scale = std::sqrt(dt / model_->spacing());
    for (std::size_t i = 0; i < n; ++i) out.dw1[i] = scale * normal_(rng);
    for (std::size_t i = 0; i < n; ++i) out.dw2[i] = scale * normal_(rng);
    return;
  }

  const auto& lambda = model_->spectrum();
  const std::size_t m = fft_->m;
  const double inv_m = dt / static_cast<double>(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double s = std::sqrt(lambda[k] * inv_m);
    fft_->in[k][0] = s * normal_(rng);
    fft_->in[k][1] = s * normal_(rng);
  }
  fftw_execute_dft(fft_->plan, fft_->in, fft_->out);
  for (std::size_t i = 0; i < n; ++i) {
    out.dw1[i] = fft_->out[i][0];
    out.dw2[i] = fft_->out[i][1];
  }
}

NoiseIncrement sample_increment(const NoiseModel& model, double dt, Rng& rng) {
  IncrementSampler sampler(std::shared_ptr<const NoiseModel>(std::shared_ptr<const NoiseModel>{}, &model));
  NoiseIncrement inc;
  sampler.sample(dt, rng, inc);
  return inc;
}

CholeskySampler::CholeskySampler(const NoiseModel& model) {
  Eigen::MatrixXd c = model.covariance();
  Eigen::LLT<Eigen::MatrixXd> llt(c);
  if (llt.info() != Eigen::Success) {
    c.diagonal().array() += 1e-12;
    llt.compute(c);
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error("Cholesky factorization of the covariance failed");
    }
  }
  lower_ = llt.matrixL();
  z_.resize(c.rows());
}

void CholeskySampler::sample(double dt, Rng& rng, NoiseIncrement& out) {
  const double s = std::sqrt(dt);
  const auto n = static_cast<std::size_t>(z_.size());
  out.dt = dt;
  out.dw1.resize(n);
  out.dw2.resize(n);
  for (auto* channel : {&out.dw1, &out.dw2}) {
    for (Eigen::Index i = 0; i < z_.size(); ++i) z_[i] = normal_(rng);
    Eigen::Map<Eigen::VectorXd> dst(channel->data(), z_.size());
    dst.noalias() = lower_.triangularView<Eigen::Lower>() * z_;
    dst *= s;
  }
}

NoiseIncrement cholesky_oracle(const NoiseModel& model, double dt, Rng& rng) {
  CholeskySampler sampler(model);
  NoiseIncrement inc;
  sampler.sample(dt, rng, inc);
  return inc;
}

}  // namespace epiland
