#include "epiland/discretization.hpp"

#include <cmath>
#include <string>

#include "epiland/errors.hpp"

namespace epiland {

Boundary parse_boundary(std::string_view name) {
  if (name == "neumann") return Boundary::neumann;
  if (name == "periodic") return Boundary::periodic;
  throw ConfigError("unknown boundary condition '" + std::string(name) + "'");
}

std::string_view to_string(Boundary bc) { return bc == Boundary::neumann ? "neumann" : "periodic"; }

ImplicitOperator::ImplicitOperator(std::size_t n, Boundary bc, double r) : n_(n), bc_(bc), r_(r) {
  diag_.assign(n, 1.0 + 2.0 * r);
  const double off = -r;
  if (bc == Boundary::neumann) {
    diag_.front() = 1.0 + r;
    diag_.back() = 1.0 + r;
  } else {
    gamma_ = -diag_.front();
    diag_.front() -= gamma_;
    diag_.back() -= off * off / gamma_;
  }

  cprime_.resize(n);
  inv_denom_.resize(n);
  inv_denom_[0] = 1.0 / diag_[0];
  cprime_[0] = off * inv_denom_[0];
  for (std::size_t i = 1; i < n; ++i) {
    inv_denom_[i] = 1.0 / (diag_[i] - off * cprime_[i - 1]);
    cprime_[i] = off * inv_denom_[i];
  }

  if (bc == Boundary::periodic) {
    // A = T' + u v^T with u = (gamma, 0, .., 0, off), v = (1, 0, .., 0, off / gamma).
    z_.assign(n, 0.0);
    z_.front() = gamma_;
    z_.back() = off;
    thomas(z_);
    vz_denom_ = 1.0 + z_.front() + (off / gamma_) * z_.back();
  }
}

void ImplicitOperator::thomas(std::span<double> d) const {
  const double off = -r_;
  d[0] *= inv_denom_[0];
  for (std::size_t i = 1; i < n_; ++i) d[i] = (d[i] - off * d[i - 1]) * inv_denom_[i];
  for (std::size_t i = n_ - 1; i-- > 0;) d[i] -= cprime_[i] * d[i + 1];
}

void ImplicitOperator::solve(std::span<double> rhs) const {
  thomas(rhs);
  if (bc_ == Boundary::periodic) {
    const double vy = rhs.front() + (-r_ / gamma_) * rhs.back();
    const double f = vy / vz_denom_;
    for (std::size_t i = 0; i < n_; ++i) rhs[i] -= f * z_[i];
  }
}

void ImplicitOperator::apply(std::span<const double> x, std::span<double> out) const {
  const std::size_t n = n_;
  for (std::size_t i = 0; i < n; ++i) {
    double lap;
    if (bc_ == Boundary::neumann) {
      const double left = i == 0 ? x[i] : x[i - 1];
      const double right = i == n - 1 ? x[i] : x[i + 1];
      lap = 2.0 * x[i] - left - right;
    } else {
      lap = 2.0 * x[i] - x[(i + n - 1) % n] - x[(i + 1) % n];
    }
    out[i] = x[i] + r_ * lap;
  }
}

Discretization Discretization::build(std::size_t J, Boundary bc, double d1, double d2, double dt,
                                     double domain_length) {
  if (J < 4) throw ConfigError("solver.J must be at least 4");
  if (!(dt > 0.0)) throw ConfigError("solver.dt must be positive");
  if (!(d1 >= 0.0) || !(d2 >= 0.0)) throw ConfigError("diffusion constants must be non-negative");
  if (!(domain_length > 0.0)) throw ConfigError("solver.domain_length must be positive");

  Discretization d;
  d.J_ = J;
  d.bc_ = bc;
  d.h_ = domain_length / static_cast<double>(J);
  d.dt_ = dt;
  d.d1_ = d1;
  d.d2_ = d2;
  d.length_ = domain_length;
  const double inv_h2 = 1.0 / (d.h_ * d.h_);
  d.op_u_ = ImplicitOperator(d.nodes(), bc, dt * d1 * inv_h2);
  d.op_v_ = ImplicitOperator(d.nodes(), bc, dt * d2 * inv_h2);

  d.weights_.assign(d.nodes(), d.h_);
  if (bc == Boundary::neumann) {
    d.weights_.front() = 1.5 * d.h_;
    d.weights_.back() = 1.5 * d.h_;
  }
  return d;
}

std::vector<double> Discretization::node_positions() const {
  std::vector<double> x(nodes());
  const std::size_t offset = bc_ == Boundary::neumann ? 1 : 0;
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i + offset) * h_;
  return x;
}

void Discretization::apply_laplacian(std::span<const double> x, std::span<double> out) const {
  // I + 1 * T gives T after removing the identity.
  const ImplicitOperator unit(nodes(), bc_, 1.0);
  unit.apply(x, out);
  const double inv_h2 = 1.0 / (h_ * h_);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (out[i] - x[i]) * inv_h2;
}

Eigen::MatrixXd Discretization::laplacian_matrix() const {
  const auto n = static_cast<Eigen::Index>(nodes());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  const double inv_h2 = 1.0 / (h_ * h_);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, i) = 2.0 * inv_h2;
    if (i > 0) a(i, i - 1) = -inv_h2;
    if (i < n - 1) a(i, i + 1) = -inv_h2;
  }
  if (bc_ == Boundary::neumann) {
    a(0, 0) = inv_h2;
    a(n - 1, n - 1) = inv_h2;
  } else {
    a(0, n - 1) = -inv_h2;
    a(n - 1, 0) = -inv_h2;
  }
  return a;
}

}  // namespace epiland
