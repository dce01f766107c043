#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace epiland {

enum class Boundary { neumann, periodic };

Boundary parse_boundary(std::string_view name);
std::string_view to_string(Boundary bc);

/// I + r T, with T = tridiag(-1, 2, -1) carrying the boundary modification
/// (Neumann: first/last diagonal entry 1; periodic: wrap-around entries), held
/// in factored form. Neumann uses the Thomas algorithm, periodic adds a
/// Sherman-Morrison correction for the corner entries.
class ImplicitOperator {
 public:
  ImplicitOperator() = default;
  ImplicitOperator(std::size_t n, Boundary bc, double r);

  /// Overwrites `rhs` with the solution x of (I + r T) x = rhs.
  void solve(std::span<double> rhs) const;
  /// out = (I + r T) x.
  void apply(std::span<const double> x, std::span<double> out) const;

  std::size_t size() const noexcept { return n_; }
  double coefficient() const noexcept { return r_; }

 private:
  void thomas(std::span<double> d) const;

  std::size_t n_ = 0;
  Boundary bc_ = Boundary::neumann;
  double r_ = 0.0;
  std::vector<double> diag_;       // diagonal of the (modified) tridiagonal part
  std::vector<double> cprime_;     // Thomas forward coefficients
  std::vector<double> inv_denom_;  // Thomas pivots, inverted
  std::vector<double> z_;          // periodic: solution of the corner correction
  double gamma_ = 0.0;
  double vz_denom_ = 1.0;
};

/// Finite-difference grid on (0, L) and the two factored implicit operators
/// (I + dt d_k A), where A is the centered-difference negative Laplacian.
///
/// Neumann grids carry the J-1 interior nodes x_j = j h, j = 1..J-1, with the
/// boundary value reflected from the neighbouring node. Periodic grids carry J
/// nodes x_j = j h, j = 0..J-1.
class Discretization {
 public:
  /// Throws ConfigError unless J >= 4, dt > 0, d1, d2 >= 0 and length > 0.
  /// A zero diffusion constant switches the corresponding Laplacian off.
  static Discretization build(std::size_t J, Boundary bc, double d1, double d2, double dt,
                              double domain_length = 1.0);

  std::size_t J() const noexcept { return J_; }
  std::size_t nodes() const noexcept { return bc_ == Boundary::neumann ? J_ - 1 : J_; }
  double h() const noexcept { return h_; }
  double dt() const noexcept { return dt_; }
  double d1() const noexcept { return d1_; }
  double d2() const noexcept { return d2_; }
  double domain_length() const noexcept { return length_; }
  Boundary bc() const noexcept { return bc_; }
  std::vector<double> node_positions() const;

  const ImplicitOperator& implicit_u() const noexcept { return op_u_; }
  const ImplicitOperator& implicit_v() const noexcept { return op_v_; }

  /// out = A x.
  void apply_laplacian(std::span<const double> x, std::span<double> out) const;
  /// Dense A, for checks.
  Eigen::MatrixXd laplacian_matrix() const;

  /// Trapezoid weights for the node values (boundary nodes of a Neumann grid
  /// absorb the reflected ghost segment). They sum to domain_length().
  const std::vector<double>& quadrature_weights() const noexcept { return weights_; }

 private:
  std::size_t J_ = 0;
  Boundary bc_ = Boundary::neumann;
  double h_ = 0.0;
  double dt_ = 0.0;
  double d1_ = 0.0;
  double d2_ = 0.0;
  double length_ = 1.0;
  ImplicitOperator op_u_;
  ImplicitOperator op_v_;
  std::vector<double> weights_;
};

/// Both fields at one time.
struct FieldState {
  double t = 0.0;
  std::vector<double> u;
  std::vector<double> v;
};

}  // namespace epiland
