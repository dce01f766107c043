#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace epiland {

/// Invalid or inconsistent user configuration (bad wells, missing keys, ...).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A query outside the region on which a sampled field is defined.
class DomainError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Violated operation precondition (e.g. a trajectory that does not start in
/// the basin being studied).
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// The circulant embedding of the covariance has a significantly negative
/// eigenvalue, so it cannot be used for exact sampling.
class NonEmbeddableKernel : public std::runtime_error {
 public:
  explicit NonEmbeddableKernel(double min_eigenvalue)
      : std::runtime_error("covariance is not embeddable: minimum eigenvalue " +
                           std::to_string(min_eigenvalue)),
        min_eigenvalue_(min_eigenvalue) {}
  double min_eigenvalue() const noexcept { return min_eigenvalue_; }

 private:
  double min_eigenvalue_;
};

/// Base class for aborts of a running simulation.
class SimulationAbort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A node left the bounds of the mollified landscape.
class DomainEscape : public SimulationAbort {
 public:
  DomainEscape(double t, std::size_t node)
      : SimulationAbort("state left the landscape bounds at t=" + std::to_string(t) +
                        ", node " + std::to_string(node)),
        t_(t),
        node_(node) {}
  double time() const noexcept { return t_; }
  std::size_t node() const noexcept { return node_; }

 private:
  double t_;
  std::size_t node_;
};

/// A non-finite value appeared in the state.
class NumericalAbort : public SimulationAbort {
 public:
  explicit NumericalAbort(std::size_t step)
      : SimulationAbort("non-finite state at step " + std::to_string(step)), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

}  // namespace epiland
