#pragma once

#include <functional>

#include "mmf/gaussian.hpp"

namespace mmf {

/// x_n = f(x_{n-1}, n) + w_n,  y_n = h(x_n) + v_n,  w ~ N(0, Q), v ~ N(0, R).
///
/// The time index n is passed to the transition so that non-stationary
/// systems can be expressed; n = 1 is the first transition out of the prior.
/// Jacobians are optional and only needed by the EKF.
struct DynamicalModel {
  using Transition = std::function<Vector(const Vector&, int)>;
  using Measurement = std::function<Vector(const Vector&)>;
  using TransitionJacobian = std::function<Matrix(const Vector&, int)>;
  using MeasurementJacobian = std::function<Matrix(const Vector&)>;

  Eigen::Index state_dim = 1;
  Eigen::Index obs_dim = 1;
  Transition transition;
  Measurement measurement;
  Matrix process_noise;
  Matrix obs_noise;
  TransitionJacobian transition_jacobian;
  MeasurementJacobian measurement_jacobian;

  bool has_jacobians() const { return transition_jacobian && measurement_jacobian; }

  /// Checks shapes and symmetry of Q and R and that f and h are set.
  void validate() const;
};

/// x_n = A x_{n-1} + b + w_n,  y_n = H x_n + v_n.
struct LinearGaussianModel {
  Matrix A;
  Vector b;
  Matrix H;
  Matrix Q;
  Matrix R;

  /// The same system as a DynamicalModel, with constant Jacobians.
  DynamicalModel as_dynamical_model() const;
};

}  // namespace mmf
