#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>
#include <utility>
#include <variant>
#include <vector>

#include "quantlim/intervals.hpp"
#include "quantlim/rng.hpp"

namespace quantlim {

using ParameterPoint = Eigen::VectorXd;

// Box-constrained parameter domain. Bounds are closed except for coordinates
// listed in open_coords, which must stay strictly interior.
struct ParameterSpace {
  int dim = 0;
  std::vector<Interval> bounds;
  std::vector<int> open_coords;

  void validate() const;
  bool contains(const ParameterPoint& theta) const;
  // Throws ValidationError on dimension mismatch, non-finite entries, or
  // points outside the box.
  void require_point(const ParameterPoint& theta) const;
};

// Scalar observation x ~ N(alpha, beta) with theta = (.., alpha, beta, ..):
// alpha = theta[theta_offset], beta = theta[theta_offset + 1] (variance > 0).
struct ScalarGaussianMeanVar {
  int theta_offset = 0;
};

// K-dimensional x ~ N(mu, I) with mu = theta[theta_offset .. theta_offset+K).
struct IsotropicGaussianMeanVector {
  int dim = 1;
  int theta_offset = 0;
};

// x ~ N(H theta, Sigma) with fixed design H and fixed positive-definite
// covariance. Rectangle probabilities are exact only for diagonal Sigma; the
// general case routes through the Monte Carlo path in the cell tables.
struct GaussianLinear {
  Eigen::MatrixXd design;  // K x D_theta
  Eigen::MatrixXd cov;     // K x K

  bool diagonal_cov() const;
};

class ObservationModel {
 public:
  using Variant = std::variant<ScalarGaussianMeanVar, IsotropicGaussianMeanVector, GaussianLinear>;

  ObservationModel() : v_(ScalarGaussianMeanVar{}) {}
  ObservationModel(ScalarGaussianMeanVar m) : v_(std::move(m)) {}
  ObservationModel(IsotropicGaussianMeanVector m) : v_(std::move(m)) {}
  ObservationModel(GaussianLinear m) : v_(std::move(m)) {}

  const Variant& variant() const { return v_; }

  int dim_x() const;
  // Smallest theta dimension this model's bindings require.
  int min_theta_dim() const;
  // True when rectangle probabilities have an exact product form.
  bool analytic_rects() const;

  // Density value at x; integrates to one over R^K.
  double pdf(const Eigen::VectorXd& x, const ParameterPoint& theta) const;

  // Exact P(x in rect) as a product of per-coordinate normal CDF differences.
  // Throws NumericalError for a non-diagonal GaussianLinear covariance (the
  // caller must use the Monte Carlo path instead).
  double rect_prob(const Rect& rect, const ParameterPoint& theta) const;

  // rect_prob together with its closed-form gradient with respect to the full
  // theta vector (zeros at coordinates the model does not touch).
  std::pair<double, Eigen::VectorXd> rect_prob_grad(const Rect& rect,
                                                    const ParameterPoint& theta) const;

  // Affine sampling form x = mean + transform * z with z ~ N(0, I); used by
  // both the Monte Carlo tables and the estimation harness.
  std::pair<Eigen::VectorXd, Eigen::MatrixXd> sampling_transform(const ParameterPoint& theta) const;

  Eigen::VectorXd sample(const ParameterPoint& theta, CounterRng& rng) const;

  // Canonical structural descriptor; two models are "the same statistical
  // model" exactly when their descriptors compare equal.
  nlohmann::json descriptor() const;

  // Descriptor of the marginal law of coordinates [begin, begin+len); valid
  // because all built-in models have independent coordinates (diagonal
  // covariance required for GaussianLinear).
  nlohmann::json marginal_descriptor(int begin, int len) const;

  const char* kind_name() const;

 private:
  Variant v_;
};

}  // namespace quantlim
