#include "quantlim/models.hpp"

#include <cmath>
#include <string>

#include "quantlim/errors.hpp"
#include "quantlim/normal.hpp"

namespace quantlim {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

void require_beta_positive(double beta) {
  if (!(beta > 0.0)) {
    throw ValidationError("ScalarGaussianMeanVar requires variance beta > 0, got " +
                          std::to_string(beta));
  }
}

}  // namespace

void ParameterSpace::validate() const {
  if (dim <= 0) throw ValidationError("parameter_space.dim must be positive");
  if (static_cast<int>(bounds.size()) != dim) {
    throw ValidationError("parameter_space.bounds must have one entry per coordinate");
  }
  for (int i = 0; i < dim; ++i) {
    if (!(bounds[i].lo < bounds[i].hi)) {
      throw ValidationError("parameter_space.bounds[" + std::to_string(i) +
                            "]: lower must be strictly below upper");
    }
  }
  for (int c : open_coords) {
    if (c < 0 || c >= dim) {
      throw ValidationError("parameter_space.open_coords: coordinate " + std::to_string(c) +
                            " out of range");
    }
  }
}

bool ParameterSpace::contains(const ParameterPoint& theta) const {
  if (theta.size() != dim) return false;
  for (int i = 0; i < dim; ++i) {
    if (!std::isfinite(theta[i])) return false;
    if (theta[i] < bounds[i].lo || theta[i] > bounds[i].hi) return false;
  }
  for (int c : open_coords) {
    if (theta[c] <= bounds[c].lo || theta[c] >= bounds[c].hi) return false;
  }
  return true;
}

void ParameterSpace::require_point(const ParameterPoint& theta) const {
  if (theta.size() != dim) {
    throw ValidationError("theta has length " + std::to_string(theta.size()) + ", expected " +
                          std::to_string(dim));
  }
  if (!contains(theta)) throw ValidationError("theta lies outside the parameter space");
}

bool GaussianLinear::diagonal_cov() const {
  for (int i = 0; i < cov.rows(); ++i) {
    for (int j = 0; j < cov.cols(); ++j) {
      if (i != j && cov(i, j) != 0.0) return false;
    }
  }
  return true;
}

int ObservationModel::dim_x() const {
  return std::visit(
      [](const auto& m) -> int {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ScalarGaussianMeanVar>) {
          return 1;
        } else if constexpr (std::is_same_v<T, IsotropicGaussianMeanVector>) {
          return m.dim;
        } else {
          return static_cast<int>(m.design.rows());
        }
      },
      v_);
}

int ObservationModel::min_theta_dim() const {
  return std::visit(
      [](const auto& m) -> int {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ScalarGaussianMeanVar>) {
          return m.theta_offset + 2;
        } else if constexpr (std::is_same_v<T, IsotropicGaussianMeanVector>) {
          return m.theta_offset + m.dim;
        } else {
          return static_cast<int>(m.design.cols());
        }
      },
      v_);
}

bool ObservationModel::analytic_rects() const {
  if (const auto* gl = std::get_if<GaussianLinear>(&v_)) return gl->diagonal_cov();
  return true;
}

const char* ObservationModel::kind_name() const {
  return std::visit(
      [](const auto& m) -> const char* {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ScalarGaussianMeanVar>) {
          return "scalar_gaussian_mean_var";
        } else if constexpr (std::is_same_v<T, IsotropicGaussianMeanVector>) {
          return "isotropic_gaussian_mean_vector";
        } else {
          return "gaussian_linear";
        }
      },
      v_);
}

double ObservationModel::pdf(const Eigen::VectorXd& x, const ParameterPoint& theta) const {
  if (x.size() != dim_x()) {
    throw ValidationError(std::string("pdf: observation has length ") + std::to_string(x.size()) +
                          ", model expects " + std::to_string(dim_x()));
  }
  return std::visit(
      [&](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ScalarGaussianMeanVar>) {
          double alpha = theta[m.theta_offset];
          double beta = theta[m.theta_offset + 1];
          require_beta_positive(beta);
          double s = std::sqrt(beta);
          return norm_pdf((x[0] - alpha) / s) / s;
        } else if constexpr (std::is_same_v<T, IsotropicGaussianMeanVector>) {
          double q = (x - theta.segment(m.theta_offset, m.dim)).squaredNorm();
          return std::exp(-0.5 * q - 0.5 * m.dim * kLog2Pi);
        } else {
          Eigen::VectorXd r = x - m.design * theta;
          Eigen::LLT<Eigen::MatrixXd> llt(m.cov);
          if (llt.info() != Eigen::Success) {
            throw ValidationError("GaussianLinear covariance is not positive definite");
          }
          double log_det = 0.0;
          for (int i = 0; i < m.cov.rows(); ++i) log_det += std::log(llt.matrixL()(i, i));
          double q = r.dot(llt.solve(r));
          return std::exp(-0.5 * q - log_det - 0.5 * m.cov.rows() * kLog2Pi);
        }
      },
      v_);
}

namespace {

// Product of per-axis CDF differences with the gradient taken with respect to
// the per-axis means; shared by all three model kinds.
struct AxisFactors {
  double prob = 1.0;
  Eigen::VectorXd dprob_dmu;  // length K
};

AxisFactors axis_cdf_product(const Rect& rect, const Eigen::VectorXd& mu,
                             const Eigen::VectorXd& sigma, bool want_grad) {
  const int k = static_cast<int>(mu.size());
  Eigen::VectorXd f(k), df(k);
  for (int i = 0; i < k; ++i) {
    double zl = (rect[i].lo - mu[i]) / sigma[i];
    double zh = (rect[i].hi - mu[i]) / sigma[i];
    f[i] = norm_interval_prob(zl, zh);
    df[i] = want_grad ? (norm_pdf_safe(zl) - norm_pdf_safe(zh)) / sigma[i] : 0.0;
  }
  AxisFactors out;
  out.prob = f.prod();
  if (want_grad) {
    out.dprob_dmu.resize(k);
    for (int i = 0; i < k; ++i) {
      double rest = 1.0;
      for (int j = 0; j < k; ++j) {
        if (j != i) rest *= f[j];
      }
      out.dprob_dmu[i] = df[i] * rest;
    }
  }
  return out;
}

void check_rect(const Rect& rect, int dim) {
  if (static_cast<int>(rect.size()) != dim) {
    throw ValidationError("rectangle has " + std::to_string(rect.size()) +
                          " coordinates, model expects " + std::to_string(dim));
  }
  for (std::size_t i = 0; i < rect.size(); ++i) {
    if (!(rect[i].lo < rect[i].hi)) {
      throw ValidationError("rectangle axis " + std::to_string(i) + " has lower >= upper");
    }
  }
}

std::pair<double, Eigen::VectorXd> rect_prob_grad_impl(const ObservationModel& model,
                                                       const Rect& rect,
                                                       const ParameterPoint& theta,
                                                       bool want_grad) {
  check_rect(rect, model.dim_x());
  Eigen::VectorXd grad = want_grad ? Eigen::VectorXd::Zero(theta.size()) : Eigen::VectorXd();
  double prob = 0.0;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ScalarGaussianMeanVar>) {
          double alpha = theta[m.theta_offset];
          double beta = theta[m.theta_offset + 1];
          require_beta_positive(beta);
          double s = std::sqrt(beta);
          double zl = (rect[0].lo - alpha) / s;
          double zh = (rect[0].hi - alpha) / s;
          prob = norm_interval_prob(zl, zh);
          if (want_grad) {
            // d/dalpha Phi(z) = -phi(z)/s, d/dbeta Phi(z) = -z phi(z)/(2 beta)
            grad[m.theta_offset] = (norm_pdf_safe(zl) - norm_pdf_safe(zh)) / s;
            grad[m.theta_offset + 1] =
                (z_times_pdf_safe(zl) - z_times_pdf_safe(zh)) / (2.0 * beta);
          }
        } else if constexpr (std::is_same_v<T, IsotropicGaussianMeanVector>) {
          Eigen::VectorXd mu = theta.segment(m.theta_offset, m.dim);
          Eigen::VectorXd sigma = Eigen::VectorXd::Ones(m.dim);
          AxisFactors af = axis_cdf_product(rect, mu, sigma, want_grad);
          prob = af.prob;
          if (want_grad) grad.segment(m.theta_offset, m.dim) = af.dprob_dmu;
        } else {
          if (!m.diagonal_cov()) {
            throw NumericalError(
                "gaussian_linear: exact rectangle probabilities require a diagonal covariance; "
                "use the Monte Carlo path");
          }
          Eigen::VectorXd mu = m.design * theta;
          Eigen::VectorXd sigma = m.cov.diagonal().cwiseSqrt();
          AxisFactors af = axis_cdf_product(rect, mu, sigma, want_grad);
          prob = af.prob;
          if (want_grad) grad = m.design.transpose() * af.dprob_dmu;
        }
      },
      model.variant());
  return {prob, std::move(grad)};
}

}  // namespace

double ObservationModel::rect_prob(const Rect& rect, const ParameterPoint& theta) const {
  return rect_prob_grad_impl(*this, rect, theta, false).first;
}

std::pair<double, Eigen::VectorXd> ObservationModel::rect_prob_grad(
    const Rect& rect, const ParameterPoint& theta) const {
  return rect_prob_grad_impl(*this, rect, theta, true);
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> ObservationModel::sampling_transform(
    const ParameterPoint& theta) const {
  return std::visit(
      [&](const auto& m) -> std::pair<Eigen::VectorXd, Eigen::MatrixXd> {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ScalarGaussianMeanVar>) {
          double alpha = theta[m.theta_offset];
          double beta = theta[m.theta_offset + 1];
          require_beta_positive(beta);
          Eigen::VectorXd mean(1);
          mean << alpha;
          Eigen::MatrixXd a(1, 1);
          a << std::sqrt(beta);
          return {mean, a};
        } else if constexpr (std::is_same_v<T, IsotropicGaussianMeanVector>) {
          return {theta.segment(m.theta_offset, m.dim),
                  Eigen::MatrixXd::Identity(m.dim, m.dim)};
        } else {
          Eigen::LLT<Eigen::MatrixXd> llt(m.cov);
          if (llt.info() != Eigen::Success) {
            throw ValidationError("GaussianLinear covariance is not positive definite");
          }
          return {m.design * theta, Eigen::MatrixXd(llt.matrixL())};
        }
      },
      v_);
}

Eigen::VectorXd ObservationModel::sample(const ParameterPoint& theta, CounterRng& rng) const {
  auto [mean, a] = sampling_transform(theta);
  Eigen::VectorXd z(mean.size());
  for (int i = 0; i < z.size(); ++i) z[i] = rng.normal();
  return mean + a * z;
}

namespace {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

nlohmann::json ObservationModel::descriptor() const {
  return std::visit(
      [&](const auto& m) -> nlohmann::json {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ScalarGaussianMeanVar>) {
          return {{"kind", "scalar_gaussian_mean_var"}, {"theta_offset", m.theta_offset}};
        } else if constexpr (std::is_same_v<T, IsotropicGaussianMeanVector>) {
          return {{"kind", "isotropic_gaussian_mean_vector"},
                  {"dim", m.dim},
                  {"theta_offset", m.theta_offset}};
        } else {
          return {{"kind", "gaussian_linear"},
                  {"design", matrix_to_json(m.design)},
                  {"cov", matrix_to_json(m.cov)}};
        }
      },
      v_);
}

nlohmann::json ObservationModel::marginal_descriptor(int begin, int len) const {
  if (begin < 0 || len < 1 || begin + len > dim_x()) {
    throw ValidationError("marginal_descriptor: coordinate range out of bounds");
  }
  return std::visit(
      [&](const auto& m) -> nlohmann::json {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ScalarGaussianMeanVar>) {
          return descriptor();
        } else if constexpr (std::is_same_v<T, IsotropicGaussianMeanVector>) {
          return {{"kind", "isotropic_gaussian_mean_vector"},
                  {"dim", len},
                  {"theta_offset", m.theta_offset + begin}};
        } else {
          if (!m.diagonal_cov()) {
            throw NumericalError(
                "gaussian_linear: subvector marginals require a diagonal covariance");
          }
          Eigen::MatrixXd h = m.design.middleRows(begin, len);
          Eigen::MatrixXd c = m.cov.block(begin, begin, len, len);
          return {{"kind", "gaussian_linear"},
                  {"design", matrix_to_json(h)},
                  {"cov", matrix_to_json(c)}};
        }
      },
      v_);
}

}  // namespace quantlim
