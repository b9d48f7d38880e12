#pragma once

#include "swimopt/core.hpp"

#include <cstdint>
#include <optional>

namespace swimopt {

/// Matern-5/2 ARD kernel hyperparameters, in standardized output units.
struct GPHyper {
  Eigen::VectorXd lengthscale;
  double signal = 1.0;  // signal variance
  double noise = 1e-4;  // noise variance
};

struct GPOptions {
  double noise_floor = 1e-6;
  double noise_max = 0.1;
  std::optional<double> fixed_noise;  // skip noise optimization
  double lengthscale_min = 0.005, lengthscale_max = 10.0;
  double signal_min = 0.05, signal_max = 20.0;
  int restarts = 5;
  int max_iterations = 200;
  double jitter_max = 1e-4;
};

double matern52(double r);

/// Gaussian-process regression on inputs in [0, 1]^d. Outputs are
/// standardized internally; predictions are in the original units.
class GaussianProcess {
 public:
  GaussianProcess() = default;

  /// Hyperparameters by multi-start maximum marginal likelihood.
  static GaussianProcess fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const GPOptions& opt = {},
                             std::uint64_t seed = 0);
  /// Condition on data with given hyperparameters.
  static GaussianProcess condition(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const GPHyper& h,
                                   const GPOptions& opt = {});

  Eigen::VectorXd mean(const Eigen::MatrixXd& Xq) const;
  /// Latent (noise-free) posterior variance.
  Eigen::VectorXd variance(const Eigen::MatrixXd& Xq) const;
  Eigen::MatrixXd covariance(const Eigen::MatrixXd& Xq) const;
  /// `n` joint posterior draws at the rows of Xq, one per column.
  Eigen::MatrixXd sample(const Eigen::MatrixXd& Xq, int n, std::uint64_t seed) const;

  const GPHyper& hyper() const { return h_; }
  double log_likelihood() const { return loglik_; }
  double output_mean() const { return ymean_; }
  double output_scale() const { return ystd_; }
  /// Noise variance in the original output units.
  double noise_variance() const { return (h_.noise + jitter_) * ystd_ * ystd_; }
  int size() const { return static_cast<int>(X_.rows()); }

 private:
  Eigen::MatrixXd cross(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) const;

  Eigen::MatrixXd X_;
  Eigen::VectorXd y_;  // standardized
  double ymean_ = 0, ystd_ = 1;
  GPHyper h_;
  Eigen::MatrixXd L_;  // Cholesky factor of K + (noise + jitter) I
  Eigen::VectorXd alpha_;
  double jitter_ = 0;
  double loglik_ = 0;
};

/// Log marginal likelihood of standardized outputs and its gradient with
/// respect to (log lengthscales, log signal, log noise). Returns -inf if the
/// kernel matrix is not positive definite.
double gp_log_likelihood(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const GPHyper& h,
                         Eigen::VectorXd* gradient = nullptr);

}  // namespace swimopt
