#include "swimopt/gp.hpp"

#include <limits>
#include <random>

namespace swimopt {

namespace {

constexpr double kSqrt5 = 2.23606797749978969641;

Eigen::MatrixXd scaled(const Eigen::MatrixXd& X, const Eigen::VectorXd& ell) {
  return X * ell.cwiseInverse().asDiagonal();
}

// pairwise distances between rows of already scaled inputs
Eigen::MatrixXd distances(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  const Eigen::VectorXd a2 = A.rowwise().squaredNorm(), b2 = B.rowwise().squaredNorm();
  Eigen::MatrixXd D = (-2.0 * A * B.transpose()).colwise() + a2;
  D.rowwise() += b2.transpose();
  return D.cwiseMax(0.0).cwiseSqrt();
}

bool cholesky(const Eigen::MatrixXd& K, Eigen::MatrixXd& L) {
  Eigen::LLT<Eigen::MatrixXd> llt(K);
  if (llt.info() != Eigen::Success) return false;
  L = llt.matrixL();
  return L.diagonal().minCoeff() > 0;
}

}  // namespace

double matern52(double r) {
  const double s = kSqrt5 * r;
  return (1 + s + s * s / 3) * std::exp(-s);
}

double gp_log_likelihood(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const GPHyper& h,
                         Eigen::VectorXd* gradient) {
  const Eigen::Index n = X.rows(), d = X.cols();
  const Eigen::MatrixXd Xs = scaled(X, h.lengthscale);
  const Eigen::MatrixXd R = distances(Xs, Xs);
  const Eigen::MatrixXd Kf = R.unaryExpr([](double r) { return matern52(r); });
  Eigen::MatrixXd K = h.signal * Kf;
  K.diagonal().array() += h.noise;
  Eigen::LLT<Eigen::MatrixXd> llt(K);
  if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
  const Eigen::VectorXd alpha = llt.solve(y);
  const Eigen::MatrixXd L = llt.matrixL();
  const double logdet = 2 * L.diagonal().array().log().sum();
  const double ll = -0.5 * y.dot(alpha) - 0.5 * logdet - 0.5 * static_cast<double>(n) * std::log(2 * kPi);
  if (!std::isfinite(ll)) return -std::numeric_limits<double>::infinity();
  if (gradient) {
    const Eigen::MatrixXd W = alpha * alpha.transpose() - llt.solve(Eigen::MatrixXd::Identity(n, n));
    gradient->resize(d + 2);
    // d K / d log ell_k = signal (5/3)(1 + sqrt5 r) exp(-sqrt5 r) (x_ik - x_jk)^2 / ell_k^2
    const Eigen::MatrixXd E =
        R.unaryExpr([](double r) { return 5.0 / 3.0 * (1 + kSqrt5 * r) * std::exp(-kSqrt5 * r); });
    const Eigen::MatrixXd WE = W.cwiseProduct(E);
    for (Eigen::Index k = 0; k < d; ++k) {
      const Eigen::VectorXd c = Xs.col(k);
      // sum_ij WE_ij (c_i - c_j)^2 = 2 (c^2 . WE 1) - 2 c^T WE c, using symmetry
      const Eigen::VectorXd rs = WE.rowwise().sum();
      const double s = 2 * c.cwiseProduct(c).dot(rs) - 2 * c.dot(WE * c);
      (*gradient)(k) = 0.5 * h.signal * s;
    }
    (*gradient)(d) = 0.5 * h.signal * W.cwiseProduct(Kf).sum();
    (*gradient)(d + 1) = 0.5 * h.noise * W.trace();
  }
  return ll;
}

Eigen::MatrixXd GaussianProcess::cross(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) const {
  const Eigen::MatrixXd D = distances(scaled(A, h_.lengthscale), scaled(B, h_.lengthscale));
  return h_.signal * D.unaryExpr([](double r) { return matern52(r); });
}

GaussianProcess GaussianProcess::condition(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const GPHyper& h,
                                           const GPOptions& opt) {
  if (X.rows() < 1 || X.rows() != y.size()) throw FitError("GP needs matching, non-empty inputs and outputs");
  if (!y.allFinite() || !X.allFinite()) throw FitError("GP inputs and outputs must be finite");
  if (h.lengthscale.size() != X.cols()) throw FitError("GP lengthscale dimension mismatch");
  GaussianProcess gp;
  gp.X_ = X;
  gp.ymean_ = y.mean();
  const double var = y.size() > 1 ? (y.array() - gp.ymean_).square().sum() / static_cast<double>(y.size() - 1) : 0.0;
  gp.ystd_ = var > 1e-300 ? std::sqrt(var) : 1.0;
  gp.y_ = (y.array() - gp.ymean_) / gp.ystd_;
  gp.h_ = h;
  Eigen::MatrixXd K = gp.cross(X, X);
  K.diagonal().array() += h.noise;
  double jitter = 0;
  while (!cholesky(K, gp.L_)) {
    const double next = jitter == 0 ? 1e-10 : jitter * 10;
    if (next > opt.jitter_max * (1 + 1e-12)) throw FitError("kernel matrix not positive definite up to the maximum jitter");
    K.diagonal().array() += next - jitter;
    jitter = next;
  }
  gp.jitter_ = jitter;
  gp.alpha_ = gp.L_.triangularView<Eigen::Lower>().solve(gp.y_);
  gp.alpha_ = gp.L_.transpose().triangularView<Eigen::Upper>().solve(gp.alpha_);
  gp.loglik_ = -0.5 * gp.y_.dot(gp.alpha_) - gp.L_.diagonal().array().log().sum() -
               0.5 * static_cast<double>(X.rows()) * std::log(2 * kPi);
  return gp;
}

GaussianProcess GaussianProcess::fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const GPOptions& opt,
                                     std::uint64_t seed) {
  if (X.rows() < 1 || X.rows() != y.size()) throw FitError("GP needs matching, non-empty inputs and outputs");
  if (!y.allFinite() || !X.allFinite()) throw FitError("GP inputs and outputs must be finite");
  const Eigen::Index d = X.cols();
  const double ymean = y.mean();
  const double var = y.size() > 1 ? (y.array() - ymean).square().sum() / static_cast<double>(y.size() - 1) : 0.0;
  const Eigen::VectorXd ys = (y.array() - ymean) / (var > 1e-300 ? std::sqrt(var) : 1.0);

  // log-parameter box
  Eigen::VectorXd lo(d + 2), hi(d + 2);
  lo.head(d).setConstant(std::log(opt.lengthscale_min));
  hi.head(d).setConstant(std::log(opt.lengthscale_max));
  lo(d) = std::log(opt.signal_min);
  hi(d) = std::log(opt.signal_max);
  if (opt.fixed_noise) {
    lo(d + 1) = hi(d + 1) = std::log(*opt.fixed_noise);
  } else {
    lo(d + 1) = std::log(opt.noise_floor);
    hi(d + 1) = std::log(std::max(opt.noise_max, opt.noise_floor));
  }
  auto unpack = [&](const Eigen::VectorXd& t) {
    GPHyper h;
    h.lengthscale = t.head(d).array().exp();
    h.signal = std::exp(t(d));
    h.noise = std::exp(t(d + 1));
    return h;
  };
  auto objective = [&](const Eigen::VectorXd& t, Eigen::VectorXd& g) {
    const double f = gp_log_likelihood(X, ys, unpack(t), &g);
    if (opt.fixed_noise && std::isfinite(f)) g(d + 1) = 0;
    return f;
  };

  std::mt19937_64 rng(seed);
  auto uniform = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  Eigen::VectorXd best_t;
  double best_f = -std::numeric_limits<double>::infinity();
  for (int start = 0; start < std::max(1, opt.restarts); ++start) {
    Eigen::VectorXd t(d + 2);
    if (start == 0) {
      t.head(d).setConstant(std::log(0.5));
      t(d) = 0;
      t(d + 1) = std::log(1e-3);
    } else {
      for (Eigen::Index k = 0; k < d; ++k) t(k) = std::log(0.05) + uniform() * (std::log(2.0) - std::log(0.05));
      t(d) = std::log(0.5) + uniform() * std::log(4.0);
      t(d + 1) = std::log(1e-6) + uniform() * (std::log(1e-2) - std::log(1e-6));
    }
    t = t.cwiseMax(lo).cwiseMin(hi);
    // projected gradient ascent with Barzilai-Borwein steps and Armijo backtracking
    Eigen::VectorXd g;
    double f = objective(t, g);
    if (!std::isfinite(f)) continue;
    double step = 1.0 / std::max(1.0, g.cwiseAbs().maxCoeff());
    for (int it = 0; it < opt.max_iterations; ++it) {
      Eigen::VectorXd tn, gn;
      double fn = -std::numeric_limits<double>::infinity();
      bool moved = false;
      while (step > 1e-12) {
        tn = (t + step * g).cwiseMax(lo).cwiseMin(hi);
        fn = objective(tn, gn);
        if (std::isfinite(fn) && fn >= f + 1e-4 * g.dot(tn - t)) {
          moved = true;
          break;
        }
        step *= 0.5;
      }
      if (!moved) break;
      const Eigen::VectorXd s = tn - t, yv = gn - g;
      const double done = s.cwiseAbs().maxCoeff();
      const double gain = fn - f;
      t = tn;
      g = gn;
      f = fn;
      if (done < 1e-7 || gain < 1e-10 * (1 + std::abs(f))) break;
      const double sy = s.dot(yv);
      step = sy < 0 ? std::min(s.squaredNorm() / -sy, 1e3) : std::min(step * 2, 1e3);
    }
    if (f > best_f) {
      best_f = f;
      best_t = t;
    }
  }
  if (best_t.size() == 0) throw FitError("GP marginal likelihood is not finite at any start");
  return condition(X, y, unpack(best_t), opt);
}

Eigen::VectorXd GaussianProcess::mean(const Eigen::MatrixXd& Xq) const {
  return (cross(Xq, X_) * alpha_).array() * ystd_ + ymean_;
}

Eigen::VectorXd GaussianProcess::variance(const Eigen::MatrixXd& Xq) const {
  const Eigen::MatrixXd V = L_.triangularView<Eigen::Lower>().solve(cross(X_, Xq));
  const Eigen::VectorXd v = (h_.signal - V.colwise().squaredNorm().transpose().array()).cwiseMax(0.0);
  return v * ystd_ * ystd_;
}

Eigen::MatrixXd GaussianProcess::covariance(const Eigen::MatrixXd& Xq) const {
  const Eigen::MatrixXd V = L_.triangularView<Eigen::Lower>().solve(cross(X_, Xq));
  Eigen::MatrixXd S = cross(Xq, Xq);
  S.noalias() -= V.transpose() * V;
  return S * (ystd_ * ystd_);
}

Eigen::MatrixXd GaussianProcess::sample(const Eigen::MatrixXd& Xq, int n, std::uint64_t seed) const {
  if (Xq.rows() > 5000) throw SamplingError("joint posterior sampling is limited to 5000 points");
  const Eigen::Index m = Xq.rows();
  Eigen::MatrixXd S = cross(Xq, Xq);
  {
    const Eigen::MatrixXd V = L_.triangularView<Eigen::Lower>().solve(cross(X_, Xq));
    S.noalias() -= V.transpose() * V;
  }
  Eigen::MatrixXd C;
  double jitter = 1e-10 * h_.signal;
  S.diagonal().array() += jitter;
  while (!cholesky(S, C)) {
    if (jitter * 10 > 1e-4 * h_.signal * (1 + 1e-12)) throw SamplingError("posterior covariance not positive definite");
    S.diagonal().array() += 9 * jitter;
    jitter *= 10;
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd Z(m, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < m; ++i) Z(i, j) = normal(rng);
  Eigen::MatrixXd out = C.triangularView<Eigen::Lower>() * Z;
  out *= ystd_;
  out.colwise() += mean(Xq);
  return out;
}

}  // namespace swimopt
