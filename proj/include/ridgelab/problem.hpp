#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace ridgelab {

/// Linear-Gaussian regression distribution: x ~ N(0, covariance),
/// y = <x, beta_star> + N(0, sigma^2).
struct GaussianProblem {
  Eigen::MatrixXd covariance;
  Eigen::VectorXd beta_star;
  double sigma = 0.0;

  int dim() const { return static_cast<int>(beta_star.size()); }

  /// Throws std::invalid_argument unless covariance is symmetric positive
  /// definite and the shapes agree.
  void validate() const;

  static GaussianProblem isotropic(const Eigen::VectorXd& beta_star, double sigma);
};

/// Ambient-space model of the random-projection experiments: x ~ N(0, I_p),
/// y = <x, theta> + N(0, sigma^2), regression on P x for a random
/// orthonormal P with d rows.
struct ProjectionProblem {
  int p = 1;
  Eigen::VectorXd theta;
  double sigma = 0.0;

  void validate() const;
};

struct SampleBatch {
  Eigen::MatrixXd design;
  Eigen::VectorXd responses;
  std::uint64_t seed = 0;
};

/// n x d matrix with i.i.d. N(0, covariance) rows. Deterministic in seed, and
/// the first k rows of a draw equal the draw for n = k with the same seed.
Eigen::MatrixXd sample_design(int n, int d, const Eigen::MatrixXd& covariance, std::uint64_t seed);

/// Standard-normal design (covariance I).
Eigen::MatrixXd sample_design(int n, int d, std::uint64_t seed);

/// design * beta_star + N(0, sigma^2 I).
Eigen::VectorXd sample_responses(const Eigen::MatrixXd& design, const Eigen::VectorXd& beta_star,
                                 double sigma, std::uint64_t seed);

SampleBatch sample_batch(const GaussianProblem& problem, int n, std::uint64_t seed);

/// d x p matrix with orthonormal rows, Haar distributed: Gram-Schmidt (QR) of
/// a Gaussian matrix with the triangular factor's diagonal made positive.
Eigen::MatrixXd sample_orthonormal(int d, int p, std::uint64_t seed);

/// Lower Cholesky factor of a covariance, with the eigenvalue diagnostic used
/// by every sampler on rejection.
Eigen::MatrixXd covariance_factor(const Eigen::MatrixXd& covariance);

/// Symmetric square root and inverse square root of an SPD matrix.
Eigen::MatrixXd spd_sqrt(const Eigen::MatrixXd& m);
Eigen::MatrixXd spd_inv_sqrt(const Eigen::MatrixXd& m);

}  // namespace ridgelab
