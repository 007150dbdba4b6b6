#include "ridgelab/problem.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "ridgelab/rng.hpp"

namespace ridgelab {

namespace {

void require_spd(const Eigen::MatrixXd& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    std::ostringstream msg;
    msg << what << " must be a non-empty square matrix, got " << m.rows() << "x" << m.cols();
    throw std::invalid_argument(msg.str());
  }
  if (!m.allFinite()) throw std::invalid_argument(std::string(what) + " has non-finite entries");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw std::invalid_argument(std::string(what) + " is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& ev = eig.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (!(ev(i) > 0.0)) {
      std::ostringstream msg;
      msg << what << " is not positive definite: eigenvalue " << i << " = " << ev(i);
      throw std::invalid_argument(msg.str());
    }
  }
}

}  // namespace

void GaussianProblem::validate() const {
  if (beta_star.size() == 0) throw std::invalid_argument("beta_star must be non-empty");
  if (covariance.rows() != beta_star.size())
    throw std::invalid_argument("covariance side must equal length of beta_star");
  if (!(sigma >= 0.0)) throw std::invalid_argument("sigma must be >= 0");
  require_spd(covariance, "covariance");
}

GaussianProblem GaussianProblem::isotropic(const Eigen::VectorXd& beta_star, double sigma) {
  GaussianProblem g;
  g.covariance = Eigen::MatrixXd::Identity(beta_star.size(), beta_star.size());
  g.beta_star = beta_star;
  g.sigma = sigma;
  return g;
}

void ProjectionProblem::validate() const {
  if (p < 1) throw std::invalid_argument("ambient dimension p must be >= 1");
  if (theta.size() != p) throw std::invalid_argument("theta must have length p");
  if (!theta.allFinite()) throw std::invalid_argument("theta must be finite");
  if (!(sigma >= 0.0)) throw std::invalid_argument("sigma must be >= 0");
}

Eigen::MatrixXd covariance_factor(const Eigen::MatrixXd& covariance) {
  require_spd(covariance, "covariance");
  Eigen::LLT<Eigen::MatrixXd> llt(covariance);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("covariance: Cholesky factorization failed");
  return llt.matrixL();
}

Eigen::MatrixXd sample_design(int n, int d, std::uint64_t seed) {
  if (n < 0 || d < 1) throw std::invalid_argument("sample_design: need n >= 0 and d >= 1");
  Rng rng(seed);
  return standard_normal(rng, n, d);
}

Eigen::MatrixXd sample_design(int n, int d, const Eigen::MatrixXd& covariance, std::uint64_t seed) {
  if (covariance.rows() != d) throw std::invalid_argument("sample_design: covariance side must equal d");
  const Eigen::MatrixXd factor = covariance_factor(covariance);
  Eigen::MatrixXd z = sample_design(n, d, seed);
  if (covariance.isIdentity(0.0)) return z;
  return z * factor.transpose();
}

Eigen::VectorXd sample_responses(const Eigen::MatrixXd& design, const Eigen::VectorXd& beta_star,
                                 double sigma, std::uint64_t seed) {
  if (design.cols() != beta_star.size())
    throw std::invalid_argument("sample_responses: design has " + std::to_string(design.cols()) +
                                " columns but beta_star has length " + std::to_string(beta_star.size()));
  if (!(sigma >= 0.0)) throw std::invalid_argument("sample_responses: sigma must be >= 0");
  Eigen::VectorXd y = design * beta_star;
  if (sigma > 0.0) {
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, sigma);
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += normal(rng);
  }
  return y;
}

SampleBatch sample_batch(const GaussianProblem& problem, int n, std::uint64_t seed) {
  SampleBatch batch;
  batch.seed = seed;
  batch.design = sample_design(n, problem.dim(), problem.covariance, substream_seed(seed, 0, Stream::design));
  batch.responses =
      sample_responses(batch.design, problem.beta_star, problem.sigma, substream_seed(seed, 0, Stream::noise));
  return batch;
}

Eigen::MatrixXd sample_orthonormal(int d, int p, std::uint64_t seed) {
  if (d < 1 || p < 1) throw std::invalid_argument("sample_orthonormal: need d, p >= 1");
  if (d > p) throw std::invalid_argument("sample_orthonormal: d = " + std::to_string(d) + " exceeds p = " +
                                         std::to_string(p));
  Rng rng(seed);
  const Eigen::MatrixXd g = standard_normal(rng, p, d);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(p, d);
  const Eigen::VectorXd r_diag = qr.matrixQR().diagonal().head(d);
  for (int j = 0; j < d; ++j)
    if (r_diag(j) < 0.0) q.col(j) = -q.col(j);
  return q.transpose();
}

Eigen::MatrixXd spd_sqrt(const Eigen::MatrixXd& m) {
  require_spd(m, "matrix");
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m).operatorSqrt();
}

Eigen::MatrixXd spd_inv_sqrt(const Eigen::MatrixXd& m) {
  require_spd(m, "matrix");
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m).operatorInverseSqrt();
}

}  // namespace ridgelab
