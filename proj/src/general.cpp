#include "ridgelab/general.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "ridgelab/parallel.hpp"
#include "ridgelab/rng.hpp"
#include "ridgelab/spectrum.hpp"

namespace ridgelab {

namespace {

constexpr double kIllConditioned = 1e-12;

void require_symmetric(const Eigen::MatrixXd& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) throw std::invalid_argument(std::string(what) + " must be square and non-empty");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw std::invalid_argument(std::string(what) + " is not symmetric");
}

Eigen::MatrixXd regularizer_factor(const Eigen::MatrixXd& m) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
    throw std::invalid_argument("regularizer is not positive definite: smallest eigenvalue = " +
                                std::to_string(eig.eigenvalues()(0)));
  }
  return llt.matrixL();
}

}  // namespace

RegularizerSpec RegularizerSpec::identity(int d) {
  if (d < 1) throw std::invalid_argument("d must be >= 1");
  return {Eigen::MatrixXd::Identity(d, d), RegularizerKind::identity};
}

RegularizerSpec RegularizerSpec::inverse_covariance(const Eigen::MatrixXd& covariance) {
  covariance_factor(covariance);  // SPD check with diagnostic
  Eigen::MatrixXd inv = covariance.ldlt().solve(Eigen::MatrixXd::Identity(covariance.rows(), covariance.cols()));
  inv = 0.5 * (inv + inv.transpose()).eval();
  return {inv, RegularizerKind::inverse_covariance};
}

RegularizerSpec RegularizerSpec::covariance(const Eigen::MatrixXd& covariance) {
  covariance_factor(covariance);
  return {covariance, RegularizerKind::covariance};
}

RegularizerSpec RegularizerSpec::custom(const Eigen::MatrixXd& m) {
  RegularizerSpec r{m, RegularizerKind::custom};
  r.validate();
  return r;
}

void RegularizerSpec::validate() const {
  require_symmetric(matrix, "regularizer");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(matrix, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues()(0);
  if (lo < -1e-12 * std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff()))
    throw std::invalid_argument("regularizer is not positive semidefinite: smallest eigenvalue = " +
                                std::to_string(lo));
}

RidgeSolution ridge_solve(const Eigen::MatrixXd& design, const Eigen::VectorXd& responses, double lambda,
                          const Eigen::MatrixXd& regularizer) {
  const Eigen::Index d = design.cols();
  if (responses.size() != design.rows()) throw std::invalid_argument("responses length does not match design rows");
  if (regularizer.rows() != d || regularizer.cols() != d)
    throw std::invalid_argument("regularizer must be d x d");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be finite and >= 0");
  RidgeSolution out;
  if (lambda > 0.0) {
    const Eigen::MatrixXd a = design.transpose() * design + lambda * regularizer;
    const Eigen::VectorXd rhs = design.transpose() * responses;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() == Eigen::Success && llt.rcond() >= kIllConditioned) {
      out.beta = llt.solve(rhs);
      return out;
    }
    out.ill_conditioned = true;
    out.beta = a.completeOrthogonalDecomposition().solve(rhs);
    return out;
  }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(design);
  if (cod.rank() == d) {
    out.beta = cod.solve(responses);
    return out;
  }
  // Rank deficient: minimum-M-norm least-squares solution.
  out.pseudoinverse_limit = true;
  const Eigen::MatrixXd l = regularizer_factor(regularizer);
  const Eigen::MatrixXd xt = l.triangularView<Eigen::Lower>().solve(design.transpose()).transpose();
  const Eigen::VectorXd bt = xt.completeOrthogonalDecomposition().solve(responses);
  out.beta = l.transpose().triangularView<Eigen::Upper>().solve(bt);
  return out;
}

double population_risk(const Eigen::VectorXd& beta_hat, const GaussianProblem& problem) {
  const Eigen::VectorXd e = beta_hat - problem.beta_star;
  return e.dot(problem.covariance * e) + problem.sigma * problem.sigma;
}

RiskEstimate mc_risk_general(const GaussianProblem& problem, int n, double lambda, const RegularizerSpec& regularizer,
                             int trials, std::uint64_t seed) {
  problem.validate();
  regularizer.validate();
  const int d = problem.dim();
  if (regularizer.matrix.rows() != d) throw std::invalid_argument("regularizer dimension does not match problem");
  if (n < 0) throw std::invalid_argument("n must be >= 0");
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  std::vector<double> values(static_cast<std::size_t>(trials));
  std::vector<char> pinv(values.size(), 0), ill(values.size(), 0);
  parallel_for(values.size(), [&](std::size_t t) {
    const Eigen::MatrixXd x = sample_design(n, d, problem.covariance, substream_seed(seed, t));
    const Eigen::VectorXd y =
        sample_responses(x, problem.beta_star, problem.sigma, substream_seed(seed, t, Stream::noise));
    const RidgeSolution sol = ridge_solve(x, y, lambda, regularizer.matrix);
    values[t] = population_risk(sol.beta, problem);
    pinv[t] = sol.pseudoinverse_limit;
    ill[t] = sol.ill_conditioned;
  });
  RiskEstimate out = summarize(values, lambda);
  out.pseudoinverse_limit = std::any_of(pinv.begin(), pinv.end(), [](char c) { return c != 0; });
  out.ill_conditioned = std::any_of(ill.begin(), ill.end(), [](char c) { return c != 0; });
  return out;
}

RiskEstimate adaptive_risk(const GaussianProblem& problem, int n, double lambda, int trials, std::uint64_t seed) {
  return mc_risk_general(problem, n, lambda, RegularizerSpec::covariance(problem.covariance), trials, seed);
}

GeneralRiskCurve::GeneralRiskCurve(const GaussianProblem& problem, const RegularizerSpec& regularizer, int n,
                                   int trials, std::uint64_t seed)
    : n_(n), sigma2_(problem.sigma * problem.sigma) {
  problem.validate();
  regularizer.validate();
  const int d = problem.dim();
  if (regularizer.matrix.rows() != d) throw std::invalid_argument("regularizer dimension does not match problem");
  if (n < 0) throw std::invalid_argument("n must be >= 0");
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  null_risk_ = problem.beta_star.dot(problem.covariance * problem.beta_star) + sigma2_;

  const Eigen::MatrixXd l = regularizer_factor(regularizer.matrix);
  const auto lower = l.triangularView<Eigen::Lower>();
  const Eigen::VectorXd lt_beta = l.transpose() * problem.beta_star;
  const int k = std::min(n, d);
  draws_.resize(static_cast<std::size_t>(trials));
  parallel_for(draws_.size(), [&](std::size_t t) {
    Draw& dr = draws_[t];
    Eigen::MatrixXd v = Eigen::MatrixXd::Identity(d, d);
    dr.s2 = Eigen::VectorXd::Zero(d);
    if (n > 0) {
      const Eigen::MatrixXd x = sample_design(n, d, problem.covariance, substream_seed(seed, t));
      const Eigen::MatrixXd xt_t = lower.solve(x.transpose());  // (X L^{-T})^T
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(xt_t * xt_t.transpose());
      const Eigen::VectorXd& ev = eig.eigenvalues();  // ascending
      const double top = std::max(ev(d - 1), 0.0);
      for (int i = 0; i < d; ++i) {
        v.col(i) = eig.eigenvectors().col(d - 1 - i);
        const double s2 = ev(d - 1 - i);
        // Rank is min(n, d) almost surely; Gram round-off sits near 1e-16 * top.
        dr.s2(i) = (i < k && s2 > 1e-13 * top) ? s2 : 0.0;
      }
    }
    dr.c = v.transpose() * lt_beta;
    const Eigen::MatrixXd b = l.transpose().triangularView<Eigen::Upper>().solve(v);
    dr.K = b.transpose() * problem.covariance * b;
  });
}

namespace {

inline void shrink_weights(double s2, double lambda, double& w, double& v) {
  if (lambda == 0.0) {
    w = s2 > 0.0 ? 0.0 : 1.0;
    v = s2 > 0.0 ? 1.0 / s2 : 0.0;
    return;
  }
  const double den = s2 + lambda;
  w = lambda / den;
  v = s2 / (den * den);
}

}  // namespace

std::vector<double> GeneralRiskCurve::trial_risks(double lambda) const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be finite and >= 0");
  std::vector<double> out(draws_.size());
  for (std::size_t t = 0; t < draws_.size(); ++t) {
    const Draw& dr = draws_[t];
    const Eigen::Index d = dr.s2.size();
    Eigen::VectorXd wc(d);
    double noise = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
      double w, v;
      shrink_weights(dr.s2(i), lambda, w, v);
      wc(i) = w * dr.c(i);
      noise += v * dr.K(i, i);
    }
    out[t] = wc.dot(dr.K * wc) + sigma2_ * noise + sigma2_;
  }
  return out;
}

RiskEstimate GeneralRiskCurve::risk(double lambda) const {
  const std::vector<double> values = trial_risks(lambda);
  RiskEstimate out = summarize(values, lambda);
  out.pseudoinverse_limit = lambda == 0.0 && !draws_.empty() && n_ < draws_.front().s2.size();
  return out;
}

RiskEstimate GeneralRiskCurve::train_risk(double lambda) const {
  if (n_ == 0) throw std::invalid_argument("training error is undefined for n = 0");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be finite and >= 0");
  std::vector<double> values(draws_.size());
  for (std::size_t t = 0; t < draws_.size(); ++t) {
    const Draw& dr = draws_[t];
    const Eigen::Index k = std::min<Eigen::Index>(n_, dr.s2.size());
    double acc = sigma2_ * static_cast<double>(n_ - k);
    for (Eigen::Index i = 0; i < k; ++i) {
      double w, v;
      shrink_weights(dr.s2(i), lambda, w, v);
      acc += w * w * (dr.s2(i) * dr.c(i) * dr.c(i) + sigma2_);
    }
    values[t] = acc / n_;
  }
  return summarize(values, lambda);
}

double GeneralRiskCurve::null_risk() const { return null_risk_; }

ReducedProblem reduce_to_isotropic(const GaussianProblem& problem, const RegularizerSpec& regularizer) {
  problem.validate();
  regularizer.validate();
  const int d = problem.dim();
  if (regularizer.matrix.rows() != d) throw std::invalid_argument("regularizer dimension does not match problem");
  ReducedProblem r;
  r.sqrt_covariance = spd_sqrt(problem.covariance);
  r.inv_sqrt_covariance = spd_inv_sqrt(problem.covariance);
  r.isotropic = GaussianProblem::isotropic(r.sqrt_covariance * problem.beta_star, problem.sigma);
  if (regularizer.kind == RegularizerKind::covariance) {
    r.regularizer = RegularizerSpec::identity(d);
  } else {
    Eigen::MatrixXd m = r.inv_sqrt_covariance * regularizer.matrix * r.inv_sqrt_covariance;
    m = 0.5 * (m + m.transpose()).eval();
    r.regularizer = {m, RegularizerKind::custom};
  }
  return r;
}

double adaptive_optimal_lambda(const GaussianProblem& problem) {
  problem.validate();
  const double signal = problem.beta_star.dot(problem.covariance * problem.beta_star);
  if (signal == 0.0) return std::numeric_limits<double>::infinity();
  return problem.dim() * problem.sigma * problem.sigma / signal;
}

DiagonalizedQ diagonalize_penalty(const Eigen::MatrixXd& Q) {
  require_symmetric(Q, "penalty Q");
  const Eigen::Index d = Q.rows();
  DiagonalizedQ out;
  Eigen::MatrixXd off = Q;
  off.diagonal().setZero();
  if (off.cwiseAbs().maxCoeff() == 0.0) {
    out.q = Q.diagonal();
    out.rotation = Eigen::MatrixXd::Identity(d, d);
    out.diagonal = true;
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (Q + Q.transpose()));
    out.q = eig.eigenvalues();
    out.rotation = eig.eigenvectors();
    out.diagonal = false;
  }
  if (out.q.minCoeff() <= 0.0)
    throw std::invalid_argument("penalty Q must be positive definite: smallest eigenvalue = " +
                                std::to_string(out.q.minCoeff()));
  return out;
}

Eigen::ArrayXd gh_trial_sample(const Eigen::MatrixXd& design, const DiagonalizedQ& penalty, double lambda,
                               bool* ill_conditioned) {
  const Eigen::Index d = penalty.q.size();
  if (design.cols() != d) throw std::invalid_argument("design width does not match penalty dimension");
  if (!(lambda > 0.0)) throw std::invalid_argument("G/H estimates need lambda > 0");
  const Eigen::MatrixXd s = design.transpose() * design;
  Eigen::MatrixXd a = s;
  a.diagonal() += lambda * penalty.q;
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) throw std::domain_error("regularized Gram matrix is not positive definite");
  if (ill_conditioned && llt.rcond() < kIllConditioned) *ill_conditioned = true;
  const Eigen::MatrixXd ainv = llt.solve(Eigen::MatrixXd::Identity(d, d));
  const Eigen::MatrixXd a2 = ainv * ainv;
  const Eigen::MatrixXd qa = penalty.q.asDiagonal() * ainv;  // D A^{-1}
  Eigen::MatrixXd g = lambda * lambda * a2;
  const Eigen::MatrixXd cross = ainv * penalty.q.asDiagonal() * a2;  // A^{-1} D A^{-2}
  Eigen::MatrixXd dg = 2.0 * lambda * a2 - lambda * lambda * (cross + cross.transpose());
  const Eigen::MatrixXd p = ainv * s * ainv;
  const double h = p.trace();
  const double dh = -2.0 * (p.cwiseProduct(qa.transpose())).sum();
  if (!penalty.diagonal) {
    const Eigen::MatrixXd& u = penalty.rotation;
    g = u * g * u.transpose();
    dg = u * dg * u.transpose();
  }
  Eigen::ArrayXd out(2 * d * d + 2);
  out.head(d * d) = Eigen::Map<const Eigen::ArrayXd>(g.data(), d * d);
  out.segment(d * d, d * d) = Eigen::Map<const Eigen::ArrayXd>(dg.data(), d * d);
  out(2 * d * d) = h;
  out(2 * d * d + 1) = dh;
  return out;
}

namespace {

Eigen::VectorXd vech_with_h(const Eigen::ArrayXd& sample, Eigen::Index d) {
  Eigen::VectorXd v(d * (d + 1) / 2 + 1);
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = j; i < d; ++i) v(k++) = sample(j * d + i);
  v(k) = sample(2 * d * d);
  return v;
}

}  // namespace

GHEstimate estimate_GH(int n, const Eigen::MatrixXd& Q, double lambda, int trials, std::uint64_t seed) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("G/H estimates need finite lambda > 0");
  if (n < 0) throw std::invalid_argument("n must be >= 0");
  if (trials < 2) throw std::invalid_argument("trials must be >= 2");
  const DiagonalizedQ dq = diagonalize_penalty(Q);
  const Eigen::Index d = dq.q.size();
  const bool with_cov = d <= kGHCovarianceMaxDim;
  const Eigen::Index flat = 2 * d * d + 2;
  const Eigen::Index vech = d * (d + 1) / 2 + 1;

  const ChunkPlan plan = plan_chunks(static_cast<std::size_t>(trials));
  std::vector<MomentAccumulator> moments(plan.chunks, MomentAccumulator(flat));
  std::vector<CovarianceAccumulator> covs(plan.chunks, CovarianceAccumulator(with_cov ? vech : 0));
  std::vector<char> ill(plan.chunks, 0);
  parallel_for(plan.chunks, [&](std::size_t c) {
    bool flag = false;
    for (std::size_t t = plan.begin(c); t < plan.end(c); ++t) {
      const Eigen::MatrixXd x = sample_design(n, static_cast<int>(d), substream_seed(seed, t));
      const Eigen::ArrayXd s = gh_trial_sample(x, dq, lambda, &flag);
      moments[c].add(s);
      if (with_cov) covs[c].add(vech_with_h(s, d));
    }
    ill[c] = flag;
  });
  MomentAccumulator total(flat);
  CovarianceAccumulator total_cov(with_cov ? vech : 0);
  for (std::size_t c = 0; c < plan.chunks; ++c) {
    total.merge(moments[c]);
    if (with_cov) total_cov.merge(covs[c]);
  }

  GHEstimate out;
  out.n = n;
  out.lambda = lambda;
  out.trials = trials;
  out.Q = Q;
  const Eigen::ArrayXd& m = total.mean();
  const Eigen::ArrayXd se = total.std_error();
  out.G = Eigen::Map<const Eigen::MatrixXd>(m.data(), d, d);
  out.dG = Eigen::Map<const Eigen::MatrixXd>(m.data() + d * d, d, d);
  out.G_se = Eigen::Map<const Eigen::MatrixXd>(se.data(), d, d);
  out.dG_se = Eigen::Map<const Eigen::MatrixXd>(se.data() + d * d, d, d);
  out.H = m(2 * d * d);
  out.dH = m(2 * d * d + 1);
  out.H_se = se(2 * d * d);
  out.dH_se = se(2 * d * d + 1);
  out.ill_conditioned = std::any_of(ill.begin(), ill.end(), [](char c) { return c != 0; });
  if (with_cov) out.vech_cov = total_cov.covariance() / static_cast<double>(trials);
  return out;
}

RiskEstimate risk_from_GH(const GHEstimate& gh, const Eigen::VectorXd& beta_star, double sigma) {
  const Eigen::Index d = gh.G.rows();
  if (beta_star.size() != d) throw std::invalid_argument("beta_star dimension does not match G");
  const Eigen::VectorXd a = gh.Q * beta_star;
  const double s2 = sigma * sigma;
  RiskEstimate out;
  out.mean = a.dot(gh.G * a) + s2 * gh.H + s2;
  out.trials = gh.trials;
  out.lambda = gh.lambda;
  out.ill_conditioned = gh.ill_conditioned;
  if (gh.vech_cov.size() > 0) {
    Eigen::VectorXd grad(d * (d + 1) / 2 + 1);
    Eigen::Index k = 0;
    for (Eigen::Index j = 0; j < d; ++j)
      for (Eigen::Index i = j; i < d; ++i) grad(k++) = (i == j ? 1.0 : 2.0) * a(i) * a(j);
    grad(k) = s2;
    out.std_error = std::sqrt(std::max(0.0, grad.dot(gh.vech_cov * grad)));
  } else {
    const Eigen::ArrayXd aa = a.cwiseAbs().array();
    out.std_error = (aa.matrix() * aa.matrix().transpose()).cwiseProduct(gh.G_se).sum() + s2 * gh.H_se;
  }
  return out;
}

}  // namespace ridgelab
