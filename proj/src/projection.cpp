#include "ridgelab/projection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "ridgelab/parallel.hpp"
#include "ridgelab/problem.hpp"
#include "ridgelab/rng.hpp"
#include "ridgelab/spectrum.hpp"

namespace ridgelab {

namespace {

void check_dims(int p, int d) {
  if (p < 1 || d < 1) throw std::invalid_argument("need p >= 1 and d >= 1");
  if (d > p)
    throw std::invalid_argument("model size d = " + std::to_string(d) + " exceeds ambient dimension p = " +
                                std::to_string(p));
}

}  // namespace

double sigma_tilde_sq(int p, int d, double sigma, double theta_norm) {
  check_dims(p, d);
  return sigma * sigma + static_cast<double>(p - d) / p * theta_norm * theta_norm;
}

std::optional<double> optimal_lambda_proj(int p, int d, double sigma, double theta_norm) {
  const double st2 = sigma_tilde_sq(p, d, sigma, theta_norm);
  if (theta_norm == 0.0) return std::nullopt;
  return p * st2 / (theta_norm * theta_norm);
}

double proj_risk_summand(const Eigen::VectorXd& gammas, double lambda, int d, const ProjectionParams& params) {
  if (lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
  if (gammas.size() != d) throw std::invalid_argument("expected d padded singular values");
  const double st2 = sigma_tilde_sq(params.p, d, params.sigma, params.theta_norm);
  const double per_coord = params.theta_norm * params.theta_norm / params.p;
  const double cutoff = d > 0 ? kRankTolerance * gammas.maxCoeff() : 0.0;
  double total = 0.0;
  for (Eigen::Index i = 0; i < gammas.size(); ++i) {
    const double g2 = gammas(i) > cutoff ? gammas(i) * gammas(i) : 0.0;
    if (lambda == 0.0) {
      total += g2 > 0.0 ? st2 / g2 : per_coord;
    } else {
      const double denom = g2 + lambda;
      total += (st2 * g2 + per_coord * lambda * lambda) / (denom * denom);
    }
  }
  return total;
}

namespace {

double constant_part(int d, const ProjectionParams& params) {
  return params.sigma * params.sigma + (1.0 - static_cast<double>(d) / params.p) * params.theta_norm * params.theta_norm;
}

Eigen::MatrixXd projected_design(int n, int p, std::uint64_t seed, std::size_t trial) {
  return sample_design(n, p, substream_seed(seed, trial));
}

}  // namespace

RiskEstimate expected_risk_proj(int d, int n, double lambda, const ProjectionParams& params, int trials,
                                std::uint64_t seed) {
  check_dims(params.p, d);
  if (lambda < 0.0) throw std::invalid_argument("lambda must be >= 0, got " + std::to_string(lambda));
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (n < 0) throw std::invalid_argument("n must be >= 0");
  const double base = constant_part(d, params);
  std::vector<double> values(static_cast<std::size_t>(trials));
  parallel_for(values.size(), [&](std::size_t t) {
    const Eigen::MatrixXd x = projected_design(n, params.p, seed, t).leftCols(d);
    values[t] = base + proj_risk_summand(singular_spectrum(x).gammas, lambda, d, params);
  });
  RiskEstimate out = summarize(values, lambda);
  out.pseudoinverse_limit = lambda == 0.0 && n < d;
  return out;
}

RiskEstimate optimal_risk_proj(int d, int n, const ProjectionParams& params, int trials, std::uint64_t seed) {
  const auto lam = optimal_lambda_proj(params.p, d, params.sigma, params.theta_norm);
  if (!lam) {
    RiskEstimate out;
    out.mean = params.sigma * params.sigma;
    out.trials = trials;
    out.lambda = std::numeric_limits<double>::infinity();
    return out;
  }
  return expected_risk_proj(d, n, *lam, params, trials, seed);
}

ProjectionSweep::ProjectionSweep(const std::vector<int>& ds, int n, const ProjectionParams& params, int trials,
                                 std::uint64_t seed)
    : ds_(ds), n_(n), params_(params), trials_(trials) {
  if (ds_.empty()) throw std::invalid_argument("model-size grid is empty");
  if (!std::is_sorted(ds_.begin(), ds_.end())) throw std::invalid_argument("model-size grid must be sorted");
  for (int d : ds_) check_dims(params.p, d);
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  spectra_.assign(ds_.size(), std::vector<Eigen::VectorXd>(static_cast<std::size_t>(trials)));
  parallel_for(static_cast<std::size_t>(trials), [&](std::size_t t) {
    const Eigen::MatrixXd x = projected_design(n, params.p, seed, t);
    for (std::size_t k = 0; k < ds_.size(); ++k) spectra_[k][t] = singular_spectrum(x.leftCols(ds_[k])).gammas;
  });
}

std::size_t ProjectionSweep::index_of(int d) const {
  const auto it = std::lower_bound(ds_.begin(), ds_.end(), d);
  if (it == ds_.end() || *it != d) throw std::out_of_range("model size " + std::to_string(d) + " not stored");
  return static_cast<std::size_t>(it - ds_.begin());
}

const Eigen::VectorXd& ProjectionSweep::gammas(int d, int trial) const {
  return spectra_[index_of(d)].at(static_cast<std::size_t>(trial));
}

std::vector<double> ProjectionSweep::trial_risks(int d, double lambda) const {
  const auto& column = spectra_[index_of(d)];
  const double base = constant_part(d, params_);
  std::vector<double> out(column.size());
  for (std::size_t t = 0; t < column.size(); ++t) out[t] = base + proj_risk_summand(column[t], lambda, d, params_);
  return out;
}

RiskEstimate ProjectionSweep::risk(int d, double lambda) const {
  const std::vector<double> values = trial_risks(d, lambda);
  RiskEstimate out = summarize(values, lambda);
  out.pseudoinverse_limit = lambda == 0.0 && n_ < d;
  return out;
}

ProjectedRiskPoint ProjectionSweep::optimal(int d) const {
  ProjectedRiskPoint pt;
  pt.d = d;
  pt.sigma_tilde_sq = sigma_tilde_sq(params_.p, d, params_.sigma, params_.theta_norm);
  const auto lam = optimal_lambda_proj(params_.p, d, params_.sigma, params_.theta_norm);
  if (!lam) {
    pt.lambda = std::numeric_limits<double>::infinity();
    pt.risk.mean = params_.sigma * params_.sigma;
    pt.risk.trials = trials_;
    pt.risk.lambda = pt.lambda;
    return pt;
  }
  pt.lambda = *lam;
  pt.risk = risk(d, *lam);
  return pt;
}

}  // namespace ridgelab
