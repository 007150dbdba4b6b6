#include "ridgelab/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "ridgelab/parallel.hpp"
#include "ridgelab/problem.hpp"
#include "ridgelab/rng.hpp"

namespace ridgelab {

SpectrumSample singular_spectrum(const Eigen::MatrixXd& design) {
  SpectrumSample s;
  s.n = static_cast<int>(design.rows());
  s.d = static_cast<int>(design.cols());
  s.gammas = Eigen::VectorXd::Zero(s.d);
  const Eigen::Index k = std::min(design.rows(), design.cols());
  if (k == 0) return s;
  const Eigen::MatrixXd gram =
      design.rows() < design.cols() ? Eigen::MatrixXd(design * design.transpose())
                                    : Eigen::MatrixXd(design.transpose() * design);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& ev = eig.eigenvalues();  // ascending
  for (Eigen::Index i = 0; i < k; ++i) s.gammas(i) = std::sqrt(std::max(0.0, ev(k - 1 - i)));
  return s;
}

double iso_term(double gamma, double lambda, const IsoParams& params) {
  const double b2 = params.beta_norm * params.beta_norm / params.d;
  const double s2 = params.sigma * params.sigma;
  const double g2 = gamma * gamma;
  if (lambda == 0.0) return g2 > 0.0 ? s2 / g2 : b2;
  const double denom = g2 + lambda;
  return (b2 * lambda * lambda + s2 * g2) / (denom * denom);
}

double iso_risk_summand(const Eigen::VectorXd& gammas, double lambda, const IsoParams& params) {
  if (lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
  const double cutoff = gammas.size() > 0 ? kRankTolerance * gammas.maxCoeff() : 0.0;
  double total = 0.0;
  for (Eigen::Index i = 0; i < gammas.size(); ++i) {
    const double g = gammas(i) > cutoff ? gammas(i) : 0.0;
    total += iso_term(g, lambda, params);
  }
  return total;
}

double iso_risk_summand_derivative(const Eigen::VectorXd& gammas, double lambda, const IsoParams& params) {
  const double b2 = params.beta_norm * params.beta_norm / params.d;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < gammas.size(); ++i) {
    const double g2 = gammas(i) * gammas(i);
    acc += g2 / std::pow(g2 + lambda, 3);
  }
  return 2.0 * (b2 * lambda - params.sigma * params.sigma) * acc;
}

namespace {

void check_iso(const IsoParams& p, int trials) {
  if (p.d < 1) throw std::invalid_argument("d must be >= 1");
  if (!(p.sigma >= 0.0) || !(p.beta_norm >= 0.0)) throw std::invalid_argument("sigma and beta_norm must be >= 0");
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
}

}  // namespace

RiskEstimate expected_risk_iso(int n, double lambda, const IsoParams& params, int trials, std::uint64_t seed) {
  check_iso(params, trials);
  if (lambda < 0.0) throw std::invalid_argument("lambda must be >= 0, got " + std::to_string(lambda));
  if (n < 0) throw std::invalid_argument("n must be >= 0");
  std::vector<double> values(static_cast<std::size_t>(trials));
  const double s2 = params.sigma * params.sigma;
  parallel_for(values.size(), [&](std::size_t t) {
    const Eigen::MatrixXd x = sample_design(n, params.d, substream_seed(seed, t));
    values[t] = iso_risk_summand(singular_spectrum(x).gammas, lambda, params) + s2;
  });
  RiskEstimate out = summarize(values, lambda);
  out.pseudoinverse_limit = lambda == 0.0 && n < params.d;
  return out;
}

std::optional<double> optimal_lambda_iso(int d, double sigma, double beta_norm) {
  if (d < 1) throw std::invalid_argument("d must be >= 1");
  if (beta_norm == 0.0) return std::nullopt;
  return d * sigma * sigma / (beta_norm * beta_norm);
}

RiskEstimate optimal_risk_iso(int n, const IsoParams& params, int trials, std::uint64_t seed) {
  check_iso(params, trials);
  const auto lam = optimal_lambda_iso(params.d, params.sigma, params.beta_norm);
  if (!lam) {
    // Null estimator: risk is sigma^2 + |beta|^2 = sigma^2 exactly.
    RiskEstimate out;
    out.mean = params.sigma * params.sigma;
    out.trials = trials;
    out.lambda = std::numeric_limits<double>::infinity();
    return out;
  }
  return expected_risk_iso(n, *lam, params, trials, seed);
}

std::pair<SpectrumSample, SpectrumSample> coupled_spectrum_pair(int n, int d, const Eigen::MatrixXd& covariance,
                                                                std::uint64_t seed) {
  if (n < 0) throw std::invalid_argument("n must be >= 0");
  const Eigen::MatrixXd more = sample_design(n + 1, d, covariance, seed);
  return {singular_spectrum(more.topRows(n)), singular_spectrum(more)};
}

double interlacing_violation(const SpectrumSample& fewer, const SpectrumSample& more) {
  if (fewer.gammas.size() != more.gammas.size()) throw std::invalid_argument("spectra differ in length");
  double worst = 0.0;
  const Eigen::Index d = fewer.gammas.size();
  for (Eigen::Index i = 0; i < d; ++i) {
    worst = std::max(worst, fewer.gammas(i) - more.gammas(i));
    if (i + 1 < d) worst = std::max(worst, more.gammas(i + 1) - fewer.gammas(i));
  }
  return worst;
}

namespace {
std::vector<int> all_counts(int n_max) {
  if (n_max < 0) throw std::invalid_argument("n_max must be >= 0");
  std::vector<int> ns(static_cast<std::size_t>(n_max) + 1);
  for (int i = 0; i <= n_max; ++i) ns[static_cast<std::size_t>(i)] = i;
  return ns;
}
}  // namespace

IsoSpectrumPaths::IsoSpectrumPaths(int n_max, int d, int trials, std::uint64_t seed)
    : IsoSpectrumPaths(all_counts(n_max), d, trials, seed) {}

IsoSpectrumPaths::IsoSpectrumPaths(const std::vector<int>& ns, int d, int trials, std::uint64_t seed)
    : d_(d), trials_(trials), ns_(ns) {
  if (ns_.empty()) throw std::invalid_argument("sample-count grid is empty");
  if (!std::is_sorted(ns_.begin(), ns_.end()) || ns_.front() < 0)
    throw std::invalid_argument("sample-count grid must be sorted and non-negative");
  if (d < 1 || trials < 1) throw std::invalid_argument("need d >= 1 and trials >= 1");
  spectra_.assign(ns_.size(), std::vector<Eigen::VectorXd>(static_cast<std::size_t>(trials)));
  const int n_max = ns_.back();
  parallel_for(static_cast<std::size_t>(trials), [&](std::size_t t) {
    const Eigen::MatrixXd x = sample_design(n_max, d, substream_seed(seed, t));
    for (std::size_t k = 0; k < ns_.size(); ++k) spectra_[k][t] = singular_spectrum(x.topRows(ns_[k])).gammas;
  });
}

std::size_t IsoSpectrumPaths::index_of(int n) const {
  const auto it = std::lower_bound(ns_.begin(), ns_.end(), n);
  if (it == ns_.end() || *it != n) throw std::out_of_range("sample count " + std::to_string(n) + " not stored");
  return static_cast<std::size_t>(it - ns_.begin());
}

const Eigen::VectorXd& IsoSpectrumPaths::gammas(int n, int trial) const {
  return spectra_[index_of(n)].at(static_cast<std::size_t>(trial));
}

std::vector<double> IsoSpectrumPaths::summands(int n, double lambda, const IsoParams& params) const {
  if (params.d != d_) throw std::invalid_argument("params.d does not match stored spectra");
  const auto& column = spectra_[index_of(n)];
  std::vector<double> out(column.size());
  for (std::size_t t = 0; t < column.size(); ++t) out[t] = iso_risk_summand(column[t], lambda, params);
  return out;
}

RiskEstimate IsoSpectrumPaths::risk(int n, double lambda, const IsoParams& params) const {
  std::vector<double> values = summands(n, lambda, params);
  const double s2 = params.sigma * params.sigma;
  for (double& v : values) v += s2;
  RiskEstimate out = summarize(values, lambda);
  out.pseudoinverse_limit = lambda == 0.0 && n < d_;
  return out;
}

RiskEstimate IsoSpectrumPaths::optimal_risk(int n, const IsoParams& params) const {
  const auto lam = optimal_lambda_iso(params.d, params.sigma, params.beta_norm);
  if (!lam) {
    RiskEstimate out;
    out.mean = params.sigma * params.sigma;
    out.trials = trials_;
    out.lambda = std::numeric_limits<double>::infinity();
    return out;
  }
  return risk(n, *lam, params);
}

}  // namespace ridgelab
