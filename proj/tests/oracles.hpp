#pragma once

// Reference values and independent estimators used by the tests.

#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>

#include "ridgelab/problem.hpp"
#include "ridgelab/rng.hpp"
#include "ridgelab/stats.hpp"

namespace oracle {

// 30-digit quadrature (mpmath), frozen.
inline constexpr double kInvOnePlusChi2_1 = 0.655679542418798421;  // E[1/(1 + chi2_1)]
inline constexpr double kInvOnePlusChi2_2 = 0.461455316241865234;  // E[1/(1 + chi2_2)]

// lambda^2 E[1/(chi2_k + lambda q)^2] for (n, lambda, q) and k = n, n + 1.
struct ScalarG {
  int n;
  double lambda, q, g_n, g_next;
};
inline constexpr ScalarG kScalarG[] = {
    {3, 1.0, 2.0, 0.0684041171059840749, 0.0481736811615970372},
    {5, 0.5, 1.0, 0.0245939682217639713, 0.0154922480400731637},
    {4, 2.0, 0.5, 0.384365948725595703, 0.251521220216537392},
};

// Scalar combination (G_n - G_{n+1}) - (H_n - H_{n+1}) dG_n / dH_n for d = 1.
struct ScalarCondTwo {
  int n;
  double lambda, q, value, h_diff;
};
inline constexpr ScalarCondTwo kScalarCondTwo[] = {
    {3, 1.0, 2.0, 0.0201507625101424573, -0.000159346868},
    {2, 0.5, 0.3, 0.816792374338696267, 0.209572105},
};

// Exact enumeration of the two-point example, checked with scipy.
inline constexpr double kCounterRisk1 = 8.156751017493752;
inline constexpr double kCounterLambda2 = 0.6425250360750743;
inline constexpr double kCounterRisk2 = 8.179070321894391;

/// E[f(chi2_k)] by double-exponential quadrature on [0, inf).
template <class F>
double chi2_expectation(int k, F f) {
  const boost::math::chi_squared_distribution<double> dist(k);
  boost::math::quadrature::exp_sinh<double> integrator;
  return integrator.integrate([&](double x) { return x > 0.0 ? f(x) * boost::math::pdf(dist, x) : 0.0; });
}

/// d = 1 G/H quantities at n samples, penalty q, from quadrature.
struct ScalarGH {
  double G, H, dG, dH;
};
inline ScalarGH scalar_gh(int n, double lambda, double q) {
  ScalarGH r{};
  if (n == 0) {
    r.G = 1.0 / (q * q);
    return r;
  }
  r.G = chi2_expectation(n, [&](double s) { return lambda * lambda / std::pow(s + lambda * q, 2); });
  r.H = chi2_expectation(n, [&](double s) { return s / std::pow(s + lambda * q, 2); });
  r.dG = chi2_expectation(n, [&](double s) {
    const double a = s + lambda * q;
    return 2.0 * lambda / (a * a) - 2.0 * lambda * lambda * q / (a * a * a);
  });
  r.dH = chi2_expectation(n, [&](double s) { return -2.0 * q * s / std::pow(s + lambda * q, 3); });
  return r;
}

/// Ridge on P x with P a Haar d x p projection, fitted explicitly in the
/// ambient space. Per-trial population risks sigma^2 + |theta - P^T b|^2; the
/// draws depend only on (seed, t), so calls at different lambda are paired.
inline std::vector<double> brute_force_projection_trials(int p, int d, int n, double lambda, double theta_norm,
                                                         double sigma, int trials, std::uint64_t seed) {
  std::vector<double> risks(static_cast<std::size_t>(trials));
  for (int t = 0; t < trials; ++t) {
    ridgelab::Rng rng = ridgelab::make_rng(seed, static_cast<std::uint64_t>(t), ridgelab::Stream::aux);
    Eigen::VectorXd theta = ridgelab::standard_normal(rng, p, 1);
    theta *= theta_norm / theta.norm();
    const Eigen::MatrixXd P = ridgelab::sample_orthonormal(d, p, rng());
    const Eigen::MatrixXd X = ridgelab::standard_normal(rng, n, p);
    const Eigen::VectorXd y = X * theta + sigma * Eigen::VectorXd(ridgelab::standard_normal(rng, n, 1));
    const Eigen::MatrixXd Xp = X * P.transpose();
    Eigen::MatrixXd A = Xp.transpose() * Xp;
    A.diagonal().array() += lambda;
    const Eigen::VectorXd b = A.ldlt().solve(Xp.transpose() * y);
    risks[static_cast<std::size_t>(t)] = sigma * sigma + (theta - P.transpose() * b).squaredNorm();
  }
  return risks;
}

inline ridgelab::RiskEstimate brute_force_projection(int p, int d, int n, double lambda, double theta_norm,
                                                     double sigma, int trials, std::uint64_t seed) {
  return ridgelab::summarize(brute_force_projection_trials(p, d, n, lambda, theta_norm, sigma, trials, seed), lambda);
}

}  // namespace oracle

namespace oracle {

/// G = lambda^2 A^{-2} and H = tr(A^{-1} S A^{-1}) with A = S + lambda diag(q),
/// S = X^T X, evaluated in scalar type T. Used for finite-difference
/// references in extended precision, where the difference quotient's own
/// rounding error is far below the tolerance being tested.
template <class T>
std::pair<Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>, T> gh_value(const Eigen::MatrixXd& x,
                                                                         const Eigen::VectorXd& q, T lambda) {
  using M = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
  const M xt = x.cast<T>();
  const M s = xt.transpose() * xt;
  M a = s;
  for (Eigen::Index i = 0; i < q.size(); ++i) a(i, i) += lambda * static_cast<T>(q(i));
  const M ainv = a.llt().solve(M::Identity(q.size(), q.size()));
  return {lambda * lambda * ainv * ainv, (ainv * s * ainv).trace()};
}

/// Central differences of G and H at lambda with step h, in long double.
struct FiniteDifferenceGH {
  Eigen::MatrixXd dG;
  double dH;
};
inline FiniteDifferenceGH central_difference_gh(const Eigen::MatrixXd& x, const Eigen::VectorXd& q, double lambda,
                                                double h) {
  using T = long double;
  const auto up = gh_value<T>(x, q, static_cast<T>(lambda) + static_cast<T>(h));
  const auto dn = gh_value<T>(x, q, static_cast<T>(lambda) - static_cast<T>(h));
  const T step = 2 * static_cast<T>(h);
  return {((up.first - dn.first) / step).template cast<double>(), static_cast<double>((up.second - dn.second) / step)};
}

}  // namespace oracle
