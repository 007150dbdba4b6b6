#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "ridgelab/conjecture.hpp"

using namespace ridgelab;

TEST_CASE("classify") {
  CHECK(classify(0.5, 0.1) == Verdict::holds);
  CHECK(classify(-0.2, 0.1) == Verdict::holds);
  CHECK(classify(-0.5, 0.1) == Verdict::inconclusive);
  CHECK(classify(-1.5, 0.1) == Verdict::violated);
  CHECK(classify(std::nan(""), 0.1) == Verdict::inconclusive);
  CHECK(to_string(Verdict::violated) == "violated");
}

TEST_CASE("psd_report") {
  Eigen::Matrix2d m;
  m << 2.0, 0.0, 0.0, -1.0;
  const PSDReport r = psd_report(m, Eigen::Matrix2d::Constant(0.01), {});
  CHECK(r.min_eigenvalue == doctest::Approx(-1.0));
  CHECK(r.std_error == doctest::Approx(0.02));
  CHECK(r.verdict == Verdict::violated);
  CHECK(r.asymmetry == 0.0);
}

TEST_CASE("identity penalty satisfies both conditions") {
  for (int n : {2, 5, 9}) {
    for (double lam : {0.1, 1.0, 10.0}) {
      const CoupledGH gh = estimate_coupled_GH(n, Eigen::MatrixXd::Identity(4, 4), lam, 4000, 7);
      CHECK(condition_one(gh).verdict == Verdict::holds);
      const ConditionTwoReport two = condition_two(gh);
      CHECK(two.dH < 0.0);
      CHECK(two.psd.verdict == Verdict::holds);
      CHECK(gh.at_n.H >= 0.0);
    }
  }
}

TEST_CASE("d = 1 differences against chi-square quadrature") {
  for (const oracle::ScalarG& c : oracle::kScalarG) {
    const Eigen::MatrixXd Q = Eigen::MatrixXd::Constant(1, 1, c.q);
    const CoupledGH gh = estimate_coupled_GH(c.n, Q, c.lambda, 100000, 5);
    CHECK(std::abs(gh.G_diff(0, 0) - (c.g_n - c.g_next)) < 3.0 * gh.G_diff_se(0, 0));
    CHECK(std::abs(gh.at_next.G(0, 0) - c.g_next) < 3.0 * gh.at_next.G_se(0, 0));
  }
  for (const oracle::ScalarCondTwo& c : oracle::kScalarCondTwo) {
    const oracle::ScalarGH a = oracle::scalar_gh(c.n, c.lambda, c.q);
    const oracle::ScalarGH b = oracle::scalar_gh(c.n + 1, c.lambda, c.q);
    CHECK(a.H - b.H == doctest::Approx(c.h_diff).epsilon(1e-6));
    CHECK((a.G - b.G) - (a.H - b.H) * a.dG / a.dH == doctest::Approx(c.value).epsilon(1e-9));
    const ConditionTwoReport r = condition_two(c.n, Eigen::MatrixXd::Constant(1, 1, c.q), c.lambda, 100000, 6);
    CHECK(std::abs(r.matrix(0, 0) - c.value) < 3.0 * r.psd.std_error);
    CHECK(r.psd.verdict == Verdict::holds);
  }
}

TEST_CASE("coupling reduces the error of the difference") {
  const Eigen::MatrixXd Q = Eigen::Vector3d(0.3, 1.0, 4.0).asDiagonal();
  const CoupledGH c = estimate_coupled_GH(3, Q, 1.0, 4000, 2, true);
  const CoupledGH u = estimate_coupled_GH(3, Q, 1.0, 4000, 2, false);
  CHECK(c.G_diff_se.maxCoeff() < u.G_diff_se.maxCoeff());
  // Both estimate the same quantity.
  const double tol = 3.0 * std::hypot(c.G_diff_se(0, 0), u.G_diff_se(0, 0));
  CHECK(std::abs(c.G_diff(0, 0) - u.G_diff(0, 0)) < tol);
  // The n-row estimates are identical since both use the same first n rows.
  CHECK(c.at_n.G == u.at_n.G);
  CHECK(c.batch_means.size() == static_cast<std::size_t>(kConditionBatches));
}

TEST_CASE("coupled estimates agree with independent G/H runs") {
  const Eigen::MatrixXd Q = Eigen::Vector2d(0.5, 2.0).asDiagonal();
  const CoupledGH gh = estimate_coupled_GH(4, Q, 0.7, 3000, 8);
  const GHEstimate next = estimate_GH(5, Q, 0.7, 3000, 8);
  // estimate_GH draws the same (n + 1)-row designs.
  CHECK((gh.at_next.G - next.G).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(gh.at_next.H == doctest::Approx(next.H).epsilon(1e-12));
}

TEST_CASE("implication check on a diagonal penalty") {
  const Eigen::MatrixXd Q = Eigen::Vector3d(0.5, 1.0, 2.0).asDiagonal();
  const Eigen::Vector3d beta(0.6, -0.4, 0.9);
  const auto reports = implication_sweep({2, 3, 5}, Q, beta, 0.5, 0.0, 1e4, 3000, 4);
  REQUIRE(reports.size() == 3);
  for (const ImplicationReport& r : reports) {
    CHECK(r.step_verdict == Verdict::holds);
    if (r.optimum_case == OptimumCase::interior) {
      CHECK(std::abs(r.first_order_residual) < 3.0 * r.first_order_se + 1e-6);
      CHECK(r.sigma_sq_bound == doctest::Approx(0.25).epsilon(0.05));
    }
  }
  // Pure noise: the null estimator is optimal.
  const ImplicationReport null = implication_check(3, Q, Eigen::Vector3d::Zero(), 0.5, 0.0, 1e4, 500, 4);
  CHECK(null.optimum_case == OptimumCase::infinite_lambda);
  CHECK(null.step_verdict == Verdict::holds);
}

TEST_CASE("small battery and CSV") {
  BatteryOptions o;
  o.instances = 3;
  o.trials = 2000;
  o.lambdas = {1.0};
  o.seed = 9;
  const auto rows = run_battery(o);
  REQUIRE(rows.size() == 3);
  for (const BatteryRow& r : rows) {
    CHECK(r.one.verdict != Verdict::violated);
    CHECK(r.two.psd.verdict != Verdict::violated);
    CHECK(r.in_domain == (r.one.instance.d >= r.one.instance.n));
  }
  std::ostringstream a, b;
  write_battery_csv(a, rows);
  write_battery_csv(b, run_battery(o));
  CHECK(a.str() == b.str());
  const std::string text = a.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 4);

  o.identity_q = true;
  for (const BatteryRow& r : run_battery(o)) CHECK(r.one.instance.q.isOnes());
}
