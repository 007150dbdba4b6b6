// Acceptance run: one PASS/FAIL line per criterion, details indented below.
//
// Exit status is zero when the only failures are in clauses marked as known
// (currently the closed-form lambda clause of criterion 6).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "ridgelab/conjecture.hpp"
#include "ridgelab/counterexample.hpp"
#include "ridgelab/experiments.hpp"
#include "ridgelab/general.hpp"
#include "ridgelab/output.hpp"
#include "ridgelab/parallel.hpp"
#include "ridgelab/projection.hpp"
#include "ridgelab/random_features.hpp"
#include "ridgelab/spectrum.hpp"
#include "ridgelab/tuner.hpp"

using namespace ridgelab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  // Set when the only failing clause is the documented unattainable one.
  bool known_clause_only = false;
  std::vector<std::string> details;
  std::vector<std::string> failed_clauses;

  void check(bool ok, const std::string& clause, const std::string& detail) {
    details.push_back(std::string(ok ? "ok   " : "FAIL ") + clause + ": " + detail);
    if (!ok) {
      pass = false;
      failed_clauses.push_back(clause);
    }
  }
  void note(const std::string& s) { details.push_back("     " + s); }
};

std::string fmt(double v, int precision = 6) {
  std::ostringstream o;
  o.precision(precision);
  o << v;
  return o.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<int> range(int lo, int hi) {
  std::vector<int> v;
  for (int i = lo; i <= hi; ++i) v.push_back(i);
  return v;
}

std::string describe(const MonotonicityVerdict& v, const std::vector<int>& x) {
  std::ostringstream o;
  o << "largest adjacent change " << fmt(v.worst_increase) << " (" << fmt(v.worst_increase_in_se, 3) << " SE)";
  if (v.worst_index + 1 < x.size()) o << " between " << x[v.worst_index] << " and " << x[v.worst_index + 1];
  return o.str();
}

// ---------------------------------------------------------------------------

Outcome criterion1() {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  const NonmonotonicityReport r = verify_nonmonotonicity(TwoPointDistribution{20.0, 0.02});
  const double secs = seconds_since(t0);
  out.check(std::abs(r.lambda1 - 400.0 / 2401.0) <= 1e-9, "n=1 lambda = 400/2401 to 1e-9", fmt(r.lambda1, 17));
  out.check(r.risk1 < 8.157, "n=1 risk < 8.157", fmt(r.risk1, 16));
  out.check(std::abs(r.lambda2 - 0.642525) <= 1e-4, "n=2 lambda = 0.642525 +- 1e-4", fmt(r.lambda2, 12));
  out.check(r.risk2 > 8.179, "n=2 risk > 8.179", fmt(r.risk2, 16));
  out.check(r.gap > 0.022, "gap > 0.022", fmt(r.gap, 10));
  out.check(secs < 1.0, "runtime < 1 s", fmt(secs, 3) + " s");
  out.note("frozen enumeration values: risk1 " + fmt(oracle::kCounterRisk1, 16) + ", risk2 " +
           fmt(oracle::kCounterRisk2, 16));
  return out;
}

Outcome criterion2() {
  Outcome out;
  const IsoParams params{10, 1.0, 0.5};
  const std::vector<int> ns{5, 10, 20, 50};
  const IsoSpectrumPaths paths(ns, params.d, 10000, 2002);
  const std::vector<double> grid = log_grid(1e-2, 1e3, 200);
  const double step = std::log(grid[1] / grid[0]);
  for (int n : ns) {
    std::size_t best = 0;
    double best_risk = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double r = paths.risk(n, grid[k], params).mean;
      if (r < best_risk) {
        best_risk = r;
        best = k;
      }
    }
    const double dist = std::abs(std::log(grid[best] / 2.5)) / step;
    out.check(dist <= 1.0, "n=" + std::to_string(n) + " argmin within one grid step of 2.5",
              "argmin " + fmt(grid[best]) + ", " + fmt(dist, 3) + " steps");
  }
  return out;
}

// Criteria 3 and 4 share the spectrum draws.
struct IsoSweep {
  IsoParams params{50, 1.0, 0.5};
  std::vector<int> ns = range(1, 100);
  std::unique_ptr<IsoSpectrumPaths> paths;
  double lambda_star = 0.0;
  double build_seconds = 0.0;
};

IsoSweep& iso_sweep() {
  static IsoSweep s = [] {
    IsoSweep s;
    const auto t0 = std::chrono::steady_clock::now();
    s.paths = std::make_unique<IsoSpectrumPaths>(s.ns, s.params.d, 2000, 3003);
    s.lambda_star = *optimal_lambda_iso(s.params.d, s.params.sigma, s.params.beta_norm);
    s.build_seconds = seconds_since(t0);
    return s;
  }();
  return s;
}

MonotonicityVerdict iso_curve_verdict(const IsoSweep& s, double lambda) {
  std::vector<RiskEstimate> curve;
  for (int n : s.ns) curve.push_back(s.paths->risk(n, lambda, s.params));
  return check_non_increasing(curve, 2.0);
}

Outcome criterion3() {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  IsoSweep& s = iso_sweep();
  const MonotonicityVerdict v = iso_curve_verdict(s, s.lambda_star);
  out.check(v.monotone, "optimal-lambda risk non-increasing within 2 SE", describe(v, s.ns));
  const double null_risk = s.params.beta_norm * s.params.beta_norm + s.params.sigma * s.params.sigma;
  int peak_n = 0;
  double peak = 0.0;
  for (int n : s.ns) {
    const double r = s.paths->risk(n, 0.0, s.params).mean;
    if (r > peak) {
      peak = r;
      peak_n = n;
    }
  }
  const bool near = std::abs(peak_n - s.params.d) <= 5;
  out.check(near && peak > null_risk, "lambda=0+ curve exceeds null risk near n=d",
            "peak " + fmt(peak) + " at n=" + std::to_string(peak_n) + ", null risk " + fmt(null_risk));
  const double secs = seconds_since(t0);
  out.check(secs < 120.0, "runtime < 2 min", fmt(secs, 3) + " s");
  return out;
}

Outcome criterion4() {
  Outcome out;
  IsoSweep& s = iso_sweep();
  for (double factor : {2.0, 10.0}) {
    const MonotonicityVerdict v = iso_curve_verdict(s, factor * s.lambda_star);
    out.check(v.monotone, "lambda=" + fmt(factor) + "*lambda* non-increasing within 2 SE", describe(v, s.ns));
  }
  // Pathwise ordering on independent coupled draws.
  const int draws = 10000;
  std::mt19937_64 pick(4004);
  std::uniform_int_distribution<int> pick_n(0, 99);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(s.params.d, s.params.d);
  for (double factor : {1.0, 2.0, 10.0}) {
    const double lam = factor * s.lambda_star;
    int ordered = 0;
    double worst = -std::numeric_limits<double>::infinity();
    std::mt19937_64 local = pick;
    for (int k = 0; k < draws; ++k) {
      const int n = pick_n(local);
      const auto [a, b] = coupled_spectrum_pair(n, s.params.d, I, substream_seed(4004, static_cast<std::uint64_t>(k)));
      const double sa = iso_risk_summand(a.gammas, lam, s.params);
      const double sb = iso_risk_summand(b.gammas, lam, s.params);
      worst = std::max(worst, sb - sa);
      if (sb <= sa + 1e-12 * sa) ++ordered;
    }
    out.check(ordered == draws, "pathwise coupled ordering at lambda=" + fmt(factor) + "*lambda*",
              std::to_string(ordered) + "/" + std::to_string(draws) + " draws, max increase " + fmt(worst, 3));
  }
  return out;
}

Outcome criterion5() {
  Outcome out;
  std::mt19937_64 pick(5005);
  std::uniform_int_distribution<int> pick_n(0, 49), pick_d(1, 50);
  double worst = 0.0;
  int violations = 0;
  const int instances = 10000;
  for (int k = 0; k < instances; ++k) {
    const int n = pick_n(pick);
    const int d = pick_d(pick);
    const auto [a, b] =
        coupled_spectrum_pair(n, d, Eigen::MatrixXd::Identity(d, d), substream_seed(5005, static_cast<std::uint64_t>(k)));
    const double v = interlacing_violation(a, b);
    worst = std::max(worst, v);
    if (v > 1e-9) ++violations;
  }
  out.check(violations == 0, "interlacing within 1e-9 on 10^4 instances",
            std::to_string(violations) + " violations, worst " + fmt(worst, 3));
  return out;
}

Outcome criterion6() {
  Outcome out;
  const ProjectionParams pp{100, 1.0, 0.5};
  const int n = 50;
  const std::vector<int> ds = range(1, 100);
  const ProjectionSweep sweep(ds, n, pp, 2000, 6006);
  std::vector<RiskEstimate> curve;
  for (int d : ds) curve.push_back(sweep.optimal(d).risk);
  const MonotonicityVerdict v = check_non_increasing(curve, 2.0);
  out.check(v.monotone, "optimal-lambda risk non-increasing in d within 2 SE", describe(v, ds));

  // Empirical argmin on a log grid against both closed forms.
  const std::vector<double> grid = log_grid(1e-1, 1e5, 200);
  const double step = std::log(grid[1] / grid[0]);
  const std::vector<int> spots{10, 30, 50, 70, 90};
  bool paper_form_ok = true, corrected_ok = true;
  for (int d : spots) {
    std::size_t best = 0;
    double best_risk = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double r = sweep.risk(d, grid[k]).mean;
      if (r < best_risk) {
        best_risk = r;
        best = k;
      }
    }
    const double st2 = sigma_tilde_sq(pp.p, d, pp.sigma, pp.theta_norm);
    const double stated = double(pp.p) * pp.p * st2 / (d * pp.theta_norm * pp.theta_norm);
    const double corrected = *optimal_lambda_proj(pp.p, d, pp.sigma, pp.theta_norm);
    const double off_stated = std::abs(std::log(grid[best] / stated)) / step;
    const double off_corrected = std::abs(std::log(grid[best] / corrected)) / step;
    paper_form_ok = paper_form_ok && off_stated <= 1.0;
    corrected_ok = corrected_ok && off_corrected <= 1.0;
    out.note("d=" + std::to_string(d) + ": argmin " + fmt(grid[best]) + ", p^2 st2/(d|theta|^2) = " + fmt(stated) +
             " (" + fmt(off_stated, 3) + " steps), p st2/|theta|^2 = " + fmt(corrected) + " (" +
             fmt(off_corrected, 3) + " steps)");
  }
  out.check(paper_form_ok, "lambda_opt matches p^2 sigma_tilde^2 / (d |theta|^2)",
            "empirical argmin is off by more than one grid step for d < p");
  out.check(corrected_ok, "lambda_opt matches p sigma_tilde^2 / |theta|^2", "within one grid step at every spot");

  // Independent evidence from the ambient-space oracle: paired risks at the two candidates.
  {
    const int d = 50;
    const double st2 = sigma_tilde_sq(pp.p, d, pp.sigma, pp.theta_norm);
    const double corrected = pp.p * st2;
    const double stated = double(pp.p) * pp.p * st2 / d;
    const auto a = oracle::brute_force_projection_trials(pp.p, d, n, corrected, 1.0, 0.5, 2000, 6106);
    const auto b = oracle::brute_force_projection_trials(pp.p, d, n, stated, 1.0, 0.5, 2000, 6106);
    std::vector<double> diff(a.size());
    for (std::size_t t = 0; t < a.size(); ++t) diff[t] = b[t] - a[t];
    const RiskEstimate e = summarize(diff);
    out.note("brute force, d=50: risk(" + fmt(stated) + ") - risk(" + fmt(corrected) + ") = " + fmt(e.mean, 4) +
             " +- " + fmt(e.std_error, 2) + " (paired)");
  }

  for (int d : spots) {
    const double lam = *optimal_lambda_proj(pp.p, d, pp.sigma, pp.theta_norm);
    const RiskEstimate f = sweep.risk(d, lam);
    const RiskEstimate b = oracle::brute_force_projection(pp.p, d, n, lam, 1.0, 0.5, 2000, 6200 + d);
    const double z = std::abs(f.mean - b.mean) / combined_se(f, b);
    out.check(z <= 3.0, "d=" + std::to_string(d) + " spectrum formula vs brute force within 3 SE",
              fmt(f.mean) + " vs " + fmt(b.mean) + " (" + fmt(z, 3) + " SE)");
  }
  out.known_clause_only = !out.pass && out.failed_clauses.size() == 1 &&
                          out.failed_clauses[0] == "lambda_opt matches p^2 sigma_tilde^2 / (d |theta|^2)";
  if (out.known_clause_only)
    out.note("known: the stated closed form disagrees with the risk formula it is derived from; see README");
  return out;
}

Outcome criterion7() {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  GaussianProblem prob;
  Eigen::VectorXd diag(30);
  diag.head(15).setConstant(10.0);
  diag.tail(15).setConstant(1.0);
  prob.covariance = diag.asDiagonal();
  prob.beta_star = Eigen::VectorXd::Zero(30);
  prob.beta_star(0) = 0.1;
  prob.beta_star(29) = 1.0;
  prob.sigma = 0.5;
  const RegularizerSpec reg = RegularizerSpec::identity(30);
  const std::vector<int> ns = range(1, 60);
  std::vector<double> zero(ns.size());
  std::vector<RiskEstimate> tuned(ns.size());
  const double cap = lambda_search_cap(30, prob.sigma, prob.beta_star.squaredNorm());
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const GeneralRiskCurve curve(prob, reg, ns[i], 5000, 7007);
    zero[i] = curve.risk(0.0).mean;
    SearchOptions o;
    o.null_risk = curve.null_risk();
    const LambdaSearchResult s = minimize_over_lambda([&](double l) { return curve.risk(l).mean; }, 0.0, cap, o);
    if (s.at_null_limit) {
      tuned[i].mean = curve.null_risk();
      tuned[i].trials = 5000;
    } else {
      tuned[i] = curve.risk(s.lambda_opt);
    }
  }
  std::vector<int> maxima;
  for (std::size_t i = 1; i + 1 < ns.size(); ++i)
    if (zero[i] > zero[i - 1] && zero[i] > zero[i + 1]) maxima.push_back(ns[i]);
  std::string list;
  for (int m : maxima) list += (list.empty() ? "" : ", ") + std::to_string(m);
  const bool first = std::any_of(maxima.begin(), maxima.end(), [](int m) { return std::abs(m - 15) <= 3; });
  const bool second = std::find(maxima.begin(), maxima.end(), 30) != maxima.end();
  out.check(first, "lambda=0+ local maximum within 15 +- 3", "local maxima at n = " + list);
  out.check(second, "lambda=0+ local maximum at n = 30", "local maxima at n = " + list);
  const MonotonicityVerdict v = check_non_increasing(tuned, 2.0);
  out.check(v.monotone, "tuned envelope non-increasing within 2 SE", describe(v, ns));
  out.note("runtime " + fmt(seconds_since(t0), 3) + " s");
  return out;
}

Outcome criterion8() {
  Outcome out;
  std::mt19937_64 pick(8008);
  double worst = 0.0;
  int bad = 0;
  for (int k = 0; k < 100; ++k) {
    Rng rng = make_rng(8008, static_cast<std::uint64_t>(k), Stream::aux);
    const int d = 1 + static_cast<int>(pick() % 8);
    const int n = static_cast<int>(pick() % 13);
    const std::uint64_t seed = pick();
    GaussianProblem p;
    const Eigen::MatrixXd a = standard_normal(rng, d, d);
    p.covariance = a * a.transpose() / d + 0.1 * Eigen::MatrixXd::Identity(d, d);
    p.beta_star = standard_normal(rng, d, 1);
    p.sigma = 0.5;
    const Eigen::MatrixXd b = standard_normal(rng, d, d);
    const RegularizerSpec m = RegularizerSpec::custom(b * b.transpose() / d + 0.2 * Eigen::MatrixXd::Identity(d, d));
    const double lam = k % 5 == 0 ? 0.0 : std::exp(std::uniform_real_distribution<double>(-3.0, 3.0)(rng));
    const ReducedProblem r = reduce_to_isotropic(p, m);
    const Eigen::MatrixXd z = sample_design(n, d, seed);
    const Eigen::VectorXd y = sample_responses(z, r.isotropic.beta_star, p.sigma, seed + 1);
    const Eigen::MatrixXd x = z * r.sqrt_covariance;
    const double ra = population_risk(ridge_solve(x, y, lam, m.matrix).beta, p);
    const double rb = population_risk(ridge_solve(z, y, lam, r.regularizer.matrix).beta, r.isotropic);
    const double rel = std::abs(ra - rb) / std::abs(ra);
    worst = std::max(worst, rel);
    if (!(rel <= 1e-8)) ++bad;
  }
  out.check(bad == 0, "per-draw risks agree within 1e-8 relative on 100 instances",
            std::to_string(bad) + " failures, worst " + fmt(worst, 3));
  return out;
}

Outcome criterion9() {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  {
    Rng rng = make_rng(9009, 0, Stream::aux);
    std::uniform_int_distribution<int> pick_d(1, 8), pick_n(1, 12);
    std::uniform_real_distribution<double> log_q(std::log(0.1), std::log(10.0)), log_l(std::log(0.1), std::log(10.0));
    int agree = 0;
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      const int d = pick_d(rng), n = pick_n(rng);
      Eigen::VectorXd q(d);
      for (int j = 0; j < d; ++j) q(j) = std::exp(log_q(rng));
      const Eigen::MatrixXd Q = q.asDiagonal();
      const Eigen::VectorXd beta = standard_normal(rng, d, 1);
      const double lam = std::exp(log_l(rng));
      const RiskEstimate a = risk_from_GH(estimate_GH(n, Q, lam, 10000, 9100 + k), beta, 0.5);
      const RiskEstimate b =
          mc_risk_general(GaussianProblem::isotropic(beta, 0.5), n, lam, RegularizerSpec::custom(Q), 10000, 9200 + k);
      const double z = std::abs(a.mean - b.mean) / combined_se(a, b);
      worst = std::max(worst, z);
      if (z <= 3.0) ++agree;
    }
    out.check(agree == 20, "risk_from_GH vs mc_risk_general within 3 SE on 20 diagonal-Q instances",
              std::to_string(agree) + "/20, worst " + fmt(worst, 3) + " SE");
  }
  {
    Rng rng = make_rng(9010, 0, Stream::aux);
    std::uniform_int_distribution<int> pick_d(1, 12), pick_n(1, 14);
    std::uniform_real_distribution<double> log_q(std::log(0.1), std::log(10.0)), log_l(std::log(0.01), std::log(100.0));
    double worst_g = 0.0, worst_h = 0.0, worst_h_double = 0.0, h_over_dh = 0.0;
    const int samples = 500;
    for (int k = 0; k < samples; ++k) {
      const int d = pick_d(rng), n = pick_n(rng);
      Eigen::VectorXd q(d);
      for (int j = 0; j < d; ++j) q(j) = std::exp(log_q(rng));
      const DiagonalizedQ dq = diagonalize_penalty(Eigen::MatrixXd(q.asDiagonal()));
      const double lam = std::exp(log_l(rng));
      const Eigen::MatrixXd x = standard_normal(rng, n, d);
      const double h = 1e-4 * lam;
      const Eigen::ArrayXd s = gh_trial_sample(x, dq, lam);
      const Eigen::Index dd = static_cast<Eigen::Index>(d) * d;
      const Eigen::ArrayXd dg = s.segment(dd, dd);
      const double dh = s(2 * dd + 1);
      const oracle::FiniteDifferenceGH fd = oracle::central_difference_gh(x, q, lam, h);
      const Eigen::Map<const Eigen::ArrayXd> fd_g(fd.dG.data(), dd);
      worst_g = std::max(worst_g, (fd_g - dg).abs().maxCoeff() / dg.abs().maxCoeff());
      const double rel_h = std::abs(fd.dH - dh) / std::abs(dh);
      worst_h = std::max(worst_h, rel_h);
      // Same quotient in double precision, for the record.
      const Eigen::ArrayXd up = gh_trial_sample(x, dq, lam + h);
      const Eigen::ArrayXd dn = gh_trial_sample(x, dq, lam - h);
      const double rel_double = std::abs((up(2 * dd) - dn(2 * dd)) / (2 * h) - dh) / std::abs(dh);
      if (rel_double > worst_h_double) {
        worst_h_double = rel_double;
        h_over_dh = s(2 * dd) / std::abs(dh * lam);
      }
    }
    out.check(worst_g < 1e-4, "dG/dlambda vs central differences (500 draws, h = 1e-4 lambda)",
              "worst relative " + fmt(worst_g, 3));
    out.check(worst_h < 1e-4, "dH/dlambda vs central differences (500 draws, h = 1e-4 lambda)",
              "worst relative " + fmt(worst_h, 3));
    out.note("difference quotients taken in long double; in double the worst dH quotient is off by " +
             fmt(worst_h_double, 3) + " where H / |lambda dH| = " + fmt(h_over_dh, 3));
  }
  auto tally = [&](const std::vector<BatteryRow>& rows, const std::string& label) {
    int holds1 = 0, holds2 = 0, viol1 = 0, viol2 = 0, out_of_domain = 0;
    for (const BatteryRow& r : rows) {
      holds1 += r.one.verdict == Verdict::holds;
      holds2 += r.two.psd.verdict == Verdict::holds;
      viol1 += r.one.verdict == Verdict::violated;
      viol2 += r.two.psd.verdict == Verdict::violated;
      out_of_domain += !r.in_domain;
    }
    const int total = static_cast<int>(rows.size());
    out.check(holds1 == total && holds2 == total, label + " conditions hold on every row",
              "condition one " + std::to_string(holds1) + "/" + std::to_string(total) + " holds, " +
                  std::to_string(viol1) + " violated; condition two " + std::to_string(holds2) + "/" +
                  std::to_string(total) + " holds, " + std::to_string(viol2) + " violated; " +
                  std::to_string(out_of_domain) + " rows with n > d");
  };
  BatteryOptions o;
  o.instances = 50;
  o.trials = 20000;
  o.seed = 4;
  tally(run_battery(o), "50-instance battery:");
  o.identity_q = true;
  o.instances = 20;
  o.seed = 44;
  tally(run_battery(o), "Q = I battery:");
  const double secs = seconds_since(t0);
  out.check(secs < 300.0, "runtime < 5 min", fmt(secs, 3) + " s");
  return out;
}

Outcome criterion10() {
  Outcome out;
  SyntheticOptions so;
  so.train = 1000;
  so.test = 1000;
  const DatasetSplit data = synthetic_mixture(so);
  const int n = 200;
  const std::vector<int> Ds{50, 100, 150, 180, 200, 220, 250, 300, 400, 600, 800};
  FeatureSweepOptions fo;
  fo.lambdas = {0.0};
  for (double l : log_grid(1e-6, 1e3, 13)) fo.lambdas.push_back(l);
  fo.trials = 3;
  fo.seed = 10010;
  const auto pts = feature_sweep(data, {n}, Ds, fo);
  const std::size_t L = fo.lambdas.size();
  auto at = [&](std::size_t i, std::size_t k) -> const FeatureSweepPoint& { return pts[i * L + k]; };
  auto index_of = [&](int D) { return static_cast<std::size_t>(std::find(Ds.begin(), Ds.end(), D) - Ds.begin()); };
  const double e_quarter = at(index_of(n / 4), 0).test.classification_error;
  const double e_n = at(index_of(n), 0).test.classification_error;
  const double e_four = at(index_of(4 * n), 0).test.classification_error;
  out.check(e_n > e_quarter && e_n > e_four, "unregularized error at D=n above D=n/4 and D=4n",
            "D=n/4: " + fmt(e_quarter) + ", D=n: " + fmt(e_n) + ", D=4n: " + fmt(e_four));

  std::vector<RiskEstimate> envelope;
  for (std::size_t i = 0; i < Ds.size(); ++i) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < L; ++k)
      if (at(i, k).test.classification_error < at(i, best).test.classification_error) best = k;
    RiskEstimate e;
    e.mean = at(i, best).test.classification_error;
    e.std_error = at(i, best).test_error_se;
    envelope.push_back(e);
  }
  const MonotonicityVerdict v = check_non_increasing(envelope, 2.0);
  out.check(v.monotone, "tuned envelope non-increasing in D within 2 SE of trial spread", describe(v, Ds));

  const Dataset sub = subsample(data.train, 150, 3);
  const Eigen::MatrixXd phi = relu_embed(sub.inputs, sample_feature_matrix(300, sub.dim(), 11));
  const double gap = (fit_ridge_primal(phi, sub.one_hot, 0.1) - fit_ridge_dual(phi, sub.one_hot, 0.1)).cwiseAbs().maxCoeff();
  out.check(gap < 1e-8, "primal/dual agreement 1e-8", "max weight difference " + fmt(gap, 3));

  const Dataset train = subsample(data.train, n, 4);
  const FeatureModel m = train_feature_model(train, sample_feature_matrix(n, train.dim(), 12), 1e-8);
  const double mse = eval_classifier(m, train).mse;
  out.check(mse < 1e-6, "train mse < 1e-6 at D=n, lambda=1e-8", fmt(mse, 3));

  const char* dir = std::getenv("RIDGELAB_FASHION_MNIST");
  if (dir && fs::is_directory(dir)) {
    const DatasetSplit fm = load_idx_dataset(dir);
    FeatureSweepOptions f2 = fo;
    f2.trials = 1;
    const std::vector<int> fD{125, 250, 500, 1000, 2000};
    const auto fp = feature_sweep(fm, {500}, fD, f2);
    const double a = fp[0].test.classification_error, b = fp[2 * L].test.classification_error,
                 c = fp[4 * L].test.classification_error;
    out.check(b > a && b > c, "Fashion-MNIST n=500: unregularized peak at D=500",
              "D=125: " + fmt(a) + ", D=500: " + fmt(b) + ", D=2000: " + fmt(c));
  } else {
    out.note("SKIP Fashion-MNIST tier (set RIDGELAB_FASHION_MNIST to an IDX directory to run it)");
  }
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

Outcome criterion11() {
  Outcome out;
  const fs::path configs = fs::path(RIDGELAB_SOURCE_DIR) / "configs";
  const fs::path root = fs::temp_directory_path() / "ridgelab_acceptance_det";
  fs::remove_all(root);
  struct Case {
    std::string file;
    std::function<void(ExperimentConfig&)> shrink;
  };
  const std::vector<Case> cases = {
      {"samplewise_iso.json", [](ExperimentConfig& c) { c.trials = 200; }},
      {"samplewise_noniso.json",
       [](ExperimentConfig& c) {
         c.trials = 100;
         c.n_grid = range(1, 35);
       }},
      {"modelwise_proj.json", [](ExperimentConfig& c) { c.trials = 100; }},
      {"counterexample.json", [](ExperimentConfig&) {}},
      {"conjecture.json",
       [](ExperimentConfig& c) {
         c.trials = 256;
         c.problem["instances"] = 4;
       }},
      {"relu_samplewise.json",
       [](ExperimentConfig& c) {
         c.synthetic = true;
         c.n_grid = {100, 200, 300};
         c.problem["features"] = 200;
         c.problem["test_size"] = 500;
       }},
      {"relu_modelwise.json",
       [](ExperimentConfig& c) {
         c.synthetic = true;
         c.d_grid = {50, 100, 200};
         c.problem["n"] = 100;
         c.problem["test_size"] = 500;
       }},
  };
  const std::size_t saved = worker_count();
  for (const Case& k : cases) {
    std::vector<std::vector<std::string>> runs;
    int r = 0;
    for (std::size_t workers : {std::size_t{1}, std::size_t{4}, std::size_t{4}}) {
      ExperimentConfig c = load_config(configs / k.file);
      k.shrink(c);
      c.output = root / (c.kind + "_" + std::to_string(r++));
      set_worker_count(workers);
      const RunResult res = run_experiment(c);
      std::vector<std::string> bytes;
      for (const fs::path& p : res.csv_files) bytes.push_back(slurp(p));
      runs.push_back(std::move(bytes));
    }
    const bool same = !runs[0].empty() && runs[0] == runs[1] && runs[1] == runs[2];
    std::size_t total = 0;
    for (const std::string& s : runs[0]) total += s.size();
    out.check(same, k.file + " byte-identical over 1, 4, 4 workers",
              std::to_string(runs[0].size()) + " CSV files, " + std::to_string(total) + " bytes");
  }
  set_worker_count(saved);
  fs::remove_all(root);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  // Optional: run a subset, e.g. `acceptance 1 5 11`.
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"counterexample exactness", criterion1},
      {"constant optimal lambda", criterion2},
      {"sample-wise monotonicity", criterion3},
      {"over-regularization monotonicity", criterion4},
      {"interlacing", criterion5},
      {"model-wise monotonicity", criterion6},
      {"triple descent and tuned monotonicity", criterion7},
      {"reduction equivalence", criterion8},
      {"G/H machinery", criterion9},
      {"random features", criterion10},
      {"determinism", criterion11},
  };
  int unexpected = 0, known = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.check(false, "exception", e.what());
    }
    const double secs = seconds_since(t0);
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << id << " (" << criteria[i].first << ") ["
              << fmt(secs, 3) << " s]\n";
    for (const std::string& d : o.details) std::cout << "        " << d << "\n";
    std::cout.flush();
    if (!o.pass) (o.known_clause_only ? known : unexpected)++;
  }
  std::cout << "\n" << unexpected << " unexpected failure(s), " << known << " known failure(s)\n";
  return unexpected == 0 ? 0 : 1;
}
