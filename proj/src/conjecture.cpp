#include "ridgelab/conjecture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <ostream>
#include <random>
#include <stdexcept>

#include "ridgelab/parallel.hpp"
#include "ridgelab/rng.hpp"

namespace ridgelab {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::holds:
      return "holds";
    case Verdict::violated:
      return "violated";
    case Verdict::inconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

std::string to_string(OptimumCase c) {
  switch (c) {
    case OptimumCase::infinite_lambda:
      return "infinite_lambda";
    case OptimumCase::interior:
      return "interior";
    case OptimumCase::zero_lambda:
      return "zero_lambda";
  }
  return "interior";
}

Verdict classify(double min_eigenvalue, double std_error) {
  if (!std::isfinite(min_eigenvalue) || std::isnan(std_error)) return Verdict::inconclusive;
  if (min_eigenvalue >= -3.0 * std_error) return Verdict::holds;
  if (std::abs(min_eigenvalue) > 10.0 * std_error) return Verdict::violated;
  return Verdict::inconclusive;
}

PSDReport psd_report(const Eigen::MatrixXd& matrix, const Eigen::MatrixXd& entry_se, const ConjectureInstance& instance) {
  if (matrix.rows() != matrix.cols() || matrix.size() == 0) throw std::invalid_argument("PSD test needs a square matrix");
  if (entry_se.rows() != matrix.rows() || entry_se.cols() != matrix.cols())
    throw std::invalid_argument("entry SE shape does not match matrix");
  PSDReport r;
  r.instance = instance;
  const double scale = matrix.cwiseAbs().maxCoeff();
  r.asymmetry = scale > 0.0 ? (matrix - matrix.transpose()).cwiseAbs().maxCoeff() / scale : 0.0;
  const Eigen::MatrixXd sym = 0.5 * (matrix + matrix.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym, Eigen::EigenvaluesOnly);
  r.min_eigenvalue = eig.eigenvalues()(0);
  r.std_error = (0.5 * (entry_se + entry_se.transpose())).norm();
  r.verdict = classify(r.min_eigenvalue, r.std_error);
  return r;
}

namespace {

GHEstimate slice_gh(const Eigen::ArrayXd& mean, const Eigen::ArrayXd& se, Eigen::Index offset, Eigen::Index d) {
  GHEstimate g;
  const Eigen::Index dd = d * d;
  g.G = Eigen::Map<const Eigen::MatrixXd>(mean.data() + offset, d, d);
  g.dG = Eigen::Map<const Eigen::MatrixXd>(mean.data() + offset + dd, d, d);
  g.G_se = Eigen::Map<const Eigen::MatrixXd>(se.data() + offset, d, d);
  g.dG_se = Eigen::Map<const Eigen::MatrixXd>(se.data() + offset + dd, d, d);
  g.H = mean(offset + 2 * dd);
  g.dH = mean(offset + 2 * dd + 1);
  g.H_se = se(offset + 2 * dd);
  g.dH_se = se(offset + 2 * dd + 1);
  return g;
}

ConjectureInstance instance_of(const CoupledGH& gh) {
  ConjectureInstance in;
  in.n = gh.at_n.n;
  in.d = static_cast<int>(gh.at_n.G.rows());
  in.q = diagonalize_penalty(gh.at_n.Q).q;
  in.lambda = gh.at_n.lambda;
  in.trials = gh.trials;
  in.seed = gh.seed;
  return in;
}

Eigen::MatrixXd condition_two_matrix(const Eigen::MatrixXd& g_diff, double h_diff, const Eigen::MatrixXd& dg,
                                     double dh) {
  return g_diff - (h_diff / dh) * dg;
}

}  // namespace

CoupledGH estimate_coupled_GH(int n, const Eigen::MatrixXd& Q, double lambda, int trials, std::uint64_t seed,
                              bool coupled) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be finite and > 0");
  if (n < 0) throw std::invalid_argument("n must be >= 0");
  if (trials < 2) throw std::invalid_argument("trials must be >= 2");
  const DiagonalizedQ dq = diagonalize_penalty(Q);
  const Eigen::Index d = dq.q.size();
  const Eigen::Index m = 2 * d * d + 2;

  const ChunkPlan plan = plan_chunks(static_cast<std::size_t>(trials), kConditionBatches);
  std::vector<MomentAccumulator> acc(plan.chunks, MomentAccumulator(3 * m));
  std::vector<char> ill(plan.chunks, 0);
  parallel_for(plan.chunks, [&](std::size_t c) {
    bool flag = false;
    Eigen::ArrayXd record(3 * m);
    for (std::size_t t = plan.begin(c); t < plan.end(c); ++t) {
      const Eigen::MatrixXd x = sample_design(n + 1, static_cast<int>(d), substream_seed(seed, t));
      record.head(m) = gh_trial_sample(x.topRows(n), dq, lambda, &flag);
      if (coupled) {
        record.segment(m, m) = gh_trial_sample(x, dq, lambda, &flag);
      } else {
        const Eigen::MatrixXd y =
            sample_design(n + 1, static_cast<int>(d), substream_seed(seed, t, Stream::uncoupled));
        record.segment(m, m) = gh_trial_sample(y, dq, lambda, &flag);
      }
      record.tail(m) = record.head(m) - record.segment(m, m);
      acc[c].add(record);
    }
    ill[c] = flag;
  });

  MomentAccumulator total(3 * m);
  for (const MomentAccumulator& a : acc) total.merge(a);
  const Eigen::ArrayXd& mean = total.mean();
  const Eigen::ArrayXd se = total.std_error();

  CoupledGH out;
  out.coupled = coupled;
  out.trials = trials;
  out.seed = seed;
  out.at_n = slice_gh(mean, se, 0, d);
  out.at_next = slice_gh(mean, se, m, d);
  const bool any_ill = std::any_of(ill.begin(), ill.end(), [](char c) { return c != 0; });
  for (GHEstimate* g : {&out.at_n, &out.at_next}) {
    g->lambda = lambda;
    g->trials = trials;
    g->Q = Q;
    g->ill_conditioned = any_ill;
  }
  out.at_n.n = n;
  out.at_next.n = n + 1;
  const GHEstimate diff = slice_gh(mean, se, 2 * m, d);
  out.G_diff = diff.G;
  out.G_diff_se = diff.G_se;
  out.H_diff = diff.H;
  out.H_diff_se = diff.H_se;
  out.batch_means.reserve(plan.chunks);
  for (const MomentAccumulator& a : acc) out.batch_means.push_back(a.mean().head(2 * m));
  return out;
}

PSDReport condition_one(const CoupledGH& gh) { return psd_report(gh.G_diff, gh.G_diff_se, instance_of(gh)); }

PSDReport condition_one(int n, const Eigen::MatrixXd& Q, double lambda, int trials, std::uint64_t seed) {
  return condition_one(estimate_coupled_GH(n, Q, lambda, trials, seed));
}

ConditionTwoReport condition_two(const CoupledGH& gh) {
  const Eigen::Index d = gh.at_n.G.rows();
  const Eigen::Index m = 2 * d * d + 2;
  ConditionTwoReport r;
  r.dH = gh.at_n.dH;
  r.dH_se = gh.at_n.dH_se;
  r.dH_resolved = std::abs(r.dH) > 3.0 * r.dH_se;
  r.H_diff = gh.H_diff;
  r.H_diff_se = gh.H_diff_se;
  if (r.H_diff > 3.0 * r.H_diff_se) r.H_diff_sign = 1;
  if (r.H_diff < -3.0 * r.H_diff_se) r.H_diff_sign = -1;
  r.matrix = condition_two_matrix(gh.G_diff, gh.H_diff, gh.at_n.dG, gh.at_n.dH);

  // Batch means carry the ratio's nonlinearity into the error estimate.
  Eigen::MatrixXd se = Eigen::MatrixXd::Constant(d, d, std::numeric_limits<double>::infinity());
  const std::size_t batches = gh.batch_means.size();
  if (batches >= 2) {
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(d, d), sum_sq = Eigen::MatrixXd::Zero(d, d);
    for (const Eigen::ArrayXd& b : gh.batch_means) {
      const Eigen::Map<const Eigen::MatrixXd> g_n(b.data(), d, d);
      const Eigen::Map<const Eigen::MatrixXd> dg_n(b.data() + d * d, d, d);
      const Eigen::Map<const Eigen::MatrixXd> g_next(b.data() + m, d, d);
      const double h_diff = b(2 * d * d) - b(m + 2 * d * d);
      const Eigen::MatrixXd c = condition_two_matrix(g_n - g_next, h_diff, dg_n, b(2 * d * d + 1));
      sum += c;
      sum_sq += c.cwiseProduct(c);
    }
    const double k = static_cast<double>(batches);
    const Eigen::MatrixXd var = ((sum_sq - sum.cwiseProduct(sum) / k) / (k - 1.0)).cwiseMax(0.0);
    se = (var / k).cwiseSqrt();
  }
  r.psd = psd_report(r.matrix, se, instance_of(gh));
  if (!r.dH_resolved) r.psd.verdict = Verdict::inconclusive;
  return r;
}

ConditionTwoReport condition_two(int n, const Eigen::MatrixXd& Q, double lambda, int trials, std::uint64_t seed) {
  return condition_two(estimate_coupled_GH(n, Q, lambda, trials, seed));
}

namespace {

struct FirstOrder {
  RiskEstimate residual;
  double bound = 0.0;
  double bound_se = 0.0;
};

FirstOrder first_order_terms(int n, const Eigen::MatrixXd& Q, const Eigen::VectorXd& beta_star, double sigma,
                             double lambda, int trials, std::uint64_t seed) {
  const DiagonalizedQ dq = diagonalize_penalty(Q);
  const int d = static_cast<int>(dq.q.size());
  const Eigen::Index dd = static_cast<Eigen::Index>(d) * d;
  const Eigen::VectorXd a = Q * beta_star;
  const double s2 = sigma * sigma;
  std::vector<double> resid(static_cast<std::size_t>(trials)), bias(resid.size()), dh(resid.size());
  parallel_for(resid.size(), [&](std::size_t t) {
    Eigen::MatrixXd x = sample_design(n, d, substream_seed(seed, t));
    if (!dq.diagonal) x = x * dq.rotation;  // same draw as the risk curve
    const Eigen::ArrayXd s = gh_trial_sample(x, dq, lambda);
    const Eigen::Map<const Eigen::MatrixXd> dg(s.data() + dd, d, d);
    const double quad = a.dot(dg * a);
    bias[t] = -quad;
    dh[t] = s(2 * dd + 1);
    resid[t] = quad + s2 * dh[t];
  });
  FirstOrder out;
  out.residual = summarize(resid, lambda);
  const double mb = summarize(bias).mean;
  const double mh = summarize(dh).mean;
  out.bound = mb / mh;
  std::vector<double> lin(resid.size());
  for (std::size_t t = 0; t < lin.size(); ++t) lin[t] = bias[t] - out.bound * dh[t];
  out.bound_se = summarize(lin).std_error / std::abs(mh);
  return out;
}

}  // namespace

std::vector<ImplicationReport> implication_sweep(const std::vector<int>& ns, const Eigen::MatrixXd& Q,
                                                 const Eigen::VectorXd& beta_star, double sigma, double lambda_lo,
                                                 double lambda_hi, int trials, std::uint64_t seed) {
  if (ns.empty()) throw std::invalid_argument("sample-count grid is empty");
  if (!std::is_sorted(ns.begin(), ns.end()) || ns.front() < 0)
    throw std::invalid_argument("sample-count grid must be sorted and non-negative");
  if (beta_star.size() != Q.rows()) throw std::invalid_argument("beta_star dimension does not match Q");
  if (!(lambda_lo >= 0.0) || !(lambda_hi > lambda_lo)) throw std::invalid_argument("need 0 <= lambda_lo < lambda_hi");
  const GaussianProblem problem = GaussianProblem::isotropic(beta_star, sigma);
  const RegularizerSpec reg = RegularizerSpec::custom(Q);

  std::vector<ImplicationReport> out;
  std::unique_ptr<GeneralRiskCurve> cur, next;
  for (int n : ns) {
    if (next && next->n() == n) {
      cur = std::move(next);
    } else {
      cur = std::make_unique<GeneralRiskCurve>(problem, reg, n, trials, seed);
    }
    next = std::make_unique<GeneralRiskCurve>(problem, reg, n + 1, trials, seed);

    ImplicationReport r;
    r.n = n;
    SearchOptions opts;
    opts.null_risk = cur->null_risk();
    const GeneralRiskCurve& curve = *cur;
    r.search = minimize_over_lambda([&](double lam) { return curve.risk(lam).mean; }, lambda_lo, lambda_hi, opts);
    if (r.search.at_null_limit) {
      r.optimum_case = OptimumCase::infinite_lambda;
      r.risk_n.mean = r.risk_next.mean = cur->null_risk();
      r.risk_n.trials = r.risk_next.trials = trials;
      r.risk_n.lambda = r.risk_next.lambda = r.search.lambda_opt;
      r.step_verdict = Verdict::holds;
      out.push_back(r);
      continue;
    }
    r.optimum_case = r.search.at_lower_endpoint ? OptimumCase::zero_lambda : OptimumCase::interior;
    const double lam = r.search.lambda_opt;
    const std::vector<double> rn = cur->trial_risks(lam);
    const std::vector<double> rm = next->trial_risks(lam);
    std::vector<double> diff(rn.size());
    for (std::size_t t = 0; t < diff.size(); ++t) diff[t] = rn[t] - rm[t];
    r.risk_n = summarize(rn, lam);
    r.risk_next = summarize(rm, lam);
    const RiskEstimate step = summarize(diff, lam);
    r.step = step.mean;
    r.step_se = step.std_error;
    r.step_verdict = classify(r.step, r.step_se);
    if (r.optimum_case == OptimumCase::interior && lam > 0.0) {
      const FirstOrder fo = first_order_terms(n, Q, beta_star, sigma, lam, trials, seed);
      r.first_order_residual = fo.residual.mean;
      r.first_order_se = fo.residual.std_error;
      r.sigma_sq_bound = fo.bound;
      r.sigma_sq_bound_se = fo.bound_se;
    }
    out.push_back(r);
  }
  return out;
}

ImplicationReport implication_check(int n, const Eigen::MatrixXd& Q, const Eigen::VectorXd& beta_star, double sigma,
                                    double lambda_lo, double lambda_hi, int trials, std::uint64_t seed) {
  return implication_sweep({n}, Q, beta_star, sigma, lambda_lo, lambda_hi, trials, seed).front();
}

std::vector<BatteryRow> run_battery(const BatteryOptions& o) {
  if (o.instances < 1 || o.lambdas.empty()) throw std::invalid_argument("battery needs instances and lambdas");
  if (o.d_min < 1 || o.d_min > o.d_max || o.n_min < 0 || o.n_min > o.n_max)
    throw std::invalid_argument("battery dimension ranges are invalid");
  if (!(o.q_min > 0.0) || o.q_min > o.q_max) throw std::invalid_argument("battery Q range is invalid");
  std::vector<BatteryRow> rows;
  for (int i = 0; i < o.instances; ++i) {
    Rng rng = make_rng(o.seed, static_cast<std::uint64_t>(i), Stream::aux);
    std::uniform_int_distribution<int> pick_d(o.d_min, o.d_max), pick_n(o.n_min, o.n_max);
    std::uniform_real_distribution<double> log_q(std::log(o.q_min), std::log(o.q_max));
    const int d = pick_d(rng);
    const int n = pick_n(rng);
    Eigen::VectorXd q(d);
    for (int j = 0; j < d; ++j) q(j) = o.identity_q ? 1.0 : std::exp(log_q(rng));
    const Eigen::MatrixXd Q = q.asDiagonal();
    for (std::size_t k = 0; k < o.lambdas.size(); ++k) {
      const std::uint64_t seed = substream_seed(o.seed, static_cast<std::uint64_t>(i) * 64 + k, Stream::design);
      const CoupledGH gh = estimate_coupled_GH(n, Q, o.lambdas[k], o.trials, seed);
      BatteryRow row;
      row.instance = i;
      row.one = condition_one(gh);
      row.two = condition_two(gh);
      row.in_domain = d >= n;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void write_battery_csv(std::ostream& out, const std::vector<BatteryRow>& rows) {
  const auto old_precision = out.precision(17);
  out << "instance,n,d,lambda,in_domain,trials,seed,q,cond1_min_eig,cond1_se,cond1_verdict,cond2_min_eig,cond2_se,"
         "cond2_verdict,dH,dH_se,H_diff,H_diff_se,H_diff_sign\n";
  for (const BatteryRow& r : rows) {
    const ConjectureInstance& in = r.one.instance;
    out << r.instance << ',' << in.n << ',' << in.d << ',' << in.lambda << ',' << (r.in_domain ? 1 : 0) << ','
        << in.trials << ',' << in.seed << ',';
    for (Eigen::Index j = 0; j < in.q.size(); ++j) out << (j ? ";" : "") << in.q(j);
    out << ',' << r.one.min_eigenvalue << ',' << r.one.std_error << ',' << to_string(r.one.verdict) << ','
        << r.two.psd.min_eigenvalue << ',' << r.two.psd.std_error << ',' << to_string(r.two.psd.verdict) << ','
        << r.two.dH << ',' << r.two.dH_se << ',' << r.two.H_diff << ',' << r.two.H_diff_se << ','
        << r.two.H_diff_sign << '\n';
  }
  out.precision(old_precision);
}

}  // namespace ridgelab
