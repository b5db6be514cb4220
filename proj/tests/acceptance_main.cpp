// Acceptance suite: runs the seven gate criteria and prints one PASS/FAIL
// line per criterion. Exit code is the number of failed criteria.
// Usage: acceptance [--criterion N]

#include <Eigen/Cholesky>

#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <iostream>
#include <sstream>
#include <vector>

#include "histreg/io.hpp"
#include "support/generators.hpp"
#include "support/hematocrit_data.hpp"

using namespace histreg;
using Clock = std::chrono::steady_clock;

namespace {

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// ---------------------------------------------------------------------------
// Published prediction table (knots = 6 bin lower bounds + final upper bound).
// VI cells marked in the comments were damaged in extraction (overlapping
// bins / a knot contradicting the model's own displayed coefficients); they
// carry the values the published VI formula produces, which also reproduce
// the paper's exact VI error figures.
const double kGoldenDSD[10][7] = {
    {33.84, 35.70, 36.32, 36.73, 37.13, 37.56, 38.85},
    {35.16, 38.04, 39.00, 39.96, 40.67, 41.38, 43.51},
    {35.45, 42.27, 43.38, 44.50, 45.61, 46.72, 50.46},
    {35.80, 40.08, 41.50, 42.92, 43.81, 44.70, 47.37},
    {39.68, 42.52, 43.64, 44.75, 45.86, 46.97, 50.25},
    {40.93, 42.92, 43.58, 44.04, 44.51, 44.99, 46.45},
    {42.67, 43.86, 44.26, 44.65, 45.22, 45.78, 47.48},
    {39.26, 40.74, 41.24, 41.72, 42.20, 42.79, 44.54},
    {27.66, 33.54, 35.50, 36.70, 37.91, 39.20, 43.08},
    {45.85, 47.48, 48.03, 48.58, 49.13, 49.68, 51.33}};

const double kGoldenBD[10][7] = {
    {34.33, 35.87, 36.38, 36.70, 37.02, 37.35, 38.31},
    {36.00, 38.37, 39.16, 39.95, 40.49, 41.03, 42.64},
    {36.98, 42.74, 43.62, 44.51, 45.39, 46.28, 48.93},
    {36.98, 40.55, 41.74, 42.93, 43.58, 44.23, 46.18},
    {40.78, 42.99, 43.87, 44.76, 45.64, 46.53, 49.19},
    {41.50, 43.14, 43.68, 44.05, 44.42, 44.79, 45.90},
    {43.18, 44.07, 44.37, 44.66, 45.13, 45.60, 47.00},
    {39.80, 40.95, 41.33, 41.72, 42.10, 42.58, 44.00},
    {29.20, 34.09, 35.72, 36.68, 37.63, 38.59, 41.47},
    {46.43, 47.73, 48.17, 48.61, 49.05, 49.48, 50.80}};

const double kGoldenVI[10][7] = {
    {33.79, 35.70, 36.34, 36.73, 37.13, 37.53, 38.73},
    {35.13, 38.06, 39.04, 40.02, 40.69, 41.36, 43.35},
    {35.29, 42.42, 43.51, 44.61, 45.71, 46.80, 50.10},
    {35.71, 40.13, 41.61, 43.08, 43.89, 44.69, 47.12},
    {39.80, 42.54, 43.64, 44.74, 45.83, 46.93, 50.22},
    {40.92, 42.95, 43.62, 44.08, 44.54, 44.99, 46.37},  // last knot: printed 46.47
    {42.76, 43.87, 44.24, 44.61, 45.19, 45.77, 47.51},
    {39.31, 40.74, 41.22, 41.70, 42.17, 42.76, 44.52},
    {27.54, 33.59, 35.61, 36.80, 37.99, 39.18, 42.74},  // knots 5, 7: printed 37.9, 38.18
    {45.91, 47.51, 48.06, 48.60, 49.14, 49.68, 51.31}};

SymbolicTable load_table() {
  io::Dataset data = io::load_dataset(HISTREG_DATASET_PATH);
  return SymbolicTable(VariableColumn(data.column("hematocrit")),
                       {VariableColumn(data.column("hemoglobin"))}, data.labels);
}

std::vector<QuantileFunction> predictor_row(const SymbolicTable& t, Eigen::Index j) {
  std::vector<QuantileFunction> row;
  for (Eigen::Index k = 0; k < t.predictor_count(); ++k) row.push_back(t.predictor(k).unit(j));
  return row;
}

VariableColumn predict_all(const SymbolicTable& t, const DSDModel& mod) {
  std::vector<QuantileFunction> preds;
  for (Eigen::Index j = 0; j < t.unit_count(); ++j)
    preds.push_back(predict(mod, predictor_row(t, j)));
  return VariableColumn(std::move(preds));
}

Eigen::VectorXd knots_of(const QuantileFunction& q) {
  Eigen::VectorXd k(q.piece_count() + 1);
  for (Eigen::Index i = 0; i < q.piece_count(); ++i) k[i] = q.centers()[i] - q.half_ranges()[i];
  k[q.piece_count()] = q.centers()[q.piece_count() - 1] + q.half_ranges()[q.piece_count() - 1];
  return k;
}

struct GoldenCheck {
  double max_dev = 0.0;
  int violations = 0;
};

GoldenCheck check_golden(const VariableColumn& col, const double golden[10][7], double tol) {
  GoldenCheck res;
  for (Eigen::Index j = 0; j < 10; ++j) {
    Eigen::VectorXd k = knots_of(col.unit(j));
    for (int i = 0; i < 7; ++i) {
      double dev = std::abs(k[i] - golden[j][i]);
      res.max_dev = std::max(res.max_dev, dev);
      if (dev > tol) ++res.violations;
    }
  }
  return res;
}

// --------------------------------------------------------------------------

bool criterion1(std::ostream& out) {
  SymbolicTable t = load_table();
  auto start = Clock::now();
  DSDModel mod = fit(t);
  double elapsed = ms_since(start);
  bool ok = std::abs(mod.alphas[0] - 3.5598) <= 0.005 &&
            std::abs(mod.betas[0] - 0.4128) <= 0.005 &&
            std::abs(mod.gamma - (-1.953)) <= 0.005 && std::abs(mod.omega - 0.96) <= 0.005 &&
            elapsed < 1000.0;
  out << "hematocrit fit: alpha=" << mod.alphas[0] << " beta=" << mod.betas[0]
      << " gamma=" << mod.gamma << " omega=" << mod.omega << " (" << elapsed << " ms)";
  return ok;
}

bool criterion2(std::ostream& out) {
  SymbolicTable t = load_table();
  DSDModel mod = fit(t);
  VariableColumn dsd = predict_all(t, mod);

  std::vector<QuantileFunction> bd, vi, bd_implied;
  for (Eigen::Index j = 0; j < t.unit_count(); ++j) {
    const auto& x = t.predictor(0).unit(j);
    bd.push_back(baseline_predict_bd(-2.16, 3.16, x));
    vi.push_back(baseline_predict_vi(-2.157, 3.161, 3.918, x));
    bd_implied.push_back(baseline_predict_bd(-2.1606, 3.1617, x));
  }

  GoldenCheck d = check_golden(dsd, kGoldenDSD, 0.01);
  GoldenCheck b = check_golden(VariableColumn(bd), kGoldenBD, 0.02);
  GoldenCheck v = check_golden(VariableColumn(vi), kGoldenVI, 0.02);
  GoldenCheck bi = check_golden(VariableColumn(bd_implied), kGoldenBD, 0.02);

  out << "Appendix D golden: DSD max dev " << d.max_dev << " (tol 0.01, " << d.violations
      << " violations); VI max dev " << v.max_dev << " (tol 0.02, " << v.violations
      << " violations); BD max dev " << b.max_dev << " (tol 0.02, " << b.violations
      << "/70 violations; the published -2.16/3.16 are rounded -- the implied unrounded "
         "-2.1606/3.1617 reproduce the table with max dev "
      << bi.max_dev << ")";
  return d.violations == 0 && b.violations == 0 && v.violations == 0;
}

bool criterion3(std::ostream& out) {
  SymbolicTable t = load_table();
  DSDModel mod = fit(t);
  VariableColumn dsd = predict_all(t, mod);
  std::vector<QuantileFunction> bd, vi;
  for (Eigen::Index j = 0; j < t.unit_count(); ++j) {
    const auto& x = t.predictor(0).unit(j);
    bd.push_back(baseline_predict_bd(-2.16, 3.16, x));
    vi.push_back(baseline_predict_vi(-2.157, 3.161, 3.918, x));
  }
  struct Row {
    const char* name;
    VariableColumn col;
    double l, u, m;
  };
  std::vector<Row> rows;
  rows.push_back({"DSD", dsd, 0.8806, 0.8432, 0.8946});
  rows.push_back({"BD", VariableColumn(bd), 1.0288, 1.1064, 1.0507});
  rows.push_back({"VI", VariableColumn(vi), 0.9220, 0.8645, 0.9145});
  bool ok = true;
  for (const auto& row : rows) {
    auto [lo, up] = rmse_bounds(t.response(), row.col);
    double m = rmse_m(t.response(), row.col);
    bool row_ok = std::abs(lo - row.l) <= 0.02 && std::abs(up - row.u) <= 0.02 &&
                  std::abs(m - row.m) <= 0.02;
    ok = ok && row_ok;
    out << row.name << " (L " << lo << ", U " << up << ", M " << m << (row_ok ? ") " : " BAD) ");
  }
  out << "each within 0.02 of the published comparison";
  return ok;
}

bool criterion4(std::ostream& out) {
  auto start = Clock::now();
  ExperimentConfig cfg;
  cfg.true_params.alphas = Vector::Constant(1, 2.0);
  cfg.true_params.betas = Vector::Constant(1, 1.0);
  cfg.true_params.gamma = -1.0;
  cfg.dist_specs = {DistributionSpec::uniform()};
  cfg.linearity = LinearityLevel::high;
  cfg.m = 100;
  cfg.bins = 10;
  cfg.microdata_n = 5000;
  cfg.replications = 200;
  cfg.base_seed = 20130901;

  ExperimentSummary s100 = run_experiment(cfg);
  cfg.m = 10;
  ExperimentSummary s10 = run_experiment(cfg);
  cfg.m = 250;
  ExperimentSummary s250 = run_experiment(cfg);
  double elapsed = ms_since(start);

  bool ok = std::abs(s100.alphas[0].mean - 2.0) <= 0.05 &&
            std::abs(s100.betas[0].mean - 1.0) <= 0.05 &&
            std::abs(s100.gamma.mean - (-1.0)) <= 0.05 &&
            std::abs(s100.omega.mean - 0.9648) <= 0.01 &&
            s250.alphas[0].mse < s10.alphas[0].mse && elapsed < 300000.0 &&
            s100.failures == 0;
  out << "simulation m=100 (200 reps): alpha=" << s100.alphas[0].mean
      << " beta=" << s100.betas[0].mean << " gamma=" << s100.gamma.mean
      << " omega=" << s100.omega.mean << "; MSE(alpha) m=250 " << s250.alphas[0].mse
      << " < m=10 " << s10.alphas[0].mse << " (" << elapsed / 1000.0 << " s)";
  return ok;
}

bool criterion5(std::ostream& out) {
  SplitMix64 rng(0xACCE5501);
  int tables = 0;
  double worst_mean = 0.0, worst_orth = 0.0, worst_decomp = 0.0, worst_grad = 0.0,
         worst_p21 = 0.0, worst_kkt_margin = 0.0;
  bool omega_ok = true;
  for (int iter = 0; iter < 200; ++iter) {
    int p = 1 + static_cast<int>(rng.next() % 3);
    int m = 3 + static_cast<int>(rng.next() % 28);
    SymbolicTable t = testgen::random_table(rng, p, m);
    nnqp::QPProblem qp = build_qp(t);
    DSDModel mod = fit(t);
    VariableColumn preds = predict_all(t, mod);
    ++tables;

    worst_mean = std::max(worst_mean,
                          std::abs(symbolic_mean(preds) - symbolic_mean(t.response())));

    double ybar = symbolic_mean(t.response());
    double cross = 0.0, total = 0.0, explained = 0.0;
    for (Eigen::Index j = 0; j < t.unit_count(); ++j) {
      PiecewiseLinear resid = error_function(t.response().unit(j), preds.unit(j));
      PiecewiseLinear centered = preds.unit(j).pieces();
      centered.centers.array() -= ybar;
      cross += l2_inner(resid, centered);
      total += mallows_sq_to_scalar(t.response().unit(j), ybar);
      explained += mallows_sq_to_scalar(preds.unit(j), ybar);
    }
    worst_orth = std::max(worst_orth, std::abs(cross) / (1.0 + total));
    worst_decomp = std::max(worst_decomp, std::abs(total - mod.se - explained) / (1.0 + total));

    omega_ok = omega_ok && mod.omega >= 0.0 && mod.omega <= 1.0 + 1e-12;
    double kkt_scale = 1.0 + qp.F.cwiseAbs().maxCoeff();
    worst_kkt_margin = std::max(worst_kkt_margin, mod.kkt_residual / kkt_scale);

    Vector b(2 * p + 1);
    for (Eigen::Index i = 0; i < 2 * p; ++i) b[i] = sample_uniform(rng, 0.0, 3.0);
    b[2 * p] = sample_uniform(rng, -3.0, 3.0);
    Vector g = gradient_se(t, b);
    for (Eigen::Index i = 0; i < b.size(); ++i) {
      Vector bp = b, bm = b;
      bp[i] += 1e-5;
      bm[i] -= 1e-5;
      double fd = (se_value(t, bp) - se_value(t, bm)) / 2e-5;
      worst_grad = std::max(worst_grad, std::abs(g[i] - fd) / (1.0 + std::abs(fd)));
    }

    worst_p21 = std::max(worst_p21, std::abs(integral(mean_quantile(t.response()).pieces()) -
                                             symbolic_mean(t.response())));
  }
  bool ok = worst_mean < 1e-8 && worst_orth < 1e-7 && worst_decomp < 1e-7 && omega_ok &&
            worst_kkt_margin < 1e-9 && worst_grad < 1e-4 && worst_p21 < 1e-12;
  out << tables << " random tables: |mean drift| " << worst_mean << "; orth " << worst_orth
      << "; decomp " << worst_decomp << "; omega in [0,1] " << (omega_ok ? "yes" : "NO")
      << "; scaled KKT " << worst_kkt_margin << "; grad-vs-FD " << worst_grad << "; mean identity "
      << worst_p21;
  return ok;
}

bool criterion6(std::ostream& out) {
  SplitMix64 rng(0xACCE5506);
  // metric closed forms against brute quadrature
  double worst_metric = 0.0;
  for (int iter = 0; iter < 50; ++iter) {
    QuantileFunction a = testgen::random_quantile_continuous(rng);
    QuantileFunction b = testgen::random_quantile_continuous(rng);
    const int n = 1000000;
    double msq = 0.0, l1 = 0.0;
    double fa0 = a(0.0), fb0 = b(0.0);
    for (int i = 1; i <= n; ++i) {
      double t = static_cast<double>(i) / n;
      double fa = a(t), fb = b(t);
      double d0 = fa0 - fb0, d1 = fa - fb;
      msq += 0.5 * (d0 * d0 + d1 * d1) / n;
      l1 += 0.5 * (std::abs(d0) + std::abs(d1)) / n;
      fa0 = fa;
      fb0 = fb;
    }
    worst_metric = std::max(worst_metric, std::abs(mallows_sq(a, b) - msq));
    worst_metric = std::max(worst_metric, std::abs(wasserstein(a, b) - l1));
  }

  // solver against exhaustive active-set enumeration, d <= 4
  double worst_qp = 0.0;
  for (int iter = 0; iter < 100; ++iter) {
    Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.next() % 4);
    nnqp::Matrix A(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j) A(i, j) = sample_normal(rng);
    nnqp::QPProblem p;
    p.H = (A.transpose() * A + A * A.transpose()) / 2.0;
    p.F = Vector(d);
    for (Eigen::Index i = 0; i < d; ++i) p.F[i] = 3.0 * sample_normal(rng);
    for (Eigen::Index i = 0; i < d; ++i)
      if (rng.next() % 2 == 0) p.constrained.push_back(i);
    nnqp::QPSolution sol = nnqp::solve(p);

    double best = std::numeric_limits<double>::infinity();
    for (unsigned mask = 0; mask < (1u << p.constrained.size()); ++mask) {
      std::vector<Eigen::Index> passive;
      for (Eigen::Index i = 0; i < d; ++i) {
        bool zeroed = false;
        for (size_t c = 0; c < p.constrained.size(); ++c)
          if (p.constrained[c] == i && (mask & (1u << c))) zeroed = true;
        if (!zeroed) passive.push_back(i);
      }
      Vector b = Vector::Zero(d);
      if (!passive.empty()) {
        nnqp::Matrix Hpp(passive.size(), passive.size());
        Vector Fp(passive.size());
        for (size_t r = 0; r < passive.size(); ++r) {
          Fp[static_cast<Eigen::Index>(r)] = p.F[passive[r]];
          for (size_t c = 0; c < passive.size(); ++c)
            Hpp(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                p.H(passive[r], passive[c]);
        }
        Vector bp = Hpp.ldlt().solve(-Fp);
        if (!bp.allFinite()) continue;
        for (size_t r = 0; r < passive.size(); ++r)
          b[passive[r]] = bp[static_cast<Eigen::Index>(r)];
      }
      bool feasible = true;
      for (Eigen::Index i : p.constrained)
        if (b[i] < -1e-9) feasible = false;
      if (feasible) best = std::min(best, 0.5 * b.dot(p.H * b) + p.F.dot(b) + p.C);
    }
    worst_qp = std::max(worst_qp, std::abs(sol.objective - best) / (1.0 + std::abs(best)));
  }

  // fit against the 0.01-step (alpha, beta) grid with gamma by stationarity
  double worst_grid = 0.0;
  for (int iter = 0; iter < 3; ++iter) {
    int m = 3 + static_cast<int>(rng.next() % 3);
    double ta = sample_uniform(rng, 0.0, 4.0);
    double tb = sample_uniform(rng, 0.0, 4.0);
    std::vector<QuantileFunction> xs, ys;
    for (int j = 0; j < m; ++j) {
      QuantileFunction x = testgen::random_quantile(rng, 3, 2.0);
      xs.push_back(x);
      PiecewiseLinear y = add(scale(x.pieces(), ta), scale(symmetric(x).pieces(), tb));
      y.centers.array() += sample_uniform(rng, -0.5, 0.5);
      ys.emplace_back(y);
    }
    SymbolicTable t(VariableColumn(ys), {VariableColumn(xs)});
    DSDModel mod = fit(t);
    nnqp::QPProblem qp = build_qp(t);
    double xbar = symbolic_mean(t.predictor(0));
    double ybar = symbolic_mean(t.response());
    double best = std::numeric_limits<double>::infinity();
    for (int ia = 0; ia <= 500; ++ia) {
      for (int ib = 0; ib <= 500; ++ib) {
        Vector b(3);
        b[0] = ia * 0.01;
        b[1] = ib * 0.01;
        b[2] = ybar - (b[0] - b[1]) * xbar;
        best = std::min(best, 0.5 * b.dot(qp.H * b) + qp.F.dot(b) + qp.C);
      }
    }
    Vector fb(3);
    fb << mod.alphas[0], mod.betas[0], mod.gamma;
    double fitted = se_value(t, fb);
    worst_grid = std::max(worst_grid, best - fitted);
    if (fitted > best + 1e-9 * (1.0 + best)) worst_grid = 1e9;  // solver must not lose
  }

  bool ok = worst_metric < 1e-5 && worst_qp < 1e-9 && worst_grid <= 0.01;
  out << "metric-vs-quadrature " << worst_metric << " (tol 1e-5); solver-vs-enumeration "
      << worst_qp << " (tol 1e-9 rel); fit-vs-grid gap " << worst_grid << " (tol 0.01)";
  return ok;
}

bool criterion7(std::ostream& out) {
  // symmetric uniform predictors with alpha and beta close
  ExperimentConfig cfg;
  cfg.true_params.alphas = Vector::Constant(1, 2.0);
  cfg.true_params.betas = Vector::Constant(1, 1.0);
  cfg.true_params.gamma = -1.0;
  cfg.dist_specs = {DistributionSpec::uniform()};
  cfg.m = 200;
  cfg.bins = 10;
  cfg.microdata_n = 5000;
  cfg.linearity = LinearityLevel::high;

  auto gap_stats = [](const SymbolicTable& t) {
    DSDModel mod = fit(t);
    double abs_gap = 0.0, range = 0.0;
    int positive = 0;
    for (Eigen::Index j = 0; j < t.unit_count(); ++j) {
      QuantileFunction pred = predict(mod, {t.predictor(0).unit(j)});
      double mean = integral(pred.pieces());
      double median = pred(0.5);
      double gap = mean - median;
      abs_gap += std::abs(gap);
      range += pred(1.0) - pred(0.0);
      if (gap > 0.0) ++positive;
    }
    double m = static_cast<double>(t.unit_count());
    return std::tuple<double, double, double>(abs_gap / m, range / m,
                                              static_cast<double>(positive) / m);
  };

  SplitMix64 rng1(0xACCE5507);
  SymbolicTable sym_table = generate_table(cfg, rng1);
  auto [sym_gap, sym_range, sym_pos] = gap_stats(sym_table);

  cfg.true_params.alphas = Vector::Constant(1, 8.0);
  cfg.true_params.betas = Vector::Constant(1, 0.0);
  cfg.true_params.gamma = 4.0;
  cfg.dist_specs = {DistributionSpec::lognormal()};
  SplitMix64 rng2(0xACCE5508);
  SymbolicTable skew_table = generate_table(cfg, rng2);
  auto [skew_gap, skew_range, skew_pos] = gap_stats(skew_table);

  bool ok = sym_gap < 0.05 * sym_range && skew_pos > 0.8;
  out << "symmetric-uniform: mean |mean-median| " << sym_gap << " < 0.05*range "
      << 0.05 * sym_range << "; lognormal alpha>>beta: positive-gap share " << skew_pos
      << " (> 0.8), mean gap sign " << (skew_gap > 0 ? "+" : "-");
  return ok;
}

struct Criterion {
  int id;
  const char* label;
  std::function<bool(std::ostream&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i + 1 < argc; ++i)
    if (std::strcmp(argv[i], "--criterion") == 0) only = std::atoi(argv[i + 1]);

  std::vector<Criterion> criteria = {
      {1, "hematocrit reproduction", criterion1},
      {2, "Appendix D golden predictions", criterion2},
      {3, "error-measure comparison table", criterion3},
      {4, "simulation study desk-scale", criterion4},
      {5, "model property suite", criterion5},
      {6, "oracle equivalence", criterion6},
      {7, "symmetry diagnostics", criterion7},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    std::ostringstream detail;
    bool ok = false;
    try {
      ok = c.run(detail);
    } catch (const std::exception& e) {
      detail << " exception: " << e.what();
    }
    if (!ok) ++failures;
    std::cout << (ok ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.label
              << "): " << detail.str() << "\n";
  }
  return failures;
}
