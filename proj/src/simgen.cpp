#include "histreg/simgen.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace histreg {

DistributionSpec DistributionSpec::uniform(Range lo, Range hi) {
  return {DistFamily::uniform, lo, hi};
}
DistributionSpec DistributionSpec::normal(Range mean, Range variance) {
  return {DistFamily::normal, mean, variance};
}
DistributionSpec DistributionSpec::lognormal(Range mean, Range variance) {
  return {DistFamily::lognormal, mean, variance};
}
DistributionSpec DistributionSpec::neg_lognormal(double mean, double variance) {
  return {DistFamily::neg_lognormal, {mean, mean}, {variance, variance}};
}
DistributionSpec DistributionSpec::chisq(int df) {
  double d = static_cast<double>(df);
  return {DistFamily::chisq, {d, d}, {}};
}
DistributionSpec DistributionSpec::mixture() { return {DistFamily::mixture, {}, {}}; }

void DistributionSpec::validate() const {
  auto ordered = [](const Range& r) { return r.min <= r.max; };
  if (!ordered(first) || !ordered(second)) throw InvalidArgument("range with min > max");
  switch (family) {
    case DistFamily::uniform:
      if (first.max > second.min)
        throw InvalidArgument("uniform endpoint ranges must not cross");
      break;
    case DistFamily::normal:
    case DistFamily::lognormal:
    case DistFamily::neg_lognormal:
      if (second.min < 0.0 || second.max <= 0.0)
        throw InvalidArgument("variance range must be positive");
      break;
    case DistFamily::chisq:
      if (first.min < 1.0 || first.min != std::floor(first.min))
        throw InvalidArgument("degrees of freedom must be a positive integer");
      break;
    case DistFamily::mixture:
      break;
  }
}

double center_noise_factor(LinearityLevel level) {
  switch (level) {
    case LinearityLevel::high: return 3.0 / 8.0;
    case LinearityLevel::moderate: return 3.0 / 2.0;
    case LinearityLevel::low: return 3.0;
  }
  throw InvalidArgument("unknown linearity level");
}

double range_noise_factor(LinearityLevel level) {
  switch (level) {
    case LinearityLevel::high: return 1.0 / 8.0;
    case LinearityLevel::moderate: return 1.0 / 2.0;
    case LinearityLevel::low: return 1.0;
  }
  throw InvalidArgument("unknown linearity level");
}

void ExperimentConfig::validate() const {
  const Eigen::Index p = predictor_count();
  if (p < 1) throw InvalidArgument("at least one predictor required");
  if (true_params.betas.size() != p)
    throw DimensionMismatch("alphas and betas must have equal length");
  if (static_cast<Eigen::Index>(dist_specs.size()) != p)
    throw DimensionMismatch("one distribution spec per predictor required");
  for (Eigen::Index k = 0; k < p; ++k)
    if (true_params.alphas[k] < 0.0 || true_params.betas[k] < 0.0)
      throw InvalidArgument("true alphas and betas must be nonnegative");
  for (const auto& spec : dist_specs) spec.validate();
  if (m < 2) throw InvalidArgument("m must be at least 2");
  if (bins < 2) throw InvalidArgument("bins must be at least 2");
  if (microdata_n < bins + 1) throw InvalidArgument("microdata_n too small for the bin count");
  if (replications < 1) throw InvalidArgument("replications must be at least 1");
}

ColumnStats column_stats(const std::vector<QuantileFunction>& column) {
  if (column.empty()) throw DimensionMismatch("empty column");
  const Eigen::Index n = column.front().piece_count();
  const double m = static_cast<double>(column.size());
  ColumnStats stats;
  stats.min_half_range = column.front().half_ranges().minCoeff();
  Vector mean_centers = Vector::Zero(n);
  for (const auto& q : column) {
    if (q.piece_count() != n) throw LengthMismatch("column not on a shared partition");
    mean_centers += q.centers();
    stats.min_half_range = std::min(stats.min_half_range, q.half_ranges().minCoeff());
  }
  stats.center_magnitude = (mean_centers / m).cwiseAbs().mean();
  return stats;
}

namespace {

double draw_value(const DistributionSpec& spec, double h1, double h2, SplitMix64& rng) {
  switch (spec.family) {
    case DistFamily::uniform: return sample_uniform(rng, h1, h2);
    case DistFamily::normal: return sample_normal(rng, h1, h2);
    case DistFamily::lognormal: return sample_lognormal(rng, h1, h2);
    case DistFamily::neg_lognormal: return -sample_lognormal(rng, h1, h2);
    case DistFamily::chisq: {
      double acc = 0.0;
      for (int i = 0; i < static_cast<int>(h1); ++i) acc += sample_chisq1(rng);
      return acc;
    }
    case DistFamily::mixture: break;
  }
  throw InvalidArgument("unknown distribution family");
}

}  // namespace

QuantileFunction gen_predictor_unit(const DistributionSpec& spec, int bins, int microdata_n,
                                    SplitMix64& rng) {
  DistributionSpec unit_spec = spec;
  if (spec.family == DistFamily::mixture) {
    switch (rng.next() % 5) {
      case 0: unit_spec = DistributionSpec::uniform({1.0, 1.0}, {3.0, 3.0}); break;
      case 1: unit_spec = DistributionSpec::normal({1.0, 1.0}, {1.0, 1.0}); break;
      case 2: unit_spec = DistributionSpec::chisq(1); break;
      case 3: unit_spec = DistributionSpec::lognormal({0.0, 0.0}, {0.5, 0.5}); break;
      default: unit_spec = DistributionSpec::neg_lognormal(0.0, 0.5); break;
    }
  }
  double h1 = sample_uniform(rng, unit_spec.first.min, unit_spec.first.max);
  double h2 = sample_uniform(rng, unit_spec.second.min, unit_spec.second.max);

  std::vector<double> x(static_cast<size_t>(microdata_n));
  for (double& v : x) v = draw_value(unit_spec, h1, h2, rng);
  std::sort(x.begin(), x.end());

  // Equiprobable histogram: boundaries at the empirical quantiles k/bins,
  // linearly interpolated between order statistics.
  auto quantile = [&](double u) {
    double h = u * static_cast<double>(microdata_n - 1);
    auto lo = static_cast<size_t>(h);
    if (lo + 1 >= x.size()) return x.back();
    double frac = h - static_cast<double>(lo);
    return x[lo] + frac * (x[lo + 1] - x[lo]);
  };

  Vector cum(bins), c(bins), r(bins);
  double left = x.front();
  for (int i = 0; i < bins; ++i) {
    double t = static_cast<double>(i + 1) / bins;
    double right = i + 1 == bins ? x.back() : quantile(t);
    c[i] = (left + right) / 2.0;
    r[i] = (right - left) / 2.0;
    cum[i] = t;
    left = right;
  }
  cum[bins - 1] = 1.0;
  return QuantileFunction(cum, c, r);
}

QuantileFunction perfect_response(const TrueParams& params,
                                  const std::vector<QuantileFunction>& xs) {
  if (xs.empty()) throw DimensionMismatch("no predictor values");
  DSDModel mod;
  mod.alphas = params.alphas;
  mod.betas = params.betas;
  mod.gamma = params.gamma;
  mod.partition = xs.front().cum_weights();
  return predict(mod, xs);
}

PiecewiseLinear error_curve(double a1, const Vector& bs, const Vector& cum_weights) {
  const Eigen::Index n = cum_weights.size();
  if (bs.size() != n) throw LengthMismatch("one b per piece required");
  Vector centers(n);
  centers[0] = a1;
  for (Eigen::Index i = 1; i < n; ++i) centers[i] = centers[i - 1] + bs[i - 1] + bs[i];
  return PiecewiseLinear{cum_weights, centers, bs};
}

QuantileFunction perturb(const QuantileFunction& y_star, LinearityLevel level,
                         const ColumnStats& stats, SplitMix64& rng) {
  const Eigen::Index n = y_star.piece_count();
  double ca = center_noise_factor(level) * stats.center_magnitude;
  double ra = range_noise_factor(level) * stats.min_half_range;
  double a1 = sample_uniform(rng, -ca, ca);
  Vector bs(n);
  for (Eigen::Index i = 0; i < n; ++i) bs[i] = sample_uniform(rng, -ra, ra);
  PiecewiseLinear err = error_curve(a1, bs, y_star.cum_weights());
  return QuantileFunction(y_star.cum_weights(), y_star.centers() + err.centers,
                          (y_star.half_ranges() + err.half_ranges).cwiseMax(0.0));
}

SymbolicTable generate_table(const ExperimentConfig& cfg, SplitMix64& rng) {
  const Eigen::Index p = cfg.predictor_count();
  std::vector<std::vector<QuantileFunction>> xs(static_cast<size_t>(p));
  for (Eigen::Index k = 0; k < p; ++k) {
    auto& col = xs[static_cast<size_t>(k)];
    col.reserve(static_cast<size_t>(cfg.m));
    for (int j = 0; j < cfg.m; ++j)
      col.push_back(gen_predictor_unit(cfg.dist_specs[static_cast<size_t>(k)], cfg.bins,
                                       cfg.microdata_n, rng));
  }

  std::vector<QuantileFunction> y_star;
  y_star.reserve(static_cast<size_t>(cfg.m));
  std::vector<QuantileFunction> row;
  for (int j = 0; j < cfg.m; ++j) {
    row.clear();
    for (Eigen::Index k = 0; k < p; ++k) row.push_back(xs[static_cast<size_t>(k)][j]);
    y_star.push_back(perfect_response(cfg.true_params, row));
  }

  ColumnStats stats = column_stats(y_star);
  std::vector<QuantileFunction> y;
  y.reserve(static_cast<size_t>(cfg.m));
  for (int j = 0; j < cfg.m; ++j) y.push_back(perturb(y_star[j], cfg.linearity, stats, rng));

  std::vector<VariableColumn> predictors;
  predictors.reserve(static_cast<size_t>(p));
  for (auto& col : xs) predictors.emplace_back(std::move(col));
  return SymbolicTable(VariableColumn(std::move(y)), std::move(predictors));
}

namespace {

struct ReplicationResult {
  Vector b;  // [alpha..., beta..., gamma] in model layout
  double omega = 0.0, rmse_m = 0.0, rmse_l = 0.0, rmse_u = 0.0;
  bool ok = false;
};

ReplicationResult run_one(const ExperimentConfig& cfg, std::uint64_t seed) {
  ReplicationResult res;
  SplitMix64 rng(seed);
  SymbolicTable table = generate_table(cfg, rng);
  DSDModel mod = fit(table);

  std::vector<QuantileFunction> predicted;
  std::vector<QuantileFunction> row;
  for (Eigen::Index j = 0; j < table.unit_count(); ++j) {
    row.clear();
    for (Eigen::Index k = 0; k < table.predictor_count(); ++k)
      row.push_back(table.predictor(k).unit(j));
    predicted.push_back(predict(mod, row));
  }
  VariableColumn pred_col(std::move(predicted));

  const Eigen::Index p = cfg.predictor_count();
  res.b = Vector(2 * p + 1);
  res.b.head(p) = mod.alphas;
  res.b.segment(p, p) = mod.betas;
  res.b[2 * p] = mod.gamma;
  res.omega = mod.omega;
  res.rmse_m = rmse_m(table.response(), pred_col);
  auto [lo, up] = rmse_bounds(table.response(), pred_col);
  res.rmse_l = lo;
  res.rmse_u = up;
  res.ok = true;
  return res;
}

ParamStats stats_of(const std::vector<double>& xs, double truth) {
  ParamStats s;
  double n = static_cast<double>(xs.size());
  for (double x : xs) s.mean += x;
  s.mean /= n;
  double var = 0.0;
  for (double x : xs) {
    var += (x - s.mean) * (x - s.mean);
    s.mse += (truth - x) * (truth - x);
  }
  s.sd = xs.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
  s.mse /= n;
  return s;
}

Moments moments_of(const std::vector<double>& xs) {
  ParamStats s = stats_of(xs, 0.0);
  return {s.mean, s.sd};
}

}  // namespace

ExperimentSummary run_experiment(const ExperimentConfig& cfg, int max_threads) {
  cfg.validate();
  const int R = cfg.replications;
  std::vector<ReplicationResult> results(static_cast<size_t>(R));

  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  int threads = max_threads > 0 ? std::min(max_threads, hw) : hw;
  threads = std::min(threads, R);

  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int r = next.fetch_add(1); r < R; r = next.fetch_add(1)) {
      try {
        results[static_cast<size_t>(r)] =
            run_one(cfg, cfg.base_seed + static_cast<std::uint64_t>(r));
      } catch (const Error&) {
        results[static_cast<size_t>(r)].ok = false;
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(threads));
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  const Eigen::Index p = cfg.predictor_count();
  ExperimentSummary summary;
  std::vector<double> om, rm, rl, ru;
  std::vector<std::vector<double>> al(static_cast<size_t>(p)), be(static_cast<size_t>(p));
  std::vector<double> ga;
  for (const auto& res : results) {  // replication-index order
    if (!res.ok) {
      ++summary.failures;
      continue;
    }
    ++summary.replications_completed;
    for (Eigen::Index k = 0; k < p; ++k) {
      al[static_cast<size_t>(k)].push_back(res.b[k]);
      be[static_cast<size_t>(k)].push_back(res.b[p + k]);
    }
    ga.push_back(res.b[2 * p]);
    om.push_back(res.omega);
    rm.push_back(res.rmse_m);
    rl.push_back(res.rmse_l);
    ru.push_back(res.rmse_u);
  }
  if (summary.replications_completed == 0)
    throw SolverError("every replication failed to fit");

  for (Eigen::Index k = 0; k < p; ++k) {
    summary.alphas.push_back(stats_of(al[static_cast<size_t>(k)], cfg.true_params.alphas[k]));
    summary.betas.push_back(stats_of(be[static_cast<size_t>(k)], cfg.true_params.betas[k]));
  }
  summary.gamma = stats_of(ga, cfg.true_params.gamma);
  summary.omega = moments_of(om);
  summary.rmse_m = moments_of(rm);
  summary.rmse_l = moments_of(rl);
  summary.rmse_u = moments_of(ru);
  return summary;
}

}  // namespace histreg
