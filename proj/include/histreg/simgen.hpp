#pragma once

#include <cstdint>
#include <vector>

#include "histreg/dsd.hpp"
#include "histreg/rng.hpp"

namespace histreg {

enum class DistFamily { uniform, normal, lognormal, neg_lognormal, chisq, mixture };

struct Range {
  double min = 0.0;
  double max = 0.0;
};

// Microdata-generating family for one predictor, with unit-level
// hyperparameters drawn uniformly from the stored ranges:
//   uniform:       lower endpoint ~ U(first), upper endpoint ~ U(second)
//   normal:        mean ~ U(first), variance ~ U(second)
//   lognormal:     log-mean ~ U(first), log-variance ~ U(second)
//   neg_lognormal: mirrored log-normal with log-mean U(first), log-variance U(second)
//   chisq:         first.min degrees of freedom
//   mixture:       per unit one of { U(1,3), N(1,1), chi2(1), lnN(0,0.5),
//                  -lnN(0,0.5) } chosen uniformly
// The factories carry the study's default hyperparameter ranges.
struct DistributionSpec {
  DistFamily family = DistFamily::uniform;
  Range first;
  Range second;

  static DistributionSpec uniform(Range lo = {-2.0, 0.0}, Range hi = {0.0, 2.0});
  static DistributionSpec normal(Range mean = {0.0, 1.0}, Range variance = {0.0, 2.0});
  static DistributionSpec lognormal(Range mean = {-0.5, 0.5}, Range variance = {0.5, 1.0});
  static DistributionSpec neg_lognormal(double mean = 0.0, double variance = 0.5);
  static DistributionSpec chisq(int df = 1);
  static DistributionSpec mixture();

  void validate() const;
};

// Amplitude of the additive error, relative to the response column's center
// magnitude (for the level shift a_1) and minimum half-range (for the
// per-piece half-range noise b_i).
enum class LinearityLevel { high, moderate, low };

double center_noise_factor(LinearityLevel level);  // 3/8, 3/2, 3
double range_noise_factor(LinearityLevel level);   // 1/8, 1/2, 1

struct TrueParams {
  Vector alphas;
  Vector betas;
  double gamma = 0.0;
};

struct ExperimentConfig {
  TrueParams true_params;
  std::vector<DistributionSpec> dist_specs;  // one per predictor
  LinearityLevel linearity = LinearityLevel::high;
  int m = 100;
  int bins = 10;
  int microdata_n = 5000;
  int replications = 200;
  std::uint64_t base_seed = 0;

  Eigen::Index predictor_count() const { return true_params.alphas.size(); }
  void validate() const;
};

struct ParamStats {
  double mean = 0.0;
  double sd = 0.0;
  double mse = 0.0;
};

struct Moments {
  double mean = 0.0;
  double sd = 0.0;
};

struct ExperimentSummary {
  std::vector<ParamStats> alphas;
  std::vector<ParamStats> betas;
  ParamStats gamma;
  Moments omega;
  Moments rmse_m;
  Moments rmse_l;
  Moments rmse_u;
  int replications_completed = 0;
  int failures = 0;
};

// Statistics of the noiseless response column that scale the error draws.
struct ColumnStats {
  double center_magnitude = 0.0;  // (1/n) sum_i | (1/m) sum_j c_{ji} |
  double min_half_range = 0.0;    // min over units and pieces
};

ColumnStats column_stats(const std::vector<QuantileFunction>& column);

// Draws the unit's hyperparameters, samples `microdata_n` values, and builds
// a `bins`-piece equiprobable histogram whose boundaries are the empirical
// quantiles at k/bins (linear interpolation between order statistics).
QuantileFunction gen_predictor_unit(const DistributionSpec& spec, int bins, int microdata_n,
                                    SplitMix64& rng);

// Noiseless response: the model's prediction formula at the true parameters.
QuantileFunction perfect_response(const TrueParams& params,
                                  const std::vector<QuantileFunction>& xs);

// Continuous piecewise-linear error: piece i is m_i + (2 theta - 1) b_i with
// m_1 = a1 and m_i = m_{i-1} + b_{i-1} + b_i.
PiecewiseLinear error_curve(double a1, const Vector& bs, const Vector& cum_weights);

// Adds a random error curve with a1 ~ U(+/- f_c * center_magnitude) and
// b_i ~ U(+/- f_r * min_half_range); half-ranges that land below zero are
// clamped to zero so the result stays a quantile function.
QuantileFunction perturb(const QuantileFunction& y_star, LinearityLevel level,
                         const ColumnStats& stats, SplitMix64& rng);

// One replication's table: predictors per spec, response = perturbed perfect
// response. Consumes the rng deterministically.
SymbolicTable generate_table(const ExperimentConfig& cfg, SplitMix64& rng);

// Runs cfg.replications independent replications (seed = base_seed + index),
// fits each table, and aggregates parameter and goodness-of-fit statistics.
// Fit failures are counted, not fatal. max_threads = 0 picks the hardware
// concurrency; the result is independent of the thread count.
ExperimentSummary run_experiment(const ExperimentConfig& cfg, int max_threads = 0);

}  // namespace histreg
