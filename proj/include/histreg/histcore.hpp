#pragma once

#include <Eigen/Core>

#include <vector>

#include "histreg/errors.hpp"

namespace histreg {

using Vector = Eigen::VectorXd;

// Tolerances shared across the core types.
inline constexpr double kWeightTol = 1e-12;     // cum-weight dedup / sum-to-one
inline constexpr double kMonotoneTol = 1e-9;    // piece-overlap slack

// A piecewise-linear function on [0,1] stored per piece as
//   f(t) = centers[i] + (2*theta - 1) * half_ranges[i],
//   theta = (t - w_{i-1}) / (w_i - w_{i-1}),  t in [w_{i-1}, w_i),
// with cum_weights = {w_1, ..., w_n}, w_0 = 0 implicit and w_n = 1.
// half_ranges may be negative; nothing about monotonicity is implied.
struct PiecewiseLinear {
  Vector cum_weights;
  Vector centers;
  Vector half_ranges;

  Eigen::Index pieces() const { return cum_weights.size(); }
};

// One empirical distribution stored as ordered weighted subintervals.
// Weights sum to one; bins may touch but not overlap; zero-weight bins are
// kept in storage and dropped only on conversion to a quantile function.
class HistogramValue {
 public:
  HistogramValue(Vector lower, Vector upper, Vector weights);

  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }
  const Vector& weights() const { return weights_; }
  Eigen::Index bin_count() const { return weights_.size(); }

 private:
  Vector lower_, upper_, weights_;
};

// A validated non-decreasing piecewise-linear function on [0,1]: the inverse
// of an empirical distribution function. half_ranges are >= 0 and consecutive
// pieces do not overlap (up to kMonotoneTol).
class QuantileFunction {
 public:
  QuantileFunction(Vector cum_weights, Vector centers, Vector half_ranges);
  explicit QuantileFunction(PiecewiseLinear pl);

  const Vector& cum_weights() const { return pl_.cum_weights; }
  const Vector& centers() const { return pl_.centers; }
  const Vector& half_ranges() const { return pl_.half_ranges; }
  const PiecewiseLinear& pieces() const { return pl_; }
  Eigen::Index piece_count() const { return pl_.pieces(); }

  // Value of the piece containing t; pieces are half-open on the right and
  // t = 1 belongs to the last piece. Throws OutOfDomain outside [0,1].
  double operator()(double t) const;

 private:
  PiecewiseLinear pl_;
};

// Piece weights w_i - w_{i-1} of a breakpoint vector.
Vector piece_weights(const Vector& cum_weights);

// Left limit at t: equals q(t) except exactly at interior breakpoints (and at
// t = 1), where the supremum of the piece below is returned instead.
double eval_left_limit(const QuantileFunction& q, double t);

// Conversion per the center/half-range representation; zero-weight bins are
// dropped first. Throws AllWeightsZero when nothing remains.
QuantileFunction to_quantile(const HistogramValue& h);

// Inverse conversion: bin i = [c_i - r_i, c_i + r_i], weight w_i - w_{i-1}.
HistogramValue to_histogram(const QuantileFunction& q);
// Same on a raw piecewise-linear function; throws NotMonotone if pieces
// overlap beyond kMonotoneTol or a half-range is negative.
HistogramValue to_histogram(const PiecewiseLinear& pl);

// Sorted union of breakpoints, deduplicated at kWeightTol, last snapped to 1.
Vector merge_breakpoints(const std::vector<Vector>& grids);

// Splits pl's pieces so its breakpoints become exactly `grid` (which must be
// a superset of pl's breakpoints). Pointwise identical to the input; pieces
// that need no split are copied verbatim.
PiecewiseLinear rewrite_onto(const PiecewiseLinear& pl, const Vector& grid);

// Rewrites every input onto the union of all their breakpoints.
std::vector<QuantileFunction> rewrite_common(const std::vector<QuantileFunction>& qs);

// Quantile function of the mirrored distribution: s(t) = -q(1-t).
// Piece order reverses, centers negate, half-ranges are kept and the
// breakpoints become the complemented-and-reversed ones.
QuantileFunction symmetric(const QuantileFunction& q);

// Pointwise sum / scalar multiple. Results are plain piecewise-linear
// functions; scaling by a negative number breaks monotonicity.
PiecewiseLinear add(const PiecewiseLinear& a, const PiecewiseLinear& b);
PiecewiseLinear scale(const PiecewiseLinear& pl, double factor);

// \int_0^1 pl(t) dt = sum_i p_i c_i.
double integral(const PiecewiseLinear& pl);

// Lossy piecewise-uniform approximation with k equal-weight pieces spanning
// [q((i-1)/k), q(i/k)]. Exact (and idempotent) on equiprobable inputs.
QuantileFunction requantize(const QuantileFunction& q, int k);

}  // namespace histreg
