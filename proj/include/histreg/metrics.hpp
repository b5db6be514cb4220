#pragma once

#include <utility>
#include <vector>

#include "histreg/histcore.hpp"

namespace histreg {

// m observations of one histogram-valued variable, rewritten onto one shared
// breakpoint partition at construction.
class VariableColumn {
 public:
  explicit VariableColumn(std::vector<QuantileFunction> units);

  const std::vector<QuantileFunction>& units() const { return units_; }
  const QuantileFunction& unit(Eigen::Index j) const { return units_[static_cast<size_t>(j)]; }
  const Vector& cum_weights() const { return units_.front().cum_weights(); }
  Eigen::Index size() const { return static_cast<Eigen::Index>(units_.size()); }

 private:
  std::vector<QuantileFunction> units_;
};

// L2 inner product of two piecewise-linear functions on a shared partition:
// sum_i p_i (c_a c_b + r_a r_b / 3). Exact for these functions.
double l2_inner(const PiecewiseLinear& a, const PiecewiseLinear& b);

// Squared Mallows distance: int_0^1 (a - b)^2 dt, evaluated in closed form
// on the merged partition.
double mallows_sq(const QuantileFunction& a, const QuantileFunction& b);
double mallows(const QuantileFunction& a, const QuantileFunction& b);

// int_0^1 (q(t) - c)^2 dt for a scalar c.
double mallows_sq_to_scalar(const QuantileFunction& q, double c);

// int_0^1 |a - b| dt, exact per piece (a linear difference changes sign at
// most once per piece).
double l1_distance(const PiecewiseLinear& a, const PiecewiseLinear& b);
double wasserstein(const QuantileFunction& a, const QuantileFunction& b);

// Mean of the variable: (1/m) sum_j sum_i c_{ji} p_i.
double symbolic_mean(const VariableColumn& col);

// Barycentric (mean) quantile function: the pointwise average of the column.
QuantileFunction mean_quantile(const VariableColumn& col);

// sqrt( sum_j int (pred_j - obs_j)^2 dt / m ).
double rmse_m(const VariableColumn& observed, const VariableColumn& predicted);

// Lower/upper-bound root-mean-square errors. Note the asymmetric nesting:
// the square root is taken per unit and the mean over units is the result.
std::pair<double, double> rmse_bounds(const VariableColumn& observed,
                                      const VariableColumn& predicted);

}  // namespace histreg
