#include "histreg/metrics.hpp"

#include <cmath>

namespace histreg {

namespace {

// Rewrites a and b onto their merged partition and applies f(p_i, dc_i, dr_i)
// summed over pieces, where dc/dr are per-piece center/half-range differences.
template <typename F>
double over_common_pieces(const PiecewiseLinear& a, const PiecewiseLinear& b, F f) {
  Vector grid = merge_breakpoints({a.cum_weights, b.cum_weights});
  PiecewiseLinear ra = rewrite_onto(a, grid);
  PiecewiseLinear rb = rewrite_onto(b, grid);
  Vector p = piece_weights(grid);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < grid.size(); ++i)
    acc += f(p[i], ra.centers[i] - rb.centers[i], ra.half_ranges[i] - rb.half_ranges[i]);
  return acc;
}

std::pair<VariableColumn, VariableColumn> align(const VariableColumn& a,
                                                const VariableColumn& b) {
  if (a.size() != b.size()) throw LengthMismatch("columns have different unit counts");
  std::vector<QuantileFunction> all = a.units();
  all.insert(all.end(), b.units().begin(), b.units().end());
  all = rewrite_common(all);
  std::vector<QuantileFunction> ua(all.begin(), all.begin() + a.size());
  std::vector<QuantileFunction> ub(all.begin() + a.size(), all.end());
  return {VariableColumn(std::move(ua)), VariableColumn(std::move(ub))};
}

}  // namespace

VariableColumn::VariableColumn(std::vector<QuantileFunction> units)
    : units_(rewrite_common(units)) {}

double l2_inner(const PiecewiseLinear& a, const PiecewiseLinear& b) {
  Vector grid = merge_breakpoints({a.cum_weights, b.cum_weights});
  PiecewiseLinear ra = rewrite_onto(a, grid);
  PiecewiseLinear rb = rewrite_onto(b, grid);
  Vector p = piece_weights(grid);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < grid.size(); ++i)
    acc += p[i] * (ra.centers[i] * rb.centers[i] + ra.half_ranges[i] * rb.half_ranges[i] / 3.0);
  return acc;
}

double mallows_sq(const QuantileFunction& a, const QuantileFunction& b) {
  return over_common_pieces(a.pieces(), b.pieces(), [](double p, double dc, double dr) {
    return p * (dc * dc + dr * dr / 3.0);
  });
}

double mallows(const QuantileFunction& a, const QuantileFunction& b) {
  return std::sqrt(mallows_sq(a, b));
}

double mallows_sq_to_scalar(const QuantileFunction& q, double c) {
  Vector p = piece_weights(q.cum_weights());
  double acc = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    double dc = q.centers()[i] - c;
    acc += p[i] * (dc * dc + q.half_ranges()[i] * q.half_ranges()[i] / 3.0);
  }
  return acc;
}

double l1_distance(const PiecewiseLinear& a, const PiecewiseLinear& b) {
  // On each common piece the difference is dc + (2u-1) dr, u in [0,1]:
  // linear from dc-dr to dc+dr. Without a sign change the integral is |dc|;
  // with one, the two triangles give ((dc-dr)^2 + (dc+dr)^2) / (4|dr|).
  return over_common_pieces(a, b, [](double p, double dc, double dr) {
    double adc = std::abs(dc), adr = std::abs(dr);
    if (adc >= adr || adr == 0.0) return p * adc;
    double lo = dc - dr, hi = dc + dr;
    return p * (lo * lo + hi * hi) / (4.0 * adr);
  });
}

double wasserstein(const QuantileFunction& a, const QuantileFunction& b) {
  return l1_distance(a.pieces(), b.pieces());
}

double symbolic_mean(const VariableColumn& col) {
  double acc = 0.0;
  for (const auto& q : col.units()) acc += integral(q.pieces());
  return acc / static_cast<double>(col.size());
}

QuantileFunction mean_quantile(const VariableColumn& col) {
  const Vector& grid = col.cum_weights();
  Vector c = Vector::Zero(grid.size());
  Vector r = Vector::Zero(grid.size());
  for (const auto& q : col.units()) {
    c += q.centers();
    r += q.half_ranges();
  }
  double m = static_cast<double>(col.size());
  return QuantileFunction(grid, c / m, r / m);
}

double rmse_m(const VariableColumn& observed, const VariableColumn& predicted) {
  auto [obs, pred] = align(observed, predicted);
  double acc = 0.0;
  for (Eigen::Index j = 0; j < obs.size(); ++j) acc += mallows_sq(obs.unit(j), pred.unit(j));
  return std::sqrt(acc / static_cast<double>(obs.size()));
}

std::pair<double, double> rmse_bounds(const VariableColumn& observed,
                                      const VariableColumn& predicted) {
  auto [obs, pred] = align(observed, predicted);
  Vector p = piece_weights(obs.cum_weights());
  double lo_acc = 0.0, up_acc = 0.0;
  for (Eigen::Index j = 0; j < obs.size(); ++j) {
    const auto& o = obs.unit(j);
    const auto& e = pred.unit(j);
    double lo = 0.0, up = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      double dl = (o.centers()[i] - o.half_ranges()[i]) - (e.centers()[i] - e.half_ranges()[i]);
      double du = (o.centers()[i] + o.half_ranges()[i]) - (e.centers()[i] + e.half_ranges()[i]);
      lo += dl * dl * p[i];
      up += du * du * p[i];
    }
    lo_acc += std::sqrt(lo);
    up_acc += std::sqrt(up);
  }
  double m = static_cast<double>(obs.size());
  return {lo_acc / m, up_acc / m};
}

}  // namespace histreg
