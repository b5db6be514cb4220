#include "histreg/histcore.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace histreg {

namespace {

void check_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) throw UnboundedBin(std::string(what) + " contains a non-finite value");
}

void validate_breakpoints(const Vector& cum) {
  if (cum.size() < 1) throw DimensionMismatch("at least one piece required");
  check_finite(cum, "cum_weights");
  double prev = 0.0;
  for (Eigen::Index i = 0; i < cum.size(); ++i) {
    if (cum[i] <= prev) throw InvalidArgument("cum_weights must be strictly increasing from 0");
    prev = cum[i];
  }
  if (std::abs(cum[cum.size() - 1] - 1.0) > kWeightTol)
    throw InvalidArgument("cum_weights must end at 1");
}

// Index of the piece whose half-open interval [w_{i-1}, w_i) contains t,
// with t = 1 mapping to the last piece.
Eigen::Index piece_index(const Vector& cum, double t) {
  const double* begin = cum.data();
  const double* end = begin + cum.size();
  Eigen::Index i = std::upper_bound(begin, end, t) - begin;
  return std::min(i, cum.size() - 1);
}

}  // namespace

HistogramValue::HistogramValue(Vector lower, Vector upper, Vector weights)
    : lower_(std::move(lower)), upper_(std::move(upper)), weights_(std::move(weights)) {
  const Eigen::Index n = weights_.size();
  if (n < 1 || lower_.size() != n || upper_.size() != n)
    throw DimensionMismatch("bins and weights must have equal length >= 1");
  check_finite(lower_, "lower bounds");
  check_finite(upper_, "upper bounds");
  check_finite(weights_, "weights");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (weights_[i] < 0.0) throw NegativeWeight("weight " + std::to_string(i) + " is negative");
    if (lower_[i] > upper_[i])
      throw NonOrderedBins("bin " + std::to_string(i) + " has lower > upper");
    if (i > 0 && lower_[i] < upper_[i - 1] - kMonotoneTol)
      throw NonOrderedBins("bin " + std::to_string(i) + " overlaps its predecessor");
  }
  if (std::abs(weights_.sum() - 1.0) > kWeightTol)
    throw WeightSumNotOne("weights sum to " + std::to_string(weights_.sum()));
}

QuantileFunction::QuantileFunction(Vector cum_weights, Vector centers, Vector half_ranges)
    : QuantileFunction(PiecewiseLinear{std::move(cum_weights), std::move(centers),
                                       std::move(half_ranges)}) {}

QuantileFunction::QuantileFunction(PiecewiseLinear pl) : pl_(std::move(pl)) {
  validate_breakpoints(pl_.cum_weights);
  const Eigen::Index n = pl_.pieces();
  if (pl_.centers.size() != n || pl_.half_ranges.size() != n)
    throw DimensionMismatch("centers/half_ranges must match the piece count");
  check_finite(pl_.centers, "centers");
  check_finite(pl_.half_ranges, "half_ranges");
  pl_.cum_weights[n - 1] = 1.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (pl_.half_ranges[i] < -kWeightTol)
      throw NotMonotone("half_range " + std::to_string(i) + " is negative");
    pl_.half_ranges[i] = std::max(pl_.half_ranges[i], 0.0);
    if (i > 0 && pl_.centers[i] - pl_.half_ranges[i] <
                     pl_.centers[i - 1] + pl_.half_ranges[i - 1] - kMonotoneTol)
      throw NotMonotone("pieces " + std::to_string(i - 1) + " and " + std::to_string(i) +
                        " overlap");
  }
}

double QuantileFunction::operator()(double t) const {
  if (t < 0.0 || t > 1.0) throw OutOfDomain("t = " + std::to_string(t) + " outside [0,1]");
  const Vector& cum = pl_.cum_weights;
  Eigen::Index i = piece_index(cum, t);
  double w0 = i == 0 ? 0.0 : cum[i - 1];
  double theta = (t - w0) / (cum[i] - w0);
  return pl_.centers[i] + (2.0 * theta - 1.0) * pl_.half_ranges[i];
}

Vector piece_weights(const Vector& cum_weights) {
  Vector p(cum_weights.size());
  double prev = 0.0;
  for (Eigen::Index i = 0; i < cum_weights.size(); ++i) {
    p[i] = cum_weights[i] - prev;
    prev = cum_weights[i];
  }
  return p;
}

double eval_left_limit(const QuantileFunction& q, double t) {
  if (t < 0.0 || t > 1.0) throw OutOfDomain("t = " + std::to_string(t) + " outside [0,1]");
  const Vector& cum = q.cum_weights();
  for (Eigen::Index i = 0; i < cum.size(); ++i) {
    if (std::abs(t - cum[i]) <= kWeightTol)
      return q.centers()[i] + q.half_ranges()[i];
  }
  return q(t);
}

QuantileFunction to_quantile(const HistogramValue& h) {
  std::vector<double> cum, c, r;
  double running = 0.0;
  for (Eigen::Index i = 0; i < h.bin_count(); ++i) {
    double w = h.weights()[i];
    if (w < kWeightTol) continue;  // null weight: the piece carries no mass
    running += w;
    cum.push_back(running);
    c.push_back((h.lower()[i] + h.upper()[i]) / 2.0);
    r.push_back((h.upper()[i] - h.lower()[i]) / 2.0);
  }
  if (cum.empty()) throw AllWeightsZero("every bin has zero weight");
  cum.back() = 1.0;
  auto wrap = [](const std::vector<double>& v) {
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())).eval();
  };
  return QuantileFunction(wrap(cum), wrap(c), wrap(r));
}

HistogramValue to_histogram(const PiecewiseLinear& pl) {
  const Eigen::Index n = pl.pieces();
  Vector lo(n), hi(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (pl.half_ranges[i] < -kMonotoneTol)
      throw NotMonotone("piece " + std::to_string(i) + " has negative half-range");
    lo[i] = pl.centers[i] - pl.half_ranges[i];
    hi[i] = pl.centers[i] + pl.half_ranges[i];
    if (i > 0 && lo[i] < hi[i - 1] - kMonotoneTol)
      throw NotMonotone("pieces " + std::to_string(i - 1) + " and " + std::to_string(i) +
                        " overlap");
  }
  return HistogramValue(lo, hi, piece_weights(pl.cum_weights));
}

HistogramValue to_histogram(const QuantileFunction& q) { return to_histogram(q.pieces()); }

Vector merge_breakpoints(const std::vector<Vector>& grids) {
  std::vector<double> pts;
  for (const Vector& g : grids) pts.insert(pts.end(), g.data(), g.data() + g.size());
  if (pts.empty()) throw DimensionMismatch("no breakpoints to merge");
  std::sort(pts.begin(), pts.end());
  std::vector<double> out{pts.front()};
  for (double x : pts)
    if (x - out.back() > kWeightTol) out.push_back(x);
  out.back() = 1.0;
  return Eigen::Map<const Vector>(out.data(), static_cast<Eigen::Index>(out.size()));
}

PiecewiseLinear rewrite_onto(const PiecewiseLinear& pl, const Vector& grid) {
  const Eigen::Index m = grid.size();
  PiecewiseLinear out{grid, Vector(m), Vector(m)};
  double prev = 0.0;
  Eigen::Index i = 0;  // current source piece
  for (Eigen::Index j = 0; j < m; ++j) {
    double g = std::min(grid[j], 1.0);
    while (pl.cum_weights[i] <= prev + kWeightTol && i + 1 < pl.pieces()) ++i;
    double w0 = i == 0 ? 0.0 : pl.cum_weights[i - 1];
    double p = pl.cum_weights[i] - w0;
    double tl = (prev - w0) / p;
    double tr = std::min((g - w0) / p, 1.0);
    if (tl <= kWeightTol && tr >= 1.0 - kWeightTol) {
      out.centers[j] = pl.centers[i];  // whole piece survives: keep it bit-exact
      out.half_ranges[j] = pl.half_ranges[i];
    } else {
      double lv = pl.centers[i] + (2.0 * tl - 1.0) * pl.half_ranges[i];
      double rv = pl.centers[i] + (2.0 * tr - 1.0) * pl.half_ranges[i];
      out.centers[j] = (lv + rv) / 2.0;
      out.half_ranges[j] = (rv - lv) / 2.0;
    }
    prev = g;
  }
  return out;
}

std::vector<QuantileFunction> rewrite_common(const std::vector<QuantileFunction>& qs) {
  if (qs.empty()) throw DimensionMismatch("rewrite_common needs at least one function");
  std::vector<Vector> grids;
  grids.reserve(qs.size());
  for (const auto& q : qs) grids.push_back(q.cum_weights());
  Vector grid = merge_breakpoints(grids);
  std::vector<QuantileFunction> out;
  out.reserve(qs.size());
  for (const auto& q : qs) out.emplace_back(rewrite_onto(q.pieces(), grid));
  return out;
}

QuantileFunction symmetric(const QuantileFunction& q) {
  const Eigen::Index n = q.piece_count();
  Vector cum(n), c(n), r(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double w_below = (n - 1 - i) == 0 ? 0.0 : q.cum_weights()[n - 2 - i];
    cum[i] = 1.0 - w_below;
    c[i] = -q.centers()[n - 1 - i];
    r[i] = q.half_ranges()[n - 1 - i];
  }
  cum[n - 1] = 1.0;
  return QuantileFunction(cum, c, r);
}

PiecewiseLinear add(const PiecewiseLinear& a, const PiecewiseLinear& b) {
  Vector grid = merge_breakpoints({a.cum_weights, b.cum_weights});
  PiecewiseLinear ra = rewrite_onto(a, grid);
  PiecewiseLinear rb = rewrite_onto(b, grid);
  return PiecewiseLinear{grid, ra.centers + rb.centers, ra.half_ranges + rb.half_ranges};
}

PiecewiseLinear scale(const PiecewiseLinear& pl, double factor) {
  return PiecewiseLinear{pl.cum_weights, factor * pl.centers, factor * pl.half_ranges};
}

double integral(const PiecewiseLinear& pl) {
  return piece_weights(pl.cum_weights).dot(pl.centers);
}

namespace {

// Right limit at t: at (near-)breakpoints returns the infimum of the piece
// above instead of whatever side float rounding of t happens to land on.
double eval_right_limit(const QuantileFunction& q, double t) {
  const Vector& cum = q.cum_weights();
  for (Eigen::Index i = 0; i + 1 < cum.size(); ++i) {
    if (std::abs(t - cum[i]) <= kWeightTol)
      return q.centers()[i + 1] - q.half_ranges()[i + 1];
  }
  return q(t);
}

}  // namespace

QuantileFunction requantize(const QuantileFunction& q, int k) {
  if (k < 1) throw InvalidArgument("requantize needs k >= 1");
  Vector cum(k), c(k), r(k);
  // Each new piece spans [q((i-1)/k), q(i/k)], taking the right limit at its
  // left endpoint and the left limit at its right endpoint so a function that
  // already has k equal-weight pieces is returned unchanged.
  double lo = q(0.0);
  for (int i = 0; i < k; ++i) {
    double t = static_cast<double>(i + 1) / k;
    double hi = eval_left_limit(q, t);
    c[i] = (lo + hi) / 2.0;
    r[i] = (hi - lo) / 2.0;
    cum[i] = t;
    if (i + 1 < k) lo = eval_right_limit(q, t);
  }
  cum[k - 1] = 1.0;
  return QuantileFunction(cum, c, r);
}

}  // namespace histreg
