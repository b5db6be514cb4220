#include "histreg/dsd.hpp"

#include <cmath>
#include <utility>

namespace histreg {

namespace {

// Threshold below which the response dispersion is indistinguishable from
// the rounding noise of identical units (error in c - ybar is ~eps * |ybar|).
double dispersion_floor(Eigen::Index m, double ybar) {
  return 1e-28 * static_cast<double>(m) * (1.0 + ybar * ybar);
}

Vector reflection_closure(const Vector& grid) {
  Vector mirrored(grid.size());
  mirrored[grid.size() - 1] = 1.0;
  for (Eigen::Index i = 0; i + 1 < grid.size(); ++i)
    mirrored[i] = 1.0 - grid[grid.size() - 2 - i];
  return merge_breakpoints({grid, mirrored});
}

VariableColumn rewrite_column(const VariableColumn& col, const Vector& grid) {
  std::vector<QuantileFunction> units;
  units.reserve(static_cast<size_t>(col.size()));
  for (const auto& q : col.units()) units.emplace_back(rewrite_onto(q.pieces(), grid));
  return VariableColumn(std::move(units));
}

// Per piece i of unit j, the predicted center is u.B and the predicted
// half-range is v.B with the feature vectors below (layout
// [a_1, b_1, ..., a_p, b_p, gamma]).
void feature_vectors(const SymbolicTable& t, Eigen::Index j, Eigen::Index i, Vector& u,
                     Vector& v) {
  const Eigen::Index p = t.predictor_count();
  const Eigen::Index n = t.cum_weights().size();
  for (Eigen::Index k = 0; k < p; ++k) {
    const auto& x = t.predictor(k).unit(j);
    u[2 * k] = x.centers()[i];
    u[2 * k + 1] = -x.centers()[n - 1 - i];
    v[2 * k] = x.half_ranges()[i];
    v[2 * k + 1] = x.half_ranges()[n - 1 - i];
  }
  u[2 * p] = 1.0;
  v[2 * p] = 0.0;
}

}  // namespace

SymbolicTable::SymbolicTable(VariableColumn response, std::vector<VariableColumn> predictors,
                             std::vector<std::string> unit_labels)
    : response_(std::move(response)),
      predictors_(std::move(predictors)),
      unit_labels_(std::move(unit_labels)) {
  if (predictors_.empty()) throw EmptyTable("at least one predictor column required");
  const Eigen::Index m = response_.size();
  for (const auto& col : predictors_)
    if (col.size() != m) throw LengthMismatch("predictor column has a different unit count");
  if (unit_labels_.empty()) {
    for (Eigen::Index j = 0; j < m; ++j) unit_labels_.push_back(std::to_string(j + 1));
  } else if (static_cast<Eigen::Index>(unit_labels_.size()) != m) {
    throw LengthMismatch("unit label count differs from unit count");
  }
  std::vector<Vector> grids{response_.cum_weights()};
  for (const auto& col : predictors_) grids.push_back(col.cum_weights());
  Vector grid = reflection_closure(merge_breakpoints(grids));
  response_ = rewrite_column(response_, grid);
  for (auto& col : predictors_) col = rewrite_column(col, grid);
}

nnqp::QPProblem build_qp(const SymbolicTable& t) {
  const Eigen::Index m = t.unit_count();
  const Eigen::Index p = t.predictor_count();
  const Eigen::Index n = t.cum_weights().size();
  const Eigen::Index d = 2 * p + 1;
  Vector pw = piece_weights(t.cum_weights());

  nnqp::QPProblem qp;
  qp.H = nnqp::Matrix::Zero(d, d);
  qp.F = Vector::Zero(d);
  qp.C = 0.0;
  for (Eigen::Index i = 0; i < d - 1; ++i) qp.constrained.push_back(i);

  Vector u(d), v(d);
  for (Eigen::Index j = 0; j < m; ++j) {
    const auto& y = t.response().unit(j);
    for (Eigen::Index i = 0; i < n; ++i) {
      feature_vectors(t, j, i, u, v);
      double cy = y.centers()[i];
      double ry = y.half_ranges()[i];
      qp.H.noalias() += pw[i] * (2.0 * u * u.transpose() + (2.0 / 3.0) * v * v.transpose());
      qp.F.noalias() += pw[i] * (-2.0 * cy * u - (2.0 / 3.0) * ry * v);
      qp.C += pw[i] * (cy * cy + ry * ry / 3.0);
    }
  }
  return qp;
}

double se_value(const SymbolicTable& t, const Vector& b) {
  const Eigen::Index d = 2 * t.predictor_count() + 1;
  if (b.size() != d) throw DimensionMismatch("coefficient vector has wrong length");
  Vector pw = piece_weights(t.cum_weights());
  Vector u(d), v(d);
  double acc = 0.0;
  for (Eigen::Index j = 0; j < t.unit_count(); ++j) {
    const auto& y = t.response().unit(j);
    for (Eigen::Index i = 0; i < pw.size(); ++i) {
      feature_vectors(t, j, i, u, v);
      double ec = y.centers()[i] - u.dot(b);
      double er = y.half_ranges()[i] - v.dot(b);
      acc += pw[i] * (ec * ec + er * er / 3.0);
    }
  }
  return acc;
}

Vector gradient_se(const SymbolicTable& t, const Vector& b) {
  const Eigen::Index d = 2 * t.predictor_count() + 1;
  if (b.size() != d) throw DimensionMismatch("coefficient vector has wrong length");
  Vector pw = piece_weights(t.cum_weights());
  Vector u(d), v(d);
  Vector g = Vector::Zero(d);
  for (Eigen::Index j = 0; j < t.unit_count(); ++j) {
    const auto& y = t.response().unit(j);
    for (Eigen::Index i = 0; i < pw.size(); ++i) {
      feature_vectors(t, j, i, u, v);
      double ec = y.centers()[i] - u.dot(b);
      double er = y.half_ranges()[i] - v.dot(b);
      g.noalias() += pw[i] * (-2.0 * ec * u - (2.0 / 3.0) * er * v);
    }
  }
  return g;
}

DSDModel fit(const SymbolicTable& t, double tol, int max_iter) {
  nnqp::QPProblem qp = build_qp(t);
  nnqp::QPSolution sol = nnqp::solve(qp, tol, max_iter);

  const Eigen::Index p = t.predictor_count();
  DSDModel mod;
  mod.alphas = Vector(p);
  mod.betas = Vector(p);
  for (Eigen::Index k = 0; k < p; ++k) {
    mod.alphas[k] = sol.b[2 * k];
    mod.betas[k] = sol.b[2 * k + 1];
  }
  mod.gamma = sol.b[2 * p];
  mod.kkt_residual = sol.kkt_residual;
  mod.partition = t.cum_weights();

  std::vector<QuantileFunction> predicted;
  std::vector<QuantileFunction> xs;
  for (Eigen::Index j = 0; j < t.unit_count(); ++j) {
    xs.clear();
    for (Eigen::Index k = 0; k < p; ++k) xs.push_back(t.predictor(k).unit(j));
    predicted.push_back(predict(mod, xs));
  }
  mod.se = 0.0;
  for (Eigen::Index j = 0; j < t.unit_count(); ++j)
    mod.se += mallows_sq(t.response().unit(j), predicted[static_cast<size_t>(j)]);

  VariableColumn pred_col(std::move(predicted));
  double ybar = symbolic_mean(t.response());
  double total = 0.0;
  for (const auto& y : t.response().units()) total += mallows_sq_to_scalar(y, ybar);
  if (total <= dispersion_floor(t.unit_count(), ybar)) {
    // All responses coincide with their mean; the ratio is undefined unless
    // the fit is exact.
    if (mod.se > 1e-12) throw DegenerateResponse("response has zero dispersion around its mean");
    mod.omega = 1.0;
  } else {
    mod.omega = omega(t, pred_col);
  }
  return mod;
}

QuantileFunction predict(const DSDModel& mod, const std::vector<QuantileFunction>& xs) {
  const Eigen::Index p = mod.alphas.size();
  if (static_cast<Eigen::Index>(xs.size()) != p)
    throw ArityMismatch("expected " + std::to_string(p) + " predictor values, got " +
                        std::to_string(xs.size()));
  std::vector<Vector> grids{mod.partition};
  for (const auto& x : xs) grids.push_back(x.cum_weights());
  Vector grid = reflection_closure(merge_breakpoints(grids));
  const Eigen::Index n = grid.size();
  Vector c = Vector::Constant(n, mod.gamma);
  Vector r = Vector::Zero(n);
  for (Eigen::Index k = 0; k < p; ++k) {
    PiecewiseLinear x = rewrite_onto(xs[static_cast<size_t>(k)].pieces(), grid);
    for (Eigen::Index i = 0; i < n; ++i) {
      c[i] += mod.alphas[k] * x.centers[i] - mod.betas[k] * x.centers[n - 1 - i];
      r[i] += mod.alphas[k] * x.half_ranges[i] + mod.betas[k] * x.half_ranges[n - 1 - i];
    }
  }
  return QuantileFunction(grid, c, r.cwiseMax(0.0));
}

double omega(const SymbolicTable& t, const VariableColumn& predicted) {
  if (predicted.size() != t.unit_count())
    throw LengthMismatch("predicted column has a different unit count");
  double ybar = symbolic_mean(t.response());
  double num = 0.0, den = 0.0;
  for (Eigen::Index j = 0; j < t.unit_count(); ++j) {
    num += mallows_sq_to_scalar(predicted.unit(j), ybar);
    den += mallows_sq_to_scalar(t.response().unit(j), ybar);
  }
  if (den <= dispersion_floor(t.unit_count(), ybar))
    throw DegenerateResponse("response has zero dispersion around its mean");
  return num / den;
}

PiecewiseLinear error_function(const QuantileFunction& observed,
                               const QuantileFunction& predicted) {
  return add(observed.pieces(), scale(predicted.pieces(), -1.0));
}

QuantileFunction baseline_predict_bd(double intercept, double slope, const QuantileFunction& x) {
  if (slope < 0.0)
    throw NegativeSlopeUnsupported("a negative slope would flip the predicted bins");
  return QuantileFunction(x.cum_weights(), (intercept + slope * x.centers().array()).matrix(),
                          slope * x.half_ranges());
}

QuantileFunction baseline_predict_vi(double intercept, double slope_mean, double slope_centered,
                                     const QuantileFunction& x, double x_mean) {
  double shift = intercept + slope_mean * x_mean - slope_centered * x_mean;
  return QuantileFunction(x.cum_weights(), (shift + slope_centered * x.centers().array()).matrix(),
                          slope_centered * x.half_ranges());
}

QuantileFunction baseline_predict_vi(double intercept, double slope_mean, double slope_centered,
                                     const QuantileFunction& x) {
  return baseline_predict_vi(intercept, slope_mean, slope_centered, x, integral(x.pieces()));
}

}  // namespace histreg
