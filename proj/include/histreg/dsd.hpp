#pragma once

#include <string>
#include <vector>

#include "histreg/metrics.hpp"
#include "histreg/nnqp.hpp"

namespace histreg {

// Response column Y plus p predictor columns X_k, all rewritten onto one
// global partition. The partition is the union of every observation's
// breakpoints closed under t -> 1-t, so piece weights are palindromic and the
// mirrored quantile function -Psi(1-t) is exactly the reversed-piece function
// the model formulas assume.
class SymbolicTable {
 public:
  SymbolicTable(VariableColumn response, std::vector<VariableColumn> predictors,
                std::vector<std::string> unit_labels = {});

  const VariableColumn& response() const { return response_; }
  const std::vector<VariableColumn>& predictors() const { return predictors_; }
  const VariableColumn& predictor(Eigen::Index k) const {
    return predictors_[static_cast<size_t>(k)];
  }
  const Vector& cum_weights() const { return response_.cum_weights(); }
  const std::vector<std::string>& unit_labels() const { return unit_labels_; }
  Eigen::Index unit_count() const { return response_.size(); }
  Eigen::Index predictor_count() const { return static_cast<Eigen::Index>(predictors_.size()); }

 private:
  VariableColumn response_;
  std::vector<VariableColumn> predictors_;
  std::vector<std::string> unit_labels_;
};

// Fitted model: predicted quantile function for a unit with predictor values
// Psi_k is  gamma + sum_k alpha_k Psi_k(t) - beta_k Psi_k(1-t).
struct DSDModel {
  Vector alphas;
  Vector betas;
  double gamma = 0.0;
  double omega = 0.0;
  double se = 0.0;
  double kkt_residual = 0.0;
  Vector partition;  // cum weights the model was fitted on
};

// Quadratic program for the squared-Mallows total error, with coefficient
// layout B = [alpha_1, beta_1, ..., alpha_p, beta_p, gamma]; alpha/beta are
// sign-constrained, gamma free.
nnqp::QPProblem build_qp(const SymbolicTable& t);

// Total squared error at coefficients b, evaluated from the residual sums
// (not through H and F).
double se_value(const SymbolicTable& t, const Vector& b);

// Closed-form gradient of the total squared error at b, from the per-piece
// residual sums; equals Hb + F.
Vector gradient_se(const SymbolicTable& t, const Vector& b);

// tol and max_iter are forwarded to the solver (max_iter < 0 means 100*d).
DSDModel fit(const SymbolicTable& t, double tol = 1e-9, int max_iter = -1);

QuantileFunction predict(const DSDModel& mod, const std::vector<QuantileFunction>& xs);

// Goodness of fit: explained over total Mallows dispersion around the scalar
// symbolic mean of the response.
double omega(const SymbolicTable& t, const VariableColumn& predicted);

// Pointwise error observed - predicted on the merged partition.
PiecewiseLinear error_function(const QuantileFunction& observed,
                               const QuantileFunction& predicted);

// Prediction equations of the two reference models, with caller-supplied
// coefficients (their fitting procedures are out of scope here).
QuantileFunction baseline_predict_bd(double intercept, double slope, const QuantileFunction& x);
QuantileFunction baseline_predict_vi(double intercept, double slope_mean, double slope_centered,
                                     const QuantileFunction& x, double x_mean);
QuantileFunction baseline_predict_vi(double intercept, double slope_mean, double slope_centered,
                                     const QuantileFunction& x);

}  // namespace histreg
