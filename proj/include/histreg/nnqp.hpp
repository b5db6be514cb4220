#pragma once

#include <Eigen/Core>

#include <vector>

#include "histreg/errors.hpp"

namespace histreg {
namespace nnqp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Minimize 1/2 b'Hb + F'b + C subject to b_i >= 0 for i in `constrained`;
// the remaining coordinates are free. H must be symmetric (within 1e-10)
// and positive semidefinite for the iteration to make sense.
struct QPProblem {
  Matrix H;
  Vector F;
  double C = 0.0;
  std::vector<Eigen::Index> constrained;

  Eigen::Index dim() const { return F.size(); }
  void validate() const;
};

struct QPSolution {
  Vector b;
  double objective = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
  bool regularized = false;
};

struct KKTResult {
  bool ok = false;
  double residual = 0.0;
};

// First-order optimality check with g = Hb + F:
//   free i:        |g_i| <= tol'
//   constrained i: g_i >= -tol', b_i >= -tol', |g_i b_i| <= tol'
// where tol' = tol * (1 + max|F|). residual reports the worst raw violation.
KKTResult kkt_check(const QPProblem& p, const Vector& b, double tol);

// Active-set iteration in the Lawson-Hanson style, generalized so that free
// variables are permanently passive. Singular passive-block solves retry once
// with a ridge of 1e-10 * trace(H)/d (flagged in the result). If
// `objective_trace` is given it receives the objective after every accepted
// iterate.
QPSolution solve(const QPProblem& p, double tol = 1e-9, int max_iter = -1,
                 std::vector<double>* objective_trace = nullptr);

}  // namespace nnqp
}  // namespace histreg
