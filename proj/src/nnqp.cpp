#include "histreg/nnqp.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>

namespace histreg {
namespace nnqp {

namespace {

bool is_constrained(const QPProblem& p, Eigen::Index i) {
  return std::find(p.constrained.begin(), p.constrained.end(), i) != p.constrained.end();
}

double objective_of(const QPProblem& p, const Vector& b) {
  return 0.5 * b.dot(p.H * b) + p.F.dot(b) + p.C;
}

// Equality-constrained minimizer over the passive coordinates, zeros
// elsewhere. Falls back to a ridge solve when LDLT reports failure or the
// result is non-finite.
Vector passive_solve(const QPProblem& p, const std::vector<Eigen::Index>& passive,
                     bool* regularized) {
  Vector z = Vector::Zero(p.dim());
  const Eigen::Index k = static_cast<Eigen::Index>(passive.size());
  if (k == 0) return z;
  Matrix Hpp(k, k);
  Vector Fp(k);
  for (Eigen::Index a = 0; a < k; ++a) {
    Fp[a] = p.F[passive[a]];
    for (Eigen::Index c = 0; c < k; ++c) Hpp(a, c) = p.H(passive[a], passive[c]);
  }
  Eigen::LDLT<Matrix> ldlt(Hpp);
  Vector zp;
  bool ok = ldlt.info() == Eigen::Success;
  if (ok) {
    zp = ldlt.solve(-Fp);
    // iterative refinement pushes the residual to machine precision even on
    // poorly conditioned blocks
    for (int r = 0; r < 2 && zp.allFinite(); ++r) zp -= ldlt.solve(Hpp * zp + Fp);
    ok = zp.allFinite() && (Hpp * zp + Fp).norm() <= 1e-8 * (1.0 + Fp.norm());
  }
  if (!ok) {
    double ridge = 1e-10 * p.H.trace() / static_cast<double>(p.dim());
    Eigen::LDLT<Matrix> ridged(Hpp + ridge * Matrix::Identity(k, k));
    zp = ridged.solve(-Fp);
    if (ridged.info() != Eigen::Success || !zp.allFinite())
      throw NotPSD("passive-block system unsolvable even with ridge term");
    *regularized = true;
  }
  for (Eigen::Index a = 0; a < k; ++a) z[passive[a]] = zp[a];
  return z;
}

}  // namespace

void QPProblem::validate() const {
  const Eigen::Index d = dim();
  if (d < 1 || H.rows() != d || H.cols() != d)
    throw DimensionMismatch("H must be square of the same order as F");
  if (!H.allFinite() || !F.allFinite() || !std::isfinite(C))
    throw InvalidArgument("QP data must be finite");
  double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
  if ((H - H.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw InvalidArgument("H is not symmetric");
  for (Eigen::Index i : constrained)
    if (i < 0 || i >= d) throw DimensionMismatch("constrained index out of range");
}

KKTResult kkt_check(const QPProblem& p, const Vector& b, double tol) {
  if (b.size() != p.dim()) throw DimensionMismatch("b has wrong length");
  Vector g = p.H * b + p.F;
  double residual = 0.0;
  for (Eigen::Index i = 0; i < p.dim(); ++i) {
    if (is_constrained(p, i)) {
      residual = std::max(residual, -std::min(g[i], 0.0));
      residual = std::max(residual, -std::min(b[i], 0.0));
      residual = std::max(residual, std::abs(g[i] * b[i]));
    } else {
      residual = std::max(residual, std::abs(g[i]));
    }
  }
  double scaled = tol * (1.0 + p.F.cwiseAbs().maxCoeff());
  return {residual <= scaled, residual};
}

QPSolution solve(const QPProblem& p, double tol, int max_iter,
                 std::vector<double>* objective_trace) {
  p.validate();
  const Eigen::Index d = p.dim();
  if (max_iter < 0) max_iter = 100 * static_cast<int>(d);
  const double scale = 1.0 + p.F.cwiseAbs().maxCoeff();

  std::vector<Eigen::Index> passive, active;
  for (Eigen::Index i = 0; i < d; ++i)
    (is_constrained(p, i) ? active : passive).push_back(i);

  QPSolution sol;
  sol.b = Vector::Zero(d);
  double prev_obj = std::numeric_limits<double>::infinity();
  int ascents = 0;

  auto accept = [&](const Vector& z) {
    sol.b = z;
    double obj = objective_of(p, sol.b);
    if (objective_trace) objective_trace->push_back(obj);
    if (obj > prev_obj + 1e-10 * (1.0 + std::abs(prev_obj))) {
      if (++ascents >= 3) throw NotPSD("objective ascended repeatedly; H is not PSD");
    }
    prev_obj = std::min(prev_obj, obj);
  };

  if (!passive.empty()) {
    accept(passive_solve(p, passive, &sol.regularized));
    ++sol.iterations;
  }

  while (true) {
    std::sort(active.begin(), active.end());
    Vector g = p.H * sol.b + p.F;
    Eigen::Index entering = -1;
    double worst = -tol * scale;
    for (Eigen::Index i : active) {
      if (g[i] < worst) {  // strict: ties resolve to the lowest index
        worst = g[i];
        entering = i;
      }
    }
    if (entering < 0) break;
    active.erase(std::find(active.begin(), active.end(), entering));
    passive.insert(std::lower_bound(passive.begin(), passive.end(), entering), entering);

    // Inner feasibility loop: step toward the passive minimizer, dropping
    // variables that hit their bound.
    while (true) {
      if (sol.iterations++ >= max_iter)
        throw MaxIterationsExceeded("active-set iteration limit reached");
      Vector z = passive_solve(p, passive, &sol.regularized);
      double theta = 1.0;
      bool feasible = true;
      for (Eigen::Index i : passive) {
        if (is_constrained(p, i) && z[i] <= 0.0) {
          feasible = false;
          double denom = sol.b[i] - z[i];
          if (denom > 0.0) theta = std::min(theta, sol.b[i] / denom);
        }
      }
      if (feasible) {
        accept(z);
        break;
      }
      Vector stepped = sol.b + theta * (z - sol.b);
      // the min-ratio variable lands on zero up to eps * |b|, so snap at a
      // coefficient-scaled threshold
      double snap = 1e-14 * (1.0 + sol.b.cwiseAbs().maxCoeff());
      bool dropped = false;
      for (auto it = passive.begin(); it != passive.end();) {
        Eigen::Index i = *it;
        if (is_constrained(p, i) && stepped[i] <= snap) {
          stepped[i] = 0.0;
          active.push_back(i);
          it = passive.erase(it);
          dropped = true;
        } else {
          ++it;
        }
      }
      accept(stepped);
      if (!dropped) {
        // theta rounded to 1 without clearing anything; zero the entering
        // variable to guarantee progress.
        sol.b[entering] = 0.0;
        active.push_back(entering);
        passive.erase(std::find(passive.begin(), passive.end(), entering));
        break;
      }
    }
  }

  // Termination tolerance scales with the minimizer's magnitude as well:
  // near-singular problems have huge minimizers whose complementarity
  // products cannot be computed below eps * |H| * |b|^2.
  KKTResult kkt = kkt_check(p, sol.b, tol * (1.0 + sol.b.cwiseAbs().maxCoeff()));
  sol.kkt_residual = kkt.residual;
  sol.objective = objective_of(p, sol.b);
  if (!kkt.ok) throw MaxIterationsExceeded("terminated without satisfying the KKT conditions");
  return sol;
}

}  // namespace nnqp
}  // namespace histreg
