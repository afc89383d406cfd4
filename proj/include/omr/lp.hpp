#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <vector>

namespace omr {

class LpError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// maximize c'x  s.t.  A x <= b,  x >= 0, with b >= 0 so the origin is feasible.
template <typename Scalar>
struct LinearProgram {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Vector objective;
  Matrix constraints;
  Vector bounds;

  Eigen::Index variables() const { return objective.size(); }
  Eigen::Index rows() const { return constraints.rows(); }
};

template <typename Scalar>
struct LpSolution {
  typename LinearProgram<Scalar>::Vector x;
  Scalar objective{};
};

/// Dense tableau simplex with Bland's rule. Deterministic; suited to the
/// handful of variables a single routing decision produces.
template <typename Scalar>
LpSolution<Scalar> solve_lp(const LinearProgram<Scalar>& lp) {
  using Matrix = typename LinearProgram<Scalar>::Matrix;
  const Eigen::Index n = lp.variables();
  const Eigen::Index m = lp.rows();
  if (lp.constraints.cols() != n || lp.bounds.size() != m)
    throw LpError("solve_lp: inconsistent dimensions");
  if (m > 0 && (lp.bounds.array() < Scalar(0)).any())
    throw LpError("solve_lp: origin infeasible (negative bound)");

  Scalar scale(1);
  if (m > 0) scale = std::max(scale, lp.constraints.cwiseAbs().maxCoeff());
  if (m > 0) scale = std::max(scale, lp.bounds.cwiseAbs().maxCoeff());
  if (n > 0) scale = std::max(scale, lp.objective.cwiseAbs().maxCoeff());
  const Scalar eps = Eigen::NumTraits<Scalar>::dummy_precision() * scale;

  // [A | I | b] over [-c | 0 | 0]
  Matrix tableau = Matrix::Zero(m + 1, n + m + 1);
  tableau.topLeftCorner(m, n) = lp.constraints;
  tableau.block(0, n, m, m).setIdentity();
  tableau.topRightCorner(m, 1) = lp.bounds;
  tableau.bottomLeftCorner(1, n) = -lp.objective.transpose();

  std::vector<Eigen::Index> basis(static_cast<std::size_t>(m));
  for (Eigen::Index r = 0; r < m; ++r) basis[static_cast<std::size_t>(r)] = n + r;

  const Eigen::Index rhs = n + m;
  for (int iteration = 0;; ++iteration) {
    if (iteration > 100000) throw LpError("solve_lp: iteration limit");
    Eigen::Index entering = -1;
    for (Eigen::Index c = 0; c < n + m; ++c)
      if (tableau(m, c) < -eps) {
        entering = c;
        break;
      }
    if (entering < 0) break;

    Eigen::Index leaving = -1;
    Scalar best_ratio(0);
    for (Eigen::Index r = 0; r < m; ++r) {
      const Scalar a = tableau(r, entering);
      if (a <= eps) continue;
      const Scalar ratio = tableau(r, rhs) / a;
      if (leaving < 0 || ratio < best_ratio - eps ||
          (ratio <= best_ratio + eps && basis[std::size_t(r)] < basis[std::size_t(leaving)])) {
        leaving = r;
        best_ratio = ratio;
      }
    }
    if (leaving < 0) throw LpError("solve_lp: objective is unbounded");

    tableau.row(leaving) /= tableau(leaving, entering);
    for (Eigen::Index r = 0; r <= m; ++r) {
      if (r == leaving) continue;
      const Scalar f = tableau(r, entering);
      if (f != Scalar(0)) tableau.row(r) -= f * tableau.row(leaving);
    }
    basis[std::size_t(leaving)] = entering;
  }

  LpSolution<Scalar> out;
  out.x = LinearProgram<Scalar>::Vector::Zero(n);
  for (Eigen::Index r = 0; r < m; ++r)
    if (basis[std::size_t(r)] < n) out.x(basis[std::size_t(r)]) = std::max(Scalar(0), tableau(r, rhs));
  out.objective = lp.objective.dot(out.x);
  return out;
}

}  // namespace omr
