// Copyright 2026 The Formation Maneuvering Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FORMATION_STRUCTURED_LINALG_H_
#define FORMATION_STRUCTURED_LINALG_H_

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "formation/errors.h"
#include "formation/se2.h"

namespace formation {

// Normal-equation systems whose reciprocal condition estimate falls below
// 1 / kMaxCondition are rejected as rank deficient.
inline constexpr double kMaxCondition = 1e12;
// Pivots of the banded recursion smaller than this are treated as zero.
inline constexpr double kPivotTolerance = 1e-14;

// Banded matrix with gamma_ij = 0 for |i - j| > 2, stored by diagonals.
// With 0-based row r: a[r] = (r, r), b[r] = (r, r+1), c[r] = (r, r+2),
// d[r-1] = (r, r-1), e[r-2] = (r, r-2).
template <typename Scalar>
struct Pentadiagonal {
  VectorX<Scalar> a, b, c, d, e;

  Pentadiagonal() = default;
  explicit Pentadiagonal(int m)
      : a(VectorX<Scalar>::Zero(m)),
        b(VectorX<Scalar>::Zero(std::max(m - 1, 0))),
        c(VectorX<Scalar>::Zero(std::max(m - 2, 0))),
        d(VectorX<Scalar>::Zero(std::max(m - 1, 0))),
        e(VectorX<Scalar>::Zero(std::max(m - 2, 0))) {}

  int order() const { return static_cast<int>(a.size()); }

  MatrixX<Scalar> dense() const {
    const int m = order();
    MatrixX<Scalar> out = MatrixX<Scalar>::Zero(m, m);
    for (int r = 0; r < m; ++r) {
      out(r, r) = a(r);
      if (r + 1 < m) out(r, r + 1) = b(r);
      if (r + 2 < m) out(r, r + 2) = c(r);
      if (r >= 1) out(r, r - 1) = d(r - 1);
      if (r >= 2) out(r, r - 2) = e(r - 2);
    }
    return out;
  }

  static Pentadiagonal FromDense(const MatrixX<Scalar>& m) {
    const int k = static_cast<int>(m.rows());
    Pentadiagonal p(k);
    for (int r = 0; r < k; ++r) {
      p.a(r) = m(r, r);
      if (r + 1 < k) p.b(r) = m(r, r + 1);
      if (r + 2 < k) p.c(r) = m(r, r + 2);
      if (r >= 1) p.d(r - 1) = m(r, r - 1);
      if (r >= 2) p.e(r - 2) = m(r, r - 2);
    }
    return p;
  }
};

// LU factors of a pentadiagonal matrix without pivoting. U carries x on its
// diagonal, y on the first and c on the second superdiagonal; the unit lower
// factor carries z on the first subdiagonal and e_i / x_{i-2} on the second.
// All sequences are 1-based in the recursion and stored 0-based here.
template <typename Scalar>
struct PentadiagonalLU {
  VectorX<Scalar> x;  // length m
  VectorX<Scalar> y;  // length m - 1
  VectorX<Scalar> z;  // z(k) holds z_{k+2}, length m - 1
  Pentadiagonal<Scalar> matrix;

  Scalar determinant() const { return x.prod(); }

  VectorX<Scalar> solve(const VectorX<Scalar>& rhs) const {
    const int m = static_cast<int>(x.size());
    const auto& c = matrix.c;
    const auto& e = matrix.e;
    VectorX<Scalar> w(m);
    for (int r = 0; r < m; ++r) {
      Scalar acc = rhs(r);
      if (r >= 1) acc -= z(r - 1) * w(r - 1);
      if (r >= 2) acc -= e(r - 2) / x(r - 2) * w(r - 2);
      w(r) = acc;
    }
    VectorX<Scalar> out(m);
    for (int r = m - 1; r >= 0; --r) {
      Scalar acc = w(r);
      if (r + 1 < m) acc -= y(r) * out(r + 1);
      if (r + 2 < m) acc -= c(r) * out(r + 2);
      out(r) = acc / x(r);
    }
    return out;
  }
};

template <typename Scalar>
PentadiagonalLU<Scalar> pentadiagonal_factor(const Pentadiagonal<Scalar>& p) {
  using std::abs;
  const int m = p.order();
  PentadiagonalLU<Scalar> lu;
  lu.matrix = p;
  lu.x = VectorX<Scalar>::Zero(m);
  lu.y = VectorX<Scalar>::Zero(std::max(m - 1, 0));
  lu.z = VectorX<Scalar>::Zero(std::max(m - 1, 0));
  // 1-based views of the stored diagonals.
  auto A = [&](int i) { return p.a(i - 1); };
  auto B = [&](int i) { return p.b(i - 1); };
  auto C = [&](int i) { return p.c(i - 1); };
  auto D = [&](int i) { return p.d(i - 2); };
  auto E = [&](int i) { return p.e(i - 3); };
  auto X = [&](int i) -> Scalar& { return lu.x(i - 1); };
  auto Y = [&](int i) -> Scalar& { return lu.y(i - 1); };
  auto Z = [&](int i) -> Scalar& { return lu.z(i - 2); };
  auto check = [&](int i) {
    if (abs(X(i)) < Scalar(kPivotTolerance)) {
      throw PivotBreakdown("pentadiagonal pivot x_" + std::to_string(i) +
                           " vanished");
    }
  };

  for (int i = 1; i <= m; ++i) {
    if (i == 1) {
      X(1) = A(1);
    } else if (i == 2) {
      Z(2) = D(2) / X(1);
      X(2) = A(2) - Y(1) * Z(2);
    } else {
      Z(i) = (D(i) - E(i) * Y(i - 2) / X(i - 2)) / X(i - 1);
      X(i) = A(i) - Y(i - 1) * Z(i) - E(i) * C(i - 2) / X(i - 2);
    }
    check(i);
    if (i <= m - 1) Y(i) = (i == 1) ? B(1) : B(i) - Z(i) * C(i - 1);
  }
  return lu;
}

template <typename Scalar>
Scalar pentadiagonal_determinant(const Pentadiagonal<Scalar>& p) {
  return pentadiagonal_factor(p).determinant();
}

// K^T K of a chain-ordered formation with headings theta (one per robot).
template <typename Scalar>
Pentadiagonal<Scalar> ktk_chain_assemble(const VectorX<Scalar>& theta) {
  using std::cos;
  const int n = static_cast<int>(theta.size());
  const int m = 2 * n;
  Pentadiagonal<Scalar> p(m);
  p.a.setConstant(Scalar(2));
  p.a(m - 2) = Scalar(1);
  p.a(m - 1) = Scalar(1);
  // Row 2j (0-based) couples robot j's v with robot j+1's v through
  // -cos(theta_j - theta_{j+1}); row 2j+1 couples the yaw rates through -1.
  for (int r = 0; r < m - 2; ++r) {
    const int j = r / 2;
    p.c(r) = (r % 2 == 0) ? -cos(theta(j) - theta(j + 1)) : Scalar(-1);
  }
  p.e = p.c;
  return p;
}

template <typename Scalar>
struct ChainDeterminant {
  Scalar determinant;
  VectorX<Scalar> pivots;  // x_1 .. x_m
};

// Closed-form pivots of the chain K^T K. Every pivot is bounded away from
// zero, so K has full column rank at every heading configuration.
template <typename Scalar>
ChainDeterminant<Scalar> ktk_chain_determinant(const VectorX<Scalar>& theta) {
  using std::cos;
  const int n = static_cast<int>(theta.size());
  const int m = 2 * n;
  VectorX<Scalar> x(m);
  if (n == 1) {
    x << Scalar(1), Scalar(1);
    return {x.prod(), x};
  }
  auto cos2 = [&](int j) {  // 1-based edge (j, j+1)
    const Scalar c = cos(theta(j - 1) - theta(j));
    return c * c;
  };
  x(0) = Scalar(2);
  x(1) = Scalar(2);
  for (int i = 3; i <= m - 2; ++i) {
    if (i % 2 == 1) {
      x(i - 1) = Scalar(2) - cos2((i - 1) / 2) / x(i - 3);
    } else {
      x(i - 1) = Scalar(1) + Scalar(2) / Scalar(i);
    }
  }
  x(m - 2) = Scalar(1) - cos2((m - 2) / 2) / x(m - 4);
  x(m - 1) = Scalar(2) / Scalar(m);
  return {x.prod(), x};
}

template <typename Scalar>
struct LeastSquaresResult {
  VectorX<Scalar> solution;
  VectorX<Scalar> residual;  // A * solution - rhs
  Scalar condition;          // estimate of cond_1(A^T A)
};

// Factored normal equations A^T A eta = A^T b of a tall full-column-rank A.
template <typename Scalar>
class NormalEquations {
 public:
  explicit NormalEquations(const MatrixX<Scalar>& a) {
    if (a.rows() < a.cols()) {
      throw RankDeficient("least squares needs rows >= cols, got " +
                          std::to_string(a.rows()) + "x" +
                          std::to_string(a.cols()));
    }
    gram_.noalias() = a.transpose() * a;
    llt_.compute(gram_);
    const Scalar rcond = llt_.info() == Eigen::Success ? llt_.rcond() : Scalar(0);
    condition_ = rcond > Scalar(0) ? Scalar(1) / rcond
                                   : Scalar(std::numeric_limits<double>::infinity());
    if (!(condition_ <= Scalar(kMaxCondition))) {
      throw RankDeficient("A^T A condition estimate " +
                          std::to_string(static_cast<double>(condition_)) +
                          " exceeds " + std::to_string(kMaxCondition));
    }
  }

  const MatrixX<Scalar>& gram() const { return gram_; }
  Scalar condition() const { return condition_; }

  // (A^T A)^{-1} rhs.
  template <typename Derived>
  VectorX<Scalar> solve(const Eigen::MatrixBase<Derived>& rhs) const {
    return llt_.solve(rhs);
  }

 private:
  MatrixX<Scalar> gram_;
  Eigen::LLT<MatrixX<Scalar>> llt_;
  Scalar condition_;
};

template <typename Scalar>
LeastSquaresResult<Scalar> least_squares_solve(const MatrixX<Scalar>& a,
                                               const VectorX<Scalar>& rhs) {
  NormalEquations<Scalar> normal(a);
  LeastSquaresResult<Scalar> out;
  out.solution = normal.solve(a.transpose() * rhs);
  out.residual = a * out.solution - rhs;
  out.condition = normal.condition();
  return out;
}

// Residual energy ||rhs - A eta||^2 minimized by least_squares_solve.
template <typename Scalar>
Scalar least_squares_cost(const MatrixX<Scalar>& a, const VectorX<Scalar>& rhs,
                          const VectorX<Scalar>& eta) {
  return (rhs - a * eta).squaredNorm();
}

}  // namespace formation

#endif  // FORMATION_STRUCTURED_LINALG_H_
