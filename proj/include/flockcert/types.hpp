#pragma once

#include <cmath>

#include <Eigen/Core>

namespace flockcert {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// One row per agent, one column per spatial component.
template <typename Scalar>
using AgentMatrixT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using VectorXd = Vector<double>;
using AgentMatrix = AgentMatrixT<double>;

struct AgentState {
  VectorXd position;
  VectorXd velocity;
};

// Largest Euclidean distance between two rows of `points`.
template <typename Derived>
typename Derived::Scalar row_diameter(const Eigen::MatrixBase<Derived>& points) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = points.rows();
  if (n < 2) return Scalar(0);
  if (points.cols() == 1) {
    return points.col(0).maxCoeff() - points.col(0).minCoeff();
  }
  Scalar best2(0);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const Scalar d2 = (points.row(i) - points.row(j)).squaredNorm();
      if (d2 > best2) best2 = d2;
    }
  }
  using std::sqrt;
  return sqrt(best2);
}

}  // namespace flockcert
