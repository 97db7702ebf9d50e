#ifndef SAFERL_LINALG_HPP
#define SAFERL_LINALG_HPP

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <optional>
#include <stdexcept>
#include <string>

namespace saferl {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Largest singular value sigma_1(M).
template <typename Derived>
double spectral_norm(const Eigen::MatrixBase<Derived>& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(m.eval());
  return svd.singularValues()(0);
}

/// Spectral radius max|lambda_i(M)| of a square matrix.
template <typename Derived>
double spectral_radius(const Eigen::MatrixBase<Derived>& m) {
  if (m.rows() == 0) return 0.0;
  Eigen::EigenSolver<Mat> es(m.eval(), /*computeEigenvectors=*/false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

struct DareSolution {
  Mat cost_to_go;  // P
  Mat gain;        // K, u = -K x is the stabilizing feedback
  int iterations = 0;
};

/// Discrete-time algebraic Riccati equation by fixed-point iteration:
///   P <- Q + A^T P A - A^T P B (R + B^T P B)^{-1} B^T P A
/// Throws std::runtime_error when the iteration does not settle, which is
/// how an unstabilizable (A, B) pair for the chosen weights shows up.
inline DareSolution solve_dare(const Mat& A, const Mat& B, const Mat& Q,
                               const Mat& R, double tol = 1e-9,
                               int max_iterations = 10000,
                               const std::string& label = "system") {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || B.rows() != n || Q.rows() != n || Q.cols() != n ||
      R.rows() != B.cols() || R.cols() != B.cols()) {
    throw std::invalid_argument("solve_dare: dimension mismatch");
  }
  Mat P = Q;
  for (int k = 1; k <= max_iterations; ++k) {
    const Mat BtP = B.transpose() * P;
    const Mat S = R + BtP * B;
    const Mat K = S.ldlt().solve(BtP * A);
    const Mat P_next = Q + A.transpose() * P * (A - B * K);
    const double delta = (P_next - P).cwiseAbs().maxCoeff();
    P = P_next;
    if (delta < tol) {
      const Mat BtPf = B.transpose() * P;
      DareSolution out;
      out.cost_to_go = P;
      out.gain = (R + BtPf * B).ldlt().solve(BtPf * A);
      out.iterations = k;
      return out;
    }
  }
  throw std::runtime_error("solve_dare: no convergence for " + label +
                           " (is (A,B) stabilizable for these weights?)");
}

}  // namespace saferl

#endif  // SAFERL_LINALG_HPP
