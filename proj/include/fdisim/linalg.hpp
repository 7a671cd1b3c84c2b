#pragma once

#include <Eigen/Dense>

namespace fdisim {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat63 = Eigen::Matrix<double, 6, 3>;
using Mat36 = Eigen::Matrix<double, 3, 6>;

/// F with F Fᵀ = M for a symmetric positive semidefinite M. Negative
/// eigenvalues from round-off are clamped to zero.
Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& m);

/// Smallest eigenvalue of the symmetric part of M.
double min_eigenvalue(const Eigen::MatrixXd& m);

bool is_symmetric(const Eigen::MatrixXd& m, double tol = 1e-12);

bool all_finite(const Eigen::MatrixXd& m);

/// Position selector [I₃ 0₃].
Mat36 position_selector();

}  // namespace fdisim
