#pragma once

#include <Eigen/Dense>

namespace svkit {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Throws NotSymmetric when max |M - M^T| exceeds tol * max(1, max |M_ij|).
void require_symmetric(const Mat& M, double tol, const char* what);

inline Mat symmetrize(const Mat& M) { return 0.5 * (M + M.transpose()); }

/// Eigenvalues of a symmetric matrix in ascending order.
Vec sym_eigenvalues(const Mat& M);

double min_eigenvalue(const Mat& M);

bool all_finite(const Vec& v);
bool all_finite(const Mat& M);

}  // namespace svkit
