#include "svkit/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "svkit/error.hpp"

namespace svkit {

void require_symmetric(const Mat& M, double tol, const char* what) {
  if (M.rows() != M.cols())
    throw Error(ErrorCode::NotSymmetric, std::string(what) + ": matrix is not square");
  const double asym = (M - M.transpose()).cwiseAbs().maxCoeff();
  const double scale = M.size() ? std::max(1.0, M.cwiseAbs().maxCoeff()) : 1.0;
  if (!(asym <= tol * scale))
    throw Error(ErrorCode::NotSymmetric,
                std::string(what) + ": matrix is not symmetric (asymmetry " + std::to_string(asym) + ")");
}

Vec sym_eigenvalues(const Mat& M) {
  if (M.size() == 0) return Vec();
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(M), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

double min_eigenvalue(const Mat& M) {
  const Vec ev = sym_eigenvalues(M);
  return ev.size() ? ev.minCoeff() : 0.0;
}

bool all_finite(const Vec& v) { return v.allFinite(); }
bool all_finite(const Mat& M) { return M.allFinite(); }

}  // namespace svkit
