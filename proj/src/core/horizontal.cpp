#include "svkit/horizontal.hpp"

#include <vector>

#include "svkit/error.hpp"

namespace svkit {

namespace {

void check_dims(const VectorFieldFamily& family, const Vec& p) {
  if (p.size() != family.dim())
    throw Error(ErrorCode::InvalidArgument, "gradient slot has dimension " + std::to_string(p.size()) +
                                                ", expected " + std::to_string(family.dim()));
}

}  // namespace

Vec horizontal_gradient(const VectorFieldFamily& family, const Vec& x, const Vec& p) {
  check_dims(family, p);
  return family.sigma(x).transpose() * p;
}

Mat correction_term(const VectorFieldFamily& family, const Vec& x, const Vec& p) {
  check_dims(family, p);
  const int m = family.count();
  std::vector<Vec> cols(m);
  std::vector<Mat> jacs(m);
  for (int i = 0; i < m; ++i) {
    cols[i] = family.field(i, x);
    jacs[i] = family.jacobian(i, x);
  }
  Mat g(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) g(i, j) = 0.5 * ((jacs[j] * cols[i]).dot(p) + (jacs[i] * cols[j]).dot(p));
  return symmetrize(g);
}

Mat horizontal_hessian(const VectorFieldFamily& family, const Vec& x, const Vec& p, const Mat& X) {
  if (X.rows() != family.dim() || X.cols() != family.dim())
    throw Error(ErrorCode::InvalidArgument, "Hessian slot has wrong dimension");
  require_symmetric(X, 1e-12, "horizontal_hessian");
  const Mat S = family.sigma(x);
  return symmetrize(S.transpose() * X * S + correction_term(family, x, p));
}

HorizontalJet horizontal_jet(const VectorFieldFamily& family, const Vec& x, const Vec& p, const Mat& X) {
  return {horizontal_gradient(family, x, p), horizontal_hessian(family, x, p, X)};
}

}  // namespace svkit
