#pragma once

#include "svkit/fields.hpp"

namespace svkit {

/// Horizontal jet (q, H): q = sigma^T p, H = sigma^T X sigma + g(x, p).
struct HorizontalJet {
  Vec q;
  Mat H;
};

Vec horizontal_gradient(const VectorFieldFamily& family, const Vec& x, const Vec& p);

/// g(x,p)_ij = 1/2 [ (DX_j X_i) . p + (DX_i X_j) . p ].
Mat correction_term(const VectorFieldFamily& family, const Vec& x, const Vec& p);

/// sigma^T X sigma + g(x,p), symmetrized. X must be symmetric to 1e-12.
Mat horizontal_hessian(const VectorFieldFamily& family, const Vec& x, const Vec& p, const Mat& X);

HorizontalJet horizontal_jet(const VectorFieldFamily& family, const Vec& x, const Vec& p, const Mat& X);

}  // namespace svkit
