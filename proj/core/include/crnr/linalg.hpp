#pragma once

#include "crnr/types.hpp"

namespace crnr::linalg {

/// Column count at or below which dense SVDs are used for sigma_min;
/// wider matrices go through inverse iteration on the R factor.
inline constexpr Index kDenseSvdMaxCols = 256;

struct ThinSvd {
    CMatrix U;
    RVector S; ///< descending
    CMatrix V;
};

ThinSvd thin_svd(const CMatrix& X);

/// Slower full-pivoting Jacobi SVD; falls back to thin_svd once a
/// dimension exceeds 400.
ThinSvd accurate_svd(const CMatrix& X);

/// Descending singular values.
RVector singular_values(const CMatrix& X);

double spectral_norm(const CMatrix& X);

/// Smallest singular value of X, i.e. sigma_min(X) over min(rows, cols).
double smallest_singular_value(const CMatrix& X);

/// Inverse iteration on the triangular factor of a tall matrix; exposed
/// for testing the large-matrix path directly.
double smallest_singular_value_iterative(const CMatrix& X, double tol = 1e-12,
                                         int max_iter = 500);

/// Moore-Penrose pseudoinverse with singular values below
/// rtol * sigma_max treated as zero.
CMatrix pseudo_inverse(const CMatrix& X, double rtol = 1e-12);

/// Numerical rank: count of sigma_i > rtol * sigma_1.
Index numerical_rank(const RVector& sv, double rtol);

/// Largest eigenvalue of a Hermitian matrix (only the lower triangle is read).
double max_eig_hermitian(const CMatrix& G);

} // namespace crnr::linalg
