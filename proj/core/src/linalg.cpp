#include "crnr/linalg.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

namespace crnr::linalg {

namespace {

constexpr Index kFullPivotMaxDim = 400;

} // namespace

ThinSvd thin_svd(const CMatrix& X)
{
    // BDCSVD hands blocks below 16 columns to Jacobi internally.
    Eigen::BDCSVD<CMatrix> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

ThinSvd accurate_svd(const CMatrix& X)
{
    const Index k = std::min(X.rows(), X.cols());
    if (std::max(X.rows(), X.cols()) > kFullPivotMaxDim) return thin_svd(X);
    // Full pivoting resolves the tiny trailing singular directions of
    // clustered-mode Hankel matrices noticeably better than column pivoting.
    Eigen::JacobiSVD<CMatrix, Eigen::FullPivHouseholderQRPreconditioner> svd(
        X, Eigen::ComputeFullU | Eigen::ComputeFullV);
    ThinSvd out;
    out.U = svd.matrixU().leftCols(k);
    out.S = svd.singularValues();
    out.V = svd.matrixV().leftCols(k);
    return out;
}

RVector singular_values(const CMatrix& X)
{
    if (X.size() == 0) return RVector();
    return Eigen::BDCSVD<CMatrix>(X).singularValues();
}

double spectral_norm(const CMatrix& X)
{
    if (X.size() == 0) return 0.0;
    return singular_values(X)(0);
}

double smallest_singular_value(const CMatrix& X)
{
    if (X.size() == 0) return 0.0;
    const Index k = std::min(X.rows(), X.cols());
    if (k <= kDenseSvdMaxCols) return singular_values(X)(k - 1);
    return smallest_singular_value_iterative(X);
}

double smallest_singular_value_iterative(const CMatrix& X, double tol, int max_iter)
{
    // Work with a tall matrix; sigma_min is invariant under transposition.
    const CMatrix Y = X.rows() >= X.cols() ? X : CMatrix(X.adjoint());
    const Index n = Y.cols();
    Eigen::HouseholderQR<CMatrix> qr(Y);
    const CMatrix R = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();

    // A zero pivot means R is singular.
    if (R.diagonal().cwiseAbs().minCoeff() == 0.0) return 0.0;

    // Inverse iteration on R^H R: v <- (R^H R)^{-1} v.
    CVector v = CVector::Ones(n) / std::sqrt(static_cast<double>(n));
    double sigma = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        CVector w = R.adjoint().triangularView<Eigen::Lower>().solve(v);
        w = R.triangularView<Eigen::Upper>().solve(w);
        const double nw = w.norm();
        if (!std::isfinite(nw) || nw == 0.0) return 0.0;
        v = w / nw;
        const double next = (R * v).norm();
        if (it > 0 && std::abs(next - sigma) <= tol * std::max(next, 1e-300)) {
            sigma = next;
            break;
        }
        sigma = next;
    }
    return sigma;
}

CMatrix pseudo_inverse(const CMatrix& X, double rtol)
{
    const ThinSvd svd = thin_svd(X);
    const Index r = numerical_rank(svd.S, rtol);
    if (r == 0) return CMatrix::Zero(X.cols(), X.rows());
    const RVector inv = svd.S.head(r).cwiseInverse();
    return svd.V.leftCols(r) * inv.asDiagonal() * svd.U.leftCols(r).adjoint();
}

Index numerical_rank(const RVector& sv, double rtol)
{
    if (sv.size() == 0 || sv(0) == 0.0) return 0;
    const double cut = rtol * sv(0);
    Index r = 0;
    while (r < sv.size() && sv(r) > cut) ++r;
    return r;
}

double max_eig_hermitian(const CMatrix& G)
{
    if (G.rows() == 1) return G(0, 0).real();
    Eigen::SelfAdjointEigenSolver<CMatrix> es(G, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(G.rows() - 1);
}

} // namespace crnr::linalg
