#include "crnr/pencil.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "crnr/linalg.hpp"

namespace crnr {

BlockHankel::BlockHankel(CMatrix data, HankelShape shape)
    : data_(std::move(data)), shape_(shape)
{
    require(shape_.s >= 1 && shape_.n >= 0 && shape_.looks >= 1, "BlockHankel: bad shape");
    require(data_.rows() == shape_.rows() && data_.cols() == shape_.cols(),
            "BlockHankel: data dimensions do not match shape");
}

BlockHankel BlockHankel::from_samples(const CMatrix& samples, Index s, Index n)
{
    require(n >= 1, "build_block_hankel: pencil parameter n must be >= 1");
    require(s > n, "build_block_hankel: need s > n");
    require(samples.rows() >= s + n,
            "build_block_hankel: need " + std::to_string(s + n) + " samples, have " +
                std::to_string(samples.rows()));
    const Index K = samples.cols();
    const HankelShape shape{s, n, K};
    CMatrix H(shape.rows(), shape.cols());
    for (Index i = 0; i < s; ++i)
        for (Index j = 0; j <= n; ++j)
            H.block(i * K, j, K, 1) = samples.row(i + j).transpose();
    return BlockHankel(std::move(H), shape);
}

CMatrix BlockHankel::to_samples() const
{
    return block_antidiagonal_average(data_, shape_);
}

double BlockHankel::structure_defect() const
{
    const CMatrix y = to_samples();
    const Index K = shape_.looks;
    double worst = 0.0;
    for (Index i = 0; i < shape_.s; ++i)
        for (Index j = 0; j <= shape_.n; ++j)
            for (Index k = 0; k < K; ++k)
                worst = std::max(worst, std::abs(data_(i * K + k, j) - y(i + j, k)));
    return worst;
}

BlockHankel build_block_hankel(const Signal& signal, Index s, Index n)
{
    return BlockHankel::from_samples(signal.samples(), s, n);
}

PencilPair split_pencil(const BlockHankel& H)
{
    const Index c = H.data().cols();
    require(c >= 2, "split_pencil: Hankel matrix needs at least two columns");
    PencilPair p;
    p.A = H.data().rightCols(c - 1);
    p.B = H.data().leftCols(c - 1);
    p.shape = H.shape();
    return p;
}

CMatrix block_antidiagonal_average(const CMatrix& X, const HankelShape& shape)
{
    require(X.rows() == shape.rows() && X.cols() == shape.cols(),
            "block_antidiagonal_average: dimensions do not match shape");
    const Index K = shape.looks;
    CMatrix sums = CMatrix::Zero(shape.samples(), K);
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(shape.samples());
    for (Index i = 0; i < shape.s; ++i) {
        for (Index j = 0; j <= shape.n; ++j) {
            sums.row(i + j) += X.block(i * K, j, K, 1).transpose();
            counts(i + j) += 1.0;
        }
    }
    for (Index t = 0; t < shape.samples(); ++t) sums.row(t) /= counts(t);
    return sums;
}

BlockHankel hankel_projection(const CMatrix& X, const HankelShape& shape)
{
    return BlockHankel::from_samples(block_antidiagonal_average(X, shape), shape.s, shape.n);
}

CMatrix truncate_rank(const CMatrix& X, Index M)
{
    const linalg::ThinSvd svd = linalg::thin_svd(X);
    const Index r = std::min<Index>(M, svd.S.size());
    return svd.U.leftCols(r) * svd.S.head(r).asDiagonal() * svd.V.leftCols(r).adjoint();
}

CadzowResult cadzow_denoise(const BlockHankel& H, Index M, const CadzowOptions& opts)
{
    const HankelShape& shape = H.shape();
    require(M >= 1 && M <= std::min(shape.rows(), shape.cols()),
            "cadzow_denoise: order M must lie in [1, min(rows, cols)]");
    require(opts.max_iter >= 1, "cadzow_denoise: max_iter must be >= 1");
    if (opts.eps) require(*opts.eps > 0.0, "cadzow_denoise: eps must be > 0");
    const double eps = opts.eps.value_or(1e-8 * H.data().norm());

    CadzowResult out{H, 0, false, {}, true};
    CMatrix X = H.data();
    for (int r = 1; r <= opts.max_iter; ++r) {
        const CMatrix low = truncate_rank(X, M);
        BlockHankel structured = hankel_projection(low, shape);
        const double gap = (structured.data() - low).norm();
        out.residuals.push_back(gap);
        out.iterations = r;
        X = structured.data();
        out.hankel = std::move(structured);
        if (gap < eps || gap == 0.0) {
            out.converged = true;
            break;
        }
    }

    const auto& res = out.residuals;
    if (res.size() >= 3) {
        const std::size_t k = res.size();
        out.tail_monotone = res[k - 2] <= res[k - 3] && res[k - 1] <= res[k - 2];
    }
    return out;
}

double default_order_omega(Index rows, Index cols)
{
    const double a = static_cast<double>(std::min(rows, cols));
    const double b = static_cast<double>(std::max(rows, cols));
    const double beta = a / b;
    return 0.56 * beta * beta * beta - 0.95 * beta * beta + 1.82 * beta + 1.43;
}

Index estimate_order(const BlockHankel& H, const OrderOptions& opts)
{
    const RVector sv = linalg::singular_values(H.data());
    require(sv.size() > 0, "estimate_order: empty matrix");
    if (sv(0) == 0.0) throw NumericError("estimate_order: zero matrix has no model order");

    const double omega = opts.omega.value_or(default_order_omega(H.data().rows(), H.data().cols()));
    require(omega > 0.0, "estimate_order: omega must be positive");

    std::vector<double> sorted(sv.data(), sv.data() + sv.size());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t k = sorted.size();
    const double median = k % 2 == 1 ? sorted[k / 2] : 0.5 * (sorted[k / 2 - 1] + sorted[k / 2]);

    const double floor = static_cast<double>(std::max(H.data().rows(), H.data().cols())) *
                         std::numeric_limits<double>::epsilon() * sv(0);
    // Singular values at roundoff mean the data has exact rank and no noise
    // floor for the median to measure; that happens for noiseless mixtures
    // whose order is at least half the column count.
    const double cut = sv(sv.size() - 1) <= floor ? floor : std::max(omega * median, floor);
    Index count = 0;
    for (Index i = 0; i < sv.size(); ++i)
        if (sv(i) > cut) ++count;
    return std::max<Index>(count, 1);
}

HankelShape default_pencil_shape(Index L, Index looks)
{
    require(L >= 3, "default_pencil_shape: need at least 3 samples");
    const Index n = std::max<Index>(L / 3, 1);
    return HankelShape{L - n, n, looks};
}

bool in_variance_band(Index s, Index n)
{
    return 2 * n >= s && n <= 2 * s;
}

} // namespace crnr
