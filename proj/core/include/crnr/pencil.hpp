#pragma once

#include <optional>
#include <vector>

#include "crnr/signal.hpp"
#include "crnr/types.hpp"

namespace crnr {

/// Shape of an (s*K) x (n+1) block-Hankel matrix built from s+n vector
/// samples y_0 ... y_{s+n-1} of K looks each.
struct HankelShape {
    Index s = 0;
    Index n = 0;
    Index looks = 1;

    Index rows() const { return s * looks; }
    Index cols() const { return n + 1; }
    Index samples() const { return s + n; }

    bool operator==(const HankelShape&) const = default;
};

/// Block row i, block column j holds the vector sample y_{i+j}.
class BlockHankel {
public:
    BlockHankel(CMatrix data, HankelShape shape);

    /// Builds the matrix from the first s+n rows of a T x K sample matrix.
    static BlockHankel from_samples(const CMatrix& samples, Index s, Index n);

    const CMatrix& data() const { return data_; }
    const HankelShape& shape() const { return shape_; }

    /// The generating sequence, (s+n) x K. Exact for a structured matrix.
    CMatrix to_samples() const;

    /// Largest deviation of any entry from its block anti-diagonal mean.
    double structure_defect() const;

private:
    CMatrix data_;
    HankelShape shape_;
};

/// The pencil A - lambda B. A drops the first column of the source Hankel
/// matrix, B drops the last. `scale` records any factor applied since.
struct PencilPair {
    CMatrix A;
    CMatrix B;
    cplx scale{1.0, 0.0};
    HankelShape shape;
};

BlockHankel build_block_hankel(const Signal& signal, Index s, Index n);

PencilPair split_pencil(const BlockHankel& H);

/// Averages X over block anti-diagonals; returns the (s+n) x K sequence
/// whose block-Hankel matrix is the structured projection of X.
CMatrix block_antidiagonal_average(const CMatrix& X, const HankelShape& shape);

/// The structure operator: X -> block-Hankel of its anti-diagonal means.
BlockHankel hankel_projection(const CMatrix& X, const HankelShape& shape);

/// Best rank-M approximation (truncated SVD).
CMatrix truncate_rank(const CMatrix& X, Index M);

struct CadzowOptions {
    /// Absolute stopping threshold; unset means 1e-8 * ||H||_F.
    std::optional<double> eps;
    int max_iter = 50;
};

struct CadzowResult {
    BlockHankel hankel;
    int iterations = 0;
    bool converged = false;
    /// ||T(L(X_r)) - L(X_r)||_F per iteration.
    std::vector<double> residuals;
    /// Residuals are non-increasing over the last three iterations.
    bool tail_monotone = true;
};

/// Alternates rank-M truncation and block anti-diagonal averaging until the
/// gap between the low-rank iterate and its structured projection drops
/// below eps. The returned matrix is always exactly block-Hankel.
CadzowResult cadzow_denoise(const BlockHankel& H, Index M, const CadzowOptions& opts = {});

/// Median-scaled hard threshold multiplier for a rows x cols matrix with
/// unknown noise level (cubic fit in the aspect ratio beta <= 1).
double default_order_omega(Index rows, Index cols);

struct OrderOptions {
    std::optional<double> omega;
};

/// Counts singular values above max(omega * median(sigma), floor) with
/// floor = max(rows, cols) * eps_machine * sigma_1. When the smallest singular
/// value is already at the floor the matrix has exact rank and only the floor
/// is applied. Always returns >= 1.
Index estimate_order(const BlockHankel& H, const OrderOptions& opts = {});

/// Default pencil shape for L samples: n = L / 3, s = L - n.
HankelShape default_pencil_shape(Index L, Index looks = 1);

/// True when n lies in [s/2, 2s], the band favoured for estimator variance.
bool in_variance_band(Index s, Index n);

} // namespace crnr
