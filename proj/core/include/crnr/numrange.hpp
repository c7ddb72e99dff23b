#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "crnr/geometry.hpp"
#include "crnr/pencil.hpp"
#include "crnr/types.hpp"

namespace crnr {

/// Closed disk equal to the Frobenius-norm numerical range of a pencil.
struct FrobeniusDisk {
    cplx center;
    double radius = 0.0;

    bool contains(cplx z, double tol = 0.0) const { return std::abs(z - center) <= radius + tol; }
};

/// Scales (A, B) by D / ||B||_2 when ||B||_2 < 1; otherwise returns P.
PencilPair ensure_scaled(const PencilPair& P, double D = 2.0);

/// Scales (A, B) so that ||B||_2 == target exactly, whatever ||B||_2 was.
PencilPair normalize_scale(const PencilPair& P, double target);

/// center = <A,B> / ||B||_F^2 with <A,B> = trace(B^H A),
/// radius = ||A - center B||_F sqrt(||B||_F^2 - 1) / ||B||_F.
FrobeniusDisk frobenius_disk(const PencilPair& P);

/// Same disk evaluated from the samples through anti-diagonal
/// multiplicities, without forming the Hankel matrix.
FrobeniusDisk frobenius_disk_from_signal(const Signal& signal, Index s, Index n);
FrobeniusDisk frobenius_disk_from_samples(const CMatrix& samples, Index s, Index n);

/// Evaluates ||A - lambda B||_2 repeatedly for one pencil. The fast path
/// works on a Gram matrix compressed to the joint column space; exact()
/// uses the uncompressed matrix.
class PencilNorm {
public:
    explicit PencilNorm(const PencilPair& P);

    double operator()(cplx lambda) const;
    double exact(cplx lambda) const;
    /// The same evaluator for (alpha A, alpha B), alpha > 0, without refactoring.
    PencilNorm scaled(double alpha) const;

    double norm_A() const { return norm_A_; }
    double norm_B() const { return norm_B_; }
    /// Dimension of the Hermitian problem solved per evaluation.
    Index reduced_dim() const { return GAA_.rows(); }

private:
    CMatrix A_, B_;
    CMatrix GAA_, GAB_, GBB_; // G(lambda) = GAA - lambda GAB - conj(lambda) GAB^H + |lambda|^2 GBB
    double norm_A_ = 0.0;
    double norm_B_ = 0.0;
};

enum class Verdict { inside, outside, boundary };
enum class Stage { disk_reject, two_norm };
enum class RadiusBound { norm_b, heuristic, override_value };

std::string_view to_string(Verdict v);
std::string_view to_string(Stage s);
std::string_view to_string(RadiusBound b);

struct MembershipConfig {
    /// Seed grid points per axis over the square [-R, R]^2 (disk-masked).
    int grid_steps = 41;
    /// Number of best seeds refined locally.
    int seeds = 8;
    double refine_tol = 1e-9;
    int refine_max_evals = 1500;
    std::optional<double> radius_override;
    /// |delta| <= boundary_rtol * (1 + ||A||_2) is reported as boundary.
    double boundary_rtol = 1e-7;
    /// Stop as soon as a certified negative value is found.
    bool stop_at_first_negative = false;
    /// Skip refinement when the grid minimum minus the Lipschitz slack
    /// (||B||_2 + 1) * spacing already exceeds the boundary tolerance. Only
    /// used with the rigorous norm-b radius.
    bool lipschitz_shortcut = false;
};

struct MembershipResult {
    cplx theta;
    double delta = 0.0;
    cplx lambda_star;
    Verdict verdict = Verdict::outside;
    Stage stage = Stage::two_norm;
    double search_radius = 0.0;
    RadiusBound bound = RadiusBound::norm_b;
    /// Inside by the Lipschitz bound; delta is then the grid minimum, an
    /// upper bound on the infimum.
    bool certified_by_grid = false;

    bool accepted() const { return verdict != Verdict::outside; }
};

/// Tests theta in W_2(A;B) by minimizing f(lambda) = ||A - lambda B||_2 -
/// |theta - lambda| over |lambda| <= R: grid seeding, then Nelder-Mead
/// refinement of the best seeds. Requires ||B||_2 >= 1.
MembershipResult membership(const PencilPair& P, cplx theta, const MembershipConfig& cfg = {});
MembershipResult membership(const PencilNorm& norm, cplx theta, const MembershipConfig& cfg = {});

/// ||A - lambda B||_2 on the disk-masked square grid over [-radius, radius]^2.
/// The values do not depend on theta, so one grid seeds many tests.
struct NormGrid {
    double radius = 0.0;
    double spacing = 0.0;
    std::vector<cplx> lambdas;
    std::vector<double> norms;
};

NormGrid norm_grid(const PencilNorm& norm, double radius, int steps);

/// Membership seeded from a shared grid whose radius covers search_radius.
MembershipResult membership(const PencilNorm& norm, cplx theta, const MembershipConfig& cfg,
                            const NormGrid& grid);

/// Smallest target ||B||_2 = D >= d_min at which theta belongs to W_2 of the
/// pencil rescaled to that norm, i.e. max(d_min, sup |theta - lambda| /
/// ||A - lambda B||_2) for the pencil normalized to ||B||_2 = 1. Membership is
/// monotone in D, so theta is inside exactly when D >= this value.
double critical_scale(const PencilNorm& norm, cplx theta, double d_min = 1.1,
                      const MembershipConfig& cfg = {});
double critical_scale(const PencilNorm& norm, cplx theta, double d_min,
                      const MembershipConfig& cfg, const NormGrid& grid);
/// Radius outside of which the ratio stays below d_min.
double critical_scale_radius(const PencilNorm& norm, cplx theta, double d_min);

/// A result for a candidate rejected by the Frobenius disk alone.
MembershipResult disk_rejection(const FrobeniusDisk& disk, cplx theta);

/// Radius beyond which f_theta cannot be negative, and how it was obtained.
std::pair<double, RadiusBound> search_radius(double norm_A, double norm_B, cplx theta,
                                             const MembershipConfig& cfg);

/// sigma_min(A - lambda B) sampled on a rectangular grid; values(i, j)
/// belongs to lambda = re_axis[i] + i im_axis[j].
struct GridField {
    std::vector<double> re_axis;
    std::vector<double> im_axis;
    Eigen::MatrixXd values;
};

GridField g_map(const PencilPair& P, const std::vector<double>& re_axis,
                const std::vector<double>& im_axis, int workers = 1);

std::vector<double> linspace(double lo, double hi, int steps);

struct MpmOptions {
    /// Use the r dominant singular directions of B (sigma_r above roundoff
    /// suffices). Unset: B must have
    /// full column rank and all n eigenvalues of pinv(B) A are returned.
    std::optional<Index> rank;
    double rank_rtol = 1e-10;
};

/// Eigenvalues of pinv(B) A (restricted to the dominant subspace when a
/// rank is given). Throws NumericError for rank-deficient B without a rank.
std::vector<cplx> mpm_eigenvalues(const PencilPair& P, const MpmOptions& opts = {});

/// Boundary of the classical numerical range W(M) by supporting lines.
struct RangeBoundary {
    std::vector<double> angles;
    std::vector<cplx> points;   ///< x^H M x for the extreme eigenvector at each angle
    std::vector<double> support; ///< lambda_max(Herm(e^{-i phi} M))

    Polygon polygon() const { return Polygon{points}; }
    /// theta satisfies every supporting half-plane within tol.
    bool contains(cplx theta, double tol = 0.0) const;
};

RangeBoundary classical_range_boundary(const CMatrix& M, int n_angles);

struct BoundaryGridConfig {
    int initial_steps = 17;
    int max_steps = 129;
    double area_rtol = 0.01;
    int disk_sides = 96;
    /// Half-width of the lambda box; unset derives it from the norm bound.
    std::optional<double> half_width;
};

struct RectRangeBoundary {
    Polygon polygon;
    int grid_steps = 0;
    bool area_converged = false;
};

/// Outer polygonal approximation of W_2(A;B): the intersection of disks
/// D(lambda, ||A - lambda B||_2) over a lambda grid, each disk replaced by a
/// circumscribed polygon. The grid doubles until the area settles.
RectRangeBoundary rect_range_boundary(const PencilPair& P, const BoundaryGridConfig& cfg = {});

/// Intersection for an explicit list of lambda points.
Polygon disk_intersection(const PencilNorm& norm, const std::vector<cplx>& lambdas,
                          const Polygon& start, int disk_sides);

} // namespace crnr
