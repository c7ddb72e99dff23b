#include "crnr/numrange.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "crnr/linalg.hpp"
#include "parallel.hpp"

namespace crnr {

namespace {

// Norms of B that round to just below 1 after an exact normalization.
constexpr double kUnitNormSlack = 1e-12;

void require_scaled(double norm_B)
{
    if (!(norm_B >= 1.0 - kUnitNormSlack))
        throw NumericError("pencil is not scaled: ||B||_2 = " + std::to_string(norm_B) +
                           " < 1, the numerical range is empty");
}

PencilPair scaled(const PencilPair& P, double alpha)
{
    PencilPair out = P;
    out.A *= alpha;
    out.B *= alpha;
    out.scale *= alpha;
    return out;
}

struct Vertex {
    double x, y, f;
};

/// Two-dimensional Nelder-Mead on a nonsmooth objective.
template <typename F>
Vertex nelder_mead(F&& f, double x0, double y0, double step, double xtol, double ftol,
                   int max_evals)
{
    std::array<Vertex, 3> s{Vertex{x0, y0, f(x0, y0)}, Vertex{x0 + step, y0, 0.0},
                            Vertex{x0, y0 + step, 0.0}};
    s[1].f = f(s[1].x, s[1].y);
    s[2].f = f(s[2].x, s[2].y);
    int evals = 3;

    auto by_value = [](const Vertex& a, const Vertex& b) { return a.f < b.f; };
    while (evals < max_evals) {
        std::sort(s.begin(), s.end(), by_value);
        const double size = std::max(std::hypot(s[1].x - s[0].x, s[1].y - s[0].y),
                                     std::hypot(s[2].x - s[0].x, s[2].y - s[0].y));
        if (size <= xtol && s[2].f - s[0].f <= ftol) break;
        if (size <= 1e-3 * xtol) break;

        const double cx = 0.5 * (s[0].x + s[1].x);
        const double cy = 0.5 * (s[0].y + s[1].y);
        const Vertex r{2.0 * cx - s[2].x, 2.0 * cy - s[2].y, 0.0};
        const double fr = f(r.x, r.y);
        ++evals;
        if (fr < s[0].f) {
            const double ex = 3.0 * cx - 2.0 * s[2].x;
            const double ey = 3.0 * cy - 2.0 * s[2].y;
            const double fe = f(ex, ey);
            ++evals;
            s[2] = fe < fr ? Vertex{ex, ey, fe} : Vertex{r.x, r.y, fr};
            continue;
        }
        if (fr < s[1].f) {
            s[2] = Vertex{r.x, r.y, fr};
            continue;
        }
        // Contraction toward the better of the reflected and worst point.
        const bool outside = fr < s[2].f;
        const double tx = outside ? 0.5 * (cx + r.x) : 0.5 * (cx + s[2].x);
        const double ty = outside ? 0.5 * (cy + r.y) : 0.5 * (cy + s[2].y);
        const double fc = f(tx, ty);
        ++evals;
        if (fc < std::min(fr, s[2].f)) {
            s[2] = Vertex{tx, ty, fc};
            continue;
        }
        for (int i = 1; i < 3; ++i) {
            s[i].x = 0.5 * (s[0].x + s[i].x);
            s[i].y = 0.5 * (s[0].y + s[i].y);
            s[i].f = f(s[i].x, s[i].y);
            ++evals;
        }
    }
    std::sort(s.begin(), s.end(), by_value);
    return s[0];
}

} // namespace

std::string_view to_string(Verdict v)
{
    switch (v) {
    case Verdict::inside: return "inside";
    case Verdict::outside: return "outside";
    case Verdict::boundary: return "boundary";
    }
    return "unknown";
}

std::string_view to_string(Stage s)
{
    return s == Stage::disk_reject ? "disk-reject" : "two-norm";
}

std::string_view to_string(RadiusBound b)
{
    switch (b) {
    case RadiusBound::norm_b: return "norm-b";
    case RadiusBound::heuristic: return "heuristic";
    case RadiusBound::override_value: return "override";
    }
    return "unknown";
}

PencilPair ensure_scaled(const PencilPair& P, double D)
{
    require(D > 1.0, "ensure_scaled: D must exceed 1");
    const double nb = linalg::spectral_norm(P.B);
    if (nb == 0.0) throw NumericError("ensure_scaled: B is the zero matrix");
    if (nb >= 1.0) return P;
    return scaled(P, D / nb);
}

PencilPair normalize_scale(const PencilPair& P, double target)
{
    require(target > 0.0, "normalize_scale: target norm must be positive");
    const double nb = linalg::spectral_norm(P.B);
    if (nb == 0.0) throw NumericError("normalize_scale: B is the zero matrix");
    return scaled(P, target / nb);
}

FrobeniusDisk frobenius_disk(const PencilPair& P)
{
    require(P.A.rows() == P.B.rows() && P.A.cols() == P.B.cols(),
            "frobenius_disk: A and B differ in shape");
    const double bb = P.B.squaredNorm();
    if (!(bb >= 1.0 - kUnitNormSlack))
        throw NumericError("frobenius_disk: ||B||_F < 1, scale the pencil first");
    const cplx inner = (P.B.conjugate().cwiseProduct(P.A)).sum();
    const cplx center = inner / bb;
    const double resid = (P.A - center * P.B).norm();
    return {center, resid * std::sqrt(std::max(bb - 1.0, 0.0) / bb)};
}

FrobeniusDisk frobenius_disk_from_samples(const CMatrix& y, Index s, Index n)
{
    require(n >= 1, "frobenius_disk_from_signal: n must be >= 1");
    require(s > n, "frobenius_disk_from_signal: need s > n");
    require(y.rows() >= s + n, "frobenius_disk_from_signal: not enough samples");

    // eta_d counts the (i, j) pairs with i + j = d in an s x n block grid.
    cplx cross{0.0, 0.0};
    double bb = 0.0;
    double aa = 0.0;
    for (Index d = 0; d <= s + n - 2; ++d) {
        const double eta = static_cast<double>(std::min({d, s - 1, n - 1, s + n - 2 - d}) + 1);
        cross += eta * y.row(d).dot(y.row(d + 1)); // y_d^H y_{d+1}
        bb += eta * y.row(d).squaredNorm();
        aa += eta * y.row(d + 1).squaredNorm();
    }
    if (!(bb >= 1.0 - kUnitNormSlack))
        throw NumericError("frobenius_disk_from_signal: ||B||_F < 1, scale the signal first");
    const cplx center = cross / bb;
    const double resid2 = std::max(aa - std::norm(cross) / bb, 0.0);
    return {center, std::sqrt(resid2) * std::sqrt(std::max(bb - 1.0, 0.0) / bb)};
}

FrobeniusDisk frobenius_disk_from_signal(const Signal& signal, Index s, Index n)
{
    return frobenius_disk_from_samples(signal.samples(), s, n);
}

PencilNorm::PencilNorm(const PencilPair& P) : A_(P.A), B_(P.B)
{
    require(A_.rows() == B_.rows() && A_.cols() == B_.cols(), "PencilNorm: shape mismatch");
    require(A_.size() > 0, "PencilNorm: empty pencil");
    norm_A_ = linalg::spectral_norm(A_);
    norm_B_ = linalg::spectral_norm(B_);

    const Index m = A_.rows();
    const Index n = A_.cols();
    CMatrix RA = A_;
    CMatrix RB = B_;
    Index r = m;
    if (m > n) {
        // Project onto the joint column space of A and B.
        CMatrix AB(m, 2 * n);
        AB << A_, B_;
        const linalg::ThinSvd svd = linalg::thin_svd(AB);
        r = std::max<Index>(linalg::numerical_rank(svd.S, 1e-14), 1);
        RA = svd.U.leftCols(r).adjoint() * A_;
        RB = svd.U.leftCols(r).adjoint() * B_;
    }
    if (r <= n) {
        GAA_ = RA * RA.adjoint();
        GAB_ = RB * RA.adjoint();
        GBB_ = RB * RB.adjoint();
    } else {
        GAA_ = RA.adjoint() * RA;
        GAB_ = RA.adjoint() * RB;
        GBB_ = RB.adjoint() * RB;
    }
}

double PencilNorm::operator()(cplx lambda) const
{
    const CMatrix G = GAA_ - lambda * GAB_ - std::conj(lambda) * GAB_.adjoint() +
                      std::norm(lambda) * GBB_;
    return std::sqrt(std::max(linalg::max_eig_hermitian(G), 0.0));
}

PencilNorm PencilNorm::scaled(double alpha) const
{
    require(alpha > 0.0 && std::isfinite(alpha), "PencilNorm::scaled: alpha must be positive");
    PencilNorm out = *this;
    out.A_ *= alpha;
    out.B_ *= alpha;
    const double a2 = alpha * alpha;
    out.GAA_ *= a2;
    out.GAB_ *= a2;
    out.GBB_ *= a2;
    out.norm_A_ *= alpha;
    out.norm_B_ *= alpha;
    return out;
}

double PencilNorm::exact(cplx lambda) const
{
    // The largest eigenvalue of M^H M carries full relative accuracy for
    // sigma_max, so only the compression is skipped here.
    const CMatrix M = A_ - lambda * B_;
    const CMatrix G = M.rows() >= M.cols() ? CMatrix(M.adjoint() * M) : CMatrix(M * M.adjoint());
    return std::sqrt(std::max(linalg::max_eig_hermitian(G), 0.0));
}

std::pair<double, RadiusBound> search_radius(double norm_A, double norm_B, cplx theta,
                                             const MembershipConfig& cfg)
{
    if (cfg.radius_override) {
        require(*cfg.radius_override > 0.0, "membership: radius override must be positive");
        return {*cfg.radius_override, RadiusBound::override_value};
    }
    // ||A - lambda B|| >= |lambda| ||B|| - ||A|| and |theta - lambda| <= |theta| + |lambda|,
    // so f_theta(lambda) < 0 forces |lambda| < (||A|| + |theta|) / (||B|| - 1).
    const double reach = norm_A + std::abs(theta);
    const double heuristic = 4.0 * reach + 1.0;
    if (norm_B > 1.0) {
        const double bound = reach / (norm_B - 1.0);
        if (bound <= heuristic) return {std::max(bound, 1e-12), RadiusBound::norm_b};
    }
    return {heuristic, RadiusBound::heuristic};
}

MembershipResult disk_rejection(const FrobeniusDisk& disk, cplx theta)
{
    MembershipResult res;
    res.theta = theta;
    res.stage = Stage::disk_reject;
    res.verdict = Verdict::outside;
    res.delta = disk.radius - std::abs(theta - disk.center);
    res.lambda_star = disk.center;
    return res;
}

MembershipResult membership(const PencilPair& P, cplx theta, const MembershipConfig& cfg)
{
    return membership(PencilNorm(P), theta, cfg);
}

NormGrid norm_grid(const PencilNorm& norm, double radius, int steps)
{
    require(radius > 0.0 && std::isfinite(radius), "norm_grid: radius must be positive");
    require(steps >= 2, "norm_grid: need at least 2 steps");
    NormGrid grid;
    grid.radius = radius;
    grid.spacing = 2.0 * radius / (steps - 1);
    for (int i = 0; i < steps; ++i) {
        for (int j = 0; j < steps; ++j) {
            const cplx l{-radius + i * grid.spacing, -radius + j * grid.spacing};
            if (std::abs(l) > radius * (1.0 + 1e-12)) continue;
            grid.lambdas.push_back(l);
            grid.norms.push_back(norm(l));
        }
    }
    return grid;
}

namespace {

struct Seed {
    cplx lambda;
    double f;
};

// Seeds are sorted by f. Picks up to `count` of them, skipping any within
// 1.5 h of one already chosen, and refines each with Nelder-Mead. Returns
// the best exact value and its location; `done` may cut the loop short.
template <typename Fast, typename Exact, typename Done>
std::pair<double, cplx> refine_seeds(const std::vector<Seed>& sorted, int count, double h,
                                     double xtol, double ftol, int max_evals, Fast&& fast,
                                     Exact&& exact, Done&& done)
{
    std::vector<Seed> chosen;
    for (const Seed& s : sorted) {
        if (static_cast<int>(chosen.size()) >= count) break;
        const bool near = std::any_of(chosen.begin(), chosen.end(), [&](const Seed& c) {
            return std::abs(c.lambda - s.lambda) < 1.5 * h;
        });
        if (!near) chosen.push_back(s);
    }

    auto objective = [&](double x, double y) { return fast(cplx{x, y}); };
    double best = exact(sorted.front().lambda);
    cplx best_lambda = sorted.front().lambda;
    for (const Seed& s : chosen) {
        Vertex v = nelder_mead(objective, s.lambda.real(), s.lambda.imag(), h, xtol, ftol,
                               max_evals);
        // Restart from the converged point to escape a collapsed simplex.
        for (int restart = 0; restart < 2; ++restart) {
            const Vertex w = nelder_mead(objective, v.x, v.y, 0.1 * h, xtol, ftol, max_evals);
            const bool improved = w.f < v.f - ftol;
            if (w.f < v.f) v = w;
            if (!improved) break;
        }
        const cplx l{v.x, v.y};
        const double e = exact(l);
        if (e < best) {
            best = e;
            best_lambda = l;
        }
        if (done(best)) break;
    }
    return {best, best_lambda};
}

} // namespace

MembershipResult membership(const PencilNorm& norm, cplx theta, const MembershipConfig& cfg)
{
    require(std::isfinite(theta.real()) && std::isfinite(theta.imag()),
            "membership: theta must be finite");
    require(cfg.grid_steps >= 2, "membership: grid_steps must be >= 2");
    require_scaled(norm.norm_B());
    const double R = search_radius(norm.norm_A(), norm.norm_B(), theta, cfg).first;
    return membership(norm, theta, cfg, norm_grid(norm, R, cfg.grid_steps));
}

MembershipResult membership(const PencilNorm& norm, cplx theta, const MembershipConfig& cfg,
                            const NormGrid& grid)
{
    require(std::isfinite(theta.real()) && std::isfinite(theta.imag()),
            "membership: theta must be finite");
    require(cfg.seeds >= 1, "membership: seeds must be >= 1");
    require_scaled(norm.norm_B());

    const auto [R, bound] = search_radius(norm.norm_A(), norm.norm_B(), theta, cfg);
    require(grid.radius >= R * (1.0 - 1e-12), "membership: seed grid does not cover the search radius");
    const double tol = cfg.boundary_rtol * (1.0 + norm.norm_A());

    MembershipResult res;
    res.theta = theta;
    res.stage = Stage::two_norm;
    res.search_radius = R;
    res.bound = bound;

    auto fast = [&](cplx l) { return norm(l) - std::abs(theta - l); };
    auto exact = [&](cplx l) { return norm.exact(l) - std::abs(theta - l); };
    auto finish = [&](double delta, cplx lambda) {
        res.delta = delta;
        res.lambda_star = lambda;
        res.verdict = delta < -tol ? Verdict::outside
                                   : (delta <= tol ? Verdict::boundary : Verdict::inside);
        return res;
    };
    // A certified negative value settles the verdict.
    auto certified = [&](cplx l, double v) {
        if (!cfg.stop_at_first_negative || v >= -tol) return false;
        const double e = exact(l);
        if (e >= -tol) return false;
        finish(e, l);
        return true;
    };

    std::vector<Seed> seeds;
    seeds.reserve(grid.lambdas.size() + 2);
    for (const cplx l : {theta, cplx{0.0, 0.0}}) {
        if (std::abs(l) > R) continue;
        const double v = fast(l);
        if (certified(l, v)) return res;
        seeds.push_back({l, v});
    }
    for (std::size_t i = 0; i < grid.lambdas.size(); ++i) {
        const cplx l = grid.lambdas[i];
        if (std::abs(l) > R * (1.0 + 1e-12)) continue;
        const double v = grid.norms[i] - std::abs(theta - l);
        if (certified(l, v)) return res;
        seeds.push_back({l, v});
    }
    if (seeds.empty()) seeds.push_back({cplx{0.0, 0.0}, fast(cplx{0.0, 0.0})});
    std::sort(seeds.begin(), seeds.end(), [](const Seed& a, const Seed& b) { return a.f < b.f; });

    const double h = grid.spacing;
    // Every point of the disk lies within h of a grid point and f is
    // (||B|| + 1)-Lipschitz, so the grid minimum bounds the infimum.
    if (cfg.lipschitz_shortcut && bound == RadiusBound::norm_b &&
        seeds.front().f - (norm.norm_B() + 1.0) * h > tol) {
        res.certified_by_grid = true;
        return finish(seeds.front().f, seeds.front().lambda);
    }
    const auto [best, lambda] = refine_seeds(
        seeds, cfg.seeds, h, cfg.refine_tol * std::max(1.0, R),
        cfg.refine_tol * (1.0 + norm.norm_A()), cfg.refine_max_evals, fast, exact,
        [&](double b) { return cfg.stop_at_first_negative && b < -tol; });
    return finish(best, lambda);
}

double critical_scale_radius(const PencilNorm& norm, cplx theta, double d_min)
{
    require(d_min > 1.0, "critical_scale: d_min must exceed 1");
    require(norm.norm_B() > 0.0, "critical_scale: B is zero");
    // For the unit-norm pencil, ratio > d >= d_min needs |lambda| <
    // (d ||A|| + |theta|) / (d - 1), which decreases in d.
    const double unit_A = norm.norm_A() / norm.norm_B();
    return (d_min * unit_A + std::abs(theta)) / (d_min - 1.0);
}

double critical_scale(const PencilNorm& norm, cplx theta, double d_min,
                      const MembershipConfig& cfg)
{
    const double R = critical_scale_radius(norm, theta, d_min);
    return critical_scale(norm, theta, d_min, cfg, norm_grid(norm, R, cfg.grid_steps));
}

double critical_scale(const PencilNorm& norm, cplx theta, double d_min,
                      const MembershipConfig& cfg, const NormGrid& grid)
{
    require(std::isfinite(theta.real()) && std::isfinite(theta.imag()),
            "critical_scale: theta must be finite");
    require(cfg.seeds >= 1, "critical_scale: seeds must be >= 1");
    const double R = critical_scale_radius(norm, theta, d_min);
    require(grid.radius >= R * (1.0 - 1e-12),
            "critical_scale: seed grid does not cover the search radius");
    // Work with the pencil normalized to ||B||_2 = 1; grid norms scale alike.
    const double unit = 1.0 / norm.norm_B();
    auto ratio = [&](double N, cplx l) {
        const double gap = std::abs(theta - l);
        if (N <= 0.0) return gap > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
        return gap / N;
    };
    // Minimize the negated ratio.
    auto fast = [&](cplx l) { return -ratio(unit * norm(l), l); };
    auto exact = [&](cplx l) { return -ratio(unit * norm.exact(l), l); };

    std::vector<Seed> seeds;
    seeds.reserve(grid.lambdas.size() + 2);
    for (const cplx l : {theta, cplx{0.0, 0.0}})
        if (std::abs(l) <= R) seeds.push_back({l, fast(l)});
    for (std::size_t i = 0; i < grid.lambdas.size(); ++i) {
        const cplx l = grid.lambdas[i];
        if (std::abs(l) > R * (1.0 + 1e-12)) continue;
        seeds.push_back({l, -ratio(unit * grid.norms[i], l)});
    }
    if (seeds.empty()) return d_min;
    std::sort(seeds.begin(), seeds.end(), [](const Seed& a, const Seed& b) { return a.f < b.f; });
    if (std::isinf(seeds.front().f)) return std::numeric_limits<double>::infinity();

    const auto best = refine_seeds(seeds, cfg.seeds, grid.spacing,
                                   cfg.refine_tol * std::max(1.0, R), cfg.refine_tol,
                                   cfg.refine_max_evals, fast, exact, [](double) { return false; })
                          .first;
    return std::max(-best, d_min);
}

std::vector<double> linspace(double lo, double hi, int steps)
{
    require(steps >= 1, "linspace: steps must be >= 1");
    std::vector<double> out(static_cast<std::size_t>(steps));
    if (steps == 1) {
        out[0] = lo;
        return out;
    }
    for (int i = 0; i < steps; ++i) out[i] = lo + (hi - lo) * i / (steps - 1);
    return out;
}

GridField g_map(const PencilPair& P, const std::vector<double>& re_axis,
                const std::vector<double>& im_axis, int workers)
{
    require(!re_axis.empty() && !im_axis.empty(), "g_map: axes must be nonempty");
    GridField field{re_axis, im_axis,
                    Eigen::MatrixXd(static_cast<Index>(re_axis.size()),
                                    static_cast<Index>(im_axis.size()))};
    detail::parallel_for(re_axis.size(), workers, [&](std::size_t i) {
        for (std::size_t j = 0; j < im_axis.size(); ++j) {
            const cplx l{re_axis[i], im_axis[j]};
            field.values(static_cast<Index>(i), static_cast<Index>(j)) =
                linalg::smallest_singular_value(P.A - l * P.B);
        }
    });
    return field;
}

std::vector<cplx> mpm_eigenvalues(const PencilPair& P, const MpmOptions& opts)
{
    const linalg::ThinSvd svd = linalg::accurate_svd(P.B);
    const Index n = P.B.cols();
    const Index numeric = linalg::numerical_rank(svd.S, opts.rank_rtol);
    Index r = n;
    if (opts.rank) {
        r = *opts.rank;
        require(r >= 1 && r <= n, "mpm_eigenvalues: rank must lie in [1, n]");
        // An explicit rank only needs the r-th singular value above roundoff;
        // clustered modes give tiny but meaningful trailing values.
        const double floor_rtol = static_cast<double>(std::max(P.B.rows(), n)) *
                                  std::numeric_limits<double>::epsilon();
        const Index machine = linalg::numerical_rank(svd.S, floor_rtol);
        if (r > machine)
            throw NumericError("mpm_eigenvalues: B has numerical rank " + std::to_string(machine) +
                               " < requested " + std::to_string(r));
    } else if (numeric < n) {
        throw NumericError("mpm_eigenvalues: B is rank-deficient (rank " +
                           std::to_string(numeric) + " of " + std::to_string(n) + ")");
    }

    // Nonzero spectrum of pinv(B) A = V S^-1 U^H A equals that of S^-1 U^H A V.
    const CMatrix reduced = svd.S.head(r).cwiseInverse().asDiagonal() *
                            (svd.U.leftCols(r).adjoint() * P.A * svd.V.leftCols(r));
    Eigen::ComplexEigenSolver<CMatrix> es(reduced, false);
    if (es.info() != Eigen::Success) throw NumericError("mpm_eigenvalues: eigensolver failed");
    std::vector<cplx> out(es.eigenvalues().data(), es.eigenvalues().data() + r);
    std::sort(out.begin(), out.end(), [](cplx a, cplx b) {
        if (std::abs(a) != std::abs(b)) return std::abs(a) > std::abs(b);
        return a.imag() > b.imag();
    });
    return out;
}

bool RangeBoundary::contains(cplx theta, double tol) const
{
    for (std::size_t k = 0; k < angles.size(); ++k) {
        const double proj = (std::polar(1.0, -angles[k]) * theta).real();
        if (proj > support[k] + tol) return false;
    }
    return !angles.empty();
}

RangeBoundary classical_range_boundary(const CMatrix& M, int n_angles)
{
    require(M.rows() == M.cols() && M.rows() >= 1, "classical_range_boundary: M must be square");
    require(n_angles >= 3, "classical_range_boundary: need at least 3 angles");
    RangeBoundary out;
    out.angles.reserve(n_angles);
    out.points.reserve(n_angles);
    out.support.reserve(n_angles);
    for (int k = 0; k < n_angles; ++k) {
        const double phi = 2.0 * std::numbers::pi * k / n_angles;
        const CMatrix R = std::polar(1.0, -phi) * M;
        const CMatrix Hm = 0.5 * (R + R.adjoint());
        Eigen::SelfAdjointEigenSolver<CMatrix> es(Hm);
        const Index top = M.rows() - 1;
        const CVector x = es.eigenvectors().col(top);
        out.angles.push_back(phi);
        out.points.push_back(x.dot(M * x)); // x^H M x
        out.support.push_back(es.eigenvalues()(top));
    }
    return out;
}

Polygon disk_intersection(const PencilNorm& norm, const std::vector<cplx>& lambdas,
                          const Polygon& start, int disk_sides)
{
    require(disk_sides >= 3, "disk_intersection: need at least 3 sides per disk");
    Polygon poly = start;
    std::vector<cplx> normals(static_cast<std::size_t>(disk_sides));
    for (int k = 0; k < disk_sides; ++k)
        normals[k] = std::polar(1.0, 2.0 * std::numbers::pi * k / disk_sides);

    for (cplx l : lambdas) {
        if (poly.empty()) break;
        // Inflate for the rounding error of the Gram-based norm.
        const double rad =
            norm(l) + 1e-9 * (norm.norm_A() + std::abs(l) * norm.norm_B() + 1.0);
        const bool covered = std::all_of(poly.vertices.begin(), poly.vertices.end(),
                                         [&](cplx v) { return std::abs(v - l) <= rad; });
        if (covered) continue;
        for (cplx u : normals) {
            poly.clip_halfplane(u, rad + (std::conj(u) * l).real());
            if (poly.empty()) break;
        }
    }
    return poly;
}

RectRangeBoundary rect_range_boundary(const PencilPair& P, const BoundaryGridConfig& cfg)
{
    require(cfg.initial_steps >= 2 && cfg.max_steps >= cfg.initial_steps,
            "rect_range_boundary: bad grid steps");
    const PencilNorm norm(P);
    require_scaled(norm.norm_B());

    const FrobeniusDisk disk = frobenius_disk(P);
    const Polygon start = Polygon::circumscribed(disk.center, disk.radius, cfg.disk_sides);

    double hw = 0.0;
    if (cfg.half_width) {
        require(*cfg.half_width > 0.0, "rect_range_boundary: half width must be positive");
        hw = *cfg.half_width;
    } else {
        const cplx far = disk.center + disk.radius * (disk.center == cplx{} ? cplx{1.0, 0.0}
                                                       : disk.center / std::abs(disk.center));
        hw = search_radius(norm.norm_A(), norm.norm_B(), far, MembershipConfig{}).first;
    }

    RectRangeBoundary out;
    double prev_area = -1.0;
    for (int g = cfg.initial_steps; g <= cfg.max_steps; g = 2 * g - 1) {
        std::vector<cplx> lambdas;
        lambdas.reserve(static_cast<std::size_t>(g) * g);
        const std::vector<double> axis = linspace(-hw, hw, g);
        for (double x : axis)
            for (double y : axis) lambdas.emplace_back(x, y);
        out.polygon = disk_intersection(norm, lambdas, start, cfg.disk_sides);
        out.grid_steps = g;
        const double area = out.polygon.area();
        if (prev_area >= 0.0 &&
            std::abs(prev_area - area) <= cfg.area_rtol * std::max(prev_area, 1e-300)) {
            out.area_converged = true;
            break;
        }
        if (prev_area == 0.0 && area == 0.0) {
            out.area_converged = true;
            break;
        }
        prev_area = area;
    }
    return out;
}

} // namespace crnr
