// Acceptance suite: one PASS/FAIL line per criterion, with the measured
// quantity next to its limit. Exit status is 0 when every failing criterion
// is listed in --allow-fail, so ctest records known shortfalls without
// hiding them; --strict makes any FAIL fatal.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "crnr/classify.hpp"
#include "crnr/io.hpp"
#include "crnr/linalg.hpp"
#include "crnr/numrange.hpp"
#include "crnr/pencil.hpp"
#include "crnr/reference.hpp"
#include "support.hpp"

namespace {

using namespace crnr;
using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = false;
    std::string detail;
    double timed = -1.0; // seconds charged against the limit when the oracle dominates the wall time
};

struct Criterion {
    int id;
    std::string name;
    double limit_s; // 0: no runtime limit
    std::function<Outcome()> run;
};

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// 1 -----------------------------------------------------------------------

Outcome rank_identity()
{
    std::mt19937_64 rng(101);
    std::uniform_int_distribution<int> order(1, 10), extra(0, 10);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const int M = order(rng);
        const Index n = M + extra(rng);
        const Index s = n + M + extra(rng);
        std::vector<Mode> modes;
        for (int i = 0; i < M; ++i)
            modes.push_back({test::random_in_disk(rng, 0.999), {test::random_matrix(1, 1, rng)(0, 0)}, 0});
        const Signal y = synth_mixture(modes, s + n, 1);
        const RVector sv = linalg::singular_values(build_block_hankel(y, s, n).data());
        worst = std::max(worst, sv(M) / sv(0));
    }
    return {worst < 1e-8, "worst sigma_{M+1}/sigma_1 over 50 mixtures " + fmt("%.2e", worst) + " (limit 1e-8)"};
}

// 2 -----------------------------------------------------------------------

Outcome eigenvalue_recovery()
{
    const Signal y = io::load_signal(test::fixture("z1_noiseless.json"));
    const CadzowResult c = cadzow_denoise(build_block_hankel(y, 40, 20), 10);
    MpmOptions opts;
    opts.rank = 10;
    const std::vector<cplx> est = mpm_eigenvalues(split_pencil(c.hankel), opts);
    const double err = test::match_error(reference::z1().freqs, est);
    return {err <= 1e-6, "max nearest-neighbour error " + fmt("%.3e", err) + " (limit 1e-6)"};
}

// 3 -----------------------------------------------------------------------

Outcome closed_form_disk()
{
    std::mt19937_64 rng(303);
    std::uniform_int_distribution<int> pick_n(1, 12), pick_extra(1, 12);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const Index K = trial % 2 ? 3 : 1;
        const Index n = pick_n(rng);
        const Index s = n + pick_extra(rng);
        const Signal y(test::random_matrix(s + n, K, rng));
        const FrobeniusDisk a = frobenius_disk(split_pencil(build_block_hankel(y, s, n)));
        const FrobeniusDisk b = frobenius_disk_from_signal(y, s, n);
        worst = std::max(worst, std::abs(a.center - b.center) / std::max(std::abs(a.center), 1e-300));
        worst = std::max(worst, std::abs(a.radius - b.radius) / std::max(a.radius, 1e-300));
    }
    return {worst <= 1e-10, "worst relative difference " + fmt("%.2e", worst) + " (limit 1e-10)"};
}

// 4 and 5 share pencils and verdicts ---------------------------------------

struct GridVerdicts {
    PencilPair P;
    FrobeniusDisk disk;
    std::vector<cplx> thetas;
    std::vector<bool> inside;
};

constexpr int kThetaSteps = 41;

std::vector<PencilPair> random_scaled_pencils()
{
    std::mt19937_64 rng(404);
    std::vector<PencilPair> out;
    for (int p = 0; p < 20; ++p) {
        PencilPair P;
        P.A = test::random_matrix(6, 4, rng);
        P.B = test::random_matrix(6, 4, rng);
        out.push_back(ensure_scaled(P, 2.0));
    }
    return out;
}

std::vector<cplx> theta_grid(const FrobeniusDisk& d)
{
    std::vector<cplx> out;
    const double h = 1.1 * std::max(d.radius, 1e-3);
    for (int i = 0; i < kThetaSteps; ++i)
        for (int j = 0; j < kThetaSteps; ++j)
            out.push_back(d.center + h * cplx(2.0 * i / (kThetaSteps - 1) - 1.0, 2.0 * j / (kThetaSteps - 1) - 1.0));
    return out;
}

/// Verdict-only membership: certified negatives and the Lipschitz bound end
/// the search early; anything else is refined as usual.
MembershipConfig fast_verdicts()
{
    MembershipConfig cfg;
    cfg.stop_at_first_negative = true;
    cfg.lipschitz_shortcut = true;
    return cfg;
}

std::vector<GridVerdicts> g_verdicts;

/// Brute-force infimum of ||A - lambda B||_2 - |theta - lambda| over |lambda| <= R:
/// about 1e5 lambda on a square grid, then nested local grids around the
/// best points for thetas close to the boundary.
struct BruteForce {
    const PencilPair& P;
    double R;
    int steps;
    std::vector<cplx> lambdas;
    std::vector<double> norms;

    static double norm2(const PencilPair& P, cplx l)
    {
        return Eigen::JacobiSVD<CMatrix>(P.A - l * P.B).singularValues()(0);
    }

    BruteForce(const PencilPair& pencil, double radius) : P(pencil), R(radius)
    {
        steps = static_cast<int>(std::ceil(std::sqrt(1e5 * 4.0 / 3.14159265358979)));
        const double h = 2.0 * R / (steps - 1);
        for (int i = 0; i < steps; ++i)
            for (int j = 0; j < steps; ++j) {
                const cplx l(-R + i * h, -R + j * h);
                if (std::abs(l) > R) continue;
                lambdas.push_back(l);
                norms.push_back(norm2(P, l));
            }
    }

    double spacing() const { return 2.0 * R / (steps - 1); }

    double infimum(cplx theta, double radius, double slack, double tol) const
    {
        std::vector<std::pair<double, cplx>> best;
        for (std::size_t k = 0; k < lambdas.size(); ++k) {
            if (std::abs(lambdas[k]) > radius) continue;
            best.emplace_back(norms[k] - std::abs(theta - lambdas[k]), lambdas[k]);
        }
        std::partial_sort(best.begin(), best.begin() + std::min<std::size_t>(5, best.size()), best.end(),
                          [](const auto& a, const auto& b) { return a.first < b.first; });
        double value = best.front().first;
        // The grid value bounds the infimum from above and overshoots it by at
        // most slack, so only a thin band around zero needs zooming in.
        if (value > slack || value < -tol) return value;
        for (std::size_t b = 0; b < std::min<std::size_t>(5, best.size()); ++b) {
            cplx c = best[b].second;
            double h = spacing();
            for (int level = 0; level < 7; ++level) {
                double v0 = 1e300;
                cplx arg = c;
                for (int i = -5; i <= 5; ++i)
                    for (int j = -5; j <= 5; ++j) {
                        const cplx l = c + 0.2 * h * cplx(i, j);
                        const double v = norm2(P, l) - std::abs(theta - l);
                        if (v < v0) {
                            v0 = v;
                            arg = l;
                        }
                    }
                value = std::min(value, v0);
                c = arg;
                h *= 0.2;
            }
        }
        return value;
    }
};

Outcome membership_vs_brute_force()
{
    g_verdicts.clear();
    std::size_t cells = 0, agree = 0, bad = 0;
    double worst_disagreement = 0.0, timed = 0.0;
    for (const PencilPair& P : random_scaled_pencils()) {
        GridVerdicts gv{P, frobenius_disk(P), {}, {}};
        gv.thetas = theta_grid(gv.disk);
        const auto t0 = Clock::now();
        const PencilNorm norm(P);
        const MembershipConfig cfg = fast_verdicts();
        double R = 0.0;
        for (const cplx t : gv.thetas) R = std::max(R, search_radius(norm.norm_A(), norm.norm_B(), t, cfg).first);
        const NormGrid grid = norm_grid(norm, R, cfg.grid_steps);
        timed += std::chrono::duration<double>(Clock::now() - t0).count();
        const BruteForce brute(P, R);
        const double tol = cfg.boundary_rtol * (1.0 + norm.norm_A());
        const double slack = (norm.norm_B() + 1.0) * brute.spacing() / std::sqrt(2.0);
        for (const cplx t : gv.thetas) {
            const auto t1 = Clock::now();
            const MembershipResult r = membership(norm, t, cfg, grid);
            timed += std::chrono::duration<double>(Clock::now() - t1).count();
            const double Rt = search_radius(norm.norm_A(), norm.norm_B(), t, cfg).first;
            const double delta = brute.infimum(t, Rt, slack, tol);
            const bool brute_inside = delta >= -tol;
            gv.inside.push_back(r.accepted());
            ++cells;
            if (brute_inside == r.accepted()) {
                ++agree;
            } else {
                worst_disagreement = std::max(worst_disagreement, std::abs(delta));
                if (std::abs(delta) >= 1e-5) ++bad;
            }
        }
        g_verdicts.push_back(std::move(gv));
    }
    const double rate = static_cast<double>(agree) / static_cast<double>(cells);
    std::ostringstream os;
    os << "agreement " << fmt("%.4f", rate) << " over " << cells << " cells (limit 0.995); "
       << cells - agree << " disagreements, " << bad << " with |delta| >= 1e-5, largest |delta| "
       << fmt("%.1e", worst_disagreement) << "; membership time " << fmt("%.1f s", timed)
       << " (brute-force oracle excluded)";
    return {rate >= 0.995 && bad == 0, os.str(), timed};
}

Outcome containment_chain()
{
    if (g_verdicts.empty()) membership_vs_brute_force();
    std::size_t inside = 0, disk_violations = 0, unit_inside = 0, lemma_violations = 0;
    const MembershipConfig cfg = fast_verdicts();
    for (const GridVerdicts& gv : g_verdicts) {
        for (std::size_t k = 0; k < gv.thetas.size(); ++k) {
            if (!gv.inside[k]) continue;
            ++inside;
            if (std::abs(gv.thetas[k] - gv.disk.center) > gv.disk.radius + 1e-8) ++disk_violations;
        }
        // Same pencil at ||B||_2 = 1 against the classical range of pinv(B) A.
        const PencilPair U = normalize_scale(gv.P, 1.0);
        const RangeBoundary w = classical_range_boundary(linalg::pseudo_inverse(U.B) * U.A, 720);
        const PencilNorm norm(U);
        for (const cplx t : theta_grid(frobenius_disk(U))) {
            if (!membership(norm, t, cfg).accepted()) continue;
            ++unit_inside;
            if (!w.contains(t, 1e-6)) ++lemma_violations;
        }
    }
    // Random pencils have an empty range at ||B||_2 = 1; B with orthonormal
    // columns keeps it populated so the inclusion is actually exercised.
    std::mt19937_64 rng(505);
    std::size_t iso_inside = 0;
    for (int p = 0; p < 5; ++p) {
        PencilPair U;
        U.B = CMatrix::Zero(6, 4);
        U.B.topRows(4).setIdentity();
        U.A = CMatrix(6, 4);
        U.A.topRows(4) = 0.5 * test::random_matrix(4, 4, rng);
        U.A.bottomRows(2) = test::random_matrix(2, 4, rng);
        const RangeBoundary w = classical_range_boundary(linalg::pseudo_inverse(U.B) * U.A, 720);
        const FrobeniusDisk d = frobenius_disk(U);
        const PencilNorm norm(U);
        for (int i = 0; i < 21; ++i)
            for (int j = 0; j < 21; ++j) {
                const cplx t = d.center + d.radius * cplx(i / 10.0 - 1.0, j / 10.0 - 1.0);
                if (!membership(norm, t, cfg).accepted()) continue;
                ++iso_inside;
                if (!w.contains(t, 1e-6)) ++lemma_violations;
            }
    }
    std::ostringstream os;
    os << disk_violations << " disk violations over " << inside << " inside cells; " << lemma_violations
       << " classical-range violations over " << unit_inside << " + " << iso_inside
       << " inside cells at ||B||_2 = 1 (random + orthonormal-B pencils)";
    return {disk_violations == 0 && lemma_violations == 0, os.str()};
}

// 6 -----------------------------------------------------------------------

Outcome eigenpair_containment()
{
    std::mt19937_64 rng(606);
    std::uniform_int_distribution<int> dim(2, 4);
    std::size_t checked = 0, violations = 0;
    for (int p = 0; p < 200; ++p) {
        const Index n = dim(rng);
        const CMatrix A = test::random_matrix(n, n, rng);
        const CMatrix B = test::random_matrix(n, n, rng);
        Eigen::ComplexEigenSolver<CMatrix> es(B.inverse() * A);
        const PencilPair P{A, B, cplx(1.0), HankelShape{}};
        for (Index i = 0; i < n; ++i) {
            const CVector x = es.eigenvectors().col(i).normalized();
            if ((B * x).norm() < 1.0) continue;
            ++checked;
            if (!membership(P, es.eigenvalues()(i)).accepted()) ++violations;
        }
    }
    return {violations == 0, std::to_string(violations) + " violations over " + std::to_string(checked) +
                                 " eigenpairs with ||Bx|| >= 1"};
}

// 7 -----------------------------------------------------------------------

Outcome disk_trends()
{
    SweepOptions opts;
    opts.snr_grid = {0.0, 10.0, 20.0, 30.0};
    opts.trials = 500;
    opts.seed = 7;
    const CrnrConfig cfg;
    const SweepReport r = disk_geometry_sweep(reference::z1(), cfg, opts);
    SweepOptions clean = opts;
    clean.snr_grid = {kNoiselessSnr};
    clean.trials = 1;
    const cplx c0 = disk_geometry_sweep(reference::z1(), cfg, clean).disk_center_mean_cadzow[0];

    bool a = true, b = true;
    for (std::size_t i = 1; i < r.snr_grid.size(); ++i) a &= r.disk_radius_mean_raw[i] <= r.disk_radius_mean_raw[i - 1];
    for (std::size_t i = 0; i < r.snr_grid.size(); ++i) b &= r.disk_radius_mean_cadzow[i] <= r.disk_radius_mean_raw[i];
    const double c_err = std::abs(r.disk_center_mean_cadzow[3] - c0) / std::abs(c0);
    const bool c = c_err <= 0.05;

    std::ostringstream os;
    os << "(a) raw radius";
    for (double v : r.disk_radius_mean_raw) os << ' ' << fmt("%.3f", v);
    os << (a ? " non-increasing" : " NOT non-increasing") << "; (b) cadzow radius";
    for (double v : r.disk_radius_mean_cadzow) os << ' ' << fmt("%.3f", v);
    os << (b ? " <= raw" : " exceeds raw somewhere") << "; (c) 30 dB centre off by " << fmt("%.4f", c_err)
       << " of |c| (limit 0.05)";
    return {a && b && c, os.str()};
}

// 8 -----------------------------------------------------------------------

bool non_increasing_with_one_inversion(const std::vector<double>& v)
{
    int inversions = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        const double rise = v[i] - v[i - 1];
        if (rise <= 0.0) continue;
        if (rise > 0.02) return false;
        ++inversions;
    }
    return inversions <= 1;
}

std::string curve_text(const std::vector<double>& v)
{
    std::string s;
    for (double x : v) s += ' ' + fmt("%.3f", x);
    return s;
}

Outcome classification_trends()
{
    SweepOptions opts;
    opts.snr_grid = {-5.0, 0.0, 5.0, 10.0, 15.0, 20.0};
    opts.trials = 500;
    opts.seed = 8;
    opts.scale_selection = ScaleSelection::calibrated;
    opts.track_true_class = false;

    CrnrConfig known;
    const SweepReport k = error_rate_sweep(reference::z1(), reference::z2(), known, opts);
    CrnrConfig estimated;
    estimated.order.reset();
    const SweepReport e = error_rate_sweep(reference::z1(), reference::z2(), estimated, opts);

    const std::vector<double>& kc = k.curve(Method::crnr)->error_rate;
    const std::vector<double>& kg = k.curve(Method::glrt)->error_rate;
    const std::vector<double>& ec = e.curve(Method::crnr)->error_rate;
    const std::vector<double>& eg = e.curve(Method::glrt)->error_rate;

    const bool a = non_increasing_with_one_inversion(kc);
    const double gap = std::max(std::abs(kc[0] - kg[0]), std::abs(kc[1] - kg[1]));
    const bool b = gap <= 0.05;
    bool c = true;
    for (std::size_t i = 3; i < 6; ++i) c &= ec[i] <= eg[i];

    std::ostringstream os;
    os << "(a) " << (a ? "pass" : "FAIL") << " known CRNR" << curve_text(kc) << "; (b) " << (b ? "pass" : "FAIL")
       << " known GLRT" << curve_text(kg) << ", low-SNR gap " << fmt("%.3f", gap) << " (limit 0.05); (c) "
       << (c ? "pass" : "FAIL") << " estimated CRNR" << curve_text(ec) << " vs GLRT" << curve_text(eg)
       << "; calibrated D known" << curve_text(k.scale_used) << ", estimated" << curve_text(e.scale_used)
       << "; mean estimated order" << curve_text(e.mean_order);
    return {a && b && c, os.str()};
}

// 9 -----------------------------------------------------------------------

Outcome gmap_reproduction()
{
    const Signal clean = io::load_signal(test::fixture("four_mode_noiseless.json"));
    const Signal noisy = io::load_signal(test::fixture("four_mode_snr30.json"));
    const std::vector<double> axis = linspace(-1.0, 1.0, 41);
    const double h = axis[1] - axis[0];
    const GridField g = g_map(split_pencil(build_block_hankel(clean, 20, 4)), axis, axis);

    std::vector<std::pair<double, cplx>> cells;
    for (Index i = 0; i < g.values.rows(); ++i)
        for (Index j = 0; j < g.values.cols(); ++j)
            cells.emplace_back(g.values(i, j), cplx(g.re_axis[i], g.im_axis[j]));
    std::partial_sort(cells.begin(), cells.begin() + 4, cells.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
    std::set<std::size_t> hit;
    const std::vector<cplx> modes = reference::four_mode().freqs;
    for (int k = 0; k < 4; ++k)
        for (std::size_t m = 0; m < modes.size(); ++m)
            if (std::abs(modes[m].real() - cells[k].second.real()) <= h / 2 + 1e-12 &&
                std::abs(modes[m].imag() - cells[k].second.imag()) <= h / 2 + 1e-12)
                hit.insert(m);
    const double noisy_min = g_map(split_pencil(build_block_hankel(noisy, 20, 4)), axis, axis).values.minCoeff();
    std::ostringstream os;
    os << hit.size() << " of 4 modes own the four smallest cells (4th smallest " << fmt("%.1e", cells[3].first)
       << "); 30 dB minimum " << fmt("%.3e", noisy_min) << " (> 0)";
    return {hit.size() == 4 && noisy_min > 0.0, os.str()};
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"crnr acceptance suite"};
    std::vector<int> only, allow_fail;
    bool strict = false;
    std::string json_out;
    app.add_option("--only", only, "Run only these criteria")->delimiter(',');
    app.add_option("--allow-fail", allow_fail, "Criteria whose FAIL does not change the exit status")->delimiter(',');
    app.add_flag("--strict", strict, "Exit nonzero on any FAIL");
    app.add_option("--json", json_out, "Also write results as JSON");
    CLI11_PARSE(app, argc, argv);

    const std::vector<Criterion> criteria{
        {1, "rank identity", 10, rank_identity},
        {2, "eigenvalue recovery", 5, eigenvalue_recovery},
        {3, "closed-form disk", 5, closed_form_disk},
        {4, "membership vs brute force", 120, membership_vs_brute_force},
        {5, "containment chain", 0, containment_chain},
        {6, "eigenpair containment", 0, eigenpair_containment},
        {7, "disk vs SNR", 600, disk_trends},
        {8, "classification trends", 1800, classification_trends},
        {9, "g-map minima", 60, gmap_reproduction},
    };

    io::json results = io::json::array();
    bool fatal = false;
    for (const Criterion& c : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        const auto t0 = Clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
        const double charged = o.timed >= 0.0 ? o.timed : secs;
        const bool in_time = c.limit_s == 0 || charged <= c.limit_s;
        const bool pass = o.pass && in_time;
        std::string timing = fmt("%.1f s", secs);
        if (o.timed >= 0.0) timing += fmt(" wall, %.1f s charged", charged);
        if (c.limit_s > 0) timing += fmt(" (limit %.0f s)", c.limit_s);
        std::printf("criterion %d: %s  %s: %s; %s\n", c.id, pass ? "PASS" : "FAIL", c.name.c_str(),
                    o.detail.c_str(), timing.c_str());
        std::fflush(stdout);
        results.push_back({{"criterion", c.id}, {"name", c.name}, {"pass", pass}, {"detail", o.detail},
                           {"seconds", secs}});
        const bool allowed = std::find(allow_fail.begin(), allow_fail.end(), c.id) != allow_fail.end();
        if (!pass && (strict || !allowed)) fatal = true;
    }
    if (!json_out.empty()) io::write_text(json_out, results.dump(2) + "\n");
    return fatal ? 1 : 0;
}
