#include "crnr/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "crnr/reference.hpp"
#include "parallel.hpp"

namespace crnr {

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

PencilPair apply_scaling(const PencilPair& P, ScalePolicy policy, double D)
{
    return policy == ScalePolicy::normalize ? normalize_scale(P, D) : ensure_scaled(P, D);
}

Signal trial_signal(const Signal& clean, double snr_db, std::uint64_t seed)
{
    return std::isinf(snr_db) && snr_db > 0 ? clean : add_awgn(clean, snr_db, seed);
}

} // namespace

std::string_view to_string(ScalePolicy p)
{
    return p == ScalePolicy::normalize ? "normalize" : "conditional";
}

ScalePolicy parse_scale_policy(std::string_view text)
{
    if (text == "normalize") return ScalePolicy::normalize;
    if (text == "conditional") return ScalePolicy::conditional;
    throw InvalidArgument("unknown scale policy '" + std::string(text) + "'");
}

std::string_view to_string(Method m) { return m == Method::crnr ? "crnr" : "glrt"; }

std::string_view to_string(ScaleSelection s)
{
    return s == ScaleSelection::fixed ? "fixed" : "calibrated";
}

ScaleSelection parse_scale_selection(std::string_view text)
{
    if (text == "fixed") return ScaleSelection::fixed;
    if (text == "calibrated") return ScaleSelection::calibrated;
    throw InvalidArgument("unknown scale selection '" + std::string(text) + "'");
}

MembershipConfig CrnrConfig::default_membership()
{
    MembershipConfig m;
    m.seeds = 4;
    m.lipschitz_shortcut = true;
    return m;
}

void CrnrConfig::validate() const
{
    require(n >= 1, "CrnrConfig: n must be >= 1");
    require(s > n, "CrnrConfig: need s > n");
    require(D > 1.0 && std::isfinite(D), "CrnrConfig: D must be finite and > 1");
    if (order) require(*order >= 1, "CrnrConfig: order must be >= 1");
}

PreparedPencil prepare_pencil(const Signal& signal, const CrnrConfig& cfg)
{
    cfg.validate();
    const BlockHankel H = build_block_hankel(signal, cfg.s, cfg.n);
    PreparedPencil out;
    out.order_estimated = !cfg.order.has_value();
    out.order = cfg.order ? *cfg.order : estimate_order(H, cfg.order_options);

    PencilPair raw;
    if (cfg.cadzow) {
        const Index cap = std::min(H.data().rows(), H.data().cols());
        const CadzowResult cz = cadzow_denoise(H, std::min(out.order, cap), cfg.cadzow_options);
        out.cadzow_applied = true;
        out.cadzow_converged = cz.converged;
        out.cadzow_iterations = cz.iterations;
        raw = split_pencil(cz.hankel);
    } else {
        raw = split_pencil(H);
    }
    out.pencil = apply_scaling(raw, cfg.scaling, cfg.D);
    return out;
}

ClassDecision crnr_decide(const PreparedPencil& prepared, const CandidateClass& Z,
                          const MembershipConfig& mcfg)
{
    Z.validate();
    ClassDecision d;
    d.class_name = Z.name;
    d.order = prepared.order;
    d.cadzow_converged = prepared.cadzow_converged;
    d.cadzow_iterations = prepared.cadzow_iterations;
    d.scale = prepared.pencil.scale;
    d.tested = Z.freqs;
    d.disk = frobenius_disk(prepared.pencil);

    MembershipConfig cfg = mcfg;
    cfg.stop_at_first_negative = true;
    const PencilNorm norm(prepared.pencil);
    // One seed grid wide enough for every frequency of the class, built on
    // first use so that a disk rejection of the first frequency stays cheap.
    std::optional<NormGrid> grid;
    auto shared_grid = [&]() -> const NormGrid& {
        if (!grid) {
            double R = 0.0;
            for (const cplx z : d.tested)
                R = std::max(R, search_radius(norm.norm_A(), norm.norm_B(), z, cfg).first);
            grid = norm_grid(norm, R, cfg.grid_steps);
        }
        return *grid;
    };
    const double disk_tol = 1e-12 * (1.0 + std::abs(d.disk.center) + d.disk.radius);
    for (std::size_t k = 0; k < d.tested.size(); ++k) {
        const cplx z = d.tested[k];
        MembershipResult r = d.disk.contains(z, disk_tol) ? membership(norm, z, cfg, shared_grid())
                                                          : disk_rejection(d.disk, z);
        const bool ok = r.accepted();
        d.per_freq.push_back(r);
        if (!ok) {
            d.rejected_at = std::make_pair(k, r.stage);
            d.is_member = false;
            return d;
        }
    }
    d.is_member = true;
    return d;
}

ClassDecision crnr_classify(const Signal& signal, const CandidateClass& Z, const CrnrConfig& cfg)
{
    Z.validate();
    return crnr_decide(prepare_pencil(signal, cfg), Z, cfg.membership);
}

std::vector<ClassDecision> classify_among(const Signal& signal,
                                          const std::vector<CandidateClass>& classes,
                                          const CrnrConfig& cfg)
{
    require(!classes.empty(), "classify_among: no classes");
    const PreparedPencil prepared = prepare_pencil(signal, cfg);
    std::vector<ClassDecision> out;
    out.reserve(classes.size());
    for (const CandidateClass& Z : classes) out.push_back(crnr_decide(prepared, Z, cfg.membership));
    return out;
}

double class_critical_scale(const PencilPair& P, const CandidateClass& Z, double d_min,
                            const MembershipConfig& mcfg)
{
    Z.validate();
    const PencilNorm norm(P);
    double R = 0.0;
    for (const cplx z : Z.freqs) R = std::max(R, critical_scale_radius(norm, z, d_min));
    const NormGrid grid = norm_grid(norm, R, mcfg.grid_steps);

    // A frequency already inside at the running maximum cannot raise it.
    // The membership radius at D >= d_min lies within the grid radius, so
    // the same grid, rescaled, seeds those checks.
    MembershipConfig check = mcfg;
    check.stop_at_first_negative = true;
    double worst = d_min;
    for (const cplx z : Z.freqs) {
        const double alpha = worst / norm.norm_B();
        NormGrid scaled_grid = grid;
        for (double& v : scaled_grid.norms) v *= alpha;
        if (membership(norm.scaled(alpha), z, check, scaled_grid).accepted()) continue;
        worst = std::max(worst, critical_scale(norm, z, d_min, mcfg, grid));
    }
    return worst;
}

double equal_error_scale(std::vector<double> true_critical, std::vector<double> cand_critical)
{
    require(!true_critical.empty() && !cand_critical.empty(),
            "equal_error_scale: empty calibration set");
    std::sort(true_critical.begin(), true_critical.end());
    std::sort(cand_critical.begin(), cand_critical.end());
    const double nt = static_cast<double>(true_critical.size());
    const double nc = static_cast<double>(cand_critical.size());

    // At target D the true class is rejected when its critical scale exceeds
    // D and the candidate accepted when its critical scale is at most D.
    auto miss = [&](double D) {
        return static_cast<double>(true_critical.end() -
                                   std::upper_bound(true_critical.begin(),
                                                    true_critical.end(), D)) / nt;
    };
    auto false_accept = [&](double D) {
        return static_cast<double>(std::upper_bound(cand_critical.begin(),
                                                    cand_critical.end(), D) -
                                   cand_critical.begin()) / nc;
    };

    std::vector<double> cuts;
    cuts.reserve(true_critical.size() + cand_critical.size());
    cuts.insert(cuts.end(), true_critical.begin(), true_critical.end());
    cuts.insert(cuts.end(), cand_critical.begin(), cand_critical.end());
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::remove_if(cuts.begin(), cuts.end(),
                              [](double c) { return !std::isfinite(c); }),
               cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    if (cuts.empty()) return std::numeric_limits<double>::infinity();

    // Both rates are step functions that change only at the cuts; probe each
    // step once, preferring balanced rates, then a lower total, then smaller D.
    double best_D = cuts.front();
    double best_gap = std::numeric_limits<double>::infinity();
    double best_sum = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cuts.size(); ++i) {
        const double D = i + 1 < cuts.size() ? 0.5 * (cuts[i] + cuts[i + 1]) : cuts[i];
        const double m = miss(D);
        const double f = false_accept(D);
        const double gap = std::abs(m - f);
        const double sum = m + f;
        if (gap < best_gap - 1e-15 || (gap <= best_gap + 1e-15 && sum < best_sum - 1e-15)) {
            best_gap = gap;
            best_sum = sum;
            best_D = D;
        }
    }
    return best_D;
}

MembershipConfig SweepOptions::default_calibration_membership()
{
    MembershipConfig m;
    m.seeds = 2;
    m.refine_tol = 1e-6;
    return m;
}

void SweepOptions::validate() const
{
    require(!snr_grid.empty(), "SweepOptions: empty SNR grid");
    for (const double snr : snr_grid)
        require(!std::isnan(snr) && snr != -std::numeric_limits<double>::infinity(),
                "SweepOptions: SNR values must be finite or +inf");
    require(trials >= 1, "SweepOptions: trials must be >= 1");
    require(workers >= 1, "SweepOptions: workers must be >= 1");
    require(calibration_trials >= 1, "SweepOptions: calibration_trials must be >= 1");
    require(calibration_d_min > 1.0, "SweepOptions: calibration_d_min must exceed 1");
}

const MethodCurve* SweepReport::curve(Method m) const
{
    for (const MethodCurve& c : curves)
        if (c.method == m) return &c;
    return nullptr;
}

std::uint64_t trial_seed(std::uint64_t seed, std::size_t snr_index, std::size_t trial,
                         std::uint64_t stream)
{
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ static_cast<std::uint64_t>(snr_index));
    h = splitmix64(h ^ static_cast<std::uint64_t>(trial));
    return splitmix64(h ^ stream);
}

SweepReport disk_geometry_sweep(const CandidateClass& Z_true, const CrnrConfig& cfg,
                                const SweepOptions& opts)
{
    Z_true.validate();
    cfg.validate();
    opts.validate();
    const Signal clean = synth_unit_mixture(Z_true.freqs, cfg.s + cfg.n);

    SweepReport rep;
    rep.snr_grid = opts.snr_grid;
    rep.trials = opts.trials;
    rep.seed = opts.seed;
    CrnrConfig raw_cfg = cfg;
    raw_cfg.cadzow = false;
    CrnrConfig cz_cfg = cfg;
    cz_cfg.cadzow = true;

    struct Trial {
        FrobeniusDisk raw, cadzow;
        Index order = 0;
        bool converged = true;
    };
    for (std::size_t si = 0; si < opts.snr_grid.size(); ++si) {
        std::vector<Trial> out(static_cast<std::size_t>(opts.trials));
        detail::parallel_for(out.size(), opts.workers, [&](std::size_t t) {
            const Signal y = trial_signal(clean, opts.snr_grid[si], trial_seed(opts.seed, si, t));
            const PreparedPencil pr = prepare_pencil(y, raw_cfg);
            const PreparedPencil pc = prepare_pencil(y, cz_cfg);
            out[t] = {frobenius_disk(pr.pencil), frobenius_disk(pc.pencil), pc.order,
                      pc.cadzow_converged};
        });
        // Deterministic reduction in trial order.
        cplx c_raw{}, c_cz{};
        double r_raw = 0.0, r_cz = 0.0, order = 0.0;
        int nonconv = 0;
        for (const Trial& t : out) {
            c_raw += t.raw.center;
            c_cz += t.cadzow.center;
            r_raw += t.raw.radius;
            r_cz += t.cadzow.radius;
            order += static_cast<double>(t.order);
            nonconv += t.converged ? 0 : 1;
        }
        const double N = static_cast<double>(opts.trials);
        rep.disk_center_mean_raw.push_back(c_raw / N);
        rep.disk_center_mean_cadzow.push_back(c_cz / N);
        rep.disk_radius_mean_raw.push_back(r_raw / N);
        rep.disk_radius_mean_cadzow.push_back(r_cz / N);
        rep.mean_order.push_back(order / N);
        rep.cadzow_nonconverged.push_back(nonconv);
        rep.scale_used.push_back(cfg.D);
    }
    return rep;
}

SweepReport error_rate_sweep(const CandidateClass& Z_true, const CandidateClass& Z_candidate,
                             const CrnrConfig& cfg, const SweepOptions& opts)
{
    Z_true.validate();
    Z_candidate.validate();
    cfg.validate();
    opts.validate();
    {
        auto key = [](cplx z) { return std::make_pair(z.real(), z.imag()); };
        std::vector<std::pair<double, double>> a, b;
        for (const cplx z : Z_true.freqs) a.push_back(key(z));
        for (const cplx z : Z_candidate.freqs) b.push_back(key(z));
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        require(a != b, "error_rate_sweep: true and candidate classes coincide");
    }
    const bool run_crnr =
        std::find(opts.methods.begin(), opts.methods.end(), Method::crnr) != opts.methods.end();
    const bool run_glrt =
        std::find(opts.methods.begin(), opts.methods.end(), Method::glrt) != opts.methods.end();
    require(run_crnr || run_glrt, "error_rate_sweep: no methods selected");

    const Index T = cfg.s + cfg.n;
    const Signal clean = synth_unit_mixture(Z_true.freqs, T);

    SweepReport rep;
    rep.snr_grid = opts.snr_grid;
    rep.trials = opts.trials;
    rep.seed = opts.seed;
    if (run_crnr) rep.curves.push_back({Method::crnr, {}, {}});
    if (run_glrt) rep.curves.push_back({Method::glrt, {}, {}});

    constexpr std::uint64_t kEvalStream = 0;
    constexpr std::uint64_t kCalibrationStream = 1;

    struct Trial {
        bool crnr_error = false;
        bool crnr_true_accept = false;
        bool glrt_error = false;
        Index order = 0;
        bool converged = true;
    };
    for (std::size_t si = 0; si < opts.snr_grid.size(); ++si) {
        const double snr = opts.snr_grid[si];
        CrnrConfig trial_cfg = cfg;
        if (run_crnr && opts.scale_selection == ScaleSelection::calibrated) {
            // Critical scales on the unscaled pencil; scaling is redone per target D.
            CrnrConfig cal_cfg = cfg;
            cal_cfg.scaling = ScalePolicy::normalize;
            std::vector<double> ct(static_cast<std::size_t>(opts.calibration_trials));
            std::vector<double> cc(ct.size());
            detail::parallel_for(ct.size(), opts.workers, [&](std::size_t t) {
                const Signal y =
                    trial_signal(clean, snr, trial_seed(opts.seed, si, t, kCalibrationStream));
                const PreparedPencil p = prepare_pencil(y, cal_cfg);
                ct[t] = class_critical_scale(p.pencil, Z_true, opts.calibration_d_min,
                                             opts.calibration_membership);
                cc[t] = class_critical_scale(p.pencil, Z_candidate, opts.calibration_d_min,
                                             opts.calibration_membership);
            });
            const double D = equal_error_scale(ct, cc);
            // A D that accepts nothing in calibration still has to be a valid target.
            trial_cfg.D = std::isfinite(D) ? std::max(D, opts.calibration_d_min) : cfg.D;
            trial_cfg.scaling = ScalePolicy::normalize;
        }
        rep.scale_used.push_back(trial_cfg.D);

        std::vector<Trial> out(static_cast<std::size_t>(opts.trials));
        detail::parallel_for(out.size(), opts.workers, [&](std::size_t t) {
            const Signal y = trial_signal(clean, snr, trial_seed(opts.seed, si, t, kEvalStream));
            Trial r;
            Index p = cfg.order.value_or(0);
            if (run_crnr) {
                const PreparedPencil prepared = prepare_pencil(y, trial_cfg);
                r.order = prepared.order;
                r.converged = prepared.cadzow_converged;
                p = prepared.order;
                r.crnr_error = crnr_decide(prepared, Z_candidate, trial_cfg.membership).is_member;
                if (opts.track_true_class)
                    r.crnr_true_accept =
                        crnr_decide(prepared, Z_true, trial_cfg.membership).is_member;
            } else if (!cfg.order) {
                p = estimate_order(build_block_hankel(y, cfg.s, cfg.n), cfg.order_options);
                r.order = p;
            } else {
                r.order = p;
            }
            if (run_glrt) {
                CandidateClass h1 = Z_true;
                CandidateClass h2 = Z_candidate;
                if (!cfg.order) {
                    const auto k = static_cast<std::size_t>(p);
                    h1 = reference::largest_magnitude(Z_true, k);
                    h2 = reference::largest_magnitude(Z_candidate, k);
                }
                r.glrt_error = glrt_classify(y, h1, h2, T - 1).decision == Hypothesis::H2;
            }
            out[t] = r;
        });

        int crnr_err = 0, glrt_err = 0, accept = 0, nonconv = 0;
        double order = 0.0;
        for (const Trial& r : out) {
            crnr_err += r.crnr_error ? 1 : 0;
            glrt_err += r.glrt_error ? 1 : 0;
            accept += r.crnr_true_accept ? 1 : 0;
            nonconv += r.converged ? 0 : 1;
            order += static_cast<double>(r.order);
        }
        const double N = static_cast<double>(opts.trials);
        for (MethodCurve& c : rep.curves) {
            const int k = c.method == Method::crnr ? crnr_err : glrt_err;
            c.misclassified.push_back(k);
            c.error_rate.push_back(static_cast<double>(k) / N);
        }
        if (run_crnr && opts.track_true_class) rep.true_class_acceptance.push_back(accept / N);
        rep.mean_order.push_back(order / N);
        rep.cadzow_nonconverged.push_back(nonconv);
    }
    return rep;
}

} // namespace crnr
