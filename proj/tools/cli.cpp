#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "crnr/classify.hpp"
#include "crnr/io.hpp"
#include "crnr/linalg.hpp"
#include "crnr/numrange.hpp"

namespace crnr::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Raised after artifacts are written when the caller asked for converged
// Cadzow iterations and did not get them.
struct NonConvergence {
    json summary;
};

double parse_double(const std::string& text, const std::string& what)
{
    if (text == "inf" || text == "+inf") return std::numeric_limits<double>::infinity();
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != text.size() || text.empty())
        throw InvalidArgument(what + ": cannot parse '" + text + "' as a number");
    return v;
}

std::vector<double> parse_list(const std::string& text, const std::string& what)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(item, what));
    if (out.empty()) throw InvalidArgument(what + ": empty list");
    return out;
}

/// "lo:hi:steps"
std::vector<double> parse_axis(const std::string& text, const std::string& what)
{
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    if (parts.size() != 3) throw InvalidArgument(what + ": expected lo:hi:steps, got '" + text + "'");
    const double lo = parse_double(parts[0], what);
    const double hi = parse_double(parts[1], what);
    int steps = 0;
    const auto [p, ec] = std::from_chars(parts[2].data(), parts[2].data() + parts[2].size(), steps);
    if (ec != std::errc() || p != parts[2].data() + parts[2].size())
        throw InvalidArgument(what + ": steps must be an integer");
    require(hi > lo, what + ": need lo < hi");
    return linspace(lo, hi, steps);
}

json snr_json(double snr) { return std::isinf(snr) ? json("inf") : json(snr); }

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

/// Options shared by every command that builds a pencil.
struct PencilOptions {
    Index s = 40;
    Index n = 20;
    std::string order = "10";
    std::string cadzow = "on";
    double D = 1.6;
    std::string scale_policy = "normalize";
    std::optional<double> cadzow_eps;
    int cadzow_max_iter = 50;
    std::optional<double> omega;
    int grid_steps = 41;
    int seeds = 4;
    double refine_tol = 1e-9;
    int refine_max_evals = 1500;
    std::optional<double> radius;
    double boundary_rtol = 1e-7;
    bool lipschitz = true;

    void add(CLI::App& app)
    {
        app.add_option("--s", s, "Hankel block rows")->capture_default_str();
        app.add_option("--n", n, "Pencil width (Hankel has n+1 columns)")->capture_default_str();
        app.add_option("--order", order, "Model order: integer or 'auto'")->capture_default_str();
        app.add_option("--cadzow", cadzow, "Cadzow denoising: on|off")
            ->check(CLI::IsMember({"on", "off"}))
            ->capture_default_str();
        app.add_option("--D", D, "Target ||B||_2 after scaling (> 1)")->capture_default_str();
        app.add_option("--scale-policy", scale_policy, "normalize|conditional")
            ->check(CLI::IsMember({"normalize", "conditional"}))
            ->capture_default_str();
        app.add_option("--cadzow-eps", cadzow_eps, "Cadzow stopping threshold (absolute)");
        app.add_option("--cadzow-max-iter", cadzow_max_iter, "Cadzow iteration cap")
            ->capture_default_str();
        app.add_option("--omega", omega, "Order threshold multiple of the median singular value");
        app.add_option("--grid-steps", grid_steps, "Membership seed grid points per axis")
            ->capture_default_str();
        app.add_option("--seeds", seeds, "Seeds refined per membership test")->capture_default_str();
        app.add_option("--refine-tol", refine_tol, "Local refinement tolerance")
            ->capture_default_str();
        app.add_option("--refine-max-evals", refine_max_evals, "Evaluations per refinement")
            ->capture_default_str();
        app.add_option("--radius", radius, "Override the lambda search radius");
        app.add_option("--boundary-rtol", boundary_rtol, "Relative band reported as boundary")
            ->capture_default_str();
    }

    CrnrConfig config() const
    {
        CrnrConfig cfg;
        cfg.s = s;
        cfg.n = n;
        if (order == "auto") {
            cfg.order.reset();
        } else {
            const double v = parse_double(order, "--order");
            require(v >= 1 && v == std::floor(v), "--order: expected a positive integer or 'auto'");
            cfg.order = static_cast<Index>(v);
        }
        cfg.cadzow = cadzow == "on";
        cfg.D = D;
        cfg.scaling = parse_scale_policy(scale_policy);
        cfg.cadzow_options.eps = cadzow_eps;
        cfg.cadzow_options.max_iter = cadzow_max_iter;
        cfg.order_options.omega = omega;
        cfg.membership.grid_steps = grid_steps;
        cfg.membership.seeds = seeds;
        cfg.membership.refine_tol = refine_tol;
        cfg.membership.refine_max_evals = refine_max_evals;
        cfg.membership.radius_override = radius;
        cfg.membership.boundary_rtol = boundary_rtol;
        cfg.membership.lipschitz_shortcut = lipschitz;
        cfg.validate();
        return cfg;
    }
};

struct SweepCli {
    std::string snr = "-5,0,5,10,15,20";
    int trials = 500;
    std::uint64_t seed = 0;
    int workers = 1;
    std::string methods = "crnr,glrt";
    std::string scale_selection = "fixed";
    int calibration_trials = 100;
    double calibration_d_min = 1.1;

    void add(CLI::App& app, bool error_sweep)
    {
        app.add_option("--snr-db", snr, "Comma-separated SNR grid in dB ('inf' allowed)")
            ->capture_default_str();
        app.add_option("--trials", trials, "Trials per SNR")->capture_default_str();
        app.add_option("--seed", seed, "Base seed")->capture_default_str();
        app.add_option("--workers", workers, "Worker threads")->capture_default_str();
        if (!error_sweep) return;
        app.add_option("--methods", methods, "Comma-separated subset of crnr,glrt")
            ->capture_default_str();
        app.add_option("--scale-selection", scale_selection, "fixed|calibrated")
            ->check(CLI::IsMember({"fixed", "calibrated"}))
            ->capture_default_str();
        app.add_option("--calibration-trials", calibration_trials, "Calibration trials per SNR")
            ->capture_default_str();
        app.add_option("--calibration-d-min", calibration_d_min, "Smallest calibrated D")
            ->capture_default_str();
    }

    SweepOptions options() const
    {
        SweepOptions o;
        o.snr_grid = parse_list(snr, "--snr-db");
        o.trials = trials;
        o.seed = seed;
        o.workers = workers;
        o.methods.clear();
        std::stringstream ss(methods);
        std::string m;
        while (std::getline(ss, m, ',')) {
            if (m == "crnr")
                o.methods.push_back(Method::crnr);
            else if (m == "glrt")
                o.methods.push_back(Method::glrt);
            else
                throw InvalidArgument("--methods: unknown method '" + m + "'");
        }
        o.scale_selection = parse_scale_selection(scale_selection);
        o.calibration_trials = calibration_trials;
        o.calibration_d_min = calibration_d_min;
        o.validate();
        return o;
    }
};

void emit(std::ostream& out, const json& summary) { out << summary.dump() << '\n'; }

int cmd_synth(const std::string& class_file, Index T, Index K, const std::string& snr_text,
              std::uint64_t seed, const fs::path& out_path, std::ostream& out)
{
    const CandidateClass cls = io::load_class(class_file);
    const double snr = parse_double(snr_text, "--snr-db");
    Signal y = synth_unit_mixture(cls.freqs, T, K);
    if (!(std::isinf(snr) && snr > 0)) y = add_awgn(y, snr, seed);
    io::save_signal(y, out_path);
    emit(out, {{"command", "synth"},
               {"out", out_path.string()},
               {"T", T},
               {"K", K},
               {"modes", cls.freqs.size()},
               {"snr_db", snr_json(snr)},
               {"seed", seed}});
    return exit_ok;
}

int cmd_classify(const std::string& signal_file, const std::vector<std::string>& class_files,
                 const PencilOptions& popts, const fs::path& out_dir, bool require_convergence,
                 std::ostream& out)
{
    const Signal y = io::load_signal(signal_file);
    std::vector<CandidateClass> classes;
    for (const std::string& f : class_files) classes.push_back(io::load_class(f));
    const CrnrConfig cfg = popts.config();

    const std::vector<ClassDecision> decisions = classify_among(y, classes, cfg);
    json report = json::array();
    for (const ClassDecision& d : decisions) report.push_back(io::to_json(d));
    io::write_text(out_dir / "classify.json", report.dump(2) + "\n");
    const BlockHankel H = build_block_hankel(y, cfg.s, cfg.n);
    io::write_text(out_dir / "singular_values.csv",
                   io::singular_values_csv(linalg::singular_values(H.data())));

    json summary{{"command", "classify"}, {"out", (out_dir / "classify.json").string()}};
    json brief = json::array();
    for (const ClassDecision& d : decisions) {
        json b{{"class", d.class_name}, {"is_member", d.is_member}};
        if (d.rejected_at)
            b["rejected_at"] = {{"index", d.rejected_at->first},
                                {"stage", to_string(d.rejected_at->second)}};
        brief.push_back(b);
    }
    if (decisions.size() == 1) summary["is_member"] = decisions.front().is_member;
    summary["decisions"] = brief;
    summary["order"] = decisions.front().order;
    summary["cadzow_converged"] = decisions.front().cadzow_converged;
    summary["cadzow_iterations"] = decisions.front().cadzow_iterations;
    if (require_convergence && cfg.cadzow && !decisions.front().cadzow_converged)
        throw NonConvergence{summary};
    emit(out, summary);
    return exit_ok;
}

json rates_json(const SweepReport& r)
{
    json rates = json::object();
    for (const MethodCurve& c : r.curves) rates[std::string(to_string(c.method))] = c.error_rate;
    return rates;
}

int cmd_sweep_error(const std::string& true_file, const std::string& cand_file,
                    const PencilOptions& popts, const SweepCli& scli, const fs::path& out_dir,
                    std::ostream& out)
{
    const CandidateClass Zt = io::load_class(true_file);
    const CandidateClass Zc = io::load_class(cand_file);
    const SweepReport r = error_rate_sweep(Zt, Zc, popts.config(), scli.options());
    io::write_text(out_dir / "sweep_error.json", io::to_json(r).dump(2) + "\n");
    io::write_text(out_dir / "sweep_error.csv", io::report_csv(r));
    json snr = json::array();
    for (const double s : r.snr_grid) snr.push_back(snr_json(s));
    emit(out, {{"command", "sweep-error"},
               {"out", (out_dir / "sweep_error.json").string()},
               {"trials", r.trials},
               {"seed", r.seed},
               {"snr_grid", snr},
               {"error_rate", rates_json(r)},
               {"scale_used", r.scale_used}});
    return exit_ok;
}

int cmd_sweep_disk(const std::string& class_file, const PencilOptions& popts,
                   const SweepCli& scli, const fs::path& out_dir, std::ostream& out)
{
    const CandidateClass Z = io::load_class(class_file);
    const SweepReport r = disk_geometry_sweep(Z, popts.config(), scli.options());
    io::write_text(out_dir / "sweep_disk.json", io::to_json(r).dump(2) + "\n");
    io::write_text(out_dir / "sweep_disk.csv", io::report_csv(r));
    json snr = json::array();
    for (const double s : r.snr_grid) snr.push_back(snr_json(s));
    emit(out, {{"command", "sweep-disk"},
               {"out", (out_dir / "sweep_disk.json").string()},
               {"trials", r.trials},
               {"seed", r.seed},
               {"snr_grid", snr},
               {"disk_radius_mean_raw", r.disk_radius_mean_raw},
               {"disk_radius_mean_cadzow", r.disk_radius_mean_cadzow}});
    return exit_ok;
}

/// Grid points that are no larger than any of their 8 neighbours, ascending.
std::vector<std::pair<Index, Index>> local_minima(const Eigen::MatrixXd& v)
{
    std::vector<std::pair<Index, Index>> out;
    for (Index i = 0; i < v.rows(); ++i)
        for (Index j = 0; j < v.cols(); ++j) {
            bool is_min = true;
            for (Index di = -1; di <= 1 && is_min; ++di)
                for (Index dj = -1; dj <= 1; ++dj) {
                    const Index a = i + di, b = j + dj;
                    if ((di == 0 && dj == 0) || a < 0 || b < 0 || a >= v.rows() || b >= v.cols())
                        continue;
                    if (v(a, b) < v(i, j)) {
                        is_min = false;
                        break;
                    }
                }
            if (is_min) out.emplace_back(i, j);
        }
    std::sort(out.begin(), out.end(),
              [&](const auto& a, const auto& b) { return v(a.first, a.second) < v(b.first, b.second); });
    return out;
}

int cmd_gmap(const std::string& signal_file, PencilOptions popts, const std::string& re_grid,
             const std::string& im_grid, int workers, int report_minima, const fs::path& out_dir,
             std::ostream& out)
{
    const Signal y = io::load_signal(signal_file);
    const CrnrConfig cfg = popts.config();
    const PreparedPencil p = prepare_pencil(y, cfg);
    const GridField field = g_map(p.pencil, parse_axis(re_grid, "--grid"),
                                  parse_axis(im_grid.empty() ? re_grid : im_grid, "--im-grid"),
                                  workers);
    io::write_text(out_dir / "gmap.csv", io::grid_csv(field));
    io::write_text(out_dir / "gmap.json", io::to_json(field).dump() + "\n");

    json minima = json::array();
    const auto mins = local_minima(field.values);
    for (std::size_t k = 0; k < mins.size() && static_cast<int>(k) < report_minima; ++k) {
        const auto [i, j] = mins[k];
        minima.push_back({{"re", field.re_axis[static_cast<std::size_t>(i)]},
                          {"im", field.im_axis[static_cast<std::size_t>(j)]},
                          {"value", field.values(i, j)}});
    }
    emit(out, {{"command", "gmap"},
               {"out", (out_dir / "gmap.csv").string()},
               {"rows", field.re_axis.size() * field.im_axis.size()},
               {"min_value", field.values.minCoeff()},
               {"minima", minima}});
    return exit_ok;
}

int cmd_boundary(const std::string& signal_file, const PencilOptions& popts,
                 BoundaryGridConfig bcfg, int classical_angles, const fs::path& out_dir,
                 std::ostream& out)
{
    const Signal y = io::load_signal(signal_file);
    const CrnrConfig cfg = popts.config();
    const PreparedPencil p = prepare_pencil(y, cfg);
    const RectRangeBoundary b = rect_range_boundary(p.pencil, bcfg);
    const FrobeniusDisk disk = frobenius_disk(p.pencil);

    json doc{{"polygon", io::to_json(b.polygon)},
             {"grid_steps", b.grid_steps},
             {"area_converged", b.area_converged},
             {"disk", {{"center", complex_json(disk.center)}, {"radius", disk.radius}}},
             {"scale", complex_json(p.pencil.scale)}};
    io::write_text(out_dir / "boundary.csv", io::polygon_csv(b.polygon));
    if (classical_angles > 0) {
        // Classical range of pinv(B) A for the pencil normalized to ||B||_2 = 1.
        const PencilPair unit = normalize_scale(p.pencil, 1.0);
        const RangeBoundary rb =
            classical_range_boundary(linalg::pseudo_inverse(unit.B) * unit.A, classical_angles);
        doc["classical"] = io::to_json(rb.polygon());
        io::write_text(out_dir / "classical_boundary.csv", io::polygon_csv(rb.polygon()));
    }
    io::write_text(out_dir / "boundary.json", doc.dump(2) + "\n");
    emit(out, {{"command", "boundary"},
               {"out", (out_dir / "boundary.csv").string()},
               {"vertices", b.polygon.vertices.size()},
               {"area", b.polygon.area()},
               {"area_converged", b.area_converged},
               {"disk_radius", disk.radius}});
    return exit_ok;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"crnr: pencil-based classification of damped-sinusoid signals"};
    app.require_subcommand(1);
    std::string out_dir = ".";
    app.add_option("--out-dir", out_dir, "Directory for artifacts")->capture_default_str();

    // synth
    CLI::App* synth = app.add_subcommand("synth", "Synthesize a unit-residue mixture");
    std::string synth_class, synth_snr = "inf", synth_out;
    Index synth_T = 60, synth_K = 1;
    std::uint64_t synth_seed = 0;
    synth->add_option("--class-file", synth_class, "Frequencies to mix")->required();
    synth->add_option("--T", synth_T, "Samples per look")->capture_default_str();
    synth->add_option("--K", synth_K, "Looks")->capture_default_str();
    synth->add_option("--snr-db", synth_snr, "SNR in dB, or 'inf' for no noise")
        ->capture_default_str();
    synth->add_option("--seed", synth_seed, "Noise seed")->capture_default_str();
    synth->add_option("--out", synth_out, "Output signal file (default <out-dir>/signal.json)");

    // classify
    CLI::App* classify = app.add_subcommand("classify", "Run CRNR on a signal");
    std::string cls_signal;
    std::vector<std::string> cls_classes;
    bool require_convergence = false;
    PencilOptions cls_opts;
    classify->add_option("--signal", cls_signal, "Signal file")->required();
    classify->add_option("--class-file", cls_classes, "Candidate class file (repeatable)")
        ->required();
    classify->add_flag("--require-convergence", require_convergence,
                       "Exit 4 when Cadzow hits its iteration cap");
    cls_opts.add(*classify);

    // sweep-error
    CLI::App* sweep_error = app.add_subcommand("sweep-error", "Error rate versus SNR");
    std::string se_true, se_cand;
    PencilOptions se_opts;
    SweepCli se_cli;
    sweep_error->add_option("--true-class", se_true, "Class generating the signal")->required();
    sweep_error->add_option("--class-file", se_cand, "Candidate class")->required();
    se_opts.add(*sweep_error);
    se_cli.add(*sweep_error, true);

    // sweep-disk
    CLI::App* sweep_disk = app.add_subcommand("sweep-disk", "Frobenius disk versus SNR");
    std::string sd_class;
    PencilOptions sd_opts;
    SweepCli sd_cli;
    sd_cli.snr = "0,10,20,30";
    sweep_disk->add_option("--class-file", sd_class, "Class generating the signal")->required();
    sd_opts.add(*sweep_disk);
    sd_cli.add(*sweep_disk, false);

    // gmap
    CLI::App* gmap = app.add_subcommand("gmap", "sigma_min(A - lambda B) on a grid");
    std::string gm_signal, gm_grid = "-1:1:41", gm_im;
    int gm_workers = 1, gm_minima = 4;
    PencilOptions gm_opts;
    gm_opts.cadzow = "off";
    gmap->add_option("--signal", gm_signal, "Signal file")->required();
    gmap->add_option("--grid", gm_grid, "Real axis lo:hi:steps")->capture_default_str();
    gmap->add_option("--im-grid", gm_im, "Imaginary axis lo:hi:steps (default: --grid)");
    gmap->add_option("--workers", gm_workers, "Worker threads")->capture_default_str();
    gmap->add_option("--report-minima", gm_minima, "Local minima listed in the summary")
        ->capture_default_str();
    gm_opts.add(*gmap);

    // boundary
    CLI::App* boundary = app.add_subcommand("boundary", "Polygonal W_2 boundary of a signal pencil");
    std::string bd_signal;
    PencilOptions bd_opts;
    BoundaryGridConfig bd_cfg;
    int bd_classical = 0;
    std::optional<double> bd_half_width;
    boundary->add_option("--signal", bd_signal, "Signal file")->required();
    boundary->add_option("--initial-steps", bd_cfg.initial_steps, "Initial lambda grid per axis")
        ->capture_default_str();
    boundary->add_option("--max-steps", bd_cfg.max_steps, "Largest lambda grid per axis")
        ->capture_default_str();
    boundary->add_option("--area-rtol", bd_cfg.area_rtol, "Relative area change to stop")
        ->capture_default_str();
    boundary->add_option("--disk-sides", bd_cfg.disk_sides, "Polygon sides per disk")
        ->capture_default_str();
    boundary->add_option("--half-width", bd_half_width, "Half-width of the lambda box");
    boundary->add_option("--classical-angles", bd_classical,
                         "Also trace W(pinv(B) A) with this many support angles");
    bd_opts.add(*boundary);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        const fs::path dir(out_dir);
        if (synth->parsed())
            return cmd_synth(synth_class, synth_T, synth_K, synth_snr, synth_seed,
                             synth_out.empty() ? dir / "signal.json" : fs::path(synth_out), out);
        if (classify->parsed())
            return cmd_classify(cls_signal, cls_classes, cls_opts, dir, require_convergence, out);
        if (sweep_error->parsed()) return cmd_sweep_error(se_true, se_cand, se_opts, se_cli, dir, out);
        if (sweep_disk->parsed()) return cmd_sweep_disk(sd_class, sd_opts, sd_cli, dir, out);
        if (gmap->parsed())
            return cmd_gmap(gm_signal, gm_opts, gm_grid, gm_im, gm_workers, gm_minima, dir, out);
        if (boundary->parsed()) {
            bd_cfg.half_width = bd_half_width;
            return cmd_boundary(bd_signal, bd_opts, bd_cfg, bd_classical, dir, out);
        }
    } catch (const NonConvergence& e) {
        emit(out, e.summary);
        err << "crnr: Cadzow did not converge within the iteration cap\n";
        return exit_nonconvergence;
    } catch (const ConvergenceError& e) {
        err << "crnr: " << e.what() << '\n';
        return exit_nonconvergence;
    } catch (const NumericError& e) {
        err << "crnr: numeric failure: " << e.what() << '\n';
        return exit_numeric;
    } catch (const SchemaError& e) {
        err << "crnr: " << e.what() << '\n';
        return exit_usage;
    } catch (const InvalidArgument& e) {
        err << "crnr: " << e.what() << '\n';
        return exit_usage;
    } catch (const fs::filesystem_error& e) {
        err << "crnr: " << e.what() << '\n';
        return exit_usage;
    }
    err << "crnr: no command\n";
    return exit_usage;
}

} // namespace crnr::cli
