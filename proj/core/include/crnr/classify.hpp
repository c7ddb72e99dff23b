#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "crnr/glrt.hpp"
#include "crnr/numrange.hpp"
#include "crnr/pencil.hpp"
#include "crnr/signal.hpp"

namespace crnr {

enum class ScalePolicy {
    /// Scale to ||B||_2 = D only when ||B||_2 < 1.
    conditional,
    /// Always scale to ||B||_2 = D.
    normalize,
};

std::string_view to_string(ScalePolicy p);
ScalePolicy parse_scale_policy(std::string_view text);

struct CrnrConfig {
    Index s = 40;
    Index n = 20;
    /// Known model order; unset estimates it from the data.
    std::optional<Index> order = 10;
    double D = 1.6;
    ScalePolicy scaling = ScalePolicy::normalize;
    bool cadzow = true;
    CadzowOptions cadzow_options;
    OrderOptions order_options;
    MembershipConfig membership = default_membership();

    static MembershipConfig default_membership();
    void validate() const;
};

/// The observed pair after denoising and scaling.
struct PreparedPencil {
    PencilPair pencil;
    Index order = 0;
    bool order_estimated = false;
    bool cadzow_applied = false;
    bool cadzow_converged = true;
    int cadzow_iterations = 0;
};

PreparedPencil prepare_pencil(const Signal& signal, const CrnrConfig& cfg);

struct ClassDecision {
    std::string class_name;
    bool is_member = false;
    std::vector<MembershipResult> per_freq;
    /// (index into the tested frequencies, stage) of the first rejection.
    std::optional<std::pair<std::size_t, Stage>> rejected_at;
    std::vector<cplx> tested;
    FrobeniusDisk disk;
    Index order = 0;
    bool cadzow_converged = true;
    int cadzow_iterations = 0;
    cplx scale{1.0, 0.0};
};

/// Hankel -> Cadzow -> split -> scale -> per frequency: Frobenius-disk
/// reject, else 2-norm membership. Stops at the first rejection.
ClassDecision crnr_classify(const Signal& signal, const CandidateClass& Z, const CrnrConfig& cfg);

/// Decision on an already prepared pencil.
ClassDecision crnr_decide(const PreparedPencil& prepared, const CandidateClass& Z,
                          const MembershipConfig& mcfg);

/// Largest critical scale over the class: the class is accepted at target
/// ||B||_2 = D exactly when D is at least this value.
double class_critical_scale(const PencilPair& P, const CandidateClass& Z, double d_min = 1.1,
                            const MembershipConfig& mcfg = {});

/// One decision per class.
std::vector<ClassDecision> classify_among(const Signal& signal,
                                          const std::vector<CandidateClass>& classes,
                                          const CrnrConfig& cfg);

enum class Method { crnr, glrt };
std::string_view to_string(Method m);

enum class ScaleSelection {
    /// cfg.D at every SNR.
    fixed,
    /// Per SNR, D balancing rejection of the true class against acceptance
    /// of the candidate on separate calibration trials.
    calibrated,
};
std::string_view to_string(ScaleSelection s);
ScaleSelection parse_scale_selection(std::string_view text);

struct SweepOptions {
    std::vector<double> snr_grid;
    int trials = 500;
    std::uint64_t seed = 0;
    int workers = 1;
    std::vector<Method> methods{Method::crnr, Method::glrt};
    ScaleSelection scale_selection = ScaleSelection::fixed;
    int calibration_trials = 100;
    double calibration_d_min = 1.1;
    /// Critical scales only feed a threshold, so a looser search suffices.
    MembershipConfig calibration_membership = default_calibration_membership();
    /// Also run CRNR against the true class (reported as acceptance).
    bool track_true_class = true;

    static MembershipConfig default_calibration_membership();

    void validate() const;
};

struct MethodCurve {
    Method method = Method::crnr;
    std::vector<int> misclassified; ///< per SNR
    std::vector<double> error_rate; ///< misclassified / trials
};

struct SweepReport {
    std::vector<double> snr_grid;
    int trials = 0;
    std::uint64_t seed = 0;
    std::vector<MethodCurve> curves;
    /// CRNR scale target used at each SNR.
    std::vector<double> scale_used;
    /// Fraction of trials where CRNR accepts the true class.
    std::vector<double> true_class_acceptance;
    std::vector<double> mean_order;
    std::vector<int> cadzow_nonconverged;
    /// Disk geometry means (disk sweep only).
    std::vector<cplx> disk_center_mean_raw, disk_center_mean_cadzow;
    std::vector<double> disk_radius_mean_raw, disk_radius_mean_cadzow;

    const MethodCurve* curve(Method m) const;
};

/// Per-trial seed from (seed, snr index, trial, stream).
std::uint64_t trial_seed(std::uint64_t seed, std::size_t snr_index, std::size_t trial,
                         std::uint64_t stream = 0);

/// Ensemble means of the Frobenius disk with and without Cadzow.
SweepReport disk_geometry_sweep(const CandidateClass& Z_true, const CrnrConfig& cfg,
                                const SweepOptions& opts);

/// Fraction of trials in which a Z_true signal is accepted as Z_candidate.
/// Every method sees the same noise realization in a trial.
SweepReport error_rate_sweep(const CandidateClass& Z_true, const CandidateClass& Z_candidate,
                             const CrnrConfig& cfg, const SweepOptions& opts);

/// Scale target where the two calibration error rates cross.
double equal_error_scale(std::vector<double> true_critical, std::vector<double> cand_critical);

} // namespace crnr
