#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crnr/types.hpp"

namespace crnr {

/// One damped complex exponential: contributes residues[k] * z^(t - delay)
/// to look k for t >= delay, and nothing before its onset.
struct Mode {
    cplx z;
    std::vector<cplx> residues;
    int delay = 0;
};

/// How a signal was produced. Carried along through noise and scaling.
struct SignalMeta {
    std::vector<Mode> modes;
    std::optional<double> snr_db;
    std::optional<std::uint64_t> seed;
    cplx scale{1.0, 0.0}; ///< cumulative factor applied by scale_signal
};

/// T x K complex samples; row t is the vector sample y_t, column k a look.
class Signal {
public:
    explicit Signal(CMatrix samples, std::optional<SignalMeta> meta = std::nullopt);

    Index length() const { return samples_.rows(); }
    Index looks() const { return samples_.cols(); }

    const CMatrix& samples() const { return samples_; }
    cplx operator()(Index t, Index k) const { return samples_(t, k); }

    const std::optional<SignalMeta>& meta() const { return meta_; }

    /// Mean of |y_t[k]|^2 over all T*K entries.
    double mean_power() const;

private:
    CMatrix samples_;
    std::optional<SignalMeta> meta_;
};

/// A named candidate set of complex frequencies.
struct CandidateClass {
    std::string name;
    std::vector<cplx> freqs;

    /// Throws InvalidArgument unless nonempty, finite, pairwise distinct.
    void validate() const;
};

/// Passing this as snr_db to add_awgn means "no noise".
inline constexpr double kNoiselessSnr = std::numeric_limits<double>::infinity();

Signal synth_mixture(std::span<const Mode> modes, Index T, Index K);

/// Unit residues on every look, no delays.
Signal synth_unit_mixture(std::span<const cplx> freqs, Index T, Index K = 1);

/// Adds circular complex white Gaussian noise with per-entry variance
/// mean_power / 10^(snr_db/10). Deterministic in (signal, snr_db, seed).
Signal add_awgn(const Signal& signal, double snr_db, std::uint64_t seed);

Signal scale_signal(const Signal& signal, cplx alpha);

} // namespace crnr
