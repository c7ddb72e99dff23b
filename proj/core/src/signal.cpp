#include "crnr/signal.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace crnr {

Signal::Signal(CMatrix samples, std::optional<SignalMeta> meta)
    : samples_(std::move(samples)), meta_(std::move(meta))
{
    require(samples_.rows() >= 1, "signal needs at least one sample");
    require(samples_.cols() >= 1, "signal needs at least one look");
    require(samples_.allFinite(), "signal samples must be finite");
}

double Signal::mean_power() const
{
    return samples_.cwiseAbs2().mean();
}

void CandidateClass::validate() const
{
    require(!freqs.empty(), "candidate class '" + name + "' has no frequencies");
    for (std::size_t i = 0; i < freqs.size(); ++i) {
        require(std::isfinite(freqs[i].real()) && std::isfinite(freqs[i].imag()),
                "candidate class '" + name + "' has a non-finite frequency");
        for (std::size_t j = 0; j < i; ++j) {
            if (freqs[i] == freqs[j]) {
                std::ostringstream os;
                os << "candidate class '" << name << "' repeats frequency " << freqs[i];
                throw InvalidArgument(os.str());
            }
        }
    }
}

Signal synth_mixture(std::span<const Mode> modes, Index T, Index K)
{
    require(T >= 1, "synth_mixture: T must be >= 1");
    require(K >= 1, "synth_mixture: K must be >= 1");

    CMatrix y = CMatrix::Zero(T, K);
    for (const Mode& mode : modes) {
        require(static_cast<Index>(mode.residues.size()) == K,
                "synth_mixture: mode has " + std::to_string(mode.residues.size()) +
                    " residues, expected " + std::to_string(K));
        require(mode.delay >= 0, "synth_mixture: negative delay");
        cplx power{1.0, 0.0};
        for (Index t = mode.delay; t < T; ++t) {
            for (Index k = 0; k < K; ++k) y(t, k) += mode.residues[k] * power;
            power *= mode.z;
        }
    }

    SignalMeta meta;
    meta.modes.assign(modes.begin(), modes.end());
    return Signal(std::move(y), std::move(meta));
}

Signal synth_unit_mixture(std::span<const cplx> freqs, Index T, Index K)
{
    std::vector<Mode> modes;
    modes.reserve(freqs.size());
    for (cplx z : freqs) modes.push_back(Mode{z, std::vector<cplx>(K, cplx{1.0, 0.0}), 0});
    return synth_mixture(modes, T, K);
}

Signal add_awgn(const Signal& signal, double snr_db, std::uint64_t seed)
{
    require(!std::isnan(snr_db), "add_awgn: snr_db is NaN");
    const double power = signal.mean_power();
    require(power > 0.0, "add_awgn: SNR is undefined for an all-zero signal");

    SignalMeta meta = signal.meta().value_or(SignalMeta{});
    meta.snr_db = snr_db;
    meta.seed = seed;

    if (snr_db == kNoiselessSnr) return Signal(signal.samples(), std::move(meta));

    const double variance = power / std::pow(10.0, snr_db / 10.0);
    const double sd = std::sqrt(variance / 2.0);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, sd);

    CMatrix y = signal.samples();
    // t-major so the stream does not depend on storage order.
    for (Index t = 0; t < y.rows(); ++t) {
        for (Index k = 0; k < y.cols(); ++k) {
            const double re = gauss(rng);
            const double im = gauss(rng);
            y(t, k) += cplx{re, im};
        }
    }
    return Signal(std::move(y), std::move(meta));
}

Signal scale_signal(const Signal& signal, cplx alpha)
{
    require(alpha != cplx{0.0, 0.0}, "scale_signal: alpha must be nonzero");
    SignalMeta meta = signal.meta().value_or(SignalMeta{});
    meta.scale *= alpha;
    return Signal(signal.samples() * alpha, std::move(meta));
}

} // namespace crnr
