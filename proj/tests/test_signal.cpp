#include <gtest/gtest.h>

#include <Eigen/QR>

#include "crnr/linalg.hpp"
#include "crnr/pencil.hpp"
#include "crnr/numrange.hpp"
#include "crnr/reference.hpp"
#include "crnr/signal.hpp"
#include "support.hpp"

namespace crnr {
namespace {

TEST(Synth, ConstantModeGivesOnes)
{
    const std::vector<Mode> modes{{cplx(1.0), {cplx(1.0)}, 0}};
    const Signal y = synth_mixture(modes, 4, 1);
    for (Index t = 0; t < 4; ++t) EXPECT_EQ(y(t, 0), cplx(1.0));
}

TEST(Synth, GeometricSequence)
{
    const std::vector<Mode> modes{{cplx(0.9), {cplx(2.0)}, 0}};
    const Signal y = synth_mixture(modes, 3, 1);
    EXPECT_NEAR(std::abs(y(0, 0) - 2.0), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(y(1, 0) - 1.8), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(y(2, 0) - 1.62), 0.0, 1e-15);
}

TEST(Synth, DelayedModeIsZeroBeforeOnset)
{
    const std::vector<Mode> modes{{cplx(0.5), {cplx(1.0)}, 2}};
    const Signal y = synth_mixture(modes, 5, 1);
    EXPECT_EQ(y(0, 0), cplx(0.0));
    EXPECT_EQ(y(1, 0), cplx(0.0));
    EXPECT_EQ(y(2, 0), cplx(1.0));
    EXPECT_EQ(y(4, 0), cplx(0.25));
}

TEST(Synth, MultiLookResidues)
{
    const std::vector<Mode> modes{{cplx(0.5, 0.5), {cplx(1.0), cplx(0.0, 2.0), cplx(-1.0)}, 0}};
    const Signal y = synth_mixture(modes, 6, 3);
    ASSERT_EQ(y.looks(), 3);
    for (Index t = 0; t < 6; ++t) {
        const cplx p = std::pow(cplx(0.5, 0.5), static_cast<int>(t));
        EXPECT_NEAR(std::abs(y(t, 1) - cplx(0.0, 2.0) * p), 0.0, 1e-15);
        EXPECT_NEAR(std::abs(y(t, 2) + p), 0.0, 1e-15);
    }
    ASSERT_TRUE(y.meta());
    EXPECT_EQ(y.meta()->modes.size(), 1u);
}

TEST(Synth, Superposition)
{
    const std::vector<Mode> m1{{cplx(0.7, 0.2), {cplx(1.0), cplx(2.0)}, 0}};
    const std::vector<Mode> m2{{cplx(-0.3, 0.6), {cplx(0.5, 1.0), cplx(1.0)}, 3}};
    std::vector<Mode> both = m1;
    both.insert(both.end(), m2.begin(), m2.end());
    const CMatrix sum = synth_mixture(m1, 20, 2).samples() + synth_mixture(m2, 20, 2).samples();
    EXPECT_LT((synth_mixture(both, 20, 2).samples() - sum).norm(), 1e-14);
}

TEST(Synth, Errors)
{
    const std::vector<Mode> bad{{cplx(0.9), {cplx(1.0), cplx(1.0)}, 0}};
    EXPECT_THROW(synth_mixture(bad, 4, 1), InvalidArgument);
    const std::vector<Mode> ok{{cplx(0.9), {cplx(1.0)}, 0}};
    EXPECT_THROW(synth_mixture(ok, 0, 1), InvalidArgument);
    const std::vector<Mode> negative{{cplx(0.9), {cplx(1.0)}, -1}};
    EXPECT_THROW(synth_mixture(negative, 4, 1), InvalidArgument);
}

TEST(Synth, Z1HankelHasRankTen)
{
    const CandidateClass z1 = reference::z1();
    const Signal y = synth_unit_mixture(z1.freqs, 60);
    for (const auto& [s, n] : std::vector<std::pair<Index, Index>>{{40, 20}, {30, 20}, {45, 15}, {25, 10}}) {
        const RVector sv = linalg::singular_values(build_block_hankel(y, s, n).data());
        EXPECT_LT(sv(10) / sv(0), 1e-8) << "s=" << s << " n=" << n;
        // The five pairs are so close that sigma_10 is only ~1e-13 of sigma_1,
        // yet still clear of the roundoff level below it.
        EXPECT_GT(sv(9), 100.0 * sv(10)) << "s=" << s << " n=" << n;
    }
}

TEST(Synth, NoiselessMixtureSatisfiesLinearRecurrence)
{
    const CandidateClass z1 = reference::z1();
    const Signal y = synth_unit_mixture(z1.freqs, 60);
    // Least-squares order-10 linear predictor y_t = sum_k a_k y_{t-k}.
    const Index M = 10, rows = 60 - M;
    CMatrix X(rows, M);
    CVector b(rows);
    for (Index t = 0; t < rows; ++t) {
        for (Index k = 0; k < M; ++k) X(t, k) = y(t + M - 1 - k, 0);
        b(t) = y(t + M, 0);
    }
    const CVector a = X.completeOrthogonalDecomposition().solve(b);
    EXPECT_LT((X * a - b).norm() / b.norm(), 1e-8);
}

TEST(Noise, InfiniteSnrIsIdentity)
{
    const Signal y = synth_unit_mixture(reference::z1().freqs, 60);
    const Signal w = add_awgn(y, kNoiselessSnr, 3);
    EXPECT_EQ((w.samples() - y.samples()).norm(), 0.0);
}

TEST(Noise, EmpiricalPowerMatchesSnr)
{
    const Signal ones(CMatrix::Ones(10000, 1));
    for (const std::uint64_t seed : {1ull, 2ull, 99ull}) {
        const Signal w = add_awgn(ones, 0.0, seed);
        const double power = (w.samples() - ones.samples()).squaredNorm() / 10000.0;
        EXPECT_NEAR(power, 1.0, 0.05) << "seed " << seed;
    }
}

TEST(Noise, NoiseIsCircular)
{
    const Signal ones(CMatrix::Ones(20000, 1));
    const CMatrix e = add_awgn(ones, 0.0, 5).samples() - ones.samples();
    const double re = e.real().squaredNorm() / 20000.0;
    const double im = e.imag().squaredNorm() / 20000.0;
    EXPECT_NEAR(re, 0.5, 0.03);
    EXPECT_NEAR(im, 0.5, 0.03);
}

TEST(Noise, DeterministicPerSeed)
{
    const Signal y = synth_unit_mixture(reference::z1().freqs, 60);
    const Signal a = add_awgn(y, 10.0, 42);
    const Signal b = add_awgn(y, 10.0, 42);
    EXPECT_EQ(a.samples(), b.samples());
    EXPECT_NE(a.samples(), add_awgn(y, 10.0, 43).samples());
    ASSERT_TRUE(a.meta());
    EXPECT_EQ(a.meta()->seed, 42u);
    EXPECT_EQ(a.meta()->snr_db, 10.0);
}

TEST(Noise, LowerSnrMeansLargerPerturbation)
{
    const Signal ones(CMatrix::Ones(2000, 1));
    double prev = 0.0;
    for (const double snr : {30.0, 20.0, 10.0, 0.0, -5.0}) {
        const double p = (add_awgn(ones, snr, 8).samples() - ones.samples()).squaredNorm() / 2000.0;
        EXPECT_GT(p, prev) << snr;
        prev = p;
    }
}

TEST(Noise, ZeroSignalRejected)
{
    const Signal zero(CMatrix::Zero(8, 1));
    EXPECT_THROW(add_awgn(zero, 10.0, 1), InvalidArgument);
}

TEST(Scale, IdentityAndLinearity)
{
    CMatrix s(3, 1);
    s << 1.0, 0.9, 0.81;
    const Signal y(s);
    EXPECT_EQ(scale_signal(y, 1.0).samples(), y.samples());
    const Signal two = scale_signal(y, 2.0);
    EXPECT_NEAR(std::abs(two(1, 0) - 1.8), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(two(2, 0) - 1.62), 0.0, 1e-15);
    EXPECT_THROW(scale_signal(y, 0.0), InvalidArgument);
}

TEST(Scale, MetaRecordsCumulativeFactor)
{
    const Signal y = synth_unit_mixture(std::vector<cplx>{cplx(0.9)}, 5);
    const Signal z = scale_signal(scale_signal(y, 2.0), cplx(0.0, 3.0));
    ASSERT_TRUE(z.meta());
    EXPECT_NEAR(std::abs(z.meta()->scale - cplx(0.0, 6.0)), 0.0, 1e-15);
}

TEST(Scale, MpmEigenvaluesInvariant)
{
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<cplx> freqs;
        for (int i = 0; i < 3; ++i) freqs.push_back(test::random_in_disk(rng, 0.95));
        const Signal y = synth_unit_mixture(freqs, 12);
        const cplx alpha = test::random_in_disk(rng, 4.0) + 0.1;
        const PencilPair P = split_pencil(build_block_hankel(y, 9, 3));
        const PencilPair Q = split_pencil(build_block_hankel(scale_signal(y, alpha), 9, 3));
        const std::vector<cplx> a = mpm_eigenvalues(P);
        const std::vector<cplx> b = mpm_eigenvalues(Q);
        EXPECT_LT(test::match_error(a, b), 1e-10);
        EXPECT_LT(test::match_error(freqs, b), 1e-8);
    }
}

TEST(CandidateClassValidation, Rules)
{
    EXPECT_THROW((CandidateClass{"empty", {}}.validate()), InvalidArgument);
    EXPECT_THROW((CandidateClass{"dup", {cplx(0.1), cplx(0.1)}}.validate()), InvalidArgument);
    EXPECT_THROW((CandidateClass{"nan", {cplx(std::nan(""), 0.0)}}.validate()), InvalidArgument);
    EXPECT_NO_THROW(reference::z1().validate());
    EXPECT_NO_THROW(reference::z2().validate());
}

TEST(SignalType, RejectsNonFinite)
{
    CMatrix s = CMatrix::Ones(3, 1);
    s(1, 0) = cplx(std::numeric_limits<double>::infinity(), 0.0);
    EXPECT_THROW(Signal{s}, InvalidArgument);
    EXPECT_THROW(Signal{CMatrix(0, 1)}, InvalidArgument);
}

} // namespace
} // namespace crnr
