#pragma once

#include <string>

#include "crnr/signal.hpp"
#include "crnr/types.hpp"

namespace crnr {

/// Vandermonde prediction matrix F(t, i) = z_i^t, t = 0..rows-1.
struct GlrtModel {
    CMatrix F;
    std::string class_name;
};

GlrtModel make_glrt_model(const CandidateClass& cls, Index rows);

/// ||(I - P_F) Y||_F with P_F the orthogonal projector onto range(F).
double projection_residual(const GlrtModel& model, const CMatrix& Y);

enum class Hypothesis { H1, H2 };

struct GlrtDecision {
    Hypothesis decision = Hypothesis::H1;
    double residual_h1 = 0.0;
    double residual_h2 = 0.0;
    /// False when the hypotheses have different numbers of frequencies;
    /// the residuals then carry different degrees of freedom.
    bool calibrated = true;
};

/// Maximized Gaussian likelihood ratio against threshold 1, which reduces to
/// comparing least-squares residuals over samples y_0 ... y_l. Ties pick H1.
GlrtDecision glrt_classify(const Signal& signal, const CandidateClass& h1,
                           const CandidateClass& h2, Index l);

} // namespace crnr
