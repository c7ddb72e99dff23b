#include "crnr/glrt.hpp"

#include "crnr/linalg.hpp"

namespace crnr {

GlrtModel make_glrt_model(const CandidateClass& cls, Index rows)
{
    cls.validate();
    require(rows >= 1, "make_glrt_model: need at least one row");
    const Index p = static_cast<Index>(cls.freqs.size());
    GlrtModel model{CMatrix(rows, p), cls.name};
    for (Index i = 0; i < p; ++i) {
        cplx power{1.0, 0.0};
        for (Index t = 0; t < rows; ++t) {
            model.F(t, i) = power;
            power *= cls.freqs[static_cast<std::size_t>(i)];
        }
        if (model.F.col(i).cwiseAbs().maxCoeff() == 0.0)
            throw NumericError("make_glrt_model: all-zero column in F");
    }
    return model;
}

double projection_residual(const GlrtModel& model, const CMatrix& Y)
{
    require(model.F.rows() == Y.rows(), "projection_residual: row mismatch");
    const linalg::ThinSvd svd = linalg::thin_svd(model.F);
    const Index r = linalg::numerical_rank(svd.S, 1e-12);
    const CMatrix Ur = svd.U.leftCols(r);
    return (Y - Ur * (Ur.adjoint() * Y)).norm();
}

GlrtDecision glrt_classify(const Signal& signal, const CandidateClass& h1,
                           const CandidateClass& h2, Index l)
{
    require(l >= 0, "glrt_classify: l must be >= 0");
    require(signal.length() >= l + 1, "glrt_classify: signal has " +
                                          std::to_string(signal.length()) +
                                          " samples, need l + 1 = " + std::to_string(l + 1));
    const CMatrix Y = signal.samples().topRows(l + 1);
    GlrtDecision d;
    d.residual_h1 = projection_residual(make_glrt_model(h1, l + 1), Y);
    d.residual_h2 = projection_residual(make_glrt_model(h2, l + 1), Y);
    d.decision = d.residual_h1 <= d.residual_h2 ? Hypothesis::H1 : Hypothesis::H2;
    d.calibrated = h1.freqs.size() == h2.freqs.size();
    return d;
}

} // namespace crnr
