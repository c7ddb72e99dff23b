#include "crnr/reference.hpp"

#include <algorithm>
#include <array>

namespace crnr::reference {

namespace {

CandidateClass conjugate_pairs(std::string name, std::span<const cplx> upper)
{
    CandidateClass cls{std::move(name), {}};
    for (cplx z : upper) {
        cls.freqs.push_back(z);
        cls.freqs.push_back(std::conj(z));
    }
    return cls;
}

} // namespace

CandidateClass z1()
{
    static constexpr std::array<cplx, 5> upper{
        cplx{0.4474, 0.5822}, cplx{0.4447, 0.5782}, cplx{0.4236, 0.5874},
        cplx{0.4166, 0.5959}, cplx{0.3871, 0.5858}};
    return conjugate_pairs("Z1", upper);
}

CandidateClass z2()
{
    static constexpr std::array<cplx, 5> upper{
        cplx{0.0429, 0.0825}, cplx{-0.4130, 0.1176}, cplx{-0.3118, 0.2127},
        cplx{-0.1951, 0.3642}, cplx{-0.3385, 0.1249}};
    return conjugate_pairs("Z2", upper);
}

CandidateClass four_mode()
{
    return CandidateClass{"four-mode",
                          {cplx{0.80, 0.45}, cplx{0.55, -0.70}, cplx{-0.60, 0.50},
                           cplx{-0.35, -0.75}}};
}

CandidateClass largest_magnitude(const CandidateClass& cls, std::size_t k)
{
    CandidateClass out{cls.name, cls.freqs};
    std::stable_sort(out.freqs.begin(), out.freqs.end(), [](cplx a, cplx b) {
        if (std::abs(a) != std::abs(b)) return std::abs(a) > std::abs(b);
        return a.imag() > b.imag();
    });
    if (k < out.freqs.size()) out.freqs.resize(k);
    return out;
}

} // namespace crnr::reference
