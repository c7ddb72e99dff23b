#pragma once

#include <algorithm>
#include <complex>
#include <random>
#include <string>
#include <vector>

#include "crnr/signal.hpp"
#include "crnr/types.hpp"

namespace crnr::test {

inline std::string fixture(const std::string& name) { return std::string(CRNR_FIXTURE_DIR) + "/" + name; }

inline CMatrix random_matrix(Index rows, Index cols, std::mt19937_64& rng, double scale = 1.0)
{
    std::normal_distribution<double> g(0.0, scale);
    CMatrix M(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) M(i, j) = cplx(g(rng), g(rng));
    return M;
}

/// Uniform point in the disk of the given radius.
inline cplx random_in_disk(std::mt19937_64& rng, double radius = 1.0)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double r = radius * std::sqrt(u(rng));
    const double phi = 2.0 * 3.14159265358979323846 * u(rng);
    return std::polar(r, phi);
}

/// Largest nearest-neighbour distance from each expected value to the found set.
inline double match_error(const std::vector<cplx>& expected, const std::vector<cplx>& found)
{
    double worst = 0.0;
    for (const cplx z : expected) {
        double best = 1e300;
        for (const cplx w : found) best = std::min(best, std::abs(z - w));
        worst = std::max(worst, best);
    }
    return worst;
}

} // namespace crnr::test
