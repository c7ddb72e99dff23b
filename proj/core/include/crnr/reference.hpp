#pragma once

#include <vector>

#include "crnr/signal.hpp"

namespace crnr::reference {

/// Ten closely spaced resonances (five conjugate pairs) near 0.42 + 0.59j.
CandidateClass z1();

/// Ten resonances (five conjugate pairs) in the left half of the unit disk.
CandidateClass z2();

/// Four well-separated modes used for sigma_min landscapes.
CandidateClass four_mode();

/// Keeps the k frequencies of largest magnitude; ties go to the larger
/// imaginary part so conjugate pairs stay ordered deterministically.
CandidateClass largest_magnitude(const CandidateClass& cls, std::size_t k);

} // namespace crnr::reference
