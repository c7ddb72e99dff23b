#pragma once

#include <vector>

#include "crnr/types.hpp"

namespace crnr {

/// Convex polygon in the complex plane, vertices counter-clockwise.
/// An empty vertex list is the empty set; a single vertex is a point.
struct Polygon {
    std::vector<cplx> vertices;

    bool empty() const { return vertices.empty(); }
    double area() const;
    double diameter() const;

    /// Point-in-convex-polygon with an absolute distance tolerance.
    bool contains(cplx z, double tol = 0.0) const;

    /// Keeps the part with Re(conj(normal) * z) <= offset.
    void clip_halfplane(cplx normal, double offset);

    /// Regular polygon circumscribing the disk D(center, radius).
    static Polygon circumscribed(cplx center, double radius, int sides);
};

/// Euclidean distance from z to the closed segment [a, b].
double distance_to_segment(cplx z, cplx a, cplx b);

} // namespace crnr
