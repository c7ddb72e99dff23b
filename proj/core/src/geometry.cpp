#include "crnr/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace crnr {

namespace {

double cross(cplx a, cplx b)
{
    return a.real() * b.imag() - a.imag() * b.real();
}

} // namespace

double Polygon::area() const
{
    const std::size_t n = vertices.size();
    if (n < 3) return 0.0;
    double twice = 0.0;
    for (std::size_t i = 0; i < n; ++i) twice += cross(vertices[i], vertices[(i + 1) % n]);
    return 0.5 * std::abs(twice);
}

double Polygon::diameter() const
{
    double d = 0.0;
    for (std::size_t i = 0; i < vertices.size(); ++i)
        for (std::size_t j = i + 1; j < vertices.size(); ++j)
            d = std::max(d, std::abs(vertices[i] - vertices[j]));
    return d;
}

double distance_to_segment(cplx z, cplx a, cplx b)
{
    const cplx ab = b - a;
    const double len2 = std::norm(ab);
    if (len2 == 0.0) return std::abs(z - a);
    const double t = std::clamp((std::conj(ab) * (z - a)).real() / len2, 0.0, 1.0);
    return std::abs(z - (a + t * ab));
}

bool Polygon::contains(cplx z, double tol) const
{
    const std::size_t n = vertices.size();
    if (n == 0) return false;
    if (n == 1) return std::abs(z - vertices[0]) <= tol;
    if (n == 2) return distance_to_segment(z, vertices[0], vertices[1]) <= tol;

    bool inside = true;
    for (std::size_t i = 0; i < n; ++i) {
        const cplx a = vertices[i];
        const cplx b = vertices[(i + 1) % n];
        if (cross(b - a, z - a) < 0.0) {
            inside = false;
            break;
        }
    }
    if (inside) return true;
    if (tol <= 0.0) return false;
    for (std::size_t i = 0; i < n; ++i)
        if (distance_to_segment(z, vertices[i], vertices[(i + 1) % n]) <= tol) return true;
    return false;
}

void Polygon::clip_halfplane(cplx normal, double offset)
{
    if (vertices.empty()) return;
    auto value = [&](cplx z) { return (std::conj(normal) * z).real() - offset; };

    std::vector<cplx> out;
    out.reserve(vertices.size() + 1);
    const std::size_t n = vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
        const cplx p = vertices[i];
        const cplx q = vertices[(i + 1) % n];
        const double vp = value(p);
        const double vq = value(q);
        if (vp <= 0.0) out.push_back(p);
        if ((vp < 0.0 && vq > 0.0) || (vp > 0.0 && vq < 0.0)) {
            const double t = vp / (vp - vq);
            out.push_back(p + t * (q - p));
        }
        if (n == 1) break;
    }
    // Collapse consecutive duplicates produced by touching edges.
    std::vector<cplx> dedup;
    for (cplx z : out)
        if (dedup.empty() || std::abs(z - dedup.back()) > 1e-15 * (1.0 + std::abs(z)))
            dedup.push_back(z);
    while (dedup.size() > 1 &&
           std::abs(dedup.front() - dedup.back()) <= 1e-15 * (1.0 + std::abs(dedup.front())))
        dedup.pop_back();
    vertices = std::move(dedup);
}

Polygon Polygon::circumscribed(cplx center, double radius, int sides)
{
    Polygon p;
    if (radius == 0.0) {
        p.vertices.push_back(center);
        return p;
    }
    const double step = 2.0 * std::numbers::pi / sides;
    const double r = radius / std::cos(step / 2.0);
    p.vertices.reserve(sides);
    for (int k = 0; k < sides; ++k)
        p.vertices.push_back(center + std::polar(r, (k + 0.5) * step));
    return p;
}

} // namespace crnr
