#include "dmfem/quadrature.hpp"

#include <cmath>

#include "dmfem/errors.hpp"

namespace dmfem {

namespace {

// Adds the three permutations of (1 - 2a, a, a).
void add_orbit(QuadratureRule& r, double a, double w) {
    const double c = 1.0 - 2.0 * a;
    r.points.push_back({c, a, a});
    r.points.push_back({a, c, a});
    r.points.push_back({a, a, c});
    r.weights.insert(r.weights.end(), 3, w);
}

QuadratureRule make_degree1() {
    QuadratureRule r;
    r.degree = 1;
    r.points.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
    r.weights.push_back(1.0);
    return r;
}

QuadratureRule make_degree2() {
    QuadratureRule r;
    r.degree = 2;
    add_orbit(r, 1.0 / 6.0, 1.0 / 3.0);
    return r;
}

// Strang-Fix / Dunavant 6-point rule.
QuadratureRule make_degree4() {
    QuadratureRule r;
    r.degree = 4;
    add_orbit(r, 0.44594849091596488632, 0.22338158967801146570);
    add_orbit(r, 0.091576213509770743460, 0.10995174365532186764);
    return r;
}

// Radon 7-point rule: a = (6 -+ sqrt 15) / 21, w = (155 -+ sqrt 15) / 1200.
QuadratureRule make_degree5() {
    QuadratureRule r;
    r.degree = 5;
    r.points.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
    r.weights.push_back(0.225);
    add_orbit(r, 0.10128650732345633880, 0.12593918054482715260);
    add_orbit(r, 0.47014206410511508977, 0.13239415278850618074);
    return r;
}

}  // namespace

const QuadratureRule& quadrature_rule(int degree) {
    static const QuadratureRule d1 = make_degree1();
    static const QuadratureRule d2 = make_degree2();
    static const QuadratureRule d4 = make_degree4();
    static const QuadratureRule d5 = make_degree5();
    switch (degree) {
        case 1: return d1;
        case 2: return d2;
        case 4: return d4;
        case 5: return d5;
        default: throw InvalidArgument("unsupported quadrature degree " + std::to_string(degree));
    }
}

double integrate_on_triangle(const std::array<Point2, 3>& p, const ScalarField& f, const QuadratureRule& rule) {
    const double area = std::abs(signed_area(p[0], p[1], p[2]));
    double sum = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) sum += rule.weights[q] * f(push_forward(p, rule.points[q]));
    return area * sum;
}

double integrate_on_cell(const Mesh& mesh, Index cell, const ScalarField& f, const QuadratureRule& rule) {
    return integrate_on_triangle(mesh.cell_points(cell), f, rule);
}

double integrate_over_mesh(const Mesh& mesh, const ScalarField& f, const QuadratureRule& rule) {
    double sum = 0.0;
    for (Index c = 0; c < mesh.num_cells(); ++c) sum += integrate_on_cell(mesh, c, f, rule);
    return sum;
}

}  // namespace dmfem
