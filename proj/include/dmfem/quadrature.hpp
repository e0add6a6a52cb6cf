#pragma once

#include <array>
#include <functional>
#include <vector>

#include "dmfem/geometry.hpp"
#include "dmfem/mesh.hpp"

namespace dmfem {

/// Symmetric Gauss rule on the reference triangle. Points are barycentric
/// triples, weights sum to 1; multiply by the cell area when integrating.
struct QuadratureRule {
    std::vector<std::array<double, 3>> points;
    std::vector<double> weights;
    int degree = 0;

    std::size_t size() const noexcept { return weights.size(); }
};

/// Supported degrees: 1 (centroid), 2 (3 points), 4 (6 points), 5 (7 points).
const QuadratureRule& quadrature_rule(int degree);

inline constexpr int kLoadQuadratureDegree = 4;
inline constexpr int kErrorQuadratureDegree = 5;

using ScalarField = std::function<double(Point2)>;

inline Point2 push_forward(const std::array<Point2, 3>& p, const std::array<double, 3>& bary) {
    return {bary[0] * p[0].x + bary[1] * p[1].x + bary[2] * p[2].x,
            bary[0] * p[0].y + bary[1] * p[1].y + bary[2] * p[2].y};
}

double integrate_on_triangle(const std::array<Point2, 3>& p, const ScalarField& f, const QuadratureRule& rule);

double integrate_on_cell(const Mesh& mesh, Index cell, const ScalarField& f, const QuadratureRule& rule);

double integrate_over_mesh(const Mesh& mesh, const ScalarField& f, const QuadratureRule& rule);

}  // namespace dmfem
