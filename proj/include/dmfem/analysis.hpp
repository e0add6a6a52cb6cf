#pragma once

#include <functional>
#include <span>
#include <vector>

#include "dmfem/field.hpp"
#include "dmfem/mesh.hpp"
#include "dmfem/quadrature.hpp"

namespace dmfem {

using VectorField = std::function<Point2(Point2)>;

/// Poisson data -Laplace(u) = f on the unit square with u = 0 on the boundary.
struct ExactSolution {
    ScalarField u;
    VectorField grad_u;
    ScalarField f;
    double h2_seminorm = 0.0;  // |u|_{2,Omega}
};

/// u = sin(pi x) sin(pi y), f = 2 pi^2 sin(pi x) sin(pi y), |u|_2 = pi^2.
ExactSolution manufactured_problem();

// Cellwise field access, so analytic fields can be measured too.
using CellValue = std::function<double(Index, Point2)>;
using CellGradient = std::function<Point2(Index, Point2)>;

/// sqrt(sum_K int_K (u - field)^2).
double l2_error(const Mesh& mesh, const CellValue& field, const ScalarField& exact,
                const QuadratureRule& rule = quadrature_rule(kErrorQuadratureDegree));
double l2_error(const Mesh& mesh, const PiecewiseLinearField& field, const ExactSolution& exact);

/// Broken seminorm sqrt(sum_K int_K |grad u - grad field|^2) over `cells`
/// (all cells when empty).
double h1_seminorm_error(const Mesh& mesh, const CellGradient& field, const VectorField& exact_grad,
                         std::span<const Index> cells = {},
                         const QuadratureRule& rule = quadrature_rule(kErrorQuadratureDegree));
double h1_seminorm_error(const Mesh& mesh, const PiecewiseLinearField& field, const ExactSolution& exact,
                         std::span<const Index> cells = {});

struct RateFit {
    std::vector<double> pairwise;  // log(e_k / e_k+1) / log(h_k / h_k+1)
    double least_squares = 0.0;    // slope of log e against log h
    bool defined = false;          // false when an error is zero or non-finite
};

/// Observed orders. Needs >= 2 entries with strictly decreasing h.
RateFit convergence_rates(std::span<const double> h, std::span<const double> errors);

}  // namespace dmfem
