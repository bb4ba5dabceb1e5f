#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "avsfe/mesh.hpp"

namespace avsfe {

/// Coefficients of  -div(D grad u) + b . grad u = f,  u = u_D on the
/// dirichlet boundary,  (D grad u) . n = g  on the neumann boundary.
struct CoefficientField {
    std::function<Mat2(const Vec2&)> diffusion;
    std::function<Vec2(const Vec2&)> convection;
    std::function<double(const Vec2&)> source;
    std::function<double(const Vec2&)> neumann;
    std::function<double(const Vec2&)> dirichlet;
};

/// Closed-form solution pair (u, q = D grad u).
struct ExactSolution {
    std::function<double(const Vec2&)> u;
    std::function<Vec2(const Vec2&)> grad_u;
    std::function<Vec2(const Vec2&)> flux;
    std::function<double(const Vec2&)> div_flux;
};

/// Axis-aligned line across which a coefficient may jump: x = value
/// (axis 0) or y = value (axis 1).
struct DiscontinuityLine {
    int axis = 0;
    double value = 0.0;
};

struct Scenario {
    std::string name;
    std::string section;
    double pe = 1.0;
    CoefficientField coeffs;
    Mesh::EdgeTagger boundary = all_dirichlet;
    std::optional<ExactSolution> exact;
    std::vector<DiscontinuityLine> discontinuities;
    /// Qualitative feature expected in the solution.
    std::string feature;
};

/// Which quadrants of the unit square carry D = Pe; ordered lower-left,
/// lower-right, upper-left, upper-right. The rest carry D = 1/Pe.
using QuadrantMask = std::array<bool, 4>;

inline constexpr QuadrantMask kDefaultCheckerboard{false, true, true, false};

/// Quadrant index (same ordering as QuadrantMask) of a point.
int quadrant_of(const Vec2& x);

/// Numerically stable (e^{pe x} - 1) / (1 - e^{pe}) and its first two
/// x-derivatives.
double layer_factor(double pe, double x);
double layer_factor_dx(double pe, double x);
double layer_factor_dxx(double pe, double x);

/// D = 1/Pe, b = (1,1), exact u = [x + layer(x)][y + layer(y)].
Scenario scenario_manufactured(double pe);
/// Manufactured solution with neumann data on y = 0 and x = 1.
Scenario scenario_manufactured_neumann(double pe);
/// D = 1/Pe, b = (1,1), f = 1, homogeneous dirichlet.
Scenario scenario_homogeneous(double pe);
/// Piecewise constant D in {Pe, 1/Pe} per quadrant, b = (1,1), f = 1.
Scenario scenario_checkerboard(double pe, const QuadrantMask& mask = kDefaultCheckerboard);
/// D = 1/Pe, b = ((1-2x)/2, 0); internal layer at x = 1/2.
Scenario scenario_variable_convection(double pe);
/// D = 1, b = (1,1), exact u = x(1-x)y(1-y).
Scenario scenario_polynomial();
/// All data zero.
Scenario scenario_zero();

struct ScenarioInfo {
    std::string name;
    std::string section;
    std::string parameters;
    std::string description;
};

std::vector<ScenarioInfo> list_scenarios();

}  // namespace avsfe
