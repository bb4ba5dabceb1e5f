#include "avsfe/problem.hpp"

#include <cmath>

#include "avsfe/error.hpp"

namespace avsfe {

namespace {

void check_pe(double pe)
{
    if (!(pe > 0.0) || !std::isfinite(pe)) {
        throw InvalidArgument("Peclet number must be positive and finite");
    }
}

Mat2 isotropic(double d) { return d * Mat2::Identity(); }

double zero_fn(const Vec2&) { return 0.0; }

CoefficientField constant_field(double diffusion, Vec2 convection, double source)
{
    CoefficientField c;
    c.diffusion = [diffusion](const Vec2&) { return isotropic(diffusion); };
    c.convection = [convection](const Vec2&) { return convection; };
    c.source = [source](const Vec2&) { return source; };
    c.neumann = zero_fn;
    c.dirichlet = zero_fn;
    return c;
}

}  // namespace

int quadrant_of(const Vec2& x) { return (x.x() >= 0.5 ? 1 : 0) + (x.y() >= 0.5 ? 2 : 0); }

// (e^{pe x} - 1)/(1 - e^{pe}) = -(e^{pe(x-1)} - e^{-pe}) / (1 - e^{-pe})
double layer_factor(double pe, double x)
{
    return -(std::exp(pe * (x - 1.0)) - std::exp(-pe)) / -std::expm1(-pe);
}

double layer_factor_dx(double pe, double x) { return -pe * std::exp(pe * (x - 1.0)) / -std::expm1(-pe); }

double layer_factor_dxx(double pe, double x) { return -pe * pe * std::exp(pe * (x - 1.0)) / -std::expm1(-pe); }

Scenario scenario_manufactured(double pe)
{
    check_pe(pe);
    Scenario s;
    s.name = "manufactured";
    s.section = "3.1";
    s.pe = pe;
    const double d = 1.0 / pe;
    const Vec2 b(1.0, 1.0);
    s.coeffs = constant_field(d, b, 0.0);

    const auto X = [pe](double t) { return t + layer_factor(pe, t); };
    const auto dX = [pe](double t) { return 1.0 + layer_factor_dx(pe, t); };
    const auto ddX = [pe](double t) { return layer_factor_dxx(pe, t); };

    ExactSolution ex;
    ex.u = [X](const Vec2& p) { return X(p.x()) * X(p.y()); };
    ex.grad_u = [X, dX](const Vec2& p) { return Vec2(dX(p.x()) * X(p.y()), X(p.x()) * dX(p.y())); };
    ex.flux = [d, grad = ex.grad_u](const Vec2& p) -> Vec2 { return d * grad(p); };
    ex.div_flux = [d, X, ddX](const Vec2& p) { return d * (ddX(p.x()) * X(p.y()) + X(p.x()) * ddX(p.y())); };
    s.coeffs.source = [b, grad = ex.grad_u, div = ex.div_flux](const Vec2& p) { return -div(p) + b.dot(grad(p)); };
    s.exact = ex;
    s.feature = "smooth boundary layers along x=1 and y=1";
    return s;
}

Scenario scenario_manufactured_neumann(double pe)
{
    Scenario s = scenario_manufactured(pe);
    s.name = "manufactured_neumann";
    constexpr double tol = 1e-12;
    s.boundary = [](const Vec2& a, const Vec2& b) {
        const bool bottom = std::abs(a.y()) < tol && std::abs(b.y()) < tol;
        const bool right = std::abs(a.x() - 1.0) < tol && std::abs(b.x() - 1.0) < tol;
        return bottom || right ? BoundaryTag::neumann : BoundaryTag::dirichlet;
    };
    s.coeffs.neumann = [flux = s.exact->flux](const Vec2& p) {
        // Outward normal is (0,-1) on y=0 and (1,0) on x=1.
        const Vec2 q = flux(p);
        return std::abs(p.y()) < tol ? -q.y() : q.x();
    };
    return s;
}

Scenario scenario_homogeneous(double pe)
{
    check_pe(pe);
    Scenario s;
    s.name = "homogeneous";
    s.section = "3.2";
    s.pe = pe;
    s.coeffs = constant_field(1.0 / pe, Vec2(1.0, 1.0), 1.0);
    s.feature = "boundary layer of width 1/Pe along x=1 and y=1";
    return s;
}

Scenario scenario_checkerboard(double pe, const QuadrantMask& mask)
{
    check_pe(pe);
    Scenario s;
    s.name = "checkerboard";
    s.section = "3.3";
    s.pe = pe;
    s.coeffs = constant_field(1.0 / pe, Vec2(1.0, 1.0), 1.0);
    s.coeffs.diffusion = [pe, mask](const Vec2& p) { return isotropic(mask[quadrant_of(p)] ? pe : 1.0 / pe); };
    const bool uniform = mask[0] == mask[1] && mask[1] == mask[2] && mask[2] == mask[3];
    if (!uniform) {
        s.discontinuities = {{0, 0.5}, {1, 0.5}};
    }
    s.feature = "solution vanishes in the diffusion-dominant quadrants; internal layers at their interfaces";
    return s;
}

Scenario scenario_variable_convection(double pe)
{
    check_pe(pe);
    Scenario s;
    s.name = "variable_convection";
    s.section = "3.4";
    s.pe = pe;
    s.coeffs = constant_field(1.0 / pe, Vec2::Zero(), 0.0);
    s.coeffs.convection = [](const Vec2& p) { return Vec2(0.5 * (1.0 - 2.0 * p.x()), 0.0); };
    s.coeffs.source = [pe](const Vec2& p) {
        const double x = p.x(), y = p.y();
        return (4.0 * x - 2.0) / pe + y * (1.0 - y * y) * (8.0 * x - 4.0);
    };
    s.feature = "sharp internal layer along x=1/2";
    return s;
}

Scenario scenario_polynomial()
{
    Scenario s;
    s.name = "polynomial";
    s.pe = 1.0;
    const Vec2 b(1.0, 1.0);
    s.coeffs = constant_field(1.0, b, 0.0);
    ExactSolution ex;
    ex.u = [](const Vec2& p) { return p.x() * (1 - p.x()) * p.y() * (1 - p.y()); };
    ex.grad_u = [](const Vec2& p) {
        const double x = p.x(), y = p.y();
        return Vec2((1 - 2 * x) * y * (1 - y), x * (1 - x) * (1 - 2 * y));
    };
    ex.flux = ex.grad_u;
    ex.div_flux = [](const Vec2& p) { return -2.0 * p.y() * (1 - p.y()) - 2.0 * p.x() * (1 - p.x()); };
    s.coeffs.source = [b, grad = ex.grad_u, div = ex.div_flux](const Vec2& p) { return -div(p) + b.dot(grad(p)); };
    s.exact = ex;
    return s;
}

Scenario scenario_zero()
{
    Scenario s;
    s.name = "zero";
    s.coeffs = constant_field(1.0, Vec2(1.0, 1.0), 0.0);
    ExactSolution ex;
    ex.u = zero_fn;
    ex.grad_u = [](const Vec2&) { return Vec2::Zero().eval(); };
    ex.flux = ex.grad_u;
    ex.div_flux = zero_fn;
    s.exact = ex;
    return s;
}

std::vector<ScenarioInfo> list_scenarios()
{
    return {
        {"manufactured", "3.1", "pe (default 10)",
         "exact boundary-layer solution, D=1/Pe, b=(1,1); convergence studies"},
        {"homogeneous", "3.2", "pe (default 1e6)", "f=1, D=1/Pe, b=(1,1); boundary layers at x=1 and y=1"},
        {"checkerboard", "3.3", "pe (default 1e4), mask (quadrants with D=Pe)",
         "D in {Pe, 1/Pe} by quadrant, f=1, b=(1,1); internal and boundary layers"},
        {"variable_convection", "3.4", "pe (default 1e9)", "b=((1-2x)/2, 0), D=1/Pe; internal layer at x=1/2"},
        {"polynomial", "", "none", "u=x(1-x)y(1-y), D=1, b=(1,1); reproduced exactly for p>=4"},
        {"zero", "", "none", "all data zero"},
    };
}

}  // namespace avsfe
