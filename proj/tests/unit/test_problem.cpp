#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include <gtest/gtest.h>

#include "avsfe/error.hpp"
#include "avsfe/problem.hpp"

using namespace avsfe;

namespace {

// -div(D grad u) + b.grad u by centered differences, D constant scalar.
double fd_operator(const ExactSolution& ex, double d, const Vec2& b, const Vec2& x, double h)
{
    const auto u = [&](double dx, double dy) { return ex.u(x + Vec2(dx, dy)); };
    const double lap = (u(h, 0) + u(-h, 0) + u(0, h) + u(0, -h) - 4.0 * u(0, 0)) / (h * h);
    const double ux = (u(h, 0) - u(-h, 0)) / (2 * h);
    const double uy = (u(0, h) - u(0, -h)) / (2 * h);
    return -d * lap + b.x() * ux + b.y() * uy;
}

}  // namespace

TEST(Manufactured, BoundaryValuesVanish)
{
    const Scenario s = scenario_manufactured(10.0);
    ASSERT_TRUE(s.exact.has_value());
    for (double t : {0.0, 0.13, 0.5, 0.77, 1.0}) {
        EXPECT_NEAR(s.exact->u(Vec2(0.0, t)), 0.0, 1e-15);
        EXPECT_NEAR(s.exact->u(Vec2(1.0, t)), 0.0, 1e-15);
        EXPECT_NEAR(s.exact->u(Vec2(t, 0.0)), 0.0, 1e-15);
        EXPECT_NEAR(s.exact->u(Vec2(t, 1.0)), 0.0, 1e-15);
        EXPECT_NEAR(s.coeffs.dirichlet(Vec2(t, 1.0)), s.exact->u(Vec2(t, 1.0)), 1e-10);
    }
}

TEST(Manufactured, MidpointValue)
{
    // 40-digit evaluation of (1/2 - 1/(e^5 + 1))^2.
    const Scenario s = scenario_manufactured(10.0);
    EXPECT_NEAR(s.exact->u(Vec2(0.5, 0.5)), 0.2433519433292098, 1e-15);
}

TEST(Manufactured, SourceMatchesFiniteDifferences)
{
    for (double pe : {1.0, 10.0, 50.0}) {
        const Scenario s = scenario_manufactured(pe);
        std::mt19937_64 rng(17);
        std::uniform_real_distribution<double> c(0.05, 0.95);
        for (int k = 0; k < 20; ++k) {
            const Vec2 x(c(rng), c(rng));
            const double f = s.coeffs.source(x);
            const double fd = fd_operator(*s.exact, 1.0 / pe, Vec2(1, 1), x, 1e-4);
            EXPECT_NEAR(fd, f, 1e-4 * std::max(1.0, std::abs(f))) << "pe=" << pe << " at " << x.transpose();
        }
    }
}

TEST(Manufactured, FluxIsScaledGradient)
{
    const Scenario s = scenario_manufactured(10.0);
    const Vec2 x(0.3, 0.8);
    EXPECT_LT((s.exact->flux(x) - 0.1 * s.exact->grad_u(x)).norm(), 1e-15);
    const double h = 1e-5;
    const Vec2 gfd((s.exact->u(x + Vec2(h, 0)) - s.exact->u(x - Vec2(h, 0))) / (2 * h),
                   (s.exact->u(x + Vec2(0, h)) - s.exact->u(x - Vec2(0, h))) / (2 * h));
    EXPECT_LT((gfd - s.exact->grad_u(x)).norm(), 1e-8);
    const double div_fd = (s.exact->flux(x + Vec2(h, 0)).x() - s.exact->flux(x - Vec2(h, 0)).x() +
                           s.exact->flux(x + Vec2(0, h)).y() - s.exact->flux(x - Vec2(0, h)).y()) /
                          (2 * h);
    EXPECT_NEAR(div_fd, s.exact->div_flux(x), 1e-7);
}

TEST(Manufactured, StableAtHugePeclet)
{
    const Scenario s = scenario_manufactured(1e9);
    for (double x : {0.0, 0.5, 0.999999, 1.0}) {
        EXPECT_TRUE(std::isfinite(s.exact->u(Vec2(x, 0.5))));
        EXPECT_TRUE(std::isfinite(s.coeffs.source(Vec2(x, 0.5))));
    }
    EXPECT_NEAR(layer_factor(1e9, 0.5), -0.0, 1e-300);
    EXPECT_NEAR(layer_factor(1e9, 1.0), -1.0, 1e-15);
    EXPECT_NEAR(layer_factor(10.0, 0.3), (std::exp(3.0) - 1.0) / (1.0 - std::exp(10.0)), 1e-15);
}

TEST(Manufactured, RejectsNonPositivePeclet)
{
    EXPECT_THROW(scenario_manufactured(0.0), InvalidArgument);
    EXPECT_THROW(scenario_homogeneous(-3.0), InvalidArgument);
}

TEST(Homogeneous, Coefficients)
{
    const Scenario s = scenario_homogeneous(1e6);
    const Vec2 x(0.3, 0.7);
    EXPECT_DOUBLE_EQ(s.coeffs.diffusion(x)(0, 0), 1e-6);
    EXPECT_DOUBLE_EQ(s.coeffs.diffusion(x)(1, 1), 1e-6);
    EXPECT_DOUBLE_EQ(s.coeffs.diffusion(x)(0, 1), 0.0);
    EXPECT_DOUBLE_EQ(s.coeffs.source(x), 1.0);
    EXPECT_EQ(s.coeffs.convection(Vec2(0.9, 0.1)), Vec2(1, 1));
    EXPECT_FALSE(s.exact.has_value());
}

TEST(Checkerboard, QuadrantValues)
{
    const Scenario s = scenario_checkerboard(1e4);
    EXPECT_DOUBLE_EQ(s.coeffs.diffusion(Vec2(0.75, 0.25))(0, 0), 1e4);
    EXPECT_DOUBLE_EQ(s.coeffs.diffusion(Vec2(0.25, 0.75))(0, 0), 1e4);
    EXPECT_DOUBLE_EQ(s.coeffs.diffusion(Vec2(0.25, 0.25))(0, 0), 1e-4);
    EXPECT_DOUBLE_EQ(s.coeffs.diffusion(Vec2(0.75, 0.75))(0, 0), 1e-4);
    ASSERT_EQ(s.discontinuities.size(), 2u);
}

TEST(Checkerboard, EmptyMaskIsHomogeneous)
{
    const Scenario c = scenario_checkerboard(1e4, {false, false, false, false});
    const Scenario h = scenario_homogeneous(1e4);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 200; ++k) {
        const Vec2 x(u(rng), u(rng));
        EXPECT_EQ(c.coeffs.diffusion(x), h.coeffs.diffusion(x));
        EXPECT_EQ(c.coeffs.convection(x), h.coeffs.convection(x));
        EXPECT_EQ(c.coeffs.source(x), h.coeffs.source(x));
    }
}

TEST(Checkerboard, JumpsOnlyOnDeclaredLines)
{
    const Scenario s = scenario_checkerboard(100.0);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 1000; ++k) {
        const Vec2 x(u(rng), u(rng));
        const Vec2 y = x + Vec2(1e-3, 1e-3);
        if (y.x() > 1.0 || y.y() > 1.0) continue;
        const bool crosses = (x.x() < 0.5) != (y.x() < 0.5) || (x.y() < 0.5) != (y.y() < 0.5);
        if (!crosses) EXPECT_EQ(s.coeffs.diffusion(x), s.coeffs.diffusion(y));
    }
}

TEST(VariableConvection, Data)
{
    const Scenario s = scenario_variable_convection(1e9);
    for (double y : {0.0, 0.3, 1.0}) {
        EXPECT_EQ(s.coeffs.convection(Vec2(0.5, y)), Vec2(0, 0));
        EXPECT_DOUBLE_EQ(s.coeffs.source(Vec2(0.5, y)), 0.0);
    }
    EXPECT_NEAR(s.coeffs.source(Vec2(1.0, 0.5)), 2e-9 + 1.5, 1e-15);
    EXPECT_DOUBLE_EQ(s.coeffs.diffusion(Vec2(0.2, 0.2))(0, 0), 1e-9);
}

TEST(Scenarios, DiffusionSpd)
{
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (const Scenario& s : {scenario_manufactured(10.0), scenario_homogeneous(1e6), scenario_checkerboard(1e4),
                              scenario_variable_convection(1e9), scenario_polynomial()}) {
        for (int k = 0; k < 1000; ++k) {
            const Mat2 d = s.coeffs.diffusion(Vec2(u(rng), u(rng)));
            EXPECT_LT((d - d.transpose()).norm(), 1e-300);
            const Eigen::Vector2d ev = d.selfadjointView<Eigen::Lower>().eigenvalues();
            ASSERT_GT(ev.minCoeff(), 0.0) << s.name;
        }
    }
}

TEST(Scenarios, NeumannVariantConsistent)
{
    const Scenario s = scenario_manufactured_neumann(10.0);
    EXPECT_EQ(s.boundary(Vec2(0.2, 0.0), Vec2(0.4, 0.0)), BoundaryTag::neumann);
    EXPECT_EQ(s.boundary(Vec2(1.0, 0.2), Vec2(1.0, 0.4)), BoundaryTag::neumann);
    EXPECT_EQ(s.boundary(Vec2(0.0, 0.2), Vec2(0.0, 0.4)), BoundaryTag::dirichlet);
    // g = q.n with the outward normal.
    const Vec2 bottom(0.3, 0.0), right(1.0, 0.6);
    EXPECT_NEAR(s.coeffs.neumann(bottom), -s.exact->flux(bottom).y(), 1e-14);
    EXPECT_NEAR(s.coeffs.neumann(right), s.exact->flux(right).x(), 1e-14);
}

TEST(Scenarios, Listing)
{
    const auto list = list_scenarios();
    auto find = [&](const std::string& n) {
        return std::find_if(list.begin(), list.end(), [&](const ScenarioInfo& i) { return i.name == n; });
    };
    ASSERT_NE(find("manufactured"), list.end());
    EXPECT_EQ(find("manufactured")->section, "3.1");
    ASSERT_NE(find("checkerboard"), list.end());
    EXPECT_EQ(find("checkerboard")->section, "3.3");
    EXPECT_EQ(quadrant_of(Vec2(0.2, 0.2)), 0);
    EXPECT_EQ(quadrant_of(Vec2(0.7, 0.2)), 1);
    EXPECT_EQ(quadrant_of(Vec2(0.2, 0.7)), 2);
    EXPECT_EQ(quadrant_of(Vec2(0.7, 0.7)), 3);
}
