#include <cmath>

#include <gtest/gtest.h>

#include "avsfe/analysis.hpp"
#include "avsfe/error.hpp"
#include "avsfe/solver.hpp"

using namespace avsfe;

namespace {

std::shared_ptr<const Discretization> discretize(const Mesh& mesh, const Scenario& s, int p, int dp = 0,
                                                 int threads = 1)
{
    DiscretizationOptions o;
    o.degree = p;
    o.enrichment = dp;
    o.threads = threads;
    return make_discretization(mesh, s, o);
}

SolutionField solve_case(const Mesh& mesh, const Scenario& s, int p, int dp = 0, SolverOptions opts = {})
{
    const auto disc = discretize(mesh, s, p, dp);
    return solve(disc, assemble(*disc), opts);
}

}  // namespace

TEST(Assemble, CountsOnTwoByTwo)
{
    const auto disc = discretize(build_uniform(2, 2), scenario_manufactured(10.0), 2);
    const GlobalSystem sys = assemble(*disc);
    EXPECT_EQ(disc->dofs().num_dofs(), 75u);
    EXPECT_EQ(sys.num_constrained, 16u);
    EXPECT_EQ(sys.matrix.rows(), 59);
    EXPECT_EQ(sys.free_to_global.size(), 59u);
}

TEST(Assemble, SymmetricAcrossScenarios)
{
    for (const Scenario& s : {scenario_manufactured(10.0), scenario_homogeneous(1e6), scenario_checkerboard(1e4),
                              scenario_variable_convection(1e9)}) {
        const auto disc = discretize(build_graded(4, 4, 0.3, std::vector<double>{0.5}), s, 2);
        const GlobalSystem sys = assemble(*disc);
        EXPECT_LT(symmetry_defect(sys.matrix), 1e-11) << s.name;
    }
}

TEST(Assemble, ThreadCountDoesNotChangeBits)
{
    const Mesh m = perturb_unstructured(build_uniform(24, 24), 0.2, 1);
    const Scenario s = scenario_manufactured(10.0);
    const GlobalSystem a = assemble(*discretize(m, s, 2, 0, 1));
    const GlobalSystem b = assemble(*discretize(m, s, 2, 0, 3));
    ASSERT_EQ(a.matrix.nonZeros(), b.matrix.nonZeros());
    for (Eigen::Index k = 0; k < a.matrix.nonZeros(); ++k) {
        ASSERT_EQ(a.matrix.valuePtr()[k], b.matrix.valuePtr()[k]);
    }
    for (Eigen::Index k = 0; k < a.rhs.size(); ++k) ASSERT_EQ(a.rhs[k], b.rhs[k]);
}

TEST(Assemble, RejectsBadThreadCount)
{
    DiscretizationOptions o;
    o.threads = 0;
    EXPECT_THROW(Discretization(build_uniform(1, 1), scenario_zero(), o), InvalidArgument);
}

TEST(Solve, IdentitySystemReturnsRhs)
{
    GlobalSystem sys;
    sys.matrix.resize(5, 5);
    sys.matrix.setIdentity();
    sys.rhs = Eigen::VectorXd::LinSpaced(5, 1.0, 5.0);
    for (SolverKind kind : {SolverKind::direct, SolverKind::cg}) {
        SolverOptions o;
        o.kind = kind;
        SolveReport r;
        const Eigen::VectorXd x = solve_system(sys, o, &r);
        EXPECT_LT((x - sys.rhs).norm(), 1e-14);
        EXPECT_LT(r.relative_residual, 1e-14);
    }
}

TEST(Solve, IndefiniteReportsPivot)
{
    GlobalSystem sys;
    sys.matrix.resize(3, 3);
    sys.matrix.insert(0, 0) = 1.0;
    sys.matrix.insert(1, 1) = -2.0;
    sys.matrix.insert(2, 2) = 1.0;
    sys.rhs = Eigen::VectorXd::Ones(3);
    sys.free_to_global = {10, 11, 12};
    SolverOptions o;
    o.kind = SolverKind::direct;
    try {
        (void)solve_system(sys, o, nullptr);
        FAIL() << "expected SolverError";
    } catch (const SolverError& err) {
        EXPECT_NE(std::string(err.what()).find("global dof 11"), std::string::npos) << err.what();
    }
}

TEST(Solve, ZeroDataGivesZero)
{
    const SolutionField sol = solve_case(build_uniform(3, 3), scenario_zero(), 2);
    EXPECT_EQ(sol.coefficients().cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(energy_indicator(sol).global, 0.0);
}

TEST(Solve, OneElementSmoke)
{
    const SolutionField sol = solve_case(build_uniform(1, 1), scenario_manufactured(10.0), 1);
    EXPECT_TRUE(sol.all_finite());
}

TEST(Solve, DirichletValuesExact)
{
    Scenario s = scenario_polynomial();
    // Inhomogeneous data to make the check meaningful.
    s.coeffs.dirichlet = [](const Vec2& x) { return 0.3 + x.x() * x.x() - 0.7 * x.y(); };
    const SolutionField sol = solve_case(perturb_unstructured(build_uniform(4, 4), 0.2, 5), s, 2);
    const TrialDofMap& d = sol.discretization().dofs();
    for (int node : d.dirichlet_nodes()) {
        const double want = s.coeffs.dirichlet(d.node_coords()[node]);
        EXPECT_EQ(sol.coefficients()[TrialDofMap::dof(node, Field::u)], want);
    }
}

TEST(Solve, CgMatchesDirect)
{
    const Mesh m = build_uniform(8, 8);
    const Scenario s = scenario_manufactured(10.0);
    SolverOptions cg;
    cg.kind = SolverKind::cg;
    const SolutionField a = solve_case(m, s, 2);
    const SolutionField b = solve_case(m, s, 2, 0, cg);
    EXPECT_EQ(b.report().method, "cg-jacobi");
    EXPECT_LT(b.report().relative_residual, 1e-10);
    EXPECT_LT((a.coefficients() - b.coefficients()).cwiseAbs().maxCoeff(), 1e-7);
    EXPECT_LT(a.report().relative_residual, 1e-9);
}

TEST(Solve, PolynomialReproduction)
{
    // x(1-x)y(1-y) and its gradient lie in Q4 on rectangular elements.
    for (const Mesh& m : {build_uniform(2, 2), build_graded(3, 3, 0.4)}) {
        const SolutionField sol = solve_case(m, scenario_polynomial(), 4);
        const ConvergenceRecord r = error_norms(sol);
        EXPECT_LT(energy_indicator(sol).global, 1e-9);
        EXPECT_LT(r.err_l2_u, 1e-9);
        EXPECT_LT(r.err_h1_u, 1e-9);
        EXPECT_LT(r.err_l2_q, 1e-9);
        EXPECT_LT(r.err_unorm, 1e-9);
    }
}

TEST(Solve, MonotoneRefinement)
{
    const Scenario s = scenario_manufactured(10.0);
    const ConvergenceRecord coarse = error_norms(solve_case(build_uniform(4, 4), s, 2));
    const ConvergenceRecord fine = error_norms(solve_case(build_uniform(8, 8), s, 2));
    EXPECT_LT(fine.err_l2_u, coarse.err_l2_u);
    EXPECT_LT(fine.err_h1_u, coarse.err_h1_u);
    EXPECT_LT(fine.err_l2_q, coarse.err_l2_q);
    EXPECT_LT(fine.err_unorm, coarse.err_unorm);
}

TEST(Solve, NeumannSplitConverges)
{
    const Scenario s = scenario_manufactured_neumann(10.0);
    std::vector<ConvergenceRecord> rows;
    // 4x4 .. 64x64; the L2 ratio approaches 8 from above.
    Mesh m = build_uniform(4, 4);
    for (int level = 0; level < 5; ++level) {
        const SolutionField sol = solve_case(m, s, 2);
        ConvergenceRecord r = error_norms(sol);
        r.h = m.max_diameter();
        r.eta = energy_indicator(sol).global;
        rows.push_back(r);
        m = refine_uniform(m);
    }
    const RateFit rates = fit_rates(rows);
    EXPECT_NEAR(rates.l2_u, 3.0, 0.3);
    EXPECT_NEAR(rates.h1_u, 2.0, 0.3);
    // Flux dofs on the neumann edges stay free.
    const auto disc = discretize(build_uniform(4, 4), s, 2);
    EXPECT_EQ(assemble(*disc).num_constrained, disc->dofs().dirichlet_dofs().size());
    EXPECT_EQ(disc->dofs().dirichlet_nodes().size(), 32u - 15u);
}

TEST(Indicator, NonNegativeAndConsistent)
{
    const SolutionField sol = solve_case(build_uniform(4, 4), scenario_manufactured(10.0), 2);
    const ErrorIndicatorField eta = energy_indicator(sol);
    ASSERT_EQ(eta.element_values.size(), 16u);
    double sum = 0.0;
    for (double v : eta.element_values) {
        EXPECT_GE(v, 0.0);
        sum += v * v;
    }
    EXPECT_NEAR(eta.global, std::sqrt(sum), 1e-15 * eta.global + 1e-300);
    EXPECT_GT(eta.global, 0.0);
}

TEST(SolutionField, EvaluateAtNodes)
{
    const SolutionField sol = solve_case(build_uniform(2, 2), scenario_manufactured(10.0), 2);
    const auto& d = sol.discretization().dofs();
    const auto& nodes = d.element_nodes(3);
    const LagrangeBasis1D basis(2);
    for (int j = 0; j <= 2; ++j) {
        for (int i = 0; i <= 2; ++i) {
            const int n = nodes[i + 3 * j];
            const auto v = sol.evaluate(3, Vec2(basis.nodes()[i], basis.nodes()[j]));
            EXPECT_NEAR(v.u, sol.coefficients()[TrialDofMap::dof(n, Field::u)], 1e-14);
            EXPECT_NEAR(v.q.x(), sol.coefficients()[TrialDofMap::dof(n, Field::qx)], 1e-14);
        }
    }
    EXPECT_THROW(SolutionField(sol.discretization_ptr(), Eigen::VectorXd::Zero(3), {}), InvalidArgument);
}
