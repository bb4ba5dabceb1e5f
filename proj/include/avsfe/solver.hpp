#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "avsfe/fe_space.hpp"
#include "avsfe/local_dpg.hpp"
#include "avsfe/mesh.hpp"
#include "avsfe/problem.hpp"

namespace avsfe {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

struct DiscretizationOptions {
    int degree = 1;
    int enrichment = 0;
    TestDirichletMode test_mode = TestDirichletMode::constrained;
    /// Gauss points per direction; 0 selects degree + enrichment + 2.
    int quad_points = 0;
    int threads = 1;
};

/// Mesh (tagged by the scenario's boundary rule), trial dof map, scenario
/// and master-element tables for one refinement level.
class Discretization {
public:
    Discretization(const Mesh& mesh, Scenario scenario, const DiscretizationOptions& options);

    [[nodiscard]] const Mesh& mesh() const noexcept { return mesh_; }
    [[nodiscard]] const TrialDofMap& dofs() const noexcept { return dofs_; }
    [[nodiscard]] const Scenario& scenario() const noexcept { return scenario_; }
    [[nodiscard]] const DiscretizationOptions& options() const noexcept { return options_; }
    [[nodiscard]] const ReferenceTables& tables() const noexcept { return tables_; }
    [[nodiscard]] const LagrangeBasis1D& trial_basis() const noexcept { return trial_basis_; }

    [[nodiscard]] TestSpaceLocal test_space(std::size_t element) const;
    [[nodiscard]] ElementSystem element_system(std::size_t element) const;

private:
    Mesh mesh_;
    TrialDofMap dofs_;
    Scenario scenario_;
    DiscretizationOptions options_;
    ReferenceTables tables_;
    LagrangeBasis1D trial_basis_;
};

std::shared_ptr<const Discretization> make_discretization(const Mesh& mesh, Scenario scenario,
                                                          const DiscretizationOptions& options);

/// Condensed system on the free dofs after symmetric elimination of the
/// dirichlet u-dofs.
struct GlobalSystem {
    SparseMatrix matrix;
    Eigen::VectorXd rhs;
    /// -1 for constrained dofs.
    std::vector<int> global_to_free;
    std::vector<int> free_to_global;
    /// Full-length vector holding the prescribed values of constrained dofs.
    Eigen::VectorXd prescribed;
    std::size_t num_constrained = 0;
};

GlobalSystem assemble(const Discretization& disc);

/// max |A - A^T| / max |A|.
double symmetry_defect(const SparseMatrix& a);

enum class SolverKind { automatic, direct, cg };

struct SolverOptions {
    SolverKind kind = SolverKind::automatic;
    std::size_t direct_max_dofs = 200000;
    double cg_tolerance = 1e-10;
};

struct SolveReport {
    std::string method;
    long iterations = 0;
    /// ||A x - b|| / ||b|| (0 for a zero right-hand side).
    double relative_residual = 0.0;
    double seconds = 0.0;
};

/// Solves the free-dof system; throws SolverError on a non-positive pivot
/// (naming the global dof) or CG non-convergence.
Eigen::VectorXd solve_system(const GlobalSystem& system, const SolverOptions& options, SolveReport* report);

/// Full coefficient vector of (u^h, qx^h, qy^h) with evaluation helpers.
class SolutionField {
public:
    SolutionField(std::shared_ptr<const Discretization> disc, Eigen::VectorXd coefficients, SolveReport report);

    [[nodiscard]] const Discretization& discretization() const noexcept { return *disc_; }
    [[nodiscard]] std::shared_ptr<const Discretization> discretization_ptr() const noexcept { return disc_; }
    [[nodiscard]] const Eigen::VectorXd& coefficients() const noexcept { return coefficients_; }
    [[nodiscard]] const SolveReport& report() const noexcept { return report_; }

    struct PointValue {
        double u = 0.0;
        Vec2 grad_u = Vec2::Zero();
        Vec2 q = Vec2::Zero();
        double div_q = 0.0;
    };

    /// Field values at a master point of an element.
    [[nodiscard]] PointValue evaluate(std::size_t element, const Vec2& xi) const;
    [[nodiscard]] Eigen::VectorXd element_coefficients(std::size_t element) const;
    [[nodiscard]] double max_abs_u() const;
    [[nodiscard]] bool all_finite() const { return coefficients_.allFinite(); }

private:
    std::shared_ptr<const Discretization> disc_;
    Eigen::VectorXd coefficients_;
    SolveReport report_;
};

SolutionField solve(const std::shared_ptr<const Discretization>& disc, const GlobalSystem& system,
                    const SolverOptions& options = {});

struct ErrorIndicatorField {
    std::vector<double> element_values;
    double global = 0.0;
};

/// Residual lift  eta_K^2 = r^T G^{-1} r,  r = F_K - B_K x_K.
ErrorIndicatorField energy_indicator(const SolutionField& solution);

}  // namespace avsfe
