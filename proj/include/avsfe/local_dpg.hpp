#pragma once

#include <array>
#include <filesystem>
#include <vector>

#include <Eigen/Core>

#include "avsfe/fe_space.hpp"
#include "avsfe/mesh.hpp"
#include "avsfe/problem.hpp"

namespace avsfe {

/// Trial and test basis tables sampled at the volume and edge quadrature
/// points of the master element. Shared read-only by all elements.
struct ReferenceTables {
    int trial_degree = 1;
    int test_degree = 1;
    QuadratureRule quad;
    QuadratureRule1D edge_quad;

    // Rows are quadrature points, columns basis functions.
    Eigen::MatrixXd trial_val, trial_dxi, trial_deta;
    Eigen::MatrixXd test_val, test_dxi, test_deta;

    // Per local edge: master points, traversal direction in master
    // coordinates, and basis values at the edge points.
    std::array<std::vector<Vec2>, 4> edge_points;
    std::array<Vec2, 4> edge_direction;
    std::array<Eigen::MatrixXd, 4> edge_trial_val;
    std::array<Eigen::MatrixXd, 4> edge_test_val;

    [[nodiscard]] int trial_scalar_size() const noexcept { return (trial_degree + 1) * (trial_degree + 1); }
    [[nodiscard]] int test_scalar_size() const noexcept { return (test_degree + 1) * (test_degree + 1); }
};

/// Tables for trial degree p, test degree p+dp. `quad_points` <= 0 picks
/// p+dp+2 Gauss points per direction for volumes and edges.
ReferenceTables make_reference_tables(int p, int dp, int quad_points = 0);

/// Local matrices of one element, restricted to the active test basis.
struct ElementSystem {
    std::size_t element = 0;
    double h = 0.0;
    Eigen::MatrixXd gram;   ///< test x test
    Eigen::MatrixXd bform;  ///< test x trial
    Eigen::VectorXd load;   ///< test
};

/// A = B^T G^{-1} B and rhs = B^T G^{-1} F.
struct CondensedElement {
    Eigen::MatrixXd stiffness;
    Eigen::VectorXd rhs;
};

/// Columns are the enriched-basis coefficients of the optimal test
/// function paired with each local trial function: G T = B.
struct OptimalTestFunctions {
    std::size_t element = 0;
    Eigen::MatrixXd coefficients;
};

/// Gram matrix of  h^2 grad r.grad v + r v + z.w  over the full local
/// test basis (v block, then w_x, then w_y).
Eigen::MatrixXd local_gram(const ElementMap& fmap, const ReferenceTables& tables);

/// Element restriction of the mixed bilinear form; rows follow the full
/// local test basis, columns the local trial ordering (u, qx, qy).
/// Normal-flux edge terms are included on interior edges only.
Eigen::MatrixXd local_bform(const Mesh& mesh, std::size_t element, const ReferenceTables& tables,
                            const Scenario& scenario);

/// f v over the element plus g v on neumann edges, zero on w rows.
Eigen::VectorXd local_load(const Mesh& mesh, std::size_t element, const ReferenceTables& tables,
                           const Scenario& scenario);

/// Throws GeometryError if a declared coefficient discontinuity cuts
/// through the element interior.
void check_alignment(const Mesh& mesh, std::size_t element, const Scenario& scenario);

ElementSystem element_system(const Mesh& mesh, std::size_t element, const ReferenceTables& tables,
                             const Scenario& scenario, const TestSpaceLocal& test_space);

OptimalTestFunctions optimal_test(const ElementSystem& es);
CondensedElement condense(const ElementSystem& es);

/// Plain-text dump of G, B, F and T for one element.
void write_element_dump(const std::filesystem::path& path, const ElementSystem& es,
                        const OptimalTestFunctions& tests);

}  // namespace avsfe
