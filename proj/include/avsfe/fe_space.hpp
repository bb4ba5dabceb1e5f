#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>

#include "avsfe/mesh.hpp"

namespace avsfe {

/// Lagrange basis on [-1,1] with Gauss-Lobatto nodes.
///
/// Degree 0 is a single constant function with its node at 0.
class LagrangeBasis1D {
public:
    explicit LagrangeBasis1D(int degree);

    [[nodiscard]] int degree() const noexcept { return degree_; }
    [[nodiscard]] int size() const noexcept { return degree_ + 1; }
    [[nodiscard]] const std::vector<double>& nodes() const noexcept { return nodes_; }

    [[nodiscard]] Eigen::VectorXd values(double x) const;
    [[nodiscard]] Eigen::VectorXd derivatives(double x) const;

private:
    int degree_;
    std::vector<double> nodes_;
    std::vector<double> weights_;  // barycentric
};

/// Gauss-Lobatto points of the given degree (degree+1 points).
std::vector<double> gauss_lobatto_points(int degree);

struct QuadratureRule1D {
    std::vector<double> points;
    std::vector<double> weights;
};

/// Tensor Gauss-Legendre rule on [-1,1]^2; point k = (i,j) has index i + n*j.
struct QuadratureRule {
    int n = 0;
    std::vector<Vec2> points;
    std::vector<double> weights;

    [[nodiscard]] std::size_t size() const noexcept { return points.size(); }
};

QuadratureRule1D gauss_rule_1d(int n);
QuadratureRule gauss_rule(int n);

struct ShapeValues {
    Eigen::VectorXd values;
    /// Column 0: d/dxi, column 1: d/deta.
    Eigen::MatrixX2d gradients;
};

/// Tensor-product Lagrange basis of degree p at a master point.
/// Basis function (i,j) has index i + (p+1)*j.
ShapeValues shape_eval(int p, const Vec2& point);
ShapeValues shape_eval(const LagrangeBasis1D& basis, const Vec2& point);

/// Local node indices of the (p+1)^2 tensor basis lying on local edge k,
/// in counter-clockwise traversal order from vertex k to vertex k+1.
std::vector<int> edge_local_nodes(int p, int k);

enum class Field : int { u = 0, qx = 1, qy = 2 };
inline constexpr int kNumFields = 3;

/// Global C0 numbering of the three trial fields (u, qx, qy).
///
/// Scalar node n carries dofs 3n (u), 3n+1 (qx), 3n+2 (qy). Element-local
/// trial dofs are ordered field-major: all u nodes, then qx, then qy.
class TrialDofMap {
public:
    TrialDofMap(const Mesh& mesh, int p);

    [[nodiscard]] int degree() const noexcept { return p_; }
    [[nodiscard]] std::size_t num_nodes() const noexcept { return node_coords_.size(); }
    [[nodiscard]] std::size_t num_elements() const noexcept { return element_nodes_.size(); }
    [[nodiscard]] std::size_t num_dofs() const noexcept { return kNumFields * num_nodes(); }
    [[nodiscard]] int nodes_per_element() const noexcept { return (p_ + 1) * (p_ + 1); }
    [[nodiscard]] int dofs_per_element() const noexcept { return kNumFields * nodes_per_element(); }

    [[nodiscard]] static std::size_t dof(std::size_t node, Field f) noexcept
    {
        return kNumFields * node + static_cast<std::size_t>(f);
    }

    /// Global scalar node of each element-local tensor node.
    [[nodiscard]] const std::vector<int>& element_nodes(std::size_t e) const { return element_nodes_.at(e); }
    /// Global dof of each element-local trial dof.
    [[nodiscard]] std::vector<int> gather(std::size_t e) const;

    [[nodiscard]] const std::vector<Vec2>& node_coords() const noexcept { return node_coords_; }
    /// Sorted u-dofs on dirichlet edges.
    [[nodiscard]] const std::vector<int>& dirichlet_dofs() const noexcept { return dirichlet_dofs_; }
    [[nodiscard]] const std::vector<int>& dirichlet_nodes() const noexcept { return dirichlet_nodes_; }

private:
    int p_;
    std::vector<std::vector<int>> element_nodes_;
    std::vector<Vec2> node_coords_;
    std::vector<int> dirichlet_nodes_;
    std::vector<int> dirichlet_dofs_;
};

inline TrialDofMap build_dof_map(const Mesh& mesh, int p) { return TrialDofMap(mesh, p); }

enum class TestDirichletMode {
    /// Drop v-basis functions whose trace is nonzero on dirichlet edges.
    constrained,
    /// Full enriched polynomial space on every element.
    free,
};

/// Broken enriched test space restricted to one element.
///
/// Full local ordering is v (scalar), then w_x, then w_y, each a tensor
/// Lagrange basis of degree p+dp. `active` lists the retained indices.
struct TestSpaceLocal {
    std::size_t element = 0;
    int degree = 0;
    std::vector<int> active;

    [[nodiscard]] int scalar_size() const noexcept { return (degree + 1) * (degree + 1); }
    [[nodiscard]] int full_size() const noexcept { return kNumFields * scalar_size(); }
    [[nodiscard]] int size() const noexcept { return static_cast<int>(active.size()); }
};

TestSpaceLocal make_test_space(const Mesh& mesh, std::size_t element, int degree, TestDirichletMode mode);

}  // namespace avsfe
