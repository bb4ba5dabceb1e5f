#include "avsfe/fe_space.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "avsfe/error.hpp"

namespace avsfe {

namespace {

// Legendre P_n and P_{n-1} at x by the three-term recurrence.
std::pair<double, double> legendre_pair(int n, double x)
{
    double p0 = 1.0, p1 = x;
    if (n == 0) return {1.0, 0.0};
    for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    return {p1, p0};
}

}  // namespace

std::vector<double> gauss_lobatto_points(int degree)
{
    if (degree < 0) {
        throw InvalidArgument("basis degree must be non-negative");
    }
    if (degree == 0) return {0.0};
    const int n = degree;
    std::vector<double> x(n + 1);
    for (int i = 0; i <= n; ++i) {
        double xi = -std::cos(std::numbers::pi * i / n);
        if (i > 0 && i < n) {
            for (int it = 0; it < 100; ++it) {
                const auto [pn, pnm1] = legendre_pair(n, xi);
                const double dx = (xi * pn - pnm1) / ((n + 1) * pn);
                xi -= dx;
                if (std::abs(dx) < 1e-16) break;
            }
        }
        x[i] = xi;
    }
    // Enforce exact symmetry.
    for (int i = 0; i <= n / 2; ++i) {
        const double s = 0.5 * (x[n - i] - x[i]);
        x[i] = -s;
        x[n - i] = s;
    }
    if (n % 2 == 0) x[n / 2] = 0.0;
    return x;
}

LagrangeBasis1D::LagrangeBasis1D(int degree) : degree_(degree), nodes_(gauss_lobatto_points(degree))
{
    weights_.resize(nodes_.size());
    for (std::size_t j = 0; j < nodes_.size(); ++j) {
        double w = 1.0;
        for (std::size_t k = 0; k < nodes_.size(); ++k) {
            if (k != j) w *= nodes_[j] - nodes_[k];
        }
        weights_[j] = 1.0 / w;
    }
}

Eigen::VectorXd LagrangeBasis1D::values(double x) const
{
    const int n = size();
    Eigen::VectorXd v(n);
    for (int j = 0; j < n; ++j) {
        double prod = 1.0;
        for (int k = 0; k < n; ++k) {
            if (k != j) prod *= (x - nodes_[k]) / (nodes_[j] - nodes_[k]);
        }
        v[j] = prod;
    }
    return v;
}

Eigen::VectorXd LagrangeBasis1D::derivatives(double x) const
{
    const int n = size();
    Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < n; ++j) {
        double sum = 0.0;
        for (int m = 0; m < n; ++m) {
            if (m == j) continue;
            double prod = 1.0 / (nodes_[j] - nodes_[m]);
            for (int k = 0; k < n; ++k) {
                if (k != j && k != m) prod *= (x - nodes_[k]) / (nodes_[j] - nodes_[k]);
            }
            sum += prod;
        }
        d[j] = sum;
    }
    return d;
}

QuadratureRule1D gauss_rule_1d(int n)
{
    if (n < 1 || n > 20) {
        std::ostringstream msg;
        msg << "Gauss rule point count " << n << " outside [1,20]";
        throw InvalidArgument(msg.str());
    }
    QuadratureRule1D rule;
    rule.points.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            const auto [pn, pnm1] = legendre_pair(n, x);
            dp = n * (x * pn - pnm1) / (x * x - 1.0);
            const double dx = pn / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const auto [pn, pnm1] = legendre_pair(n, x);
        dp = n * (x * pn - pnm1) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.points[i] = -x;
        rule.points[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.points[n / 2] = 0.0;
    return rule;
}

QuadratureRule gauss_rule(int n)
{
    const QuadratureRule1D line = gauss_rule_1d(n);
    QuadratureRule rule;
    rule.n = n;
    rule.points.reserve(n * n);
    rule.weights.reserve(n * n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            rule.points.emplace_back(line.points[i], line.points[j]);
            rule.weights.push_back(line.weights[i] * line.weights[j]);
        }
    }
    return rule;
}

ShapeValues shape_eval(const LagrangeBasis1D& basis, const Vec2& point)
{
    constexpr double slack = 1e-12;
    if (std::abs(point.x()) > 1.0 + slack || std::abs(point.y()) > 1.0 + slack) {
        std::ostringstream msg;
        msg << "point (" << point.x() << "," << point.y() << ") outside the master element";
        throw InvalidArgument(msg.str());
    }
    const int n = basis.size();
    const Eigen::VectorXd vx = basis.values(point.x()), vy = basis.values(point.y());
    const Eigen::VectorXd dx = basis.derivatives(point.x()), dy = basis.derivatives(point.y());
    ShapeValues out;
    out.values.resize(n * n);
    out.gradients.resize(n * n, 2);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const int k = i + n * j;
            out.values[k] = vx[i] * vy[j];
            out.gradients(k, 0) = dx[i] * vy[j];
            out.gradients(k, 1) = vx[i] * dy[j];
        }
    }
    return out;
}

ShapeValues shape_eval(int p, const Vec2& point) { return shape_eval(LagrangeBasis1D(p), point); }

std::vector<int> edge_local_nodes(int p, int k)
{
    const int n = p + 1;
    std::vector<int> out(n);
    for (int t = 0; t < n; ++t) {
        switch (k) {
        case 0: out[t] = t; break;
        case 1: out[t] = p + n * t; break;
        case 2: out[t] = (p - t) + n * p; break;
        case 3: out[t] = n * (p - t); break;
        default: throw InvalidArgument("local edge index must be 0..3");
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

TrialDofMap::TrialDofMap(const Mesh& mesh, int p) : p_(p)
{
    if (p < 1) {
        throw InvalidArgument("trial degree must be >= 1");
    }
    const int n = p + 1;
    const std::size_t nv = mesh.num_vertices();
    const std::size_t ne = mesh.num_edges();
    const std::size_t edge_base = nv;
    const std::size_t interior_base = edge_base + ne * static_cast<std::size_t>(p - 1);
    const std::size_t total =
        interior_base + mesh.num_elements() * static_cast<std::size_t>((p - 1) * (p - 1));

    node_coords_.assign(total, Vec2::Zero());
    std::vector<bool> placed(total, false);
    element_nodes_.resize(mesh.num_elements());
    const std::vector<double> gll = gauss_lobatto_points(p);

    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const auto& el = mesh.elements()[e];
        const auto& ed = mesh.element_edges(e);
        std::vector<int>& nodes = element_nodes_[e];
        nodes.assign(n * n, -1);
        nodes[0] = el[0];
        nodes[p] = el[1];
        nodes[p + n * p] = el[2];
        nodes[n * p] = el[3];
        for (int k = 0; k < 4; ++k) {
            const Edge& edge = mesh.edges()[ed[k]];
            const bool forward = edge.vertices[0] == el[k];
            const auto local = edge_local_nodes(p, k);
            for (int t = 1; t < p; ++t) {
                const int offset = forward ? t - 1 : p - 1 - t;
                nodes[local[t]] = static_cast<int>(edge_base + static_cast<std::size_t>(ed[k]) * (p - 1) + offset);
            }
        }
        int next = 0;
        for (int j = 1; j < p; ++j) {
            for (int i = 1; i < p; ++i) {
                nodes[i + n * j] = static_cast<int>(interior_base + e * static_cast<std::size_t>((p - 1) * (p - 1)) + next++);
            }
        }
        const ElementMap fmap = mesh.element_map(e);
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < n; ++i) {
                const int g = nodes[i + n * j];
                if (!placed[g]) {
                    node_coords_[g] = fmap.map(Vec2(gll[i], gll[j]));
                    placed[g] = true;
                }
            }
        }
        for (int k = 0; k < 4; ++k) {
            if (mesh.edge_tag(e, k) != BoundaryTag::dirichlet) continue;
            for (int local : edge_local_nodes(p, k)) dirichlet_nodes_.push_back(nodes[local]);
        }
    }
    std::sort(dirichlet_nodes_.begin(), dirichlet_nodes_.end());
    dirichlet_nodes_.erase(std::unique(dirichlet_nodes_.begin(), dirichlet_nodes_.end()), dirichlet_nodes_.end());
    dirichlet_dofs_.reserve(dirichlet_nodes_.size());
    for (int node : dirichlet_nodes_) dirichlet_dofs_.push_back(static_cast<int>(dof(node, Field::u)));
}

std::vector<int> TrialDofMap::gather(std::size_t e) const
{
    const auto& nodes = element_nodes(e);
    const int nn = static_cast<int>(nodes.size());
    std::vector<int> out(kNumFields * nn);
    for (int f = 0; f < kNumFields; ++f) {
        for (int a = 0; a < nn; ++a) {
            out[f * nn + a] = static_cast<int>(dof(nodes[a], static_cast<Field>(f)));
        }
    }
    return out;
}

TestSpaceLocal make_test_space(const Mesh& mesh, std::size_t element, int degree, TestDirichletMode mode)
{
    if (degree < 0) {
        throw InvalidArgument("test degree must be non-negative");
    }
    TestSpaceLocal space;
    space.element = element;
    space.degree = degree;
    const int ns = space.scalar_size();
    std::vector<bool> dropped(ns, false);
    if (mode == TestDirichletMode::constrained) {
        for (int k = 0; k < 4; ++k) {
            if (mesh.edge_tag(element, k) != BoundaryTag::dirichlet) continue;
            if (degree == 0) {
                dropped[0] = true;
                continue;
            }
            for (int local : edge_local_nodes(degree, k)) dropped[local] = true;
        }
    }
    space.active.reserve(space.full_size());
    for (int i = 0; i < ns; ++i) {
        if (!dropped[i]) space.active.push_back(i);
    }
    for (int i = ns; i < space.full_size(); ++i) space.active.push_back(i);
    return space;
}

}  // namespace avsfe
