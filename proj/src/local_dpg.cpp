#include "avsfe/local_dpg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/Cholesky>

#include "avsfe/error.hpp"

namespace avsfe {

namespace {

void fill_tables(const LagrangeBasis1D& basis, const std::vector<Vec2>& points, Eigen::MatrixXd* val,
                 Eigen::MatrixXd* dxi, Eigen::MatrixXd* deta)
{
    const int nb = basis.size() * basis.size();
    const int nq = static_cast<int>(points.size());
    val->resize(nq, nb);
    if (dxi) dxi->resize(nq, nb);
    if (deta) deta->resize(nq, nb);
    for (int q = 0; q < nq; ++q) {
        const ShapeValues s = shape_eval(basis, points[q]);
        val->row(q) = s.values.transpose();
        if (dxi) dxi->row(q) = s.gradients.col(0).transpose();
        if (deta) deta->row(q) = s.gradients.col(1).transpose();
    }
}

// Physical gradients at the volume points, rows = points.
struct VolumeGeometry {
    Eigen::VectorXd weight;  // quadrature weight * det J
    Eigen::VectorXd c00, c01, c10, c11;  // entries of J^{-T}
    std::vector<Vec2> x;
};

VolumeGeometry volume_geometry(const ElementMap& fmap, const QuadratureRule& quad, std::size_t element)
{
    const int nq = static_cast<int>(quad.size());
    VolumeGeometry g;
    g.weight.resize(nq);
    g.c00.resize(nq);
    g.c01.resize(nq);
    g.c10.resize(nq);
    g.c11.resize(nq);
    g.x.resize(nq);
    for (int q = 0; q < nq; ++q) {
        const Mat2 jac = fmap.jacobian(quad.points[q]);
        const double det = jac.determinant();
        if (!(det > 0.0)) {
            std::ostringstream msg;
            msg << "element " << element << ": non-positive Jacobian determinant " << det
                << " at a quadrature point";
            throw GeometryError(msg.str());
        }
        const Mat2 inv_t = jac.inverse().transpose();
        g.weight[q] = quad.weights[q] * det;
        g.c00[q] = inv_t(0, 0);
        g.c01[q] = inv_t(0, 1);
        g.c10[q] = inv_t(1, 0);
        g.c11[q] = inv_t(1, 1);
        g.x[q] = fmap.map(quad.points[q]);
    }
    return g;
}

Eigen::MatrixXd physical_dx(const VolumeGeometry& g, const Eigen::MatrixXd& dxi, const Eigen::MatrixXd& deta)
{
    return (dxi.array().colwise() * g.c00.array() + deta.array().colwise() * g.c01.array()).matrix();
}

Eigen::MatrixXd physical_dy(const VolumeGeometry& g, const Eigen::MatrixXd& dxi, const Eigen::MatrixXd& deta)
{
    return (dxi.array().colwise() * g.c10.array() + deta.array().colwise() * g.c11.array()).matrix();
}

// (A^T diag(w) B)
Eigen::MatrixXd weighted_product(const Eigen::MatrixXd& a, const Eigen::VectorXd& w, const Eigen::MatrixXd& b)
{
    return a.transpose() * (b.array().colwise() * w.array()).matrix();
}

}  // namespace

ReferenceTables make_reference_tables(int p, int dp, int quad_points)
{
    if (p < 1) {
        throw InvalidArgument("trial degree must be >= 1");
    }
    if (dp < 0) {
        throw InvalidArgument("test enrichment must be >= 0");
    }
    ReferenceTables t;
    t.trial_degree = p;
    t.test_degree = p + dp;
    const int n = quad_points > 0 ? quad_points : p + dp + 2;
    t.quad = gauss_rule(n);
    t.edge_quad = gauss_rule_1d(n);

    const LagrangeBasis1D trial(p), test(p + dp);
    fill_tables(trial, t.quad.points, &t.trial_val, &t.trial_dxi, &t.trial_deta);
    fill_tables(test, t.quad.points, &t.test_val, &t.test_dxi, &t.test_deta);

    // Edge k runs counter-clockwise from master corner k to corner k+1.
    t.edge_direction = {Vec2(1, 0), Vec2(0, 1), Vec2(-1, 0), Vec2(0, -1)};
    for (int k = 0; k < 4; ++k) {
        auto& pts = t.edge_points[k];
        pts.clear();
        for (double s : t.edge_quad.points) {
            switch (k) {
            case 0: pts.emplace_back(s, -1.0); break;
            case 1: pts.emplace_back(1.0, s); break;
            case 2: pts.emplace_back(-s, 1.0); break;
            default: pts.emplace_back(-1.0, -s); break;
            }
        }
        fill_tables(trial, pts, &t.edge_trial_val[k], nullptr, nullptr);
        fill_tables(test, pts, &t.edge_test_val[k], nullptr, nullptr);
    }
    return t;
}

Eigen::MatrixXd local_gram(const ElementMap& fmap, const ReferenceTables& tables)
{
    const VolumeGeometry g = volume_geometry(fmap, tables.quad, 0);
    const double h = fmap.diameter();
    const int ns = tables.test_scalar_size();
    const Eigen::MatrixXd vx = physical_dx(g, tables.test_dxi, tables.test_deta);
    const Eigen::MatrixXd vy = physical_dy(g, tables.test_dxi, tables.test_deta);
    const Eigen::MatrixXd mass = weighted_product(tables.test_val, g.weight, tables.test_val);
    const Eigen::MatrixXd stiff = weighted_product(vx, g.weight, vx) + weighted_product(vy, g.weight, vy);

    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(3 * ns, 3 * ns);
    gram.block(0, 0, ns, ns) = h * h * stiff + mass;
    gram.block(ns, ns, ns, ns) = mass;
    gram.block(2 * ns, 2 * ns, ns, ns) = mass;
    return gram;
}

void check_alignment(const Mesh& mesh, std::size_t element, const Scenario& scenario)
{
    if (scenario.discontinuities.empty()) return;
    const auto& corners = mesh.element_map(element).corners();
    constexpr double eps = 1e-12;
    for (const DiscontinuityLine& line : scenario.discontinuities) {
        double lo = corners[0][line.axis], hi = lo;
        for (const Vec2& c : corners) {
            lo = std::min(lo, c[line.axis]);
            hi = std::max(hi, c[line.axis]);
        }
        if (lo < line.value - eps && hi > line.value + eps) {
            std::ostringstream msg;
            msg << "element " << element << " is cut by the coefficient discontinuity " << (line.axis == 0 ? "x" : "y")
                << " = " << line.value << "; the mesh must align with it";
            throw GeometryError(msg.str());
        }
    }
}

Eigen::MatrixXd local_bform(const Mesh& mesh, std::size_t element, const ReferenceTables& tables,
                            const Scenario& scenario)
{
    check_alignment(mesh, element, scenario);
    const ElementMap fmap = mesh.element_map(element);
    const VolumeGeometry g = volume_geometry(fmap, tables.quad, element);
    const int ns = tables.test_scalar_size();
    const int nt = tables.trial_scalar_size();
    const int nq = static_cast<int>(tables.quad.size());

    const Eigen::MatrixXd ux = physical_dx(g, tables.trial_dxi, tables.trial_deta);
    const Eigen::MatrixXd uy = physical_dy(g, tables.trial_dxi, tables.trial_deta);
    const Eigen::MatrixXd vx = physical_dx(g, tables.test_dxi, tables.test_deta);
    const Eigen::MatrixXd vy = physical_dy(g, tables.test_dxi, tables.test_deta);
    const Eigen::MatrixXd& phi = tables.trial_val;
    const Eigen::MatrixXd& v = tables.test_val;

    Eigen::MatrixXd convect(nq, nt), dflux_x(nq, nt), dflux_y(nq, nt);
    for (int q = 0; q < nq; ++q) {
        const Vec2 b = scenario.coeffs.convection(g.x[q]);
        const Mat2 d = scenario.coeffs.diffusion(g.x[q]);
        convect.row(q) = b.x() * ux.row(q) + b.y() * uy.row(q);
        dflux_x.row(q) = d(0, 0) * ux.row(q) + d(0, 1) * uy.row(q);
        dflux_y.row(q) = d(1, 0) * ux.row(q) + d(1, 1) * uy.row(q);
    }

    Eigen::MatrixXd bf = Eigen::MatrixXd::Zero(3 * ns, 3 * nt);
    // v rows: (b.grad u) v + q.grad v
    bf.block(0, 0, ns, nt) = weighted_product(v, g.weight, convect);
    bf.block(0, nt, ns, nt) = weighted_product(vx, g.weight, phi);
    bf.block(0, 2 * nt, ns, nt) = weighted_product(vy, g.weight, phi);
    // w rows: (q - D grad u).w
    const Eigen::MatrixXd mass = weighted_product(v, g.weight, phi);
    bf.block(ns, 0, ns, nt) = -weighted_product(v, g.weight, dflux_x);
    bf.block(ns, nt, ns, nt) = mass;
    bf.block(2 * ns, 0, ns, nt) = -weighted_product(v, g.weight, dflux_y);
    bf.block(2 * ns, 2 * nt, ns, nt) = mass;

    // -(q.n) v on edges shared with a neighbour.
    const int ne = static_cast<int>(tables.edge_quad.points.size());
    for (int k = 0; k < 4; ++k) {
        if (mesh.edge_tag(element, k) != BoundaryTag::interior) continue;
        Eigen::VectorXd wnx(ne), wny(ne);
        for (int q = 0; q < ne; ++q) {
            const Vec2 t = fmap.jacobian(tables.edge_points[k][q]) * tables.edge_direction[k];
            // Outward normal times the length element.
            wnx[q] = tables.edge_quad.weights[q] * t.y();
            wny[q] = -tables.edge_quad.weights[q] * t.x();
        }
        const Eigen::MatrixXd& ve = tables.edge_test_val[k];
        const Eigen::MatrixXd& pe = tables.edge_trial_val[k];
        bf.block(0, nt, ns, nt) -= weighted_product(ve, wnx, pe);
        bf.block(0, 2 * nt, ns, nt) -= weighted_product(ve, wny, pe);
    }
    return bf;
}

Eigen::VectorXd local_load(const Mesh& mesh, std::size_t element, const ReferenceTables& tables,
                           const Scenario& scenario)
{
    const ElementMap fmap = mesh.element_map(element);
    const VolumeGeometry g = volume_geometry(fmap, tables.quad, element);
    const int ns = tables.test_scalar_size();
    const int nq = static_cast<int>(tables.quad.size());

    Eigen::VectorXd wf(nq);
    for (int q = 0; q < nq; ++q) wf[q] = g.weight[q] * scenario.coeffs.source(g.x[q]);
    Eigen::VectorXd load = Eigen::VectorXd::Zero(3 * ns);
    load.head(ns) = tables.test_val.transpose() * wf;

    const int ne = static_cast<int>(tables.edge_quad.points.size());
    for (int k = 0; k < 4; ++k) {
        if (mesh.edge_tag(element, k) != BoundaryTag::neumann) continue;
        Eigen::VectorXd wg(ne);
        for (int q = 0; q < ne; ++q) {
            const Vec2& xi = tables.edge_points[k][q];
            const double len = (fmap.jacobian(xi) * tables.edge_direction[k]).norm();
            wg[q] = tables.edge_quad.weights[q] * len * scenario.coeffs.neumann(fmap.map(xi));
        }
        load.head(ns) += tables.edge_test_val[k].transpose() * wg;
    }
    return load;
}

ElementSystem element_system(const Mesh& mesh, std::size_t element, const ReferenceTables& tables,
                             const Scenario& scenario, const TestSpaceLocal& test_space)
{
    if (test_space.degree != tables.test_degree) {
        throw InvalidArgument("test space degree does not match the reference tables");
    }
    const ElementMap fmap = mesh.element_map(element);
    const Eigen::MatrixXd gram = local_gram(fmap, tables);
    const Eigen::MatrixXd bform = local_bform(mesh, element, tables, scenario);
    const Eigen::VectorXd load = local_load(mesh, element, tables, scenario);

    ElementSystem es;
    es.element = element;
    es.h = fmap.diameter();
    const auto& idx = test_space.active;
    if (static_cast<int>(idx.size()) == test_space.full_size()) {
        es.gram = gram;
        es.bform = bform;
        es.load = load;
    } else {
        es.gram = gram(idx, idx);
        es.bform = bform(idx, Eigen::all);
        es.load = load(idx);
    }
    return es;
}

namespace {

Eigen::LLT<Eigen::MatrixXd> factor_gram(const ElementSystem& es)
{
    Eigen::LLT<Eigen::MatrixXd> llt(es.gram);
    if (llt.info() != Eigen::Success) {
        std::ostringstream msg;
        msg << "element " << es.element << ": Gram matrix is not positive definite";
        throw SolverError(msg.str());
    }
    return llt;
}

}  // namespace

OptimalTestFunctions optimal_test(const ElementSystem& es)
{
    const auto llt = factor_gram(es);
    return {es.element, llt.solve(es.bform)};
}

CondensedElement condense(const ElementSystem& es)
{
    const auto llt = factor_gram(es);
    const Eigen::MatrixXd w = llt.matrixL().solve(es.bform);
    const Eigen::VectorXd lf = llt.matrixL().solve(es.load);
    const Eigen::Index n = es.bform.cols();
    CondensedElement out;
    out.stiffness = Eigen::MatrixXd::Zero(n, n);
    out.stiffness.selfadjointView<Eigen::Lower>().rankUpdate(w.transpose());
    out.stiffness.triangularView<Eigen::StrictlyUpper>() = out.stiffness.transpose();
    out.rhs = w.transpose() * lf;
    return out;
}

void write_element_dump(const std::filesystem::path& path, const ElementSystem& es,
                        const OptimalTestFunctions& tests)
{
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    const Eigen::IOFormat fmt(Eigen::FullPrecision, 0, " ", "\n");
    out << "# element " << es.element << " h " << es.h << '\n';
    out << "# G " << es.gram.rows() << ' ' << es.gram.cols() << '\n' << es.gram.format(fmt) << '\n';
    out << "# B " << es.bform.rows() << ' ' << es.bform.cols() << '\n' << es.bform.format(fmt) << '\n';
    out << "# F " << es.load.size() << '\n' << es.load.transpose().format(fmt) << '\n';
    out << "# T " << tests.coefficients.rows() << ' ' << tests.coefficients.cols() << '\n'
        << tests.coefficients.format(fmt) << '\n';
}

}  // namespace avsfe
