#include "avsfe/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "avsfe/error.hpp"

namespace avsfe {

namespace {

struct PointGeometry {
    double weight;
    Mat2 inv_t;
    Vec2 x;
};

PointGeometry point_geometry(const ElementMap& fmap, const Vec2& xi, double w)
{
    const Mat2 jac = fmap.jacobian(xi);
    return {w * jac.determinant(), jac.inverse().transpose(), fmap.map(xi)};
}

}  // namespace

ConvergenceRecord error_norms(const SolutionField& solution, int quad_points)
{
    const Discretization& disc = solution.discretization();
    const Scenario& sc = disc.scenario();
    if (!sc.exact) {
        throw InvalidArgument("scenario '" + sc.name + "' has no exact solution");
    }
    const ExactSolution& ex = *sc.exact;
    const int p = disc.dofs().degree();
    const int n = quad_points > 0 ? quad_points : p + 3;
    const ReferenceTables tables = make_reference_tables(p, 0, n);
    const int nt = tables.trial_scalar_size();

    double l2u = 0, semi = 0, l2q = 0, divq = 0, dgrad = 0;
    for (std::size_t e = 0; e < disc.mesh().num_elements(); ++e) {
        const ElementMap fmap = disc.mesh().element_map(e);
        const Eigen::VectorXd x = solution.element_coefficients(e);
        const auto xu = x.segment(0, nt), xqx = x.segment(nt, nt), xqy = x.segment(2 * nt, nt);
        for (std::size_t q = 0; q < tables.quad.size(); ++q) {
            const PointGeometry g = point_geometry(fmap, tables.quad.points[q], tables.quad.weights[q]);
            const auto val = tables.trial_val.row(q);
            const double dxi_u = tables.trial_dxi.row(q).dot(xu), deta_u = tables.trial_deta.row(q).dot(xu);
            const Vec2 grad_uh = g.inv_t * Vec2(dxi_u, deta_u);
            const Vec2 grad_qx = g.inv_t * Vec2(tables.trial_dxi.row(q).dot(xqx), tables.trial_deta.row(q).dot(xqx));
            const Vec2 grad_qy = g.inv_t * Vec2(tables.trial_dxi.row(q).dot(xqy), tables.trial_deta.row(q).dot(xqy));
            const double uh = val.dot(xu);
            const Vec2 qh(val.dot(xqx), val.dot(xqy));
            const double divqh = grad_qx.x() + grad_qy.y();

            const Vec2 grad_u = ex.grad_u(g.x);
            const Mat2 d = sc.coeffs.diffusion(g.x);
            l2u += g.weight * std::pow(ex.u(g.x) - uh, 2);
            semi += g.weight * (grad_u - grad_uh).squaredNorm();
            l2q += g.weight * (ex.flux(g.x) - qh).squaredNorm();
            divq += g.weight * std::pow(ex.div_flux(g.x) - divqh, 2);
            dgrad += g.weight * (d * (grad_u - grad_uh)).squaredNorm();
        }
    }
    ConvergenceRecord r;
    r.h = disc.mesh().max_diameter();
    r.dofs = disc.dofs().num_dofs();
    r.err_l2_u = std::sqrt(l2u);
    r.err_l2_gradu = std::sqrt(semi);
    r.err_h1_u = std::sqrt(l2u + semi);
    r.err_l2_q = std::sqrt(l2q);
    r.err_l2_divq = std::sqrt(divq);
    r.err_unorm = std::sqrt(l2u + semi + l2q + divq);
    r.err_l2_dgradu = std::sqrt(dgrad);
    return r;
}

double fit_slope(std::span<const double> h, std::span<const double> errors)
{
    if (h.size() != errors.size()) {
        throw InvalidArgument("fit_slope: h and error series differ in length");
    }
    if (h.size() < 3) {
        throw InvalidArgument("rate fitting needs at least 3 records");
    }
    const std::size_t first = h.size() - 3;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = first; i < h.size(); ++i) {
        const double lx = std::log(h[i]), ly = std::log(errors[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    constexpr double m = 3.0;
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

RateFit fit_rates(std::span<const ConvergenceRecord> records)
{
    if (records.size() < 3) {
        throw InvalidArgument("rate fitting needs at least 3 records");
    }
    std::vector<double> h;
    for (const auto& r : records) h.push_back(r.h);
    const auto slope = [&](double ConvergenceRecord::*field) {
        std::vector<double> e;
        for (const auto& r : records) e.push_back(r.*field);
        return fit_slope(h, e);
    };
    RateFit fit;
    fit.l2_u = slope(&ConvergenceRecord::err_l2_u);
    fit.h1_u = slope(&ConvergenceRecord::err_h1_u);
    fit.l2_q = slope(&ConvergenceRecord::err_l2_q);
    fit.l2_gradu = slope(&ConvergenceRecord::err_l2_gradu);
    fit.unorm = slope(&ConvergenceRecord::err_unorm);
    fit.eta = slope(&ConvergenceRecord::eta);
    return fit;
}

// ---------------------------------------------------------------------------
// Point location

PointLocator::PointLocator(const Mesh& mesh) : mesh_(&mesh)
{
    lo_ = mesh.vertices().front();
    hi_ = lo_;
    for (const Vec2& v : mesh.vertices()) {
        lo_ = lo_.cwiseMin(v);
        hi_ = hi_.cwiseMax(v);
    }
    const int side = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(mesh.num_elements()))));
    nbx_ = nby_ = side;
    buckets_.resize(static_cast<std::size_t>(nbx_) * nby_);
    const Vec2 span = (hi_ - lo_).cwiseMax(Vec2(1e-300, 1e-300));
    const auto cell = [&](double t, double lo, double len, int nb) {
        return std::clamp(static_cast<int>((t - lo) / len * nb), 0, nb - 1);
    };
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        Vec2 a = mesh.vertices()[mesh.elements()[e][0]], b = a;
        for (int v : mesh.elements()[e]) {
            a = a.cwiseMin(mesh.vertices()[v]);
            b = b.cwiseMax(mesh.vertices()[v]);
        }
        const int i0 = cell(a.x(), lo_.x(), span.x(), nbx_), i1 = cell(b.x(), lo_.x(), span.x(), nbx_);
        const int j0 = cell(a.y(), lo_.y(), span.y(), nby_), j1 = cell(b.y(), lo_.y(), span.y(), nby_);
        for (int j = j0; j <= j1; ++j) {
            for (int i = i0; i <= i1; ++i) buckets_[i + nbx_ * j].push_back(static_cast<int>(e));
        }
    }
}

std::optional<PointLocator::Hit> PointLocator::search(const Vec2& x, double slack) const
{
    const Vec2 span = (hi_ - lo_).cwiseMax(Vec2(1e-300, 1e-300));
    const double tol = slack * span.maxCoeff();
    if (x.x() < lo_.x() - tol || x.x() > hi_.x() + tol || x.y() < lo_.y() - tol || x.y() > hi_.y() + tol) {
        return std::nullopt;
    }
    const int i = std::clamp(static_cast<int>((x.x() - lo_.x()) / span.x() * nbx_), 0, nbx_ - 1);
    const int j = std::clamp(static_cast<int>((x.y() - lo_.y()) / span.y() * nby_), 0, nby_ - 1);
    for (int e : buckets_[i + nbx_ * j]) {
        const auto xi = mesh_->element_map(e).inverse(x);
        if (xi && xi->cwiseAbs().maxCoeff() <= 1.0 + slack) {
            return Hit{static_cast<std::size_t>(e), xi->cwiseMax(Vec2(-1, -1)).cwiseMin(Vec2(1, 1))};
        }
    }
    return std::nullopt;
}

PointLocator::Hit PointLocator::locate(const Vec2& x) const
{
    for (double slack : {1e-10, 1e-6}) {
        if (auto hit = search(x, slack)) return *hit;
    }
    std::ostringstream msg;
    msg << "point (" << x.x() << "," << x.y() << ") lies outside the mesh";
    throw GeometryError(msg.str());
}

LineSample sample_line(const SolutionField& solution, const Vec2& a, const Vec2& b, int n)
{
    if (n < 1) {
        throw InvalidArgument("line sampling needs at least 2 points");
    }
    const PointLocator locator(solution.discretization().mesh());
    const double length = (b - a).norm();
    LineSample line;
    line.points.reserve(n + 1);
    for (int k = 0; k <= n; ++k) {
        const double t = static_cast<double>(k) / n;
        const Vec2 x = (k == n) ? b : Vec2(a + t * (b - a));
        const auto hit = locator.locate(x);
        const auto val = solution.evaluate(hit.element, hit.xi);
        line.points.push_back({t * length, x.x(), x.y(), val.u, val.q.x(), val.q.y()});
    }
    return line;
}

std::vector<double> conservation_residuals(const SolutionField& solution)
{
    const Discretization& disc = solution.discretization();
    const ReferenceTables& t = disc.tables();
    const int nt = t.trial_scalar_size();
    std::vector<double> out(disc.mesh().num_elements());
    for (std::size_t e = 0; e < out.size(); ++e) {
        const ElementMap fmap = disc.mesh().element_map(e);
        const Eigen::VectorXd x = solution.element_coefficients(e);
        const auto xu = x.segment(0, nt), xqx = x.segment(nt, nt), xqy = x.segment(2 * nt, nt);
        double balance = 0.0;
        for (int k = 0; k < 4; ++k) {
            for (std::size_t q = 0; q < t.edge_quad.points.size(); ++q) {
                const Vec2 tan = fmap.jacobian(t.edge_points[k][q]) * t.edge_direction[k];
                const Vec2 qh(t.edge_trial_val[k].row(q).dot(xqx), t.edge_trial_val[k].row(q).dot(xqy));
                balance += t.edge_quad.weights[q] * (qh.x() * tan.y() - qh.y() * tan.x());
            }
        }
        for (std::size_t q = 0; q < t.quad.size(); ++q) {
            const PointGeometry g = point_geometry(fmap, t.quad.points[q], t.quad.weights[q]);
            const Vec2 grad = g.inv_t * Vec2(t.trial_dxi.row(q).dot(xu), t.trial_deta.row(q).dot(xu));
            const double f = disc.scenario().coeffs.source(g.x);
            balance += g.weight * (f - disc.scenario().coeffs.convection(g.x).dot(grad));
        }
        out[e] = balance;
    }
    return out;
}

Eigen::VectorXd interpolate_exact(const Discretization& disc, const ExactSolution& exact)
{
    const auto& coords = disc.dofs().node_coords();
    Eigen::VectorXd out(disc.dofs().num_dofs());
    for (std::size_t n = 0; n < coords.size(); ++n) {
        const Vec2 q = exact.flux(coords[n]);
        out[TrialDofMap::dof(n, Field::u)] = exact.u(coords[n]);
        out[TrialDofMap::dof(n, Field::qx)] = q.x();
        out[TrialDofMap::dof(n, Field::qy)] = q.y();
    }
    return out;
}

// ---------------------------------------------------------------------------
// Files

namespace {

std::string fmt17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::ofstream open_for_write(const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    return out;
}

}  // namespace

void write_records_csv(const std::filesystem::path& path, std::span<const ConvergenceRecord> records)
{
    auto out = open_for_write(path);
    out << kRecordsHeader << '\n';
    for (const auto& r : records) {
        out << r.level << ',' << fmt17(r.h) << ',' << r.dofs << ',' << fmt17(r.err_l2_u) << ','
            << fmt17(r.err_h1_u) << ',' << fmt17(r.err_l2_q) << ',' << fmt17(r.err_l2_gradu) << ','
            << fmt17(r.err_unorm) << ',' << fmt17(r.eta) << '\n';
    }
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::vector<ConvergenceRecord> read_records_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "'");
    }
    std::string line;
    if (!std::getline(in, line) || line != kRecordsHeader) {
        throw IoError("'" + path.string() + "' does not start with the records header");
    }
    std::vector<ConvergenceRecord> records;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
        if (cells.size() != 9) {
            throw IoError(path.string() + ":" + std::to_string(lineno) + ": expected 9 columns");
        }
        const auto number = [&](const std::string& cell) {
            // strtod, unlike stod, accepts subnormals.
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (cell.empty() || end != cell.c_str() + cell.size()) {
                throw IoError(path.string() + ":" + std::to_string(lineno) + ": malformed number '" + cell + "'");
            }
            return v;
        };
        ConvergenceRecord r;
        r.level = static_cast<int>(number(cells[0]));
        r.h = number(cells[1]);
        r.dofs = static_cast<std::size_t>(number(cells[2]));
        r.err_l2_u = number(cells[3]);
        r.err_h1_u = number(cells[4]);
        r.err_l2_q = number(cells[5]);
        r.err_l2_gradu = number(cells[6]);
        r.err_unorm = number(cells[7]);
        r.eta = number(cells[8]);
        records.push_back(r);
    }
    return records;
}

void write_line_csv(const std::filesystem::path& path, const LineSample& line)
{
    auto out = open_for_write(path);
    out << kLineHeader << '\n';
    for (const auto& p : line.points) {
        out << fmt17(p.s) << ',' << fmt17(p.x) << ',' << fmt17(p.y) << ',' << fmt17(p.u) << ',' << fmt17(p.qx)
            << ',' << fmt17(p.qy) << '\n';
    }
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void write_solution_vtk(const std::filesystem::path& path, const SolutionField& solution)
{
    const Discretization& disc = solution.discretization();
    const TrialDofMap& dofs = disc.dofs();
    const int p = dofs.degree();
    const std::size_t ncells = disc.mesh().num_elements() * static_cast<std::size_t>(p * p);
    auto out = open_for_write(path);
    out << "# vtk DataFile Version 3.0\n"
        << "avsfe solution p=" << p << '\n'
        << "ASCII\n"
        << "DATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << dofs.num_nodes() << " double\n";
    for (const Vec2& x : dofs.node_coords()) out << fmt17(x.x()) << ' ' << fmt17(x.y()) << " 0\n";
    out << "CELLS " << ncells << ' ' << 5 * ncells << '\n';
    for (std::size_t e = 0; e < disc.mesh().num_elements(); ++e) {
        const auto& nodes = dofs.element_nodes(e);
        for (int j = 0; j < p; ++j) {
            for (int i = 0; i < p; ++i) {
                const auto id = [&](int a, int b) { return nodes[a + (p + 1) * b]; };
                out << "4 " << id(i, j) << ' ' << id(i + 1, j) << ' ' << id(i + 1, j + 1) << ' ' << id(i, j + 1)
                    << '\n';
            }
        }
    }
    out << "CELL_TYPES " << ncells << '\n';
    for (std::size_t c = 0; c < ncells; ++c) out << "9\n";
    out << "POINT_DATA " << dofs.num_nodes() << '\n';
    const char* names[] = {"u", "qx", "qy"};
    for (int f = 0; f < kNumFields; ++f) {
        out << "SCALARS " << names[f] << " double 1\nLOOKUP_TABLE default\n";
        for (std::size_t n = 0; n < dofs.num_nodes(); ++n) {
            out << fmt17(solution.coefficients()[TrialDofMap::dof(n, static_cast<Field>(f))]) << '\n';
        }
    }
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace avsfe
