#include "avsfe/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <utility>

#include "avsfe/error.hpp"

namespace avsfe {

const char* to_string(BoundaryTag tag)
{
    switch (tag) {
    case BoundaryTag::interior: return "interior";
    case BoundaryTag::dirichlet: return "dirichlet";
    case BoundaryTag::neumann: return "neumann";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// ElementMap

ElementMap::ElementMap(const std::array<Vec2, 4>& corners) : corners_(corners) {}

Vec2 ElementMap::map(const Vec2& xi) const
{
    const double a = 1.0 - xi.x(), b = 1.0 + xi.x();
    const double c = 1.0 - xi.y(), d = 1.0 + xi.y();
    return 0.25 * (a * c * corners_[0] + b * c * corners_[1] + b * d * corners_[2] + a * d * corners_[3]);
}

Mat2 ElementMap::jacobian(const Vec2& xi) const
{
    const double c = 1.0 - xi.y(), d = 1.0 + xi.y();
    const double a = 1.0 - xi.x(), b = 1.0 + xi.x();
    Mat2 jac;
    jac.col(0) = 0.25 * (-c * corners_[0] + c * corners_[1] + d * corners_[2] - d * corners_[3]);
    jac.col(1) = 0.25 * (-a * corners_[0] - b * corners_[1] + b * corners_[2] + a * corners_[3]);
    return jac;
}

std::optional<Vec2> ElementMap::inverse(const Vec2& x, double tol) const
{
    const double scale = std::max(diameter(), 1e-300);
    Vec2 xi = Vec2::Zero();
    for (int it = 0; it < 60; ++it) {
        const Vec2 r = map(xi) - x;
        if (r.norm() <= tol * scale) {
            return xi;
        }
        const Mat2 jac = jacobian(xi);
        const double det = jac.determinant();
        if (!(std::abs(det) > 0.0)) {
            return std::nullopt;
        }
        xi -= jac.inverse() * r;
        if (!xi.allFinite() || xi.cwiseAbs().maxCoeff() > 1e3) {
            return std::nullopt;
        }
    }
    // Accept a slightly looser residual after the iteration budget.
    if ((map(xi) - x).norm() <= 100.0 * tol * scale) {
        return xi;
    }
    return std::nullopt;
}

double ElementMap::diameter() const
{
    double h = 0.0;
    for (int i = 0; i < 4; ++i) {
        for (int j = i + 1; j < 4; ++j) {
            h = std::max(h, (corners_[i] - corners_[j]).norm());
        }
    }
    return h;
}

double ElementMap::area() const
{
    double twice = 0.0;
    for (int k = 0; k < 4; ++k) {
        const Vec2& p = corners_[k];
        const Vec2& q = corners_[(k + 1) % 4];
        twice += p.x() * q.y() - q.x() * p.y();
    }
    return 0.5 * twice;
}

// ---------------------------------------------------------------------------
// Mesh

BoundaryTag all_dirichlet(const Vec2&, const Vec2&) { return BoundaryTag::dirichlet; }

Mesh::Mesh(std::vector<Vec2> vertices, std::vector<std::array<int, 4>> elements,
           const EdgeTagger& boundary_tagger)
    : vertices_(std::move(vertices)), elements_(std::move(elements))
{
    const int nv = static_cast<int>(vertices_.size());
    std::map<std::pair<int, int>, int> lookup;
    element_edges_.resize(elements_.size());
    for (std::size_t e = 0; e < elements_.size(); ++e) {
        const auto& el = elements_[e];
        for (int k = 0; k < 4; ++k) {
            const int a = el[k], b = el[(k + 1) % 4];
            if (a < 0 || a >= nv || b < 0 || b >= nv || a == b) {
                std::ostringstream msg;
                msg << "element " << e << " has invalid vertex indices";
                throw InvalidArgument(msg.str());
            }
            const auto key = std::minmax(a, b);
            auto [it, inserted] = lookup.try_emplace({key.first, key.second}, static_cast<int>(edges_.size()));
            if (inserted) {
                Edge edge;
                edge.vertices = {a, b};
                edge.elements = {static_cast<int>(e), -1};
                edges_.push_back(edge);
            } else {
                Edge& edge = edges_[it->second];
                if (edge.elements[1] >= 0) {
                    std::ostringstream msg;
                    msg << "edge (" << a << "," << b << ") shared by more than two elements";
                    throw GeometryError(msg.str());
                }
                edge.elements[1] = static_cast<int>(e);
            }
            element_edges_[e][k] = it->second;
        }
    }

    boundary_vertex_.assign(vertices_.size(), false);
    for (Edge& edge : edges_) {
        if (edge.on_boundary()) {
            edge.tag = boundary_tagger(vertices_[edge.vertices[0]], vertices_[edge.vertices[1]]);
            if (edge.tag == BoundaryTag::interior) {
                throw InvalidArgument("boundary tagger returned 'interior' for a boundary edge");
            }
            boundary_vertex_[edge.vertices[0]] = true;
            boundary_vertex_[edge.vertices[1]] = true;
        }
    }
}

ElementMap Mesh::element_map(std::size_t e) const
{
    const auto& el = elements_.at(e);
    return ElementMap({vertices_[el[0]], vertices_[el[1]], vertices_[el[2]], vertices_[el[3]]});
}

double Mesh::diameter(std::size_t e) const { return element_map(e).diameter(); }

double Mesh::max_diameter() const
{
    double h = 0.0;
    for (std::size_t e = 0; e < elements_.size(); ++e) {
        h = std::max(h, diameter(e));
    }
    return h;
}

double Mesh::total_area() const
{
    double sum = 0.0;
    for (std::size_t e = 0; e < elements_.size(); ++e) {
        sum += element_map(e).area();
    }
    return sum;
}

Mesh Mesh::with_boundary_tags(const EdgeTagger& tagger) const
{
    return Mesh(vertices_, elements_, tagger);
}

void Mesh::validate() const
{
    static const std::array<Vec2, 4> master{Vec2(-1, -1), Vec2(1, -1), Vec2(1, 1), Vec2(-1, 1)};
    for (std::size_t e = 0; e < elements_.size(); ++e) {
        const ElementMap fmap = element_map(e);
        for (const Vec2& xi : master) {
            if (!(fmap.det_jacobian(xi) > 0.0)) {
                std::ostringstream msg;
                msg << "element " << e << " has non-positive Jacobian at master corner (" << xi.x() << ","
                    << xi.y() << ")";
                throw GeometryError(msg.str());
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Builders

namespace {

void check_counts(int nx, int ny)
{
    if (nx < 1 || ny < 1) {
        throw InvalidArgument("mesh cell counts must be >= 1");
    }
}

// Geometric progression of `n` cells on [a,b] with last/first size = ratio.
void append_segment(std::vector<double>& xs, double a, double b, int n, double ratio)
{
    const double q = n > 1 ? std::pow(ratio, 1.0 / (n - 1)) : 1.0;
    std::vector<double> sizes(n);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        sizes[i] = std::pow(q, i);
        sum += sizes[i];
    }
    double acc = 0.0;
    for (int i = 0; i < n - 1; ++i) {
        acc += sizes[i];
        xs.push_back(a + (b - a) * acc / sum);
    }
    xs.push_back(b);
}

}  // namespace

std::vector<double> graded_coordinates(int n, double ratio, std::span<const double> breakpoints)
{
    if (n < 1) {
        throw InvalidArgument("mesh cell counts must be >= 1");
    }
    if (!(ratio > 0.0) || !std::isfinite(ratio)) {
        throw InvalidArgument("grading ratio must be positive");
    }
    std::vector<double> cuts{0.0};
    for (double c : breakpoints) {
        if (!(c > cuts.back()) || !(c < 1.0)) {
            throw InvalidArgument("grading breakpoints must be strictly increasing inside (0,1)");
        }
        cuts.push_back(c);
    }
    cuts.push_back(1.0);
    const int segments = static_cast<int>(cuts.size()) - 1;
    if (n % segments != 0) {
        std::ostringstream msg;
        msg << n << " cells cannot be split evenly over " << segments << " graded segments";
        throw InvalidArgument(msg.str());
    }
    std::vector<double> xs{0.0};
    for (int s = 0; s < segments; ++s) {
        append_segment(xs, cuts[s], cuts[s + 1], n / segments, ratio);
    }
    xs.back() = 1.0;
    return xs;
}

Mesh build_tensor(std::span<const double> xs, std::span<const double> ys)
{
    if (xs.size() < 2 || ys.size() < 2) {
        throw InvalidArgument("tensor mesh needs at least two grid lines per direction");
    }
    const int nx = static_cast<int>(xs.size()) - 1;
    const int ny = static_cast<int>(ys.size()) - 1;
    std::vector<Vec2> verts;
    verts.reserve(xs.size() * ys.size());
    for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i <= nx; ++i) {
            verts.emplace_back(xs[i], ys[j]);
        }
    }
    std::vector<std::array<int, 4>> elems;
    elems.reserve(static_cast<std::size_t>(nx) * ny);
    const auto id = [nx](int i, int j) { return i + (nx + 1) * j; };
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            elems.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    }
    Mesh mesh(std::move(verts), std::move(elems), all_dirichlet);
    mesh.validate();
    return mesh;
}

Mesh build_uniform(int nx, int ny)
{
    check_counts(nx, ny);
    std::vector<double> xs(nx + 1), ys(ny + 1);
    for (int i = 0; i <= nx; ++i) xs[i] = static_cast<double>(i) / nx;
    for (int j = 0; j <= ny; ++j) ys[j] = static_cast<double>(j) / ny;
    return build_tensor(xs, ys);
}

Mesh build_graded(int nx, int ny, double ratio, std::span<const double> breakpoints)
{
    check_counts(nx, ny);
    const auto xs = graded_coordinates(nx, ratio, breakpoints);
    const auto ys = graded_coordinates(ny, ratio, breakpoints);
    return build_tensor(xs, ys);
}

Mesh perturb_unstructured(const Mesh& mesh, double amplitude, std::uint64_t seed)
{
    if (!(amplitude >= 0.0) || !(amplitude < 0.5)) {
        throw InvalidArgument("perturbation amplitude must lie in [0, 0.5)");
    }
    std::vector<Vec2> verts = mesh.vertices();
    if (amplitude == 0.0) {
        return mesh;
    }

    const std::size_t nv = verts.size();
    std::vector<double> spacing(nv, std::numeric_limits<double>::infinity());
    for (const Edge& edge : mesh.edges()) {
        const double len = (verts[edge.vertices[0]] - verts[edge.vertices[1]]).norm();
        spacing[edge.vertices[0]] = std::min(spacing[edge.vertices[0]], len);
        spacing[edge.vertices[1]] = std::min(spacing[edge.vertices[1]], len);
    }
    std::vector<std::vector<int>> incident(nv);
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        for (int v : mesh.elements()[e]) incident[v].push_back(static_cast<int>(e));
    }

    const auto element_ok = [&](int e) {
        const auto& el = mesh.elements()[e];
        const ElementMap fmap({verts[el[0]], verts[el[1]], verts[el[2]], verts[el[3]]});
        for (const Vec2& xi : {Vec2(-1, -1), Vec2(1, -1), Vec2(1, 1), Vec2(-1, 1)}) {
            if (!(fmap.det_jacobian(xi) > 0.0)) return false;
        }
        return true;
    };

    constexpr int max_retries = 64;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    constexpr double two_pi = 6.283185307179586476925286766559;
    for (std::size_t v = 0; v < nv; ++v) {
        if (mesh.is_boundary_vertex(v)) continue;
        const Vec2 origin = verts[v];
        bool placed = false;
        for (int attempt = 0; attempt < max_retries && !placed; ++attempt) {
            const double radius = amplitude * spacing[v] * unit(rng);
            const double angle = two_pi * unit(rng);
            verts[v] = origin + radius * Vec2(std::cos(angle), std::sin(angle));
            placed = std::all_of(incident[v].begin(), incident[v].end(), element_ok);
        }
        if (!placed) {
            std::ostringstream msg;
            msg << "perturbation tangles the elements around vertex " << v << " after " << max_retries
                << " draws";
            throw GeometryError(msg.str());
        }
    }

    // Boundary tags follow the untouched boundary vertices.
    std::map<std::pair<int, int>, BoundaryTag> tags;
    for (const Edge& edge : mesh.edges()) {
        if (edge.on_boundary()) tags[std::minmax(edge.vertices[0], edge.vertices[1])] = edge.tag;
    }
    const auto& old_verts = mesh.vertices();
    std::map<std::pair<double, double>, int> by_position;
    for (std::size_t v = 0; v < nv; ++v) {
        if (mesh.is_boundary_vertex(v)) by_position[{old_verts[v].x(), old_verts[v].y()}] = static_cast<int>(v);
    }
    Mesh out(std::move(verts), mesh.elements(), [&](const Vec2& a, const Vec2& b) {
        const int ia = by_position.at({a.x(), a.y()});
        const int ib = by_position.at({b.x(), b.y()});
        return tags.at(std::minmax(ia, ib));
    });
    out.validate();
    return out;
}

Mesh refine_uniform(const Mesh& mesh)
{
    std::vector<Vec2> verts = mesh.vertices();
    std::vector<int> edge_mid(mesh.num_edges());
    for (std::size_t k = 0; k < mesh.num_edges(); ++k) {
        const Edge& edge = mesh.edges()[k];
        edge_mid[k] = static_cast<int>(verts.size());
        verts.push_back(0.5 * (verts[edge.vertices[0]] + verts[edge.vertices[1]]));
    }
    std::vector<std::array<int, 4>> elems;
    elems.reserve(4 * mesh.num_elements());
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const auto& el = mesh.elements()[e];
        const auto& ed = mesh.element_edges(e);
        const int center = static_cast<int>(verts.size());
        verts.push_back(mesh.element_map(e).map(Vec2::Zero()));
        const int m0 = edge_mid[ed[0]], m1 = edge_mid[ed[1]], m2 = edge_mid[ed[2]], m3 = edge_mid[ed[3]];
        elems.push_back({el[0], m0, center, m3});
        elems.push_back({m0, el[1], m1, center});
        elems.push_back({center, m1, el[2], m2});
        elems.push_back({m3, center, m2, el[3]});
    }

    // Child boundary edges inherit the tag of the parent edge they lie on.
    std::map<std::pair<int, int>, BoundaryTag> child_tags;
    for (std::size_t k = 0; k < mesh.num_edges(); ++k) {
        const Edge& edge = mesh.edges()[k];
        if (!edge.on_boundary()) continue;
        child_tags[std::minmax(edge.vertices[0], edge_mid[k])] = edge.tag;
        child_tags[std::minmax(edge.vertices[1], edge_mid[k])] = edge.tag;
    }
    std::map<std::pair<double, double>, int> by_position;
    for (const auto& [key, tag] : child_tags) {
        by_position[{verts[key.first].x(), verts[key.first].y()}] = key.first;
        by_position[{verts[key.second].x(), verts[key.second].y()}] = key.second;
    }
    Mesh out(std::move(verts), std::move(elems), [&](const Vec2& a, const Vec2& b) {
        const int ia = by_position.at({a.x(), a.y()});
        const int ib = by_position.at({b.x(), b.y()});
        return child_tags.at(std::minmax(ia, ib));
    });
    return out;
}

void write_vtk(const Mesh& mesh, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    out.precision(17);
    out << "# vtk DataFile Version 3.0\n"
        << "avsfe mesh\n"
        << "ASCII\n"
        << "DATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << mesh.num_vertices() << " double\n";
    for (const Vec2& v : mesh.vertices()) out << v.x() << ' ' << v.y() << " 0\n";
    out << "CELLS " << mesh.num_elements() << ' ' << 5 * mesh.num_elements() << '\n';
    for (const auto& el : mesh.elements()) out << "4 " << el[0] << ' ' << el[1] << ' ' << el[2] << ' ' << el[3] << '\n';
    out << "CELL_TYPES " << mesh.num_elements() << '\n';
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) out << "9\n";
    if (!out) {
        throw IoError("failed writing '" + path.string() + "'");
    }
}

}  // namespace avsfe
