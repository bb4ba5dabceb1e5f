#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>

namespace avsfe {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

enum class BoundaryTag : std::uint8_t { interior, dirichlet, neumann };

const char* to_string(BoundaryTag tag);

struct Edge {
    std::array<int, 2> vertices{};
    /// Owning elements; second entry is -1 on the boundary.
    std::array<int, 2> elements{-1, -1};
    BoundaryTag tag = BoundaryTag::interior;

    [[nodiscard]] bool on_boundary() const noexcept { return elements[1] < 0; }
};

/// Bilinear map from the master square [-1,1]^2 onto a quadrilateral.
///
/// Corner k of the master element maps onto corners[k], with the master
/// corners ordered counter-clockwise starting at (-1,-1).
class ElementMap {
public:
    ElementMap() = default;
    explicit ElementMap(const std::array<Vec2, 4>& corners);

    [[nodiscard]] Vec2 map(const Vec2& xi) const;
    /// Columns are dx/dxi and dx/deta.
    [[nodiscard]] Mat2 jacobian(const Vec2& xi) const;
    [[nodiscard]] double det_jacobian(const Vec2& xi) const { return jacobian(xi).determinant(); }

    /// Newton inversion of the map. Returns master coordinates when the
    /// iteration converges; the caller decides whether the point is inside.
    [[nodiscard]] std::optional<Vec2> inverse(const Vec2& x, double tol = 1e-12) const;

    [[nodiscard]] double diameter() const;
    [[nodiscard]] double area() const;
    [[nodiscard]] const std::array<Vec2, 4>& corners() const noexcept { return corners_; }

private:
    std::array<Vec2, 4> corners_{};
};

/// Quadrilateral partition of a planar domain with tagged boundary edges.
///
/// Elements list their 4 vertices counter-clockwise; local edge k joins
/// local vertices k and (k+1)%4. Immutable after construction.
class Mesh {
public:
    using EdgeTagger = std::function<BoundaryTag(const Vec2& a, const Vec2& b)>;

    Mesh(std::vector<Vec2> vertices, std::vector<std::array<int, 4>> elements,
         const EdgeTagger& boundary_tagger);

    [[nodiscard]] std::size_t num_vertices() const noexcept { return vertices_.size(); }
    [[nodiscard]] std::size_t num_elements() const noexcept { return elements_.size(); }
    [[nodiscard]] std::size_t num_edges() const noexcept { return edges_.size(); }

    [[nodiscard]] const std::vector<Vec2>& vertices() const noexcept { return vertices_; }
    [[nodiscard]] const std::vector<std::array<int, 4>>& elements() const noexcept { return elements_; }
    [[nodiscard]] const std::vector<Edge>& edges() const noexcept { return edges_; }
    [[nodiscard]] const std::array<int, 4>& element_edges(std::size_t e) const { return element_edges_.at(e); }

    /// Tag of local edge k of element e.
    [[nodiscard]] BoundaryTag edge_tag(std::size_t e, int k) const { return edges_[element_edges_.at(e)[k]].tag; }

    [[nodiscard]] ElementMap element_map(std::size_t e) const;
    /// Max pairwise vertex distance.
    [[nodiscard]] double diameter(std::size_t e) const;
    [[nodiscard]] double max_diameter() const;
    [[nodiscard]] double total_area() const;

    [[nodiscard]] bool is_boundary_vertex(std::size_t v) const { return boundary_vertex_.at(v); }

    /// Same geometry with every boundary edge re-tagged.
    [[nodiscard]] Mesh with_boundary_tags(const EdgeTagger& tagger) const;

    /// Throws GeometryError naming the first element with a non-positive
    /// Jacobian determinant at a corner.
    void validate() const;

private:
    std::vector<Vec2> vertices_;
    std::vector<std::array<int, 4>> elements_;
    std::vector<Edge> edges_;
    std::vector<std::array<int, 4>> element_edges_;
    std::vector<bool> boundary_vertex_;
};

/// Boundary tagger assigning dirichlet to every boundary edge.
BoundaryTag all_dirichlet(const Vec2&, const Vec2&);

/// Grid line positions on [0,1] for `n` cells.
///
/// The interval is split at `breakpoints` into segments that share the
/// cells evenly; inside each segment cell sizes follow a geometric
/// progression whose last cell is `ratio` times the first.
std::vector<double> graded_coordinates(int n, double ratio, std::span<const double> breakpoints = {});

Mesh build_uniform(int nx, int ny);
Mesh build_graded(int nx, int ny, double ratio, std::span<const double> breakpoints = {});
/// Tensor mesh on the given grid lines (both strictly increasing from 0 to 1).
Mesh build_tensor(std::span<const double> xs, std::span<const double> ys);

/// Seeded random displacement of interior vertices by at most
/// amplitude times the shortest incident edge. Draws that tangle an
/// adjacent element are redrawn; GeometryError after the retry budget.
Mesh perturb_unstructured(const Mesh& mesh, double amplitude, std::uint64_t seed);

/// Splits each quad into four through its edge midpoints and center.
Mesh refine_uniform(const Mesh& mesh);

/// Legacy ASCII VTK unstructured grid of the element corners (cell type 9).
void write_vtk(const Mesh& mesh, const std::filesystem::path& path);

}  // namespace avsfe
