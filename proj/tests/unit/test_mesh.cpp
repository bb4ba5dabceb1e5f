#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "avsfe/error.hpp"
#include "avsfe/mesh.hpp"

using namespace avsfe;

namespace {

double corner_jacobian_min(const Mesh& mesh)
{
    double lo = 1e300;
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const ElementMap f = mesh.element_map(e);
        for (double a : {-1.0, 1.0}) {
            for (double b : {-1.0, 1.0}) lo = std::min(lo, f.det_jacobian(Vec2(a, b)));
        }
    }
    return lo;
}

// Geometric sizes s, s r^(1/(n-1)), ... normalised to sum to `length`.
std::vector<double> geometric_oracle(int n, double ratio, double start, double length)
{
    const double q = n > 1 ? std::pow(ratio, 1.0 / (n - 1)) : 1.0;
    std::vector<double> sizes(n);
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += sizes[i] = std::pow(q, i);
    std::vector<double> lines{start};
    for (int i = 0; i < n; ++i) lines.push_back(lines.back() + length * sizes[i] / total);
    return lines;
}

}  // namespace

TEST(Mesh, UniformCounts)
{
    const Mesh one = build_uniform(1, 1);
    EXPECT_EQ(one.num_elements(), 1u);
    EXPECT_EQ(one.num_vertices(), 4u);
    EXPECT_NEAR(one.total_area(), 1.0, 1e-14);

    const Mesh four = build_uniform(2, 2);
    EXPECT_EQ(four.num_elements(), 4u);
    EXPECT_EQ(four.num_vertices(), 9u);
    EXPECT_EQ(four.num_edges(), 12u);
}

TEST(Mesh, RejectsBadCounts)
{
    EXPECT_THROW(build_uniform(0, 2), InvalidArgument);
    EXPECT_THROW(build_uniform(2, -1), InvalidArgument);
    EXPECT_THROW(build_graded(2, 2, 0.0), InvalidArgument);
    EXPECT_THROW(build_graded(2, 2, -1.0), InvalidArgument);
}

TEST(Mesh, EdgesAndTags)
{
    const Mesh m = build_uniform(3, 2);
    int boundary = 0;
    for (const Edge& e : m.edges()) {
        if (e.on_boundary()) {
            ++boundary;
            EXPECT_EQ(e.tag, BoundaryTag::dirichlet);
        } else {
            EXPECT_EQ(e.tag, BoundaryTag::interior);
            EXPECT_GE(e.elements[0], 0);
            EXPECT_GE(e.elements[1], 0);
        }
    }
    EXPECT_EQ(boundary, 2 * (3 + 2));
}

TEST(Mesh, ElementMapCorners)
{
    const Mesh m = build_graded(3, 3, 0.3);
    const std::array<Vec2, 4> master{Vec2(-1, -1), Vec2(1, -1), Vec2(1, 1), Vec2(-1, 1)};
    for (std::size_t e = 0; e < m.num_elements(); ++e) {
        const ElementMap f = m.element_map(e);
        for (int k = 0; k < 4; ++k) {
            EXPECT_LT((f.map(master[k]) - m.vertices()[m.elements()[e][k]]).norm(), 1e-15);
        }
    }
}

TEST(Mesh, ElementMapInverse)
{
    const Mesh m = perturb_unstructured(build_uniform(4, 4), 0.3, 7);
    const ElementMap f = m.element_map(5);
    const Vec2 xi(0.3, -0.7);
    const auto back = f.inverse(f.map(xi));
    ASSERT_TRUE(back.has_value());
    EXPECT_LT((*back - xi).norm(), 1e-12);
}

TEST(Mesh, AreaSumsToOne)
{
    for (const Mesh& m : {build_uniform(5, 3), build_graded(4, 4, 0.1), build_graded(6, 2, 7.0),
                          perturb_unstructured(build_uniform(6, 6), 0.3, 11), refine_uniform(build_graded(2, 2, 0.2))}) {
        EXPECT_NEAR(m.total_area(), 1.0, 1e-12);
        EXPECT_GT(corner_jacobian_min(m), 0.0);
    }
}

TEST(Mesh, GradedRatioOneIsUniform)
{
    const Mesh a = build_graded(2, 2, 1.0);
    const Mesh b = build_uniform(2, 2);
    ASSERT_EQ(a.num_vertices(), b.num_vertices());
    for (std::size_t v = 0; v < a.num_vertices(); ++v) {
        EXPECT_LT((a.vertices()[v] - b.vertices()[v]).norm(), 1e-15);
    }
}

TEST(Mesh, GradedInteriorLine)
{
    const auto xs = graded_coordinates(2, 0.1);
    ASSERT_EQ(xs.size(), 3u);
    EXPECT_NEAR(xs[1], 1.0 / 1.1, 1e-15);

    for (int n : {3, 5, 8}) {
        for (double r : {0.05, 0.5, 4.0}) {
            const auto got = graded_coordinates(n, r);
            const auto want = geometric_oracle(n, r, 0.0, 1.0);
            ASSERT_EQ(got.size(), want.size());
            for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-14);
            EXPECT_NEAR((got[n] - got[n - 1]) / (got[1] - got[0]), r, 1e-12);
        }
    }
}

TEST(Mesh, GradedBreakpoints)
{
    const std::vector<double> bp{0.5};
    const auto xs = graded_coordinates(4, 0.25, bp);
    ASSERT_EQ(xs.size(), 5u);
    EXPECT_DOUBLE_EQ(xs[2], 0.5);
    const auto left = geometric_oracle(2, 0.25, 0.0, 0.5);
    const auto right = geometric_oracle(2, 0.25, 0.5, 0.5);
    EXPECT_NEAR(xs[1], left[1], 1e-15);
    EXPECT_NEAR(xs[3], right[1], 1e-15);
}

TEST(Mesh, PerturbationZeroAmplitudeIsIdentity)
{
    const Mesh base = build_uniform(4, 4);
    const Mesh same = perturb_unstructured(base, 0.0, 99);
    for (std::size_t v = 0; v < base.num_vertices(); ++v) EXPECT_EQ(base.vertices()[v], same.vertices()[v]);
}

TEST(Mesh, PerturbationDeterministic)
{
    const Mesh base = build_uniform(5, 5);
    const Mesh a = perturb_unstructured(base, 0.3, 42);
    const Mesh b = perturb_unstructured(base, 0.3, 42);
    const Mesh c = perturb_unstructured(base, 0.3, 43);
    bool differs = false;
    for (std::size_t v = 0; v < base.num_vertices(); ++v) {
        EXPECT_EQ(a.vertices()[v], b.vertices()[v]);
        differs = differs || a.vertices()[v] != c.vertices()[v];
        if (base.is_boundary_vertex(v)) EXPECT_EQ(a.vertices()[v], base.vertices()[v]);
    }
    EXPECT_TRUE(differs);
}

TEST(Mesh, PerturbationBoundedByAmplitude)
{
    const Mesh base = build_uniform(4, 4);
    const Mesh moved = perturb_unstructured(base, 0.2, 3);
    for (std::size_t v = 0; v < base.num_vertices(); ++v) {
        EXPECT_LE((moved.vertices()[v] - base.vertices()[v]).norm(), 0.2 * 0.25 + 1e-15);
    }
}

TEST(Mesh, PerturbationRejectsAmplitude)
{
    EXPECT_THROW(perturb_unstructured(build_uniform(2, 2), 0.5, 1), InvalidArgument);
    EXPECT_THROW(perturb_unstructured(build_uniform(2, 2), -0.1, 1), InvalidArgument);
}

TEST(Mesh, RefineQuadruplesAndKeepsTags)
{
    const auto tagger = [](const Vec2& a, const Vec2& b) {
        return (a.y() == 0.0 && b.y() == 0.0) ? BoundaryTag::neumann : BoundaryTag::dirichlet;
    };
    const Mesh coarse = build_graded(2, 2, 0.2).with_boundary_tags(tagger);
    const Mesh fine = refine_uniform(coarse);
    EXPECT_EQ(fine.num_elements(), 4 * coarse.num_elements());
    int neumann = 0;
    for (const Edge& e : fine.edges()) {
        if (!e.on_boundary()) continue;
        const Vec2& a = fine.vertices()[e.vertices[0]];
        const Vec2& b = fine.vertices()[e.vertices[1]];
        EXPECT_EQ(e.tag, tagger(a, b));
        neumann += e.tag == BoundaryTag::neumann;
    }
    EXPECT_EQ(neumann, 4);

    // Coarse grid lines survive refinement.
    std::set<double> xs;
    for (const Vec2& v : fine.vertices()) xs.insert(v.x());
    for (const Vec2& v : coarse.vertices()) EXPECT_TRUE(xs.contains(v.x()));
    EXPECT_NEAR(fine.total_area(), 1.0, 1e-12);
}

TEST(Mesh, ValidateRejectsClockwise)
{
    std::vector<Vec2> verts{Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)};
    const Mesh flipped(verts, {{0, 3, 2, 1}}, all_dirichlet);
    EXPECT_THROW(flipped.validate(), GeometryError);
    EXPECT_NO_THROW(build_uniform(2, 2).validate());
}

TEST(Mesh, VtkExport)
{
    const auto path = std::filesystem::temp_directory_path() / "avsfe_mesh_test.vtk";
    write_vtk(build_uniform(2, 1), path);
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    EXPECT_NE(text.find("DATASET UNSTRUCTURED_GRID"), std::string::npos);
    EXPECT_NE(text.find("POINTS 6 double"), std::string::npos);
    EXPECT_NE(text.find("CELLS 2 10"), std::string::npos);
    EXPECT_NE(text.find("CELL_TYPES 2\n9\n9"), std::string::npos);
    std::filesystem::remove(path);
}
