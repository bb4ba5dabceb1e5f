#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "avsfe/problem.hpp"
#include "avsfe/solver.hpp"

namespace avsfe {

/// One row of a refinement study.
struct ConvergenceRecord {
    int level = 0;
    double h = 0.0;
    std::size_t dofs = 0;
    double err_l2_u = 0.0;
    /// Full H1 norm of u - u^h.
    double err_h1_u = 0.0;
    double err_l2_q = 0.0;
    /// H1 seminorm of u - u^h.
    double err_l2_gradu = 0.0;
    double err_unorm = 0.0;
    double eta = 0.0;
    // Not part of the records CSV.
    double err_l2_divq = 0.0;
    /// || D grad u - D grad u^h ||
    double err_l2_dgradu = 0.0;
};

/// Error norms of (u^h, q^h) against the scenario's exact solution with
/// `quad_points` Gauss points per direction (0 selects p+3). The level,
/// eta fields are left for the caller.
ConvergenceRecord error_norms(const SolutionField& solution, int quad_points = 0);

/// Least-squares slope of log(error) against log(h) over the last 3 points.
double fit_slope(std::span<const double> h, std::span<const double> errors);

struct RateFit {
    double l2_u = 0.0;
    double h1_u = 0.0;
    double l2_q = 0.0;
    double l2_gradu = 0.0;
    double unorm = 0.0;
    double eta = 0.0;
};

RateFit fit_rates(std::span<const ConvergenceRecord> records);

struct LinePoint {
    double s = 0.0;
    double x = 0.0;
    double y = 0.0;
    double u = 0.0;
    double qx = 0.0;
    double qy = 0.0;
};

struct LineSample {
    std::vector<LinePoint> points;
};

/// Locates the element and master coordinates of physical points.
class PointLocator {
public:
    explicit PointLocator(const Mesh& mesh);

    struct Hit {
        std::size_t element = 0;
        Vec2 xi = Vec2::Zero();
    };

    /// Throws GeometryError if no element contains the point.
    [[nodiscard]] Hit locate(const Vec2& x) const;

private:
    [[nodiscard]] std::optional<Hit> search(const Vec2& x, double slack) const;

    const Mesh* mesh_;
    int nbx_ = 1, nby_ = 1;
    Vec2 lo_, hi_;
    std::vector<std::vector<int>> buckets_;
};

/// n+1 equally spaced samples on the segment [a, b].
LineSample sample_line(const SolutionField& solution, const Vec2& a, const Vec2& b, int n);

/// Per element:  (integral of q^h.n over the boundary) + (integral of f - b.grad u^h).
std::vector<double> conservation_residuals(const SolutionField& solution);

/// Nodal interpolant of the exact solution pair (u, q).
Eigen::VectorXd interpolate_exact(const Discretization& disc, const ExactSolution& exact);

inline constexpr const char* kRecordsHeader = "level,h,dofs,err_l2_u,err_h1_u,err_l2_q,err_l2_gradu,err_Unorm,eta";
inline constexpr const char* kLineHeader = "s,x,y,u,qx,qy";

void write_records_csv(const std::filesystem::path& path, std::span<const ConvergenceRecord> records);
std::vector<ConvergenceRecord> read_records_csv(const std::filesystem::path& path);
void write_line_csv(const std::filesystem::path& path, const LineSample& line);

/// Legacy ASCII VTK of u, qx, qy on the degree-p nodal lattice (each
/// element split into p x p sub-quads).
void write_solution_vtk(const std::filesystem::path& path, const SolutionField& solution);

}  // namespace avsfe
