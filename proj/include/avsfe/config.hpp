#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>

#include "avsfe/fe_space.hpp"
#include "avsfe/problem.hpp"
#include "avsfe/solver.hpp"

namespace avsfe {

enum class MeshKind { uniform, graded, unstructured };

struct MeshSpec {
    MeshKind kind = MeshKind::uniform;
    int nx = 4;
    int ny = 4;
    /// Size of the last cell over the first within each graded segment.
    double ratio = 1.0;
    std::uint64_t seed = 1;
    double amplitude = 0.0;
};

enum class LineKind { automatic, diagonal, none };

/// Everything needed to run one refinement study.
///
/// File format: `[section]` headers followed by `key = value` lines;
/// `#` starts a comment. Unknown sections or keys are rejected.
struct RunConfig {
    std::string name = "study";

    // [scenario]
    std::string scenario = "manufactured";
    double pe = 10.0;
    QuadrantMask mask = kDefaultCheckerboard;

    // [mesh]
    MeshSpec mesh;

    // [discretization]
    int p = 1;
    int dp = 0;
    TestDirichletMode test_mode = TestDirichletMode::constrained;
    int quad_points = 0;

    // [study]
    int refinements = 0;
    /// Levels beyond `refinements`, run only when `deep` is set.
    int extra_refinements = 0;
    bool deep = false;
    LineKind line = LineKind::automatic;
    int line_samples = 1000;

    // [solver]
    SolverOptions solver;

    // [output]
    bool write_vtk = true;
    int dump_element = -1;

    // Command-line only.
    std::filesystem::path out_dir;
    int threads = 1;
    bool deterministic = true;

    [[nodiscard]] int total_refinements() const noexcept { return refinements + (deep ? extra_refinements : 0); }
};

/// Throws ConfigError with `source:line` diagnostics.
RunConfig parse_config(std::istream& in, const std::string& source = "<config>");
RunConfig load_config(const std::filesystem::path& path);

/// Cross-field checks (scenario name, mesh alignment, ranges).
void validate_config(const RunConfig& config);

Scenario make_scenario(const RunConfig& config);

}  // namespace avsfe
