#pragma once

#include <functional>
#include <optional>
#include <ostream>
#include <vector>

#include "avsfe/analysis.hpp"
#include "avsfe/config.hpp"
#include "avsfe/mesh.hpp"
#include "avsfe/solver.hpp"

namespace avsfe {

/// Level-0 mesh described by the config. Graded meshes split their
/// grading at the scenario's coefficient discontinuities.
Mesh build_initial_mesh(const RunConfig& config, const Scenario& scenario);

/// Mesh of `level` (>= 1) from the previous one: uniform refinement, then
/// a fresh perturbation for unstructured meshes.
Mesh next_level_mesh(const Mesh& previous, const RunConfig& config, int level);

struct LevelResult {
    ConvergenceRecord record;
    std::size_t elements = 0;
    std::size_t free_dofs = 0;
    double symmetry_defect = 0.0;
    double max_abs_u = 0.0;
    bool finite = true;
    double max_conservation_residual = 0.0;
    SolveReport solve;
    double assemble_seconds = 0.0;
    double post_seconds = 0.0;
};

struct StudyResult {
    std::vector<LevelResult> levels;
    /// Present when the scenario has an exact solution and >= 3 levels ran.
    std::optional<RateFit> rates;

    [[nodiscard]] std::vector<ConvergenceRecord> records() const;
};

using LevelCallback = std::function<void(const LevelResult&, const SolutionField&)>;

/// Runs levels 0..config.total_refinements(). When config.out_dir is set,
/// writes records.csv, run.log, per-level VTK and line CSVs there.
/// Progress lines go to `log` if given. Solver failures propagate as
/// SolverError after the log is flushed.
StudyResult run_study(const RunConfig& config, std::ostream* log = nullptr, const LevelCallback& on_level = {});

}  // namespace avsfe
