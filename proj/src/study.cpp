#include "avsfe/study.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "avsfe/error.hpp"

namespace avsfe {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<double> breakpoints_on_axis(const Scenario& scenario, int axis)
{
    std::vector<double> out;
    for (const auto& line : scenario.discontinuities) {
        if (line.axis == axis) out.push_back(line.value);
    }
    return out;
}

bool wants_diagonal(const RunConfig& config)
{
    switch (config.line) {
    case LineKind::diagonal: return true;
    case LineKind::none: return false;
    case LineKind::automatic: return config.scenario == "homogeneous" || config.scenario == "checkerboard";
    }
    return false;
}

/// Writes to both the caller's stream and the run log.
class Tee {
public:
    Tee(std::ostream* console, std::ostream* file) : console_(console), file_(file) {}

    void line(const std::string& text)
    {
        if (console_) *console_ << text << '\n' << std::flush;
        if (file_) *file_ << text << '\n' << std::flush;
    }

private:
    std::ostream* console_;
    std::ostream* file_;
};

std::string format(const char* fmt, auto... args)
{
    const int n = std::snprintf(nullptr, 0, fmt, args...);
    std::string out(static_cast<std::size_t>(n), '\0');
    std::snprintf(out.data(), out.size() + 1, fmt, args...);
    return out;
}

}  // namespace

Mesh build_initial_mesh(const RunConfig& config, const Scenario& scenario)
{
    const MeshSpec& m = config.mesh;
    Mesh mesh = [&] {
        switch (m.kind) {
        case MeshKind::graded: {
            const auto bx = breakpoints_on_axis(scenario, 0);
            const auto by = breakpoints_on_axis(scenario, 1);
            const auto xs = graded_coordinates(m.nx, m.ratio, bx);
            const auto ys = graded_coordinates(m.ny, m.ratio, by);
            return build_tensor(xs, ys);
        }
        case MeshKind::unstructured:
            return perturb_unstructured(build_uniform(m.nx, m.ny), m.amplitude, m.seed);
        case MeshKind::uniform:
            break;
        }
        return build_uniform(m.nx, m.ny);
    }();
    mesh = mesh.with_boundary_tags(scenario.boundary);
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) check_alignment(mesh, e, scenario);
    return mesh;
}

Mesh next_level_mesh(const Mesh& previous, const RunConfig& config, int level)
{
    Mesh refined = refine_uniform(previous);
    if (config.mesh.kind == MeshKind::unstructured && config.mesh.amplitude > 0.0) {
        return perturb_unstructured(refined, config.mesh.amplitude, config.mesh.seed + static_cast<std::uint64_t>(level));
    }
    return refined;
}

std::vector<ConvergenceRecord> StudyResult::records() const
{
    std::vector<ConvergenceRecord> out;
    out.reserve(levels.size());
    for (const auto& l : levels) out.push_back(l.record);
    return out;
}

StudyResult run_study(const RunConfig& config, std::ostream* log, const LevelCallback& on_level)
{
    validate_config(config);
    const Scenario scenario = make_scenario(config);

    const bool write_files = !config.out_dir.empty();
    std::ofstream run_log;
    if (write_files) {
        std::filesystem::create_directories(config.out_dir);
        run_log.open(config.out_dir / "run.log");
        if (!run_log) throw IoError("cannot write " + (config.out_dir / "run.log").string());
    }
    Tee out(log, write_files ? &run_log : nullptr);

    out.line(format("study %s: scenario %s pe=%g p=%d dp=%d test_space=%s levels=%d threads=%d", config.name.c_str(),
                    scenario.name.c_str(), config.pe, config.p, config.dp,
                    config.test_mode == TestDirichletMode::constrained ? "constrained" : "free",
                    config.total_refinements() + 1, config.threads));

    DiscretizationOptions dopts;
    dopts.degree = config.p;
    dopts.enrichment = config.dp;
    dopts.test_mode = config.test_mode;
    dopts.quad_points = config.quad_points;
    dopts.threads = config.threads;

    StudyResult result;
    const bool has_exact = scenario.exact.has_value();
    Mesh mesh = build_initial_mesh(config, scenario);

    for (int level = 0; level <= config.total_refinements(); ++level) {
        if (level > 0) mesh = next_level_mesh(mesh, config, level);

        LevelResult lr;
        auto t0 = Clock::now();
        const auto disc = make_discretization(mesh, scenario, dopts);
        const GlobalSystem system = assemble(*disc);
        lr.assemble_seconds = seconds_since(t0);
        lr.elements = mesh.num_elements();
        lr.free_dofs = system.free_to_global.size();
        lr.symmetry_defect = symmetry_defect(system.matrix);

        if (write_files && level == 0 && config.dump_element >= 0) {
            if (static_cast<std::size_t>(config.dump_element) >= mesh.num_elements()) {
                throw ConfigError("dump_element " + std::to_string(config.dump_element) + " exceeds element count");
            }
            const ElementSystem es = disc->element_system(static_cast<std::size_t>(config.dump_element));
            write_element_dump(config.out_dir / ("element_" + std::to_string(config.dump_element) + ".txt"), es,
                               optimal_test(es));
        }

        SolutionField solution = [&] {
            try {
                return solve(disc, system, config.solver);
            } catch (const SolverError& err) {
                out.line(format("level %d: solver failure: %s", level, err.what()));
                throw;
            }
        }();
        lr.solve = solution.report();

        t0 = Clock::now();
        if (has_exact) {
            lr.record = error_norms(solution);
        } else {
            const double nan = std::numeric_limits<double>::quiet_NaN();
            lr.record.err_l2_u = lr.record.err_h1_u = lr.record.err_l2_q = lr.record.err_l2_gradu = nan;
            lr.record.err_unorm = lr.record.err_l2_divq = lr.record.err_l2_dgradu = nan;
        }
        lr.record.level = level;
        lr.record.h = mesh.max_diameter();
        lr.record.dofs = disc->dofs().num_dofs();
        lr.record.eta = energy_indicator(solution).global;
        lr.max_abs_u = solution.max_abs_u();
        lr.finite = solution.all_finite();
        for (double r : conservation_residuals(solution)) {
            lr.max_conservation_residual = std::max(lr.max_conservation_residual, std::abs(r));
        }

        if (write_files) {
            const std::string tag = "level" + std::to_string(level);
            if (config.write_vtk) write_solution_vtk(config.out_dir / ("solution_" + tag + ".vtk"), solution);
            if (wants_diagonal(config)) {
                write_line_csv(config.out_dir / ("line_diagonal_" + tag + ".csv"),
                               sample_line(solution, Vec2(0.0, 0.0), Vec2(1.0, 1.0), config.line_samples));
            }
        }
        lr.post_seconds = seconds_since(t0);

        out.line(format("level %d: elements=%zu dofs=%zu free=%zu h=%.6g", level, lr.elements, lr.record.dofs,
                        lr.free_dofs, lr.record.h));
        out.line(format("  solver=%s iterations=%ld residual=%.3e symmetry=%.3e", lr.solve.method.c_str(),
                        lr.solve.iterations, lr.solve.relative_residual, lr.symmetry_defect));
        out.line(format("  max|u|=%.6g eta=%.6e max_conservation=%.3e", lr.max_abs_u, lr.record.eta,
                        lr.max_conservation_residual));
        if (has_exact) {
            out.line(format("  L2(u)=%.6e H1(u)=%.6e L2(q)=%.6e L2(grad u)=%.6e L2(D grad u)=%.6e U=%.6e",
                            lr.record.err_l2_u, lr.record.err_h1_u, lr.record.err_l2_q, lr.record.err_l2_gradu,
                            lr.record.err_l2_dgradu, lr.record.err_unorm));
        }
        out.line(format("  time: assemble=%.3fs solve=%.3fs post=%.3fs", lr.assemble_seconds, lr.solve.seconds,
                        lr.post_seconds));

        result.levels.push_back(lr);
        if (on_level) on_level(result.levels.back(), solution);
    }

    const auto records = result.records();
    if (write_files) write_records_csv(config.out_dir / "records.csv", records);

    if (has_exact && records.size() >= 3) {
        result.rates = fit_rates(records);
        const RateFit& r = *result.rates;
        out.line(format("slopes (last 3 levels): L2(u)=%.3f H1(u)=%.3f L2(q)=%.3f L2(grad u)=%.3f U=%.3f eta=%.3f",
                        r.l2_u, r.h1_u, r.l2_q, r.l2_gradu, r.unorm, r.eta));
    }
    return result;
}

}  // namespace avsfe
