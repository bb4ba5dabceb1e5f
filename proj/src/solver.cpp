#include "avsfe/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <thread>

#include <Eigen/Cholesky>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>

#include "avsfe/error.hpp"

namespace avsfe {

Discretization::Discretization(const Mesh& mesh, Scenario scenario, const DiscretizationOptions& options)
    : mesh_(mesh.with_boundary_tags(scenario.boundary)),
      dofs_(mesh_, options.degree),
      scenario_(std::move(scenario)),
      options_(options),
      tables_(make_reference_tables(options.degree, options.enrichment, options.quad_points)),
      trial_basis_(options.degree)
{
    if (options.threads < 1) {
        throw InvalidArgument("thread count must be >= 1");
    }
}

TestSpaceLocal Discretization::test_space(std::size_t element) const
{
    return make_test_space(mesh_, element, tables_.test_degree, options_.test_mode);
}

ElementSystem Discretization::element_system(std::size_t element) const
{
    return avsfe::element_system(mesh_, element, tables_, scenario_, test_space(element));
}

std::shared_ptr<const Discretization> make_discretization(const Mesh& mesh, Scenario scenario,
                                                          const DiscretizationOptions& options)
{
    return std::make_shared<const Discretization>(mesh, std::move(scenario), options);
}

// ---------------------------------------------------------------------------

namespace {

// Runs fn(e) -> T for e in [begin, end) on `threads` workers; results
// come back in element order.
template <typename T, typename Fn>
std::vector<T> map_elements(std::size_t begin, std::size_t end, int threads, Fn&& fn)
{
    std::vector<T> out(end - begin);
    if (threads <= 1 || end - begin < 2) {
        for (std::size_t e = begin; e < end; ++e) out[e - begin] = fn(e);
        return out;
    }
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (std::size_t e = begin + t; e < end; e += threads) out[e - begin] = fn(e);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    pool.clear();
    for (auto& err : errors) {
        if (err) std::rethrow_exception(err);
    }
    return out;
}

SparseMatrix sparsity_pattern(const TrialDofMap& dofs, const std::vector<int>& global_to_free, int num_free)
{
    const std::size_t nn = dofs.num_nodes();
    std::vector<std::vector<int>> adjacency(nn);
    for (std::size_t e = 0; e < dofs.num_elements(); ++e) {
        const auto& nodes = dofs.element_nodes(e);
        for (int n : nodes) {
            auto& row = adjacency[n];
            row.insert(row.end(), nodes.begin(), nodes.end());
        }
    }
    std::size_t nnz = 0;
    for (auto& row : adjacency) {
        std::sort(row.begin(), row.end());
        row.erase(std::unique(row.begin(), row.end()), row.end());
        nnz += row.size() * kNumFields;
    }

    SparseMatrix a(num_free, num_free);
    std::vector<int> outer(num_free + 1, 0);
    std::vector<int> inner;
    inner.reserve(nnz * kNumFields);
    int col = 0;
    for (std::size_t n = 0; n < nn; ++n) {
        for (int f = 0; f < kNumFields; ++f) {
            if (global_to_free[TrialDofMap::dof(n, static_cast<Field>(f))] < 0) continue;
            for (int m : adjacency[n]) {
                for (int g = 0; g < kNumFields; ++g) {
                    const int row = global_to_free[TrialDofMap::dof(m, static_cast<Field>(g))];
                    if (row >= 0) inner.push_back(row);
                }
            }
            outer[++col] = static_cast<int>(inner.size());
        }
    }
    a.resizeNonZeros(static_cast<Eigen::Index>(inner.size()));
    std::copy(outer.begin(), outer.end(), a.outerIndexPtr());
    std::copy(inner.begin(), inner.end(), a.innerIndexPtr());
    std::fill(a.valuePtr(), a.valuePtr() + inner.size(), 0.0);
    return a;
}

double& entry(SparseMatrix& a, int row, int col)
{
    int* first = a.innerIndexPtr() + a.outerIndexPtr()[col];
    int* last = a.innerIndexPtr() + a.outerIndexPtr()[col + 1];
    int* it = std::lower_bound(first, last, row);
    return a.valuePtr()[it - a.innerIndexPtr()];
}

}  // namespace

GlobalSystem assemble(const Discretization& disc)
{
    const TrialDofMap& dofs = disc.dofs();
    const std::size_t ndof = dofs.num_dofs();
    GlobalSystem sys;
    sys.global_to_free.assign(ndof, 0);
    sys.prescribed = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ndof));
    const auto& coords = dofs.node_coords();
    for (int node : dofs.dirichlet_nodes()) {
        const std::size_t d = TrialDofMap::dof(node, Field::u);
        sys.global_to_free[d] = -1;
        sys.prescribed[static_cast<Eigen::Index>(d)] = disc.scenario().coeffs.dirichlet(coords[node]);
    }
    int next = 0;
    for (std::size_t d = 0; d < ndof; ++d) {
        if (sys.global_to_free[d] < 0) continue;
        sys.global_to_free[d] = next++;
        sys.free_to_global.push_back(static_cast<int>(d));
    }
    sys.num_constrained = ndof - sys.free_to_global.size();
    sys.matrix = sparsity_pattern(dofs, sys.global_to_free, next);
    sys.rhs = Eigen::VectorXd::Zero(next);

    const std::size_t ne = disc.mesh().num_elements();
    constexpr std::size_t block = 512;
    for (std::size_t begin = 0; begin < ne; begin += block) {
        const std::size_t end = std::min(ne, begin + block);
        const auto condensed = map_elements<CondensedElement>(
            begin, end, disc.options().threads, [&](std::size_t e) { return condense(disc.element_system(e)); });
        // Serial scatter in element order keeps the sums reproducible.
        for (std::size_t e = begin; e < end; ++e) {
            const CondensedElement& ce = condensed[e - begin];
            const std::vector<int> gather = dofs.gather(e);
            const int n = static_cast<int>(gather.size());
            for (int j = 0; j < n; ++j) {
                const int cj = sys.global_to_free[gather[j]];
                if (cj < 0) {
                    const double value = sys.prescribed[gather[j]];
                    if (value == 0.0) continue;
                    for (int i = 0; i < n; ++i) {
                        const int ri = sys.global_to_free[gather[i]];
                        if (ri >= 0) sys.rhs[ri] -= ce.stiffness(i, j) * value;
                    }
                    continue;
                }
                for (int i = 0; i < n; ++i) {
                    const int ri = sys.global_to_free[gather[i]];
                    if (ri >= 0) entry(sys.matrix, ri, cj) += ce.stiffness(i, j);
                }
            }
            for (int i = 0; i < n; ++i) {
                const int ri = sys.global_to_free[gather[i]];
                if (ri >= 0) sys.rhs[ri] += ce.rhs[i];
            }
        }
    }
    return sys;
}

double symmetry_defect(const SparseMatrix& a)
{
    const SparseMatrix at = a.transpose();
    const SparseMatrix diff = a - at;
    double dmax = 0.0, amax = 0.0;
    for (Eigen::Index k = 0; k < diff.nonZeros(); ++k) dmax = std::max(dmax, std::abs(diff.valuePtr()[k]));
    for (Eigen::Index k = 0; k < a.nonZeros(); ++k) amax = std::max(amax, std::abs(a.valuePtr()[k]));
    return amax > 0.0 ? dmax / amax : 0.0;
}

Eigen::VectorXd solve_system(const GlobalSystem& system, const SolverOptions& options, SolveReport* report)
{
    const auto start = std::chrono::steady_clock::now();
    const SparseMatrix& a = system.matrix;
    const Eigen::Index n = a.rows();
    SolveReport local;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);

    const bool direct = options.kind == SolverKind::direct ||
                        (options.kind == SolverKind::automatic && static_cast<std::size_t>(n) <= options.direct_max_dofs);
    if (n > 0 && direct) {
        local.method = "sparse-cholesky";
        Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> llt(a);
        if (llt.info() != Eigen::Success) {
            // Locate the first non-positive pivot for the diagnostic.
            Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt(a);
            std::ostringstream msg;
            msg << "sparse Cholesky failed: matrix is not positive definite";
            if (ldlt.info() == Eigen::Success) {
                const Eigen::VectorXd d = ldlt.vectorD();
                const Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> inverse =
                    ldlt.permutationP().inverse();
                for (Eigen::Index k = 0; k < d.size(); ++k) {
                    if (!(d[k] > 0.0)) {
                        const int original = inverse.indices()[k];
                        msg << " (first non-positive pivot " << d[k] << " at global dof "
                            << system.free_to_global[original] << ")";
                        break;
                    }
                }
            }
            throw SolverError(msg.str());
        }
        x = llt.solve(system.rhs);
        // One refinement step; heterogeneous diffusion makes A badly scaled.
        const Eigen::VectorXd r = system.rhs - a * x;
        x += llt.solve(r);
        local.iterations = 2;
    } else if (n > 0) {
        local.method = "cg-jacobi";
        Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
        cg.setTolerance(options.cg_tolerance);
        cg.setMaxIterations(20 * n);
        cg.compute(a);
        x = cg.solve(system.rhs);
        local.iterations = cg.iterations();
        if (cg.info() != Eigen::Success) {
            std::ostringstream msg;
            msg << "conjugate gradient did not converge in " << cg.iterations() << " iterations (estimated error "
                << cg.error() << ")";
            throw SolverError(msg.str());
        }
    } else {
        local.method = "empty";
    }

    const double bnorm = system.rhs.norm();
    local.relative_residual = bnorm > 0.0 ? (a * x - system.rhs).norm() / bnorm : (a * x).norm();
    local.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!x.allFinite()) {
        throw SolverError("linear solve produced non-finite values");
    }
    if (report) *report = local;
    return x;
}

// ---------------------------------------------------------------------------

SolutionField::SolutionField(std::shared_ptr<const Discretization> disc, Eigen::VectorXd coefficients,
                             SolveReport report)
    : disc_(std::move(disc)), coefficients_(std::move(coefficients)), report_(std::move(report))
{
    if (static_cast<std::size_t>(coefficients_.size()) != disc_->dofs().num_dofs()) {
        throw InvalidArgument("coefficient vector length does not match the dof map");
    }
}

Eigen::VectorXd SolutionField::element_coefficients(std::size_t element) const
{
    const std::vector<int> gather = disc_->dofs().gather(element);
    Eigen::VectorXd x(gather.size());
    for (std::size_t i = 0; i < gather.size(); ++i) x[i] = coefficients_[gather[i]];
    return x;
}

SolutionField::PointValue SolutionField::evaluate(std::size_t element, const Vec2& xi) const
{
    const ShapeValues s = shape_eval(disc_->trial_basis(), xi);
    const ElementMap fmap = disc_->mesh().element_map(element);
    const Mat2 inv_t = fmap.jacobian(xi).inverse().transpose();
    const Eigen::MatrixX2d grads = s.gradients * inv_t.transpose();  // rows: physical gradients
    const Eigen::VectorXd x = element_coefficients(element);
    const Eigen::Index nt = s.values.size();
    PointValue out;
    out.u = s.values.dot(x.segment(0, nt));
    out.grad_u = grads.transpose() * x.segment(0, nt);
    out.q = Vec2(s.values.dot(x.segment(nt, nt)), s.values.dot(x.segment(2 * nt, nt)));
    out.div_q = grads.col(0).dot(x.segment(nt, nt)) + grads.col(1).dot(x.segment(2 * nt, nt));
    return out;
}

double SolutionField::max_abs_u() const
{
    double m = 0.0;
    for (std::size_t n = 0; n < disc_->dofs().num_nodes(); ++n) {
        m = std::max(m, std::abs(coefficients_[TrialDofMap::dof(n, Field::u)]));
    }
    return m;
}

SolutionField solve(const std::shared_ptr<const Discretization>& disc, const GlobalSystem& system,
                    const SolverOptions& options)
{
    SolveReport report;
    const Eigen::VectorXd x = solve_system(system, options, &report);
    Eigen::VectorXd full = system.prescribed;
    for (std::size_t k = 0; k < system.free_to_global.size(); ++k) full[system.free_to_global[k]] = x[k];
    return SolutionField(disc, std::move(full), std::move(report));
}

ErrorIndicatorField energy_indicator(const SolutionField& solution)
{
    const Discretization& disc = solution.discretization();
    const std::size_t ne = disc.mesh().num_elements();
    ErrorIndicatorField out;
    out.element_values = map_elements<double>(0, ne, disc.options().threads, [&](std::size_t e) {
        const ElementSystem es = disc.element_system(e);
        const Eigen::VectorXd r = es.load - es.bform * solution.element_coefficients(e);
        Eigen::LLT<Eigen::MatrixXd> llt(es.gram);
        if (llt.info() != Eigen::Success) {
            std::ostringstream msg;
            msg << "element " << e << ": Gram matrix is not positive definite";
            throw SolverError(msg.str());
        }
        return std::sqrt(std::max(0.0, r.dot(llt.solve(r))));
    });
    double sum = 0.0;
    for (double v : out.element_values) sum += v * v;
    out.global = std::sqrt(sum);
    return out;
}

}  // namespace avsfe
