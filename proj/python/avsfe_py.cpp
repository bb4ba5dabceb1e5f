#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "avsfe/config.hpp"
#include "avsfe/error.hpp"
#include "avsfe/study.hpp"

namespace py = pybind11;
using namespace avsfe;

namespace {

py::dict record_dict(const ConvergenceRecord& r)
{
    py::dict d;
    d["level"] = r.level;
    d["h"] = r.h;
    d["dofs"] = r.dofs;
    d["err_l2_u"] = r.err_l2_u;
    d["err_h1_u"] = r.err_h1_u;
    d["err_l2_q"] = r.err_l2_q;
    d["err_l2_gradu"] = r.err_l2_gradu;
    d["err_Unorm"] = r.err_unorm;
    d["eta"] = r.eta;
    return d;
}

ConvergenceRecord record_from(const py::dict& d)
{
    ConvergenceRecord r;
    r.level = d["level"].cast<int>();
    r.h = d["h"].cast<double>();
    r.dofs = d["dofs"].cast<std::size_t>();
    r.err_l2_u = d["err_l2_u"].cast<double>();
    r.err_h1_u = d["err_h1_u"].cast<double>();
    r.err_l2_q = d["err_l2_q"].cast<double>();
    r.err_l2_gradu = d["err_l2_gradu"].cast<double>();
    r.err_unorm = d["err_Unorm"].cast<double>();
    r.eta = d["eta"].cast<double>();
    return r;
}

py::dict rates_dict(const RateFit& r)
{
    py::dict d;
    d["err_l2_u"] = r.l2_u;
    d["err_h1_u"] = r.h1_u;
    d["err_l2_q"] = r.l2_q;
    d["err_l2_gradu"] = r.l2_gradu;
    d["err_Unorm"] = r.unorm;
    d["eta"] = r.eta;
    return d;
}

}  // namespace

PYBIND11_MODULE(_avsfe, m)
{
    m.doc() = "AVS-FE convection-diffusion solver";

    auto base = py::register_exception<Error>(m, "AvsfeError", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<SolverError>(m, "SolverError", base.ptr());

    py::class_<RunConfig>(m, "RunConfig")
        .def(py::init<>())
        .def_readwrite("name", &RunConfig::name)
        .def_readwrite("scenario", &RunConfig::scenario)
        .def_readwrite("pe", &RunConfig::pe)
        .def_readwrite("p", &RunConfig::p)
        .def_readwrite("dp", &RunConfig::dp)
        .def_readwrite("refinements", &RunConfig::refinements)
        .def_readwrite("extra_refinements", &RunConfig::extra_refinements)
        .def_readwrite("deep", &RunConfig::deep)
        .def_readwrite("line_samples", &RunConfig::line_samples)
        .def_readwrite("write_vtk", &RunConfig::write_vtk)
        .def_readwrite("threads", &RunConfig::threads)
        .def_readwrite("out_dir", &RunConfig::out_dir)
        .def_property(
            "nx", [](const RunConfig& c) { return c.mesh.nx; }, [](RunConfig& c, int v) { c.mesh.nx = v; })
        .def_property(
            "ny", [](const RunConfig& c) { return c.mesh.ny; }, [](RunConfig& c, int v) { c.mesh.ny = v; })
        .def("total_refinements", &RunConfig::total_refinements)
        .def("validate", [](const RunConfig& c) { validate_config(c); });

    m.def("load_config", &load_config, py::arg("path"));
    m.def(
        "parse_config",
        [](const std::string& text, const std::string& source) {
            std::istringstream in(text);
            return parse_config(in, source);
        },
        py::arg("text"), py::arg("source") = "<string>");

    m.def(
        "run_study",
        [](const RunConfig& config) {
            validate_config(config);
            StudyResult result;
            {
                py::gil_scoped_release release;
                result = run_study(config);
            }
            py::list records;
            for (const ConvergenceRecord& r : result.records()) records.append(record_dict(r));
            py::dict out;
            out["records"] = records;
            out["rates"] = result.rates ? py::object(rates_dict(*result.rates)) : py::object(py::none());
            py::list max_u;
            for (const LevelResult& lr : result.levels) max_u.append(lr.max_abs_u);
            out["max_abs_u"] = max_u;
            return out;
        },
        py::arg("config"), "Runs a refinement study; returns records, fitted rates and max |u| per level.");

    m.def(
        "read_records_csv",
        [](const std::filesystem::path& path) {
            py::list rows;
            for (const ConvergenceRecord& r : read_records_csv(path)) rows.append(record_dict(r));
            return rows;
        },
        py::arg("path"));
    m.def(
        "write_records_csv",
        [](const std::filesystem::path& path, const py::list& rows) {
            std::vector<ConvergenceRecord> records;
            for (const py::handle& row : rows) records.push_back(record_from(row.cast<py::dict>()));
            write_records_csv(path, records);
        },
        py::arg("path"), py::arg("records"));
    m.def(
        "fit_slope", [](const std::vector<double>& h, const std::vector<double>& e) { return fit_slope(h, e); },
        py::arg("h"), py::arg("errors"), "Least-squares log-log slope over the last 3 points.");
    m.def(
        "dof_count", [](int nx, int ny, int p) { return build_dof_map(build_uniform(nx, ny), p).num_dofs(); },
        py::arg("nx"), py::arg("ny"), py::arg("p"), "Trial dofs on a uniform nx x ny mesh.");
    m.def("list_scenarios", []() {
        py::list out;
        for (const ScenarioInfo& s : list_scenarios()) {
            py::dict d;
            d["name"] = s.name;
            d["parameters"] = s.parameters;
            d["description"] = s.description;
            out.append(d);
        }
        return out;
    });

    m.attr("RECORDS_HEADER") = kRecordsHeader;
    m.attr("LINE_HEADER") = kLineHeader;
}
