#include "avsfe/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "avsfe/error.hpp"

namespace avsfe {

namespace {

std::string trim(const std::string& s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

class Parser {
public:
    Parser(std::string source, int line) : source_(std::move(source)), line_(line) {}

    [[noreturn]] void fail(const std::string& what) const
    {
        std::ostringstream msg;
        msg << source_ << ":" << line_ << ": " << what;
        throw ConfigError(msg.str());
    }

    int to_int(const std::string& key, const std::string& v) const
    {
        int out = 0;
        const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (ec != std::errc() || ptr != v.data() + v.size()) fail("'" + key + "' expects an integer, got '" + v + "'");
        return out;
    }

    std::uint64_t to_u64(const std::string& key, const std::string& v) const
    {
        std::uint64_t out = 0;
        const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (ec != std::errc() || ptr != v.data() + v.size()) {
            fail("'" + key + "' expects a non-negative integer, got '" + v + "'");
        }
        return out;
    }

    double to_double(const std::string& key, const std::string& v) const
    {
        try {
            std::size_t used = 0;
            const double out = std::stod(v, &used);
            if (used == v.size()) return out;
        } catch (const std::exception&) {
        }
        fail("'" + key + "' expects a number, got '" + v + "'");
    }

    bool to_bool(const std::string& key, const std::string& v) const
    {
        if (v == "true" || v == "yes" || v == "1") return true;
        if (v == "false" || v == "no" || v == "0") return false;
        fail("'" + key + "' expects true or false, got '" + v + "'");
    }

private:
    std::string source_;
    int line_;
};

using Setter = void (*)(RunConfig&, const Parser&, const std::string& key, const std::string& value);

const std::map<std::string, std::map<std::string, Setter>>& schema()
{
    static const std::map<std::string, std::map<std::string, Setter>> table{
        {"scenario",
         {
             {"name", [](RunConfig& c, const Parser&, const std::string&, const std::string& v) { c.scenario = v; }},
             {"pe", [](RunConfig& c, const Parser& p, const std::string& k, const std::string& v) { c.pe = p.to_double(k, v); }},
             {"mask",
              [](RunConfig& c, const Parser& p, const std::string& k, const std::string& v) {
                  if (v.size() != 4 || v.find_first_not_of("01") != std::string::npos) {
                      p.fail("'" + k + "' expects four 0/1 digits (lower-left, lower-right, upper-left, upper-right)");
                  }
                  for (int i = 0; i < 4; ++i) c.mask[i] = v[i] == '1';
              }},
         }},
        {"mesh",
         {
             {"kind",
              [](RunConfig& c, const Parser& p, const std::string& k, const std::string& v) {
                  if (v == "uniform") c.mesh.kind = MeshKind::uniform;
                  else if (v == "graded") c.mesh.kind = MeshKind::graded;
                  else if (v == "unstructured") c.mesh.kind = MeshKind::unstructured;
                  else p.fail("'" + k + "' must be uniform, graded or unstructured");
              }},
             {"nx", [](RunConfig& c, const Parser& p, const std::string& k, const std::string& v) { c.mesh.nx = p.to_int(k, v); }},
             {"ny", [](RunConfig& c, const Parser& p, const std::string& k, const std::string& v) { c.mesh.ny = p.to_int(k, v); }},
             {"ratio", [](RunConfig& c, const Parser& p, const std::string& k, const std::string& v) { c.mesh.ratio = p.to_double(k, v); }},
             {"seed", [](RunConfig& c, const Parser& p, const std::string& k, const std::string& v) { c.mesh.seed = p.to_u64(k, v); }},
             {"amplitude", [](RunConfig& c, const Parser& p, const std::string& k, const std::string& v) { c.mesh.amplitude = p.to_double(k, v); }},
         }},
        {"discretization",
         {
             {"p", [](RunConfig& c, const Parser& p, const std::string& k, const std::string& v) { c.p = p.to_int(k, v); }},
             {"dp", [](RunConfig& c, const Parser& p, const std::string& k, const std::string& v) { c.dp = p.to_int(k, v); }},
             {"test_space",
              [](RunConfig& c, const Parser& p, const std::string& k, const std::string& v) {
                  if (v == "constrained") c.test_mode = TestDirichletMode::constrained;
                  else if (v == "free") c.test_mode = TestDirichletMode::free;
                  else p.fail("'" + k + "' must be constrained or free");
              }},
             {"quadrature",
              [](RunConfig& c, const Parser& p, const std::string& k, const std::string& v) {
                  c.quad_points = v == "auto" ? 0 : p.to_int(k, v);
              }},
         }},
        {"study",
         {
             {"refinements", [](RunConfig& c, const Parser& p, const std::string& k, const std::string& v) { c.refinements = p.to_int(k, v); }},
             {"extra_refinements", [](RunConfig& c, const Parser& p, const std::string& k, const std::string& v) { c.extra_refinements = p.to_int(k, v); }},
             {"line",
              [](RunConfig& c, const Parser& p, const std::string& k, const std::string& v) {
                  if (v == "auto") c.line = LineKind::automatic;
                  else if (v == "diagonal") c.line = LineKind::diagonal;
                  else if (v == "none") c.line = LineKind::none;
                  else p.fail("'" + k + "' must be auto, diagonal or none");
              }},
             {"line_samples", [](RunConfig& c, const Parser& p, const std::string& k, const std::string& v) { c.line_samples = p.to_int(k, v); }},
         }},
        {"solver",
         {
             {"kind",
              [](RunConfig& c, const Parser& p, const std::string& k, const std::string& v) {
                  if (v == "auto") c.solver.kind = SolverKind::automatic;
                  else if (v == "direct") c.solver.kind = SolverKind::direct;
                  else if (v == "cg") c.solver.kind = SolverKind::cg;
                  else p.fail("'" + k + "' must be auto, direct or cg");
              }},
             {"direct_max_dofs",
              [](RunConfig& c, const Parser& p, const std::string& k, const std::string& v) {
                  c.solver.direct_max_dofs = p.to_u64(k, v);
              }},
             {"cg_tolerance", [](RunConfig& c, const Parser& p, const std::string& k, const std::string& v) { c.solver.cg_tolerance = p.to_double(k, v); }},
         }},
        {"output",
         {
             {"vtk", [](RunConfig& c, const Parser& p, const std::string& k, const std::string& v) { c.write_vtk = p.to_bool(k, v); }},
             {"dump_element", [](RunConfig& c, const Parser& p, const std::string& k, const std::string& v) { c.dump_element = p.to_int(k, v); }},
         }},
    };
    return table;
}

}  // namespace

RunConfig parse_config(std::istream& in, const std::string& source)
{
    RunConfig config;
    std::string section;
    std::set<std::pair<std::string, std::string>> seen;
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const Parser parser(source, lineno);
        std::string line = trim(raw.substr(0, raw.find('#')));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') parser.fail("malformed section header '" + line + "'");
            section = trim(line.substr(1, line.size() - 2));
            if (!schema().contains(section)) parser.fail("unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) parser.fail("expected 'key = value', got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (section.empty()) parser.fail("key '" + key + "' appears before any [section]");
        const auto& keys = schema().at(section);
        const auto it = keys.find(key);
        if (it == keys.end()) parser.fail("unknown key '" + key + "' in section [" + section + "]");
        if (!seen.insert({section, key}).second) parser.fail("duplicate key '" + key + "' in section [" + section + "]");
        if (value.empty()) parser.fail("key '" + key + "' has no value");
        it->second(config, parser, key, value);
    }
    validate_config(config);
    return config;
}

RunConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config '" + path.string() + "'");
    }
    RunConfig config = parse_config(in, path.string());
    config.name = path.stem().string();
    return config;
}

void validate_config(const RunConfig& c)
{
    const auto fail = [](const std::string& what) { throw ConfigError(what); };
    static const std::set<std::string> names{"manufactured", "homogeneous", "checkerboard", "variable_convection",
                                             "polynomial", "zero"};
    if (!names.contains(c.scenario)) fail("unknown scenario '" + c.scenario + "'");
    if (!(c.pe > 0.0)) fail("pe must be positive");
    if (c.mesh.nx < 1 || c.mesh.ny < 1) fail("nx and ny must be >= 1");
    if (!(c.mesh.ratio > 0.0)) fail("mesh ratio must be positive");
    if (!(c.mesh.amplitude >= 0.0 && c.mesh.amplitude < 0.5)) fail("mesh amplitude must lie in [0, 0.5)");
    if (c.p < 1 || c.p > 8) fail("p must lie in [1, 8]");
    if (c.dp < 0 || c.dp > 3) fail("dp must lie in [0, 3]");
    if (c.quad_points < 0 || c.quad_points > 20) fail("quadrature must be auto or 1..20");
    if (c.refinements < 0 || c.extra_refinements < 0) fail("refinement counts must be >= 0");
    if (c.line_samples < 1) fail("line_samples must be >= 1");
    if (!(c.solver.cg_tolerance > 0.0)) fail("cg_tolerance must be positive");
    if (c.threads < 1) fail("thread count must be >= 1");
    if (c.scenario == "checkerboard") {
        const Scenario s = scenario_checkerboard(c.pe, c.mask);
        if (!s.discontinuities.empty() && (c.mesh.nx % 2 != 0 || c.mesh.ny % 2 != 0)) {
            fail("checkerboard needs even nx and ny so the mesh aligns with x=0.5 and y=0.5");
        }
        if (!s.discontinuities.empty() && c.mesh.kind == MeshKind::unstructured && c.mesh.amplitude > 0.0) {
            fail("checkerboard cannot use a perturbed mesh: interfaces would not stay aligned");
        }
    }
}

Scenario make_scenario(const RunConfig& c)
{
    if (c.scenario == "manufactured") return scenario_manufactured(c.pe);
    if (c.scenario == "homogeneous") return scenario_homogeneous(c.pe);
    if (c.scenario == "checkerboard") return scenario_checkerboard(c.pe, c.mask);
    if (c.scenario == "variable_convection") return scenario_variable_convection(c.pe);
    if (c.scenario == "polynomial") return scenario_polynomial();
    if (c.scenario == "zero") return scenario_zero();
    throw ConfigError("unknown scenario '" + c.scenario + "'");
}

}  // namespace avsfe
