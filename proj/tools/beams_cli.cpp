#include "beams/scenarios.hpp"
#include "svg_plot.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace beams;

namespace {

constexpr int kSchemaVersion = 1;

const std::vector<std::pair<std::string, std::string>> kScenarios{
    {"photon-sphere", "Trapped r = 3m orbit, conjugate points and beam energy"},
    {"redshift", "Horizon generator red-shift and the near-horizon outgoing family"},
    {"rn-blueshift", "Sub-extremal Reissner-Nordstrom blue-shift at constant u"},
    {"rn-extremal", "Extremal Reissner-Nordstrom power-law blue-shift"},
    {"kerr-orbit", "Kerr trapped interval and spherical orbit data"},
    {"kerr-trapped", "Integrated Kerr spherical photon orbit"},
    {"kerr-blueshift", "Kerr Cauchy-horizon coefficient in the outgoing chart"},
    {"beam-study", "Wave-operator residual of the photon-sphere beam"},
    {"caustic-scan", "Conjugate points and the real-Riccati breakdown"},
};

struct RunConfig {
    std::string scenario;
    double m = 1.0;
    std::optional<double> e;
    std::optional<double> a;
    std::optional<double> T;
    std::optional<double> r0;
    std::optional<std::vector<double>> lambda_grid;
    std::optional<std::vector<double>> v0_grid;
    int passages = 10;
    bool no_beam = false;
    std::string out = "beams-out";
    bool plots = false;
};

json to_json(const RunConfig& c)
{
    json j{{"scenario", c.scenario}, {"m", c.m}, {"passages", c.passages}, {"beam", !c.no_beam}, {"out", c.out}, {"plots", c.plots}};
    if (c.e) j["e"] = *c.e;
    if (c.a) j["a"] = *c.a;
    if (c.T) j["T"] = *c.T;
    if (c.r0) j["r0"] = *c.r0;
    if (c.lambda_grid) j["lambda_grid"] = *c.lambda_grid;
    if (c.v0_grid) j["v0_grid"] = *c.v0_grid;
    return j;
}

json to_json(const ScenarioResult& r, const RunConfig& c)
{
    json j;
    j["schema"] = "beams.result";
    j["schema_version"] = kSchemaVersion;
    j["scenario"] = r.name;
    j["config"] = to_json(c);
    j["params"] = r.params;
    j["lambda_grid"] = r.lambda_grid;
    json fits = json::object();
    for (const auto& [name, f] : r.fits)
        fits[name] = {{"rate", f.rate}, {"stderr", f.stderr_rate}, {"intercept", f.intercept}, {"residual", f.residual},
                      {"n", f.n}, {"x", f.x}, {"y", f.y}, {"window", {f.window_lo, f.window_hi}}};
    j["fits"] = fits;
    json verdicts = json::array();
    for (const Verdict& v : r.verdicts)
        verdicts.push_back({{"name", v.name}, {"pass", v.pass}, {"value", v.value}, {"threshold", v.threshold}, {"detail", v.detail}});
    j["verdicts"] = verdicts;
    json series = json::object();
    for (const auto& [name, s] : r.series) series[name] = {{"file", name + ".csv"}, {"columns", s.columns}, {"rows", s.rows.size()}};
    j["series"] = series;
    j["diagnostics"] = r.diagnostics;
    j["verdict"] = r.passed() ? "pass" : "fail";
    return j;
}

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& field, const std::string& what)
{
    if (!ok) throw ConfigError("field '" + field + "': " + what);
}

void validate(const RunConfig& c)
{
    bool known = false;
    for (const auto& s : kScenarios) known = known || s.first == c.scenario;
    require(known, "scenario", "unknown scenario '" + c.scenario + "'");
    require(c.m > 0.0 && std::isfinite(c.m), "m", "must be positive");
    if (c.T) require(*c.T > 0.0 && std::isfinite(*c.T), "T", "must be positive");
    if (c.a) require(*c.a >= 0.0 && *c.a <= c.m, "a", "must satisfy 0 <= a <= m");
    if (c.e) require(*c.e >= 0.0 && *c.e <= c.m, "e", "must satisfy 0 <= e <= m");
    if (c.lambda_grid)
        for (double l : *c.lambda_grid) require(l > 0.0 && std::isfinite(l), "lambda-grid", "entries must be positive");
    if (c.v0_grid)
        for (double v : *c.v0_grid) require(std::isfinite(v), "v0-grid", "entries must be finite");
    require(c.passages >= 1, "passages", "must be at least 1");
}

ScenarioResult dispatch(const RunConfig& c)
{
    const double m = c.m;
    const std::vector<double> grid = c.no_beam ? std::vector<double>{} : c.lambda_grid.value_or(default_lambda_grid());
    const std::string& s = c.scenario;
    if (s == "photon-sphere") {
        PhotonSphereOptions o;
        o.run_beam = !grid.empty();
        return photon_sphere_run(m, grid, c.T.value_or(20.0 * m), o);
    }
    if (s == "redshift") {
        RedshiftOptions o;
        o.lambda_grid = grid;
        return horizon_redshift_run(m, c.T.value_or(40.0 * m), o);
    }
    if (s == "rn-blueshift") {
        const double e = c.e.value_or(0.8 * m);
        if (!(e > 0.0 && e < m)) throw ConfigError("field 'e': the sub-extremal blue-shift needs 0 < e < m");
        return rn_blueshift_run(m, e, c.v0_grid.value_or(default_rn_v0_grid(m, e)));
    }
    if (s == "rn-extremal") {
        if (c.e && *c.e != m) throw ConfigError("field 'e': the extremal run needs e = m");
        return rn_extremal_blueshift_run(m, c.v0_grid.value_or(default_extremal_v0_grid(m)));
    }
    if (s == "kerr-orbit") return kerr_orbit_run(m, c.a.value_or(0.5 * m), c.r0);
    if (s == "kerr-trapped") {
        const double a = c.a.value_or(0.5 * m);
        const auto [rd, rr] = kerr_trapped_interval(m, a);
        return kerr_trapped_run(m, a, c.r0.value_or(0.5 * (rd + rr)), c.T.value_or(100.0 * m));
    }
    if (s == "kerr-blueshift") {
        const double a = c.a.value_or(0.5 * m);
        if (!(a > 0.0)) throw ConfigError("field 'a': the Kerr blue-shift needs a > 0");
        return kerr_blueshift_run(m, a, c.v0_grid.value_or(default_kerr_v0_grid(m)));
    }
    if (s == "beam-study") return beam_study_run(m, c.lambda_grid.value_or(default_lambda_grid()), c.T.value_or(4.0 * m));
    if (s == "caustic-scan") return caustic_scan_run(m, c.passages);
    throw ConfigError("field 'scenario': unknown scenario '" + s + "'");
}

void write_file(const fs::path& path, const std::string& text)
{
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << text;
}

void add_run_options(CLI::App* sub, RunConfig& c)
{
    sub->add_option("--m", c.m, "Mass m");
    sub->add_option_function<double>("--e", [&c](double v) { c.e = v; }, "Charge e (Reissner-Nordstrom)");
    sub->add_option_function<double>("--a", [&c](double v) { c.a = v; }, "Spin a (Kerr)");
    sub->add_option_function<double>("--T", [&c](double v) { c.T = v; }, "Time horizon in t*");
    sub->add_option_function<double>("--r0", [&c](double v) { c.r0 = v; }, "Orbit radius (Kerr)");
    sub->add_option_function<std::vector<double>>("--lambda-grid", [&c](const std::vector<double>& v) { c.lambda_grid = v; },
                                                  "Beam frequencies")
        ->delimiter(',');
    sub->add_option_function<std::vector<double>>("--v0-grid", [&c](const std::vector<double>& v) { c.v0_grid = v; },
                                                  "Advanced times of the ingoing family")
        ->delimiter(',');
    sub->add_option("--passages", c.passages, "Conjugate passages (caustic-scan)");
    sub->add_flag("--no-beam", c.no_beam, "Skip the beam-level part");
    sub->add_option("--out", c.out, "Output directory");
    sub->add_flag("--plots", c.plots, "Write SVG plots of every series");
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Gaussian beam and geodesic-energy experiments on black-hole spacetimes", "beams"};
    app.set_config("--config", "", "INI run configuration; command-line flags override its keys");
    app.require_subcommand(1, 1);
    app.allow_config_extras(CLI::config_extras_mode::error);
    RunConfig cfg;

    CLI::App* run = app.add_subcommand("run", "Run the named scenario");
    run->add_option("scenario", cfg.scenario, "Scenario name")->required();
    run->configurable();
    add_run_options(run, cfg);
    for (const auto& [name, desc] : kScenarios) {
        CLI::App* sub = app.add_subcommand(name, desc);
        sub->configurable();
        add_run_options(sub, cfg);
        sub->parse_complete_callback([&cfg, n = name] { cfg.scenario = n; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "ConfigError: " << e.what() << "\n";
        return 2;
    }

    ScenarioResult result;
    try {
        validate(cfg);
        result = dispatch(cfg);
    } catch (const ConfigError& e) {
        std::cerr << "ConfigError: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::ParameterError || e.kind() == ErrorKind::InadmissibleOrbit || e.kind() == ErrorKind::DegenerateSpin ||
            e.kind() == ErrorKind::ConfigError) {
            std::cerr << "ConfigError: invalid parameters: " << e.what() << "\n";
            return 2;
        }
        result.name = cfg.scenario;
        result.diagnostics.push_back(e.what());
        result.check("completed", false, 0.0, 0.0, e.what());
    }

    try {
        const fs::path dir = fs::path(cfg.out) / result.name;
        fs::create_directories(dir);
        write_file(dir / "result.json", to_json(result, cfg).dump(2) + "\n");
        for (const auto& [name, s] : result.series) {
            write_file(dir / (name + ".csv"), to_csv(s));
            if (cfg.plots && !s.rows.empty()) write_file(dir / (name + ".svg"), svg_line_plot(s, default_plot_spec(name, s)));
        }
        for (const Verdict& v : result.verdicts)
            std::printf("%-4s %-32s value %-14.6g threshold %-12.6g %s\n", v.pass ? "ok" : "FAIL", v.name.c_str(), v.value, v.threshold,
                        v.detail.c_str());
        for (const std::string& d : result.diagnostics) std::printf("note %s\n", d.c_str());
        std::printf("%s %s in %.2f s, artifacts in %s\n", result.passed() ? "PASS" : "FAIL", result.name.c_str(), result.runtime_seconds,
                    dir.string().c_str());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return result.passed() ? 0 : 1;
}
