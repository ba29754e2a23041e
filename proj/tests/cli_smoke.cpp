#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string beams;
fs::path work;
int failures = 0;

int run(const std::string& args)
{
    const std::string cmd = beams + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p)
{
    std::ifstream f(p);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

json result(const std::string& scenario) { return json::parse(slurp(work / scenario / "result.json")); }

void expect(bool ok, const std::string& what)
{
    std::printf("%s %s\n", ok ? "ok  " : "FAIL", what.c_str());
    failures += ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv)
{
    if (argc != 3) {
        std::fprintf(stderr, "usage: cli_smoke BEAMS WORKDIR\n");
        return 2;
    }
    beams = argv[1];
    work = argv[2];
    fs::remove_all(work);
    fs::create_directories(work);
    const std::string out = " --out " + work.string();

    expect(run("run photon-sphere --m 1 --T 20" + out) == 0, "photon-sphere at m = 1, T = 20 exits 0");
    expect(result("photon-sphere")["verdict"] == "pass", "photon-sphere verdict pass");
    expect(result("photon-sphere")["schema_version"] == 1, "result.json carries the schema version");

    expect(run("run redshift --m 2 --plots" + out) == 0, "redshift at m = 2 exits 0");
    const double slope = result("redshift")["fits"]["redshift_rate"]["rate"];
    expect(std::abs(slope + 0.125) < 1e-6 * 0.125, "redshift slope " + std::to_string(slope) + " = -0.125");
    expect(fs::exists(work / "redshift" / "generator.csv") && fs::exists(work / "redshift" / "generator.svg"), "CSV and SVG artifacts written");

    expect(run("run no-such-scenario" + out) == 2, "unknown scenario exits 2");
    expect(run("no-such-scenario" + out) == 2, "unknown subcommand exits 2");
    expect(run("run rn-extremal --e 0.5" + out) == 2, "extremal run with e != m exits 2");
    expect(run("run redshift --m -1" + out) == 2, "negative mass exits 2");

    const fs::path ini = work / "kerr.ini";
    std::ofstream(ini) << "[kerr-orbit]\nm = 1\na = 0.9\n";
    expect(run("--config " + ini.string() + " kerr-orbit --a 0.5" + out) == 0, "config file with flag override exits 0");
    expect(result("kerr-orbit")["config"]["a"] == 0.5, "flag overrides the config key");
    const std::string first = slurp(work / "kerr-orbit" / "result.json");
    run("--config " + ini.string() + " kerr-orbit --a 0.5" + out);
    expect(first == slurp(work / "kerr-orbit" / "result.json"), "re-running reproduces result.json byte for byte");

    const fs::path bad = work / "bad.ini";
    std::ofstream(bad) << "[kerr-orbit]\nspin = 0.9\n";
    expect(run("--config " + bad.string() + " kerr-orbit" + out) == 2, "unknown config key exits 2");

    std::printf("cli smoke: %d failure(s)\n", failures);
    return failures == 0 ? 0 : 1;
}
