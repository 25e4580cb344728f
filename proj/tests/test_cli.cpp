#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pinnsolve/cli.hpp"

using namespace pinnsolve;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("pinnsolve_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

fs::path write(const fs::path& dir, const std::string& name, const std::string& text) {
    const fs::path p = dir / name;
    std::ofstream(p) << text;
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run_cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::main(args, out, err);
    return {code, out.str(), err.str()};
}

const char* kAdvection = R"cfg(
[problem]
solver = solvePDE_tx
equations = "ut + ux"

[domain]
t = 0, 1
x = -1, 1
residual_points = 64

[initial]
u = "tf.cos(np.pi*x)"
points = 16

[boundary]
type = periodic

[network]
layers = 2
units = 8

[training]
epochs = 5
seed = 3

[output]
resolution = 6, 7
analytic = "cos(pi*(x - t))"
)cfg";

const char* kHeatOnet = R"cfg(
[problem]
solver = solvePDE_DeepONet_tx
equations = "0.1*uxx - ut"

[domain]
t = 0, 0.5
x = 0, 1
residual_points = 40

[initial]
u = "sin(pi*x)"
points = 12

[boundary]
type = dirichlet
all = "0"
points = 8

[network]
layers = 2
units = 8

[sensors]
count = 6
samples = 4
lo = -2
hi = 2

[training]
epochs = 3
seed = 5

[output]
resolution = 5, 6
analytic = "exp(-0.1*pi^2*t)*sin(pi*x)"
)cfg";

std::string replace(std::string s, const std::string& from, const std::string& to) {
    const auto pos = s.find(from);
    REQUIRE(pos != std::string::npos);
    return s.replace(pos, from.size(), to);
}

}  // namespace

TEST_CASE("shipped configs validate with zero issues") {
    for (const char* name : {"advection.cfg", "poisson.cfg", "heat.cfg", "ode_system.cfg"}) {
        const fs::path p = fs::path(PINNSOLVE_SOURCE_DIR) / "configs" / name;
        const auto r = run_cli({"validate", "--config", p.string()});
        CAPTURE(name);
        CHECK(r.code == 0);
        CHECK(r.out == "0 issues\n");
    }
}

TEST_CASE("config conversion") {
    const auto loaded = cli::parse_config(kAdvection);
    REQUIRE(loaded.issues.empty());
    const auto& c = loaded.config;
    CHECK(c.spec.problem == ProblemKind::PdeTx);
    CHECK(c.spec.model == ModelKind::Pinn);
    CHECK(c.spec.residual_points == 64);
    CHECK(c.spec.initial->conditions[0][0] == "tf.cos(np.pi*x)");
    CHECK(c.spec.boundary->kind == BoundaryKind::Periodic);
    CHECK(c.resolution == std::vector<int>{6, 7});
    CHECK(c.spec.training.seed == 3);
    CHECK(c.spec.domain.axis(1).lo == -1.0);

    const auto sys = cli::parse_config(R"cfg(
[problem]
kind = ode-system-ivp
model = deeponet
equations = "utt + u"; "vt + u"
variables = u, v
[domain]
t = 0, 1
[initial]
u = 0.5; 1
v = 2
[sensors]
samples = 10
lo = -3
hi = 3
[training]
seed = 9
)cfg");
    REQUIRE(sys.issues.empty());
    CHECK(sys.config.spec.equations.size() == 2);
    CHECK(sys.config.spec.initial->conditions[0] == std::vector<std::string>{"0.5", "1"});
    CHECK(sys.config.spec.sensors->family == SensorFamily::ScalarTuple);
    CHECK(sys.config.spec.sensors->seed == 9);  // follows the training seed
}

TEST_CASE("malformed equation exits 3 with a position") {
    const auto dir = scratch_dir("parse");
    const auto cfg = write(dir, "bad.cfg", replace(kAdvection, "\"ut + ux\"", "\"ut+++ux\""));
    const auto r = run_cli({"run", "--config", cfg.string(), "--out", (dir / "out").string()});
    CHECK(r.code == 3);
    CHECK(r.err.find("position 3") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "out" / "solution.csv"));
    CHECK(run_cli({"validate", "--config", cfg.string()}).code == 3);
}

TEST_CASE("hard Neumann (t,x) exits 4 citing availability") {
    const auto dir = scratch_dir("neumann");
    std::string text = replace(kAdvection, "type = periodic", "type = neumann\nall = \"0\"");
    text = replace(text, "equations = \"ut + ux\"", "equations = \"ut - uxx\"\nconstraint = hard");
    const auto cfg = write(dir, "neu.cfg", text);
    const auto r = run_cli({"run", "--config", cfg.string(), "--out", (dir / "out").string()});
    CHECK(r.code == 4);
    CHECK(r.err.find("neumann") != std::string::npos);
    CHECK(r.err.find("soft") != std::string::npos);
}

TEST_CASE("validate lists every problem") {
    std::string text = replace(kAdvection, "residual_points = 64", "residual_points = 0");
    text = replace(text, "units = 8", "units = 0\ncolour = blue");
    const auto dir = scratch_dir("validate");
    const auto r = run_cli({"validate", "--config", write(dir, "v.cfg", text).string()});
    CHECK(r.code == 2);
    CHECK(r.out.find("domain.residual_points: must be positive (got 0)") != std::string::npos);
    CHECK(r.out.find("network.units") != std::string::npos);
    CHECK(r.out.find("network.colour: unknown key") != std::string::npos);
    CHECK(r.out.find("3 issues") != std::string::npos);

    const auto bad_number = cli::parse_config(replace(kAdvection, "epochs = 5", "epochs = five"));
    REQUIRE(bad_number.issues.size() == 1);
    CHECK(bad_number.issues[0].message.find("training.epochs") != std::string::npos);

    const auto missing = cli::parse_config("[problem]\nsolver = solvePDE_xy\nequations = \"uxx + uyy\"\n[domain]\nx = 0, 1\n");
    bool saw_y = false, saw_boundary = false;
    for (const auto& i : missing.issues) {
        saw_y |= i.message.find("domain.y") != std::string::npos;
        saw_boundary |= i.message.find("boundary") != std::string::npos;
    }
    CHECK(saw_y);
    CHECK_FALSE(saw_boundary);  // structural checks wait for a usable domain

    const auto no_bc = cli::parse_config("[problem]\nsolver = solvePDE_xy\nequations = \"uxx + uyy\"\n[domain]\nx = 0, 1\ny = 0, 1\n");
    REQUIRE(no_bc.issues.size() == 1);
    CHECK(no_bc.issues[0].message.find("boundary: required") != std::string::npos);
}

TEST_CASE("argument errors exit 2") {
    const auto dir = scratch_dir("args");
    const auto cfg = write(dir, "h.cfg", kHeatOnet);
    CHECK(run_cli({"timestep", "--config", cfg.string(), "--steps", "0", "--out", (dir / "o").string()}).code == 2);
    CHECK(run_cli({"run"}).code == 2);
    CHECK(run_cli({"frobnicate"}).code == 2);
    CHECK(run_cli({"run", "--config", (dir / "missing.cfg").string()}).code == 2);
    // time-stepping a PINN is an admissibility error
    const auto pinn = write(dir, "a.cfg", kAdvection);
    CHECK(run_cli({"timestep", "--config", pinn.string(), "--out", (dir / "o").string()}).code == 4);
}

TEST_CASE("divergence exits 5") {
    const auto dir = scratch_dir("diverge");
    const auto cfg = write(dir, "d.cfg", replace(kAdvection, "\"ut + ux\"", "\"ut + exp(1000 + u)\""));
    const auto r = run_cli({"run", "--config", cfg.string(), "--out", (dir / "out").string()});
    CHECK(r.code == 5);
    CHECK(r.err.find("non-finite loss at epoch 1") != std::string::npos);
}

TEST_CASE("run writes reproducible artifacts") {
    const auto dir = scratch_dir("run");
    const auto cfg = write(dir, "a.cfg", kAdvection);
    REQUIRE(run_cli({"run", "--config", cfg.string(), "--out", (dir / "a").string()}).code == 0);
    REQUIRE(run_cli({"run", "--config", cfg.string(), "--out", (dir / "b").string()}).code == 0);
    for (const char* f : {"solution.csv", "loss.csv", "model.bin"}) {
        CAPTURE(f);
        CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
    }
    const std::string sol = slurp(dir / "a" / "solution.csv");
    CHECK(std::count(sol.begin(), sol.end(), '\n') == 1 + 6 * 7);
    CHECK(sol.rfind("t,x,u,u_exact,u_sqerr\n", 0) == 0);
    CHECK(sol.find("nan") == std::string::npos);
    const std::string loss = slurp(dir / "a" / "loss.csv");
    CHECK(std::count(loss.begin(), loss.end(), '\n') == 1 + 5);
    const std::string report = slurp(dir / "a" / "report.txt");
    CHECK(report.find("mse: ") != std::string::npos);
    CHECK(report.find("seed: 3") != std::string::npos);
    CHECK(report.find("[config]") != std::string::npos);

    // a different seed changes the result
    REQUIRE(run_cli({"run", "--config", cfg.string(), "--out", (dir / "c").string(), "--seed", "4"}).code == 0);
    CHECK(slurp(dir / "a" / "loss.csv") != slurp(dir / "c" / "loss.csv"));
    CHECK(slurp(dir / "c" / "report.txt").find("seed: 4") != std::string::npos);
}

TEST_CASE("model file round trip") {
    auto loaded = cli::parse_config(kHeatOnet);
    REQUIRE(loaded.issues.empty());
    SolutionHandle h = prepare(loaded.config.spec);
    for (Eigen::Index i = 0; i < h.params.size(); ++i) h.params[i] = std::sin(1.0 + static_cast<double>(i)) * 1e-3;
    const auto dir = scratch_dir("model");
    cli::save_model(dir / "m.bin", h);
    const std::string bytes = slurp(dir / "m.bin");
    const auto end = bytes.find("end\n");
    REQUIRE(end != std::string::npos);
    CHECK(bytes.size() == end + 4 + 8 * static_cast<std::size_t>(h.params.size()));
    CHECK(bytes.rfind("pinnsolve-model 1\n", 0) == 0);
    // little-endian float64 payload
    double first = 0;
    std::memcpy(&first, bytes.data() + end + 4, 8);
    CHECK(first == h.params[0]);

    SolutionHandle g = prepare(loaded.config.spec);
    cli::load_model(dir / "m.bin", g);
    CHECK(g.params == h.params);

    auto other = loaded.config.spec;
    other.network.units = 9;
    SolutionHandle wrong = prepare(other);
    CHECK_THROWS_AS(cli::load_model(dir / "m.bin", wrong), Error);
}

TEST_CASE("one time step reproduces the plain run grid") {
    const auto dir = scratch_dir("timestep");
    const auto cfg = write(dir, "h.cfg", kHeatOnet);
    REQUIRE(run_cli({"run", "--config", cfg.string(), "--out", (dir / "o").string()}).code == 0);
    const auto r = run_cli({"timestep", "--config", cfg.string(), "--out", (dir / "o").string(), "--steps", "1", "--model",
                        (dir / "o" / "model.bin").string()});
    REQUIRE(r.code == 0);
    std::istringstream a(slurp(dir / "o" / "solution.csv")), b(slurp(dir / "o" / "timestep_solution.csv"));
    std::string la, lb;
    std::getline(a, la);
    std::getline(b, lb);
    CHECK(lb == la + ",window");
    int rows = 0;
    while (std::getline(a, la)) {
        REQUIRE(std::getline(b, lb));
        CHECK(lb == la + ",0");
        ++rows;
    }
    CHECK(rows == 30);

    const auto ten = run_cli({"timestep", "--config", cfg.string(), "--out", (dir / "o").string(), "--steps", "3",
                          "--model", (dir / "o" / "model.bin").string()});
    REQUIRE(ten.code == 0);
    const std::string ts = slurp(dir / "o" / "timestep_solution.csv");
    CHECK(std::count(ts.begin(), ts.end(), '\n') == 1 + 5 * 6 + 2 * 4 * 6);
    CHECK(slurp(dir / "o" / "timestep_report.txt").find("window,mse,max_abs_error") != std::string::npos);
}
