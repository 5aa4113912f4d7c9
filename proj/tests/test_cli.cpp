#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nonlocal/config.hpp>
#include <nonlocal/io.hpp>
#include <nonlocal/report.hpp>

using namespace nonlocal;
namespace fs = std::filesystem;

#ifndef CLI_PATH
#define CLI_PATH "nonlocal"
#endif

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("nonlocal_cli_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { std::error_code ec; fs::remove_all(path, ec); }
};

int run(const std::string& args, std::string* out = nullptr) {
    std::string cmd = std::string(CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    std::string acc;
    char buf[4096];
    size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) acc.append(buf, n);
    int status = pclose(p);
    if (out) *out = acc;
    return WEXITSTATUS(status);
}

std::string standard_config() {
    return "kernel.dimension = 1\n"
           "kernel.ell.variant = constant\n"
           "kernel.rho = 1.0\n"
           "kernel.tail.variant = zero\n"
           "domain.shape = interval\n"
           "domain.a = -1\n"
           "domain.b = 1\n"
           "domain.h = 0.125\n"
           "domain.r_ext = 1.125\n"
           "verify.seeds = 5\n"
           "verify.master_seed = 42\n";
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("config parsing") {
    std::istringstream good("a.b = 1.5\n# comment\n  c = x  # trailing\n");
    RunConfig cfg = RunConfig::parse(good);
    CHECK(cfg.get_num("a.b", 0) == 1.5);
    CHECK(cfg.get("c", "") == "x");

    std::istringstream bad("a.b 1.5\n");
    CHECK_THROWS_WITH(RunConfig::parse(bad), Catch::Matchers::ContainsSubstring("line 1"));

    std::istringstream bad2("x = \n");
    CHECK_THROWS_AS(RunConfig::parse(bad2), ConfigError);

    std::istringstream notnum("a = abc\n");
    RunConfig c2 = RunConfig::parse(notnum);
    CHECK_THROWS_AS(c2.require_num("a"), ConfigError);
    CHECK_THROWS_AS(c2.require("missing"), ConfigError);
}

TEST_CASE("kernel and domain factories") {
    std::istringstream in(
        "kernel.dimension = 2\nkernel.ell.variant = logpow\nkernel.ell.beta = 1\n"
        "kernel.rho = 0.5\nkernel.tail.variant = powerdecay\nkernel.tail.alpha2 = 0.7\n"
        "domain.shape = ball\ndomain.radius = 1\ndomain.h = 0.25\ndomain.r_ext = 0.5\n");
    RunConfig cfg = RunConfig::parse(in);
    KernelSpec k = make_kernel(cfg);
    CHECK(k.dim == 2);
    CHECK(k.rho() == 0.5);
    CHECK(k.tail.variant == TailVariant::power_decay);
    Domain d = make_domain(cfg);
    CHECK(d.dim == 2);
    CHECK(d.n_interior() > 0);

    std::istringstream badk("kernel.ell.variant = nope\ndomain.h = 0.1\n");
    CHECK_THROWS_WITH(make_kernel(RunConfig::parse(badk)),
                      Catch::Matchers::ContainsSubstring("constant|logpow|invloglog"));
}

TEST_CASE("form container round trip") {
    KernelSpec k(1, EllSpec::constant(1.0), TailSpec::zero());
    Domain d = build_grid(ShapeSpec::interval(-1, 1), 0.25, 1.25);
    FormMatrix F = assemble(d, k);
    std::stringstream buf(std::ios::in | std::ios::out | std::ios::binary);
    write_form(buf, F);
    LoadedForm lf = read_form(buf, k);
    CHECK(lf.domain->n_interior() == d.n_interior());
    CHECK(lf.domain->n_shell() == d.n_shell());
    REQUIRE(lf.form.pairs.size() == F.pairs.size());
    for (std::size_t i = 0; i < F.pairs.size(); ++i) {
        CHECK(lf.form.pairs[i].i == F.pairs[i].i);
        CHECK(lf.form.pairs[i].j == F.pairs[i].j);
        CHECK(lf.form.pairs[i].w == F.pairs[i].w);
    }
    for (std::size_t i = 0; i < F.lambda.size(); ++i)
        CHECK(lf.form.lambda[i] == F.lambda[i]);

    std::stringstream junk("not a form");
    CHECK_THROWS_WITH(read_form(junk, k), Catch::Matchers::ContainsSubstring("magic"));
}

TEST_CASE("csv round trip") {
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(csv_quote("plain") == "plain");
    CHECK(csv_quote("a,b") == "\"a,b\"");
    CHECK(csv_quote("say \"hi\"") == "\"say \"\"hi\"\"\"");

    Domain d = build_grid(ShapeSpec::interval(-1, 1), 0.5, 1.5);
    GridFunction u = GridFunction::sample(d, [](double x) { return std::sin(x) / 3.0; });
    std::stringstream ss;
    write_grid_function_csv(ss, u);
    std::vector<double> back = read_value_csv(ss);
    REQUIRE(back.size() == d.n_interior());
    for (std::size_t i = 0; i < back.size(); ++i) CHECK(back[i] == u.interior[i]);
}

TEST_CASE("cli kernel table") {
    TempDir tmp;
    std::ofstream(tmp.path / "run.cfg") << standard_config();
    std::string out;
    int rc = run("kernel table --config " + (tmp.path / "run.cfg").string(), &out);
    CHECK(rc == 0);
    // the r = rho/10 row carries M = ln 10 and ell = 1
    bool found = false;
    std::istringstream lines(out);
    std::string line;
    while (std::getline(lines, line)) {
        if (line.rfind("0.1000000", 0) == 0) {
            found = true;
            CHECK(line.find("2.302585092994") != std::string::npos);
        }
    }
    CHECK(found);
}

TEST_CASE("cli verify and artifacts") {
    TempDir tmp;
    std::ofstream(tmp.path / "run.cfg") << standard_config();
    std::string csv = (tmp.path / "sv.csv").string();
    std::string out;
    int rc = run("verify --check stroock_varopoulos --seeds 5 --config " +
                     (tmp.path / "run.cfg").string() + " --out " + csv,
                 &out);
    CHECK(rc == 0);
    std::string body = slurp(csv);
    CHECK(body.rfind("seed,lhs,rhs,ratio,pass", 0) == 0);
    int rows = 0;
    for (char c : body) rows += c == '\n';
    CHECK(rows == 6);  // header + 5 seeds
    CHECK(body.find("false") == std::string::npos);

    // unknown check name lists the menu
    rc = run("verify --check bogus --config " + (tmp.path / "run.cfg").string(), &out);
    CHECK(rc != 0);
}

TEST_CASE("cli assemble and form info") {
    TempDir tmp;
    std::ofstream(tmp.path / "run.cfg") << standard_config();
    std::string bin = (tmp.path / "form.bin").string();
    CHECK(run("assemble --config " + (tmp.path / "run.cfg").string() + " --out " + bin) == 0);
    std::string out;
    CHECK(run("form info --in " + bin, &out) == 0);
    CHECK(out.find("cells 16") != std::string::npos);
    CHECK(out.find("lambda min") != std::string::npos);
}

TEST_CASE("cli solve dirichlet writes solution and report") {
    TempDir tmp;
    std::ofstream(tmp.path / "run.cfg") << standard_config();
    std::string sol = (tmp.path / "u.csv").string();
    std::string repj = (tmp.path / "rep.json").string();
    CHECK(run("solve dirichlet --config " + (tmp.path / "run.cfg").string() + " --out " + sol +
              " --report " + repj) == 0);
    CHECK(slurp(sol).rfind("index,x0,value", 0) == 0);
    CHECK(slurp(repj).find("\"residual\"") != std::string::npos);

    // pohozaev summary
    std::ofstream(tmp.path / "pp.cfg")
        << "kernel.dimension = 1\nkernel.tail.variant = piecewisepower\n"
           "kernel.tail.alpha1 = 0.5\nkernel.tail.alpha2 = 0.5\nkernel.rho = 1\n"
           "domain.shape = interval\ndomain.a = -1\ndomain.b = 1\n"
           "domain.h = 0.125\ndomain.r_ext = 1.125\nsolve.sigma = 0.5\n";
    std::string out;
    CHECK(run("solve pohozaev --config " + (tmp.path / "pp.cfg").string(), &out) == 0);
    auto pos = out.find("p_star ");
    REQUIRE(pos != std::string::npos);
    CHECK(std::stod(out.substr(pos + 7)) == Catch::Approx(3.0).margin(1e-3));
    CHECK(out.find("pass true") != std::string::npos);
}

TEST_CASE("cli rejects malformed configs without artifacts") {
    TempDir tmp;
    std::ofstream(tmp.path / "bad.cfg") << "kernel.dimension == 1\n";
    std::string target = (tmp.path / "out.csv").string();
    int rc = run("kernel table --config " + (tmp.path / "bad.cfg").string() + " --out " + target);
    CHECK(rc != 0);
    CHECK_FALSE(fs::exists(target));
}

TEST_CASE("report is deterministic") {
    std::istringstream in(standard_config());
    RunConfig cfg = RunConfig::parse(in);
    std::string a = run_report(cfg).dump(2);
    std::string b = run_report(cfg).dump(2);
    CHECK(a == b);
    CHECK(a.find("\"checks\"") != std::string::npos);
}
