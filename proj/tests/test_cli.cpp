#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "qarrival/capscatter.hpp"
#include "qarrival/config.hpp"
#include "qarrival/errors.hpp"

using namespace qarrival;

namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string(QARRIVAL_CLI_PATH) + " " + args;
    const int rc = std::system(cmd.c_str());
    REQUIRE(rc != -1);
    return WEXITSTATUS(rc);
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    REQUIRE(out.good());
    out << text;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

const std::string kShippedPot = std::string(QARRIVAL_SOURCE_DIR) + "/optimized_cap.txt";

}  // namespace

TEST_CASE("config parsing") {
    const RunConfig cfg = parse_config_text(
        "# comment\n"
        "packet.alpha = 1.2\n"
        "packet.b=250\n"
        "grid.steps = 11\n"
        "design.s=25\n"
        "run.seed = 7\n");
    CHECK(cfg.packet.alpha == 1.2);
    CHECK(cfg.packet.b == 250.0);
    CHECK(cfg.packet.delta == 0.007);  // untouched defaults survive
    CHECK(cfg.t_steps == 11);
    CHECK(cfg.design.s == 25);
    CHECK(cfg.seed == 7);

    CHECK_THROWS_AS(parse_config_text("packet.alpha"), ValidationError);
    CHECK_THROWS_AS(parse_config_text("packet.alpha=abc"), ValidationError);
    CHECK_THROWS_AS(parse_config_text("packet.omega=1"), ValidationError);
    CHECK_THROWS_AS(parse_config_text("grid.steps=1"), ValidationError);
    CHECK_THROWS_AS(parse_config_text("grid.t_end=0"), ValidationError);
    CHECK_THROWS_AS(parse_config_text("run.seed=1.5"), ValidationError);
    try {
        parse_config_text("packet.alpha=1\nbogus=2\n");
        FAIL("expected throw");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("design: tiny run reaches its target, impossible run exits 2") {
    write_file("cli_design_ok.cfg",
               "design.N=2\ndesign.s=7\ndesign.p1=280\ndesign.p2=320\n"
               "design.tolerance=5e-3\ndesign.max_restarts=12\n");
    CHECK(run_cli("design --config cli_design_ok.cfg --out cli_design_ok.pot > cli_design_ok.log") == 0);
    const LayeredPotential pot = LayeredPotential::load("cli_design_ok.pot");
    CHECK(pot.N() == 2);
    pot.validate(true);

    write_file("cli_design_miss.cfg",
               "design.N=1\ndesign.s=5\ndesign.tolerance=1e-6\ndesign.max_restarts=2\n");
    CHECK(run_cli("design --config cli_design_miss.cfg --out cli_design_miss.pot > cli_design_miss.log") == 2);
}

TEST_CASE("config errors exit 1") {
    write_file("cli_bad1.cfg", "packet.alpha=not_a_number\n");
    CHECK(run_cli("simulate --config cli_bad1.cfg 2> /dev/null") == 1);
    write_file("cli_bad2.cfg", "packet.omega=3\n");
    CHECK(run_cli("simulate --config cli_bad2.cfg 2> /dev/null") == 1);
    write_file("cli_bad3.cfg", "grid.steps=1\n");
    CHECK(run_cli("simulate --config cli_bad3.cfg 2> /dev/null") == 1);
    CHECK(run_cli("simulate --config no_such_file.cfg 2> /dev/null") == 1);
    CHECK(run_cli("frobnicate 2> /dev/null") == 1);
}

TEST_CASE("simulate: schema, determinism, 17-digit round trip") {
    write_file("cli_sim.cfg",
               "grid.t_start=2e-4\ngrid.t_end=1e-3\ngrid.steps=5\n");
    const std::string base =
        "simulate --config cli_sim.cfg --potential " + kShippedPot + " --out ";
    REQUIRE(run_cli(base + "cli_sim_a.csv > /dev/null") == 0);
    REQUIRE(run_cli(base + "cli_sim_b.csv > /dev/null") == 0);
    const std::string a = slurp("cli_sim_a.csv");
    CHECK(a == slurp("cli_sim_b.csv"));  // byte-identical reruns

    std::istringstream in(a);
    std::string line;
    bool saw_units = false, saw_tau = false, saw_header = false;
    int rows = 0;
    while (std::getline(in, line)) {
        if (line.rfind("# units: atomic", 0) == 0) saw_units = true;
        if (line.rfind("# tau_D:", 0) == 0) saw_tau = true;
        if (line == "t,J_free,J_cap,dNdt_neg,Pi_K,Pi_B,absJ,dNdt_neg_shifted") {
            saw_header = true;
            continue;
        }
        if (line.empty() || line[0] == '#' || !saw_header) continue;
        ++rows;
        std::istringstream ls(line);
        std::string tok;
        int fields = 0;
        while (std::getline(ls, tok, ',')) {
            ++fields;
            const double v = std::strtod(tok.c_str(), nullptr);
            char back[64];
            std::snprintf(back, sizeof back, "%.17g", v);
            CHECK(tok == back);  // parse -> print round trip is exact
        }
        CHECK(fields == 8);
    }
    CHECK(saw_units);
    CHECK(saw_tau);
    CHECK(saw_header);
    CHECK(rows == 5);
}

TEST_CASE("validate: clean pass, fault injection fails the flux check") {
    write_file("cli_val.cfg", "grid.steps=61\n");
    const std::string skips = " --skip oracle --skip moments";
    CHECK(run_cli("validate --config cli_val.cfg --potential " + kShippedPot + skips +
                  " > cli_val_ok.log") == 0);
    const std::string log = slurp("cli_val_ok.log");
    CHECK(log.find("oracle     skipped") != std::string::npos);
    CHECK(log.find("FAIL") == std::string::npos);

    // corrupt one layer of the shipped potential: the absorber is no longer
    // reflectionless, so the flux-identity check must fail
    LayeredPotential pot = LayeredPotential::load(kShippedPot);
    pot.V[1] = cplx(pot.V[1].real() + 4e5, pot.V[1].imag());
    pot.save("cli_val_corrupt.pot");
    CHECK(run_cli("validate --config cli_val.cfg --potential cli_val_corrupt.pot" + skips +
                  " > cli_val_bad.log") == 4);
    CHECK(slurp("cli_val_bad.log").find("FAIL") != std::string::npos);

    CHECK(run_cli("validate --config cli_val.cfg --potential " + kShippedPot +
                  " --skip bogus 2> /dev/null") == 1);
}
