#include "qarrival/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "qarrival/errors.hpp"

namespace qarrival {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

[[noreturn]] void fail(int line, const std::string& msg) {
    throw ValidationError("config line " + std::to_string(line) + ": " + msg);
}

double as_double(int line, const std::string& v) {
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0') fail(line, "not a number: '" + v + "'");
    return x;
}

long long as_int(int line, const std::string& v) {
    char* end = nullptr;
    const long long x = std::strtoll(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0') fail(line, "not an integer: '" + v + "'");
    return x;
}

}  // namespace

void RunConfig::validate() const {
    packet.validate();
    design.validate();
    if (!(t_end > t_start)) throw ValidationError("config: grid.t_end must exceed grid.t_start");
    if (t_steps < 2) throw ValidationError("config: grid.steps must be at least 2");
    if (!(sim_t_max > 0.0)) throw ValidationError("config: sim.t_max must be positive");
}

RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail(lineno, "expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty()) fail(lineno, "empty key");
        if (val.empty()) fail(lineno, "empty value for '" + key + "'");

        if (key == "packet.alpha") cfg.packet.alpha = as_double(lineno, val);
        else if (key == "packet.delta") cfg.packet.delta = as_double(lineno, val);
        else if (key == "packet.p0") cfg.packet.p0 = as_double(lineno, val);
        else if (key == "packet.x0") cfg.packet.x0 = as_double(lineno, val);
        else if (key == "packet.b") cfg.packet.b = as_double(lineno, val);
        else if (key == "design.L") cfg.design.L = as_double(lineno, val);
        else if (key == "design.N") cfg.design.N = static_cast<int>(as_int(lineno, val));
        else if (key == "design.p1") cfg.design.p1 = as_double(lineno, val);
        else if (key == "design.p2") cfg.design.p2 = as_double(lineno, val);
        else if (key == "design.s") cfg.design.s = static_cast<int>(as_int(lineno, val));
        else if (key == "design.max_restarts")
            cfg.design.max_restarts = static_cast<int>(as_int(lineno, val));
        else if (key == "design.tolerance") cfg.design.tolerance = as_double(lineno, val);
        else if (key == "grid.t_start") cfg.t_start = as_double(lineno, val);
        else if (key == "grid.t_end") cfg.t_end = as_double(lineno, val);
        else if (key == "grid.steps") cfg.t_steps = static_cast<int>(as_int(lineno, val));
        else if (key == "sim.t_max") cfg.sim_t_max = as_double(lineno, val);
        else if (key == "run.seed")
            cfg.seed = static_cast<std::uint64_t>(as_int(lineno, val));
        else fail(lineno, "unknown key '" + key + "'");
    }
    cfg.validate();
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("config: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

}  // namespace qarrival
