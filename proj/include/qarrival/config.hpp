#pragma once

#include <cstdint>
#include <string>

#include "qarrival/capdesign.hpp"
#include "qarrival/wavepacket.hpp"

namespace qarrival {

// flat key=value run configuration (e.g. "packet.alpha=1.4"); unknown keys
// are rejected with a line-numbered ValidationError
struct RunConfig {
    PacketParams packet;           // packet.{alpha,delta,p0,x0,b}
    capdesign::DesignSpec design;  // design.{L,N,p1,p2,s,max_restarts,tolerance}
    double t_start = 0.0;          // grid.t_start
    double t_end = 1.5e-3;         // grid.t_end
    int t_steps = 301;             // grid.steps (number of rows)
    double sim_t_max = 5e-3;       // sim.t_max (dwell-time integration horizon)
    std::uint64_t seed = 20240817ULL;  // run.seed (overridden by --seed)

    void validate() const;
};

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

}  // namespace qarrival
