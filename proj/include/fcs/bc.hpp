#ifndef FCS_BC_HPP
#define FCS_BC_HPP

#include <array>
#include <map>
#include <string>

namespace fcs {

enum class BcKind {
    inflow,               // overwrite the full conservative state
    outflow_pressure,     // hold pressure, rebuild E
    slip_wall,            // zero normal velocity
    noslip_adiabatic,     // zero velocity, d(theta)/dn = 0
    supersonic_outflow,   // nothing imposed
    zero_normal_all,      // d/dn = 0 on every component
};

struct BcSpec {
    BcKind kind = BcKind::slip_wall;
    std::array<double, 4> state{};  // conservative, for inflow
    double pressure = 1.0;          // for outflow_pressure
};

using BcTable = std::map<std::string, BcSpec>;

}  // namespace fcs

#endif
