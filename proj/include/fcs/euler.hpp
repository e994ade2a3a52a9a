#ifndef FCS_EULER_HPP
#define FCS_EULER_HPP

#include "fcs/subpatch_data.hpp"

namespace fcs::euler {

constexpr double kGamma = 1.4;

/** Conservative state from primitives. */
std::array<double, 4> conservative(double rho, double u, double v, double p);

/** SSPRK(5,4) stage coefficients (five-stage fourth-order SSP scheme). */
struct Ssprk54 {
    // u1 = u0 + dt b0 L(u0)
    // u2 = a20 u0 + a21 u1 + dt b1 L(u1)
    // u3 = a30 u0 + a32 u2 + dt b2 L(u2)
    // u4 = a40 u0 + a43 u3 + dt b3 L(u3)
    // u  = c2 u2 + c3 u3 + dt d3 L(u3) + c4 u4 + dt d4 L(u4)
    static constexpr double b0 = 0.391752226571890;
    static constexpr double a20 = 0.444370493651235, a21 = 0.555629506348765,
                            b1 = 0.368410593050371;
    static constexpr double a30 = 0.620101851488403, a32 = 0.379898148511597,
                            b2 = 0.251891774271694;
    static constexpr double a40 = 0.178079954393132, a43 = 0.821920045606868,
                            b3 = 0.544974750228521;
    static constexpr double c2 = 0.517231671970585, c3 = 0.096059710526147,
                            d3 = 0.063692468666290, c4 = 0.386708617503269,
                            d4 = 0.226007483236906;
};

/** -div f(e) + div(mu grad w) for w in {rho, rho u, rho v, theta}; writes
 *  into out. State must be boundary-enforced and fringe-exchanged. Throws
 *  InvalidStateError at nonpositive density/pressure (interior points). */
void euler_rhs(SubpatchData& d, const State& e, const Field& mu, State& out, double t);

/** Apply the resolved boundary conditions on every wall point of d.e. */
void enforce_bc(SubpatchData& d, double t);

/** One SSPRK(5,4) stage update (stage = 0..4) from the registers in d. */
void ssprk_stage_update(SubpatchData& d, int stage, double dt);

/** min over interior points of 1 / (S/h + mu/h^2); returns +inf if empty */
double dt_bound_local(const SubpatchData& d);

}  // namespace fcs::euler

#endif
