#include <cmath>

#include "fcs/errors.hpp"
#include "fcs/workbench.hpp"

namespace fcs::wb {

using geom::AffineMap;
using geom::AnnulusMap;
using geom::BilinearMap;
using geom::Patch;
using geom::PatchKind;
using geom::Segment;
using geom::SideInfo;

namespace {

Patch rect_patch(PatchKind kind, Vec2 origin, Vec2 e1, Vec2 e2,
                 std::array<SideInfo, 4> sides) {
    Patch p;
    p.kind = kind;
    p.map = std::make_shared<AffineMap>(origin, e1, e2);
    p.sides = sides;
    return p;
}

const SideInfo kInterior{false, ""};

}  // namespace

ProblemSpec sod_channel(int r, int n0, int nv) {
    ProblemSpec ps;
    ps.name = "sod";
    ps.height = 0.25;
    ps.T = 0.2;
    ps.cfl = 0.5;
    Patch p = rect_patch(PatchKind::I, {0, 0}, {1, 0}, {0, 0.25},
                         {SideInfo{true, "left"}, SideInfo{true, "right"},
                          SideInfo{true, "bottom"}, SideInfo{true, "top"}});
    p.index = 0;
    geom::subdivide_Q(p, r, 1, n0, nv);
    ps.dec.nv = nv;
    ps.dec.n0 = n0;
    ps.dec.patches.push_back(std::move(p));
    ps.dec.assign_global_ids();
    ps.bcs["left"] = {BcKind::slip_wall};
    ps.bcs["right"] = {BcKind::slip_wall};
    ps.bcs["top"] = {BcKind::zero_normal_all};
    ps.bcs["bottom"] = {BcKind::zero_normal_all};
    ps.ic = [](double x, double) {
        return x < 0.5 ? euler::conservative(1.0, 0.0, 0.0, 1.0)
                       : euler::conservative(0.125, 0.0, 0.0, 0.1);
    };
    return ps;
}

ProblemSpec riemann4(int r, int s, int n0, int nv, double T) {
    ProblemSpec ps;
    ps.name = "riemann4";
    ps.height = 1.0;
    ps.T = T;
    ps.cfl = 0.5;
    Patch p = rect_patch(PatchKind::I, {0, 0}, {1, 0}, {0, 1},
                         {SideInfo{true, "side"}, SideInfo{true, "side"},
                          SideInfo{true, "side"}, SideInfo{true, "side"}});
    p.index = 0;
    geom::subdivide_Q(p, r, s, n0, nv);
    ps.dec.nv = nv;
    ps.dec.n0 = n0;
    ps.dec.patches.push_back(std::move(p));
    ps.dec.assign_global_ids();
    ps.bcs["side"] = {BcKind::zero_normal_all};
    // Lax-Liu configuration 4 quadrant states (four shocks)
    ps.ic = [](double x, double y) {
        if (x >= 0.5 && y >= 0.5) return euler::conservative(1.1, 0.0, 0.0, 1.1);
        if (x < 0.5 && y >= 0.5) return euler::conservative(0.5065, 0.8939, 0.0, 0.35);
        if (x < 0.5 && y < 0.5) return euler::conservative(1.1, 0.8939, 0.8939, 1.1);
        return euler::conservative(0.5065, 0.0, 0.8939, 0.35);
    };
    return ps;
}

ProblemSpec wedge_flow(double mach, double target_h, int n0, int n1, int nv) {
    ProblemSpec ps;
    ps.name = "wedge";
    ps.height = 0.03;
    ps.T = 0.02;
    ps.cfl = 0.25;  // C1 corner patches present

    const double half = 20.0 * M_PI / 180.0;
    const Vec2 tip{0.013, 0.015};
    const Vec2 fu{std::cos(half), std::sin(half)};    // upper face direction
    const Vec2 fl{std::cos(half), -std::sin(half)};   // lower face direction
    const Vec2 nu{-std::sin(half), std::cos(half)};   // upward face normal
    const Vec2 nl{-std::sin(half), -std::cos(half)};  // downward face normal
    const double x_out = 0.024;
    const double face_len = (x_out - tip.x) / std::cos(half);
    const Vec2 exit_u = tip + face_len * fu;  // (0.024, 0.019004)
    const Vec2 exit_l = tip + face_len * fl;

    const double arm = 0.0062;   // C1 half-arm length along each face line
    const double ws = 0.0055;    // boundary-patch width off the face
    const double y_iu = 0.0191;  // bottom of the upper interior block
    const double y_il = 0.03 - y_iu;
    const double x_ii = 0.0105;  // left edge of the upper/lower interior blocks

    auto& dec = ps.dec;
    dec.nv = nv;
    dec.n0 = n0;
    dec.n1 = n1;

    // interior blocks
    dec.patches.push_back(rect_patch(PatchKind::I, {0, 0}, {0.013, 0}, {0, 0.03},
                                     {SideInfo{true, "inflow"}, kInterior,
                                      SideInfo{true, "tb"}, SideInfo{true, "tb"}}));
    dec.patches.push_back(rect_patch(PatchKind::I, {x_ii, y_iu}, {x_out - x_ii, 0},
                                     {0, 0.03 - y_iu},
                                     {kInterior, SideInfo{true, "outflow"}, kInterior,
                                      SideInfo{true, "tb"}}));
    dec.patches.push_back(rect_patch(PatchKind::I, {x_ii, 0}, {x_out - x_ii, 0}, {0, y_il},
                                     {kInterior, SideInfo{true, "outflow"},
                                      SideInfo{true, "tb"}, kInterior}));

    // boundary-fitted trapezoids along the faces (q2=0 on the face, q1=1 on
    // the outflow plane); they reach the corner point at q1=0
    {
        Patch s_up;
        s_up.kind = PatchKind::S;
        s_up.map = std::make_shared<BilinearMap>(tip, exit_u, tip + ws * nu,
                                                 exit_u + Vec2{0, ws / std::cos(half)});
        s_up.sides = {kInterior, SideInfo{true, "outflow"}, SideInfo{true, "wedge"}, kInterior};
        dec.patches.push_back(std::move(s_up));
        Patch s_lo;
        s_lo.kind = PatchKind::S;
        s_lo.map = std::make_shared<BilinearMap>(tip, exit_l, tip + ws * nl,
                                                 exit_l + Vec2{0, -ws / std::cos(half)});
        s_lo.sides = {kInterior, SideInfo{true, "outflow"}, SideInfo{true, "wedge"}, kInterior};
        dec.patches.push_back(std::move(s_lo));
    }

    // C1 corner patch at the tip: arms run along the face lines through the
    // corner (downstream halves on the walls, upstream halves in the flow)
    {
        auto ellA = std::make_shared<Segment>(tip + arm * fu, tip - arm * fu);
        auto ellB = std::make_shared<Segment>(tip + arm * fl, tip - arm * fl);
        dec.patches.push_back(geom::build_c1_patch(ellA, ellB, tip, "wedge"));
    }

    for (size_t k = 0; k < dec.patches.size(); ++k) dec.patches[k].index = static_cast<int>(k);
    for (auto& p : dec.patches) {
        if (p.kind == PatchKind::C1)
            geom::subdivide_L(p, 2, n1, nv);
        else
            geom::subdivide_Q(p, 1, 1, n0, nv);
    }
    geom::refine(dec, target_h);
    dec.assign_global_ids();

    ps.bcs["inflow"] = {BcKind::inflow, euler::conservative(1.4, mach, 0.0, 1.0)};
    ps.bcs["outflow"] = {BcKind::supersonic_outflow};
    ps.bcs["tb"] = {BcKind::zero_normal_all};
    ps.bcs["wedge"] = {BcKind::noslip_adiabatic};
    ps.ic = make_flow_ic(mach);
    return ps;
}

ProblemSpec cylinder_flow(double target_h, int n0, int nv) {
    ProblemSpec ps;
    ps.name = "flow-cylinder";
    ps.height = 2.0;
    ps.T = 0.1;
    ps.cfl = 0.5;
    const Vec2 c{1.1, 0.0};
    const double r0 = 0.25, r1 = 0.62;

    auto& dec = ps.dec;
    dec.nv = nv;
    dec.n0 = n0;

    dec.patches.push_back(rect_patch(PatchKind::I, {0, -1}, {0.75, 0}, {0, 2},
                                     {SideInfo{true, "inflow"}, kInterior,
                                      SideInfo{true, "wall"}, SideInfo{true, "wall"}}));
    dec.patches.push_back(rect_patch(PatchKind::I, {1.45, -1}, {1.55, 0}, {0, 2},
                                     {kInterior, SideInfo{true, "outflow"},
                                      SideInfo{true, "wall"}, SideInfo{true, "wall"}}));
    dec.patches.push_back(rect_patch(PatchKind::I, {0.6, 0.33}, {1.0, 0}, {0, 0.67},
                                     {kInterior, kInterior, kInterior, SideInfo{true, "wall"}}));
    dec.patches.push_back(rect_patch(PatchKind::I, {0.6, -1}, {1.0, 0}, {0, 0.67},
                                     {kInterior, kInterior, SideInfo{true, "wall"}, kInterior}));
    {
        Patch ring;
        ring.kind = PatchKind::S;
        ring.map = std::make_shared<AnnulusMap>(c, r0, r1, -M_PI, 2 * M_PI);
        ring.periodic1 = true;
        ring.sides = {kInterior, kInterior, SideInfo{true, "cylinder"}, kInterior};
        dec.patches.push_back(std::move(ring));
    }
    for (size_t k = 0; k < dec.patches.size(); ++k) dec.patches[k].index = static_cast<int>(k);
    for (auto& p : dec.patches)
        geom::subdivide_Q(p, p.periodic1 ? 3 : 1, 1, n0, nv);
    geom::refine(dec, target_h);
    dec.assign_global_ids();

    ps.bcs["inflow"] = {BcKind::inflow, euler::conservative(1.4, 10.0, 0.0, 1.0)};
    ps.bcs["outflow"] = {BcKind::supersonic_outflow};
    ps.bcs["wall"] = {BcKind::slip_wall};
    ps.bcs["cylinder"] = {BcKind::noslip_adiabatic};
    ps.ic = make_flow_ic(10.0);
    return ps;
}

ProblemSpec cylinder_matrix(double mach, int n_row, int n_col, double target_h, int n0, int nv) {
    ProblemSpec ps;
    ps.name = "shock-cylinder-matrix";
    ps.T = 0.1;
    ps.cfl = 0.5;
    auto& dec = ps.dec;
    dec.nv = nv;
    dec.n0 = n0;

    const double cell_w = 3.0, cell_h = 2.0, pitch_x = 2.8, pitch_y = 1.8;
    const double front = 2.5, r0 = 0.25, r1 = 0.62;
    const double total_h = cell_h + (n_row - 1) * pitch_y;
    ps.height = total_h;
    const double x_cells = front;  // cells start after the front block
    const double x_end = x_cells + cell_w + (n_col - 1) * pitch_x;

    auto add_rect = [&](Vec2 o, Vec2 e1, Vec2 e2, std::array<SideInfo, 4> s) {
        dec.patches.push_back(rect_patch(PatchKind::I, o, e1, e2, s));
    };
    // front and wake blocks span the full height
    add_rect({0, 0}, {front + 0.2, 0}, {0, total_h},
             {SideInfo{true, "inflow"}, kInterior, SideInfo{true, "wall"},
              SideInfo{true, "wall"}});
    add_rect({x_end - 0.2, 0}, {front + 0.2, 0}, {0, total_h},
             {kInterior, SideInfo{true, "outflow"}, SideInfo{true, "wall"},
              SideInfo{true, "wall"}});

    for (int col = 0; col < n_col; ++col)
        for (int row = 0; row < n_row; ++row) {
            const Vec2 o{x_cells + col * pitch_x, row * pitch_y};
            const Vec2 cc = o + Vec2{1.1, 1.0};
            const bool bottom_wall = row == 0, top_wall = row == n_row - 1;
            const SideInfo bs = bottom_wall ? SideInfo{true, "wall"} : kInterior;
            const SideInfo ts = top_wall ? SideInfo{true, "wall"} : kInterior;
            add_rect(o, {0.75, 0}, {0, cell_h}, {kInterior, kInterior, bs, ts});
            add_rect({o.x + 1.45, o.y}, {cell_w - 1.45, 0}, {0, cell_h},
                     {kInterior, kInterior, bs, ts});
            add_rect({o.x + 0.6, o.y + 1.33}, {1.0, 0}, {0, cell_h - 1.33},
                     {kInterior, kInterior, kInterior, ts});
            add_rect({o.x + 0.6, o.y}, {1.0, 0}, {0, 0.67},
                     {kInterior, kInterior, bs, kInterior});
            Patch ring;
            ring.kind = PatchKind::S;
            ring.map = std::make_shared<AnnulusMap>(cc, r0, r1, -M_PI, 2 * M_PI);
            ring.periodic1 = true;
            ring.sides = {kInterior, kInterior, SideInfo{true, "cylinder"}, kInterior};
            dec.patches.push_back(std::move(ring));
        }
    for (size_t k = 0; k < dec.patches.size(); ++k) dec.patches[k].index = static_cast<int>(k);
    for (auto& p : dec.patches)
        geom::subdivide_Q(p, p.periodic1 ? 3 : 1, 1, n0, nv);
    geom::refine(dec, target_h);
    dec.assign_global_ids();

    const auto left = shock_left_state(mach, ShockDensity::paper);
    ps.bcs["inflow"] = {BcKind::inflow, euler::conservative(left[0], left[1], left[2], left[3])};
    BcSpec out;
    out.kind = BcKind::outflow_pressure;
    out.pressure = 1.0;
    ps.bcs["outflow"] = out;
    ps.bcs["wall"] = {BcKind::slip_wall};
    ps.bcs["cylinder"] = {BcKind::noslip_adiabatic};
    ps.ic = make_shock_ic(mach, 0.6);
    return ps;
}

ProblemSpec prism_flow(double mach, double front_angle_deg, double target_h, int n0, int n1,
                       int nv) {
    ProblemSpec ps;
    ps.name = "prism";
    ps.height = 0.03;
    ps.T = 0.02;
    ps.cfl = 0.25;

    const double half = 0.5 * front_angle_deg * M_PI / 180.0;
    const Vec2 tip{0.013, 0.015};
    const double len = 0.011;
    const double hw = len * std::tan(half);  // half-width of the rear face
    const Vec2 r_up{tip.x + len, tip.y + hw};
    const Vec2 r_lo{tip.x + len, tip.y - hw};
    const Vec2 fu{std::cos(half), std::sin(half)};
    const Vec2 fl{std::cos(half), -std::sin(half)};
    const Vec2 nu{-std::sin(half), std::cos(half)};
    const Vec2 nl{-std::sin(half), -std::cos(half)};
    const double x_max = 0.06;

    const double arm = 0.0045;
    const double ws = 0.0048;
    const double y_iu = tip.y + hw + 0.0016;
    const double y_il = tip.y - hw - 0.0016;
    const double x_ii = 0.0105;

    auto& dec = ps.dec;
    dec.nv = nv;
    dec.n0 = n0;
    dec.n1 = n1;

    // interior blocks: left of the prism, above, below, and the wake
    dec.patches.push_back(rect_patch(PatchKind::I, {0, 0}, {tip.x, 0}, {0, 0.03},
                                     {SideInfo{true, "inflow"}, kInterior,
                                      SideInfo{true, "tb"}, SideInfo{true, "tb"}}));
    dec.patches.push_back(rect_patch(PatchKind::I, {x_ii, y_iu}, {x_max - x_ii, 0},
                                     {0, 0.03 - y_iu},
                                     {kInterior, SideInfo{true, "outflow"}, kInterior,
                                      SideInfo{true, "tb"}}));
    dec.patches.push_back(rect_patch(PatchKind::I, {x_ii, 0}, {x_max - x_ii, 0}, {0, y_il},
                                     {kInterior, SideInfo{true, "outflow"},
                                      SideInfo{true, "tb"}, kInterior}));
    dec.patches.push_back(rect_patch(PatchKind::I, {r_up.x + 0.004, y_il - 0.004},
                                     {x_max - r_up.x - 0.004, 0}, {0, y_iu - y_il + 0.008},
                                     {kInterior, SideInfo{true, "outflow"}, kInterior,
                                      kInterior}));

    // boundary patches along the three faces (reaching all corner points)
    dec.patches.push_back([&] {
        Patch s;
        s.kind = PatchKind::S;
        s.map = std::make_shared<BilinearMap>(tip, r_up, tip + ws * nu, r_up + ws * nu);
        s.sides = {kInterior, kInterior, SideInfo{true, "prism"}, kInterior};
        return s;
    }());
    dec.patches.push_back([&] {
        Patch s;
        s.kind = PatchKind::S;
        s.map = std::make_shared<BilinearMap>(tip, r_lo, tip + ws * nl, r_lo + ws * nl);
        s.sides = {kInterior, kInterior, SideInfo{true, "prism"}, kInterior};
        return s;
    }());
    dec.patches.push_back([&] {
        Patch s;  // rear face, extruded downstream
        s.kind = PatchKind::S;
        s.map = std::make_shared<BilinearMap>(r_lo, r_up, r_lo + Vec2{ws, 0}, r_up + Vec2{ws, 0});
        s.sides = {kInterior, kInterior, SideInfo{true, "prism"}, kInterior};
        return s;
    }());

    // C1 corner patches at the three vertices
    dec.patches.push_back(geom::build_c1_patch(
        std::make_shared<Segment>(tip + arm * fu, tip - arm * fu),
        std::make_shared<Segment>(tip + arm * fl, tip - arm * fl), tip, "prism"));
    dec.patches.push_back(geom::build_c1_patch(
        std::make_shared<Segment>(r_up - arm * fu, r_up + arm * fu),
        std::make_shared<Segment>(r_up + arm * Vec2{0, -1}, r_up + arm * Vec2{0, 1}), r_up,
        "prism"));
    dec.patches.push_back(geom::build_c1_patch(
        std::make_shared<Segment>(r_lo - arm * fl, r_lo + arm * fl),
        std::make_shared<Segment>(r_lo + arm * Vec2{0, 1}, r_lo + arm * Vec2{0, -1}), r_lo,
        "prism"));

    for (size_t k = 0; k < dec.patches.size(); ++k) dec.patches[k].index = static_cast<int>(k);
    for (auto& p : dec.patches) {
        if (p.kind == PatchKind::C1)
            geom::subdivide_L(p, 2, n1, nv);
        else
            geom::subdivide_Q(p, 1, 1, n0, nv);
    }
    geom::refine(dec, target_h);
    dec.assign_global_ids();

    ps.bcs["inflow"] = {BcKind::inflow, euler::conservative(1.4, mach, 0.0, 1.0)};
    ps.bcs["outflow"] = {BcKind::supersonic_outflow};
    ps.bcs["tb"] = {BcKind::slip_wall};
    ps.bcs["prism"] = {BcKind::noslip_adiabatic};
    ps.ic = make_flow_ic(mach);
    return ps;
}

ProblemSpec get_problem(const std::string& name, double target_h) {
    if (name == "sod") return sod_channel();
    if (name == "riemann4") return riemann4();
    if (name == "wedge") return wedge_flow(3.5, target_h > 0 ? target_h : 1.7e-4);
    if (name == "flow-cylinder") return cylinder_flow(target_h > 0 ? target_h : 0.011);
    if (name == "shock-cylinder-matrix")
        return cylinder_matrix(10.0, 1, 1, target_h > 0 ? target_h : 0.011);
    if (name == "prism") return prism_flow(3.5, 40.0, target_h > 0 ? target_h : 1.7e-4);
    throw ConfigError("unknown problem: " + name);
}

}  // namespace fcs::wb
