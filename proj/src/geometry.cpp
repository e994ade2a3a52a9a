#include "fcs/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fcs/errors.hpp"

namespace fcs::geom {

Vec2 BoundaryCurve::derivative(double t) const {
    const double e = 1e-6;
    const double t0 = std::max(0.0, t - e), t1 = std::min(1.0, t + e);
    return (point(t1) - point(t0)) * (1.0 / (t1 - t0));
}

json Segment::to_json() const {
    return {{"type", "segment"}, {"a", {a_.x, a_.y}}, {"b", {b_.x, b_.y}}};
}
json CircularArc::to_json() const {
    return {{"type", "arc"}, {"center", {c_.x, c_.y}}, {"r", r_}, {"theta0", t0_}, {"theta1", t1_}};
}

std::shared_ptr<BoundaryCurve> BoundaryCurve::from_json(const json& j) {
    const std::string type = j.at("type");
    if (type == "segment")
        return std::make_shared<Segment>(Vec2{j["a"][0], j["a"][1]}, Vec2{j["b"][0], j["b"][1]});
    if (type == "arc")
        return std::make_shared<CircularArc>(Vec2{j["center"][0], j["center"][1]}, j["r"],
                                             j["theta0"], j["theta1"]);
    throw ConfigError("unknown curve type: " + type);
}

Mat2 Mapping::jacobian(double q1, double q2) const {
    const double e = 1e-7;
    const Vec2 dx = ((*this)(q1 + e, q2) - (*this)(q1 - e, q2)) * (0.5 / e);
    const Vec2 dy = ((*this)(q1, q2 + e) - (*this)(q1, q2 - e)) * (0.5 / e);
    return {dx.x, dy.x, dx.y, dy.y};
}

std::optional<Vec2> Mapping::invert(Vec2 x, Vec2 seed, double tol, int max_iter) const {
    Vec2 q = seed;
    double res = ((*this)(q.x, q.y) - x).norm();
    for (int it = 0; it < max_iter; ++it) {
        if (res <= tol) return q;
        const Mat2 J = jacobian(q.x, q.y);
        if (std::abs(J.det()) < 1e-300) return std::nullopt;
        const Vec2 dq = J.inverse().apply(x - (*this)(q.x, q.y));
        double step = 1.0;
        for (int h = 0; h < 8; ++h) {
            const Vec2 qn{q.x + step * dq.x, q.y + step * dq.y};
            const double rn = ((*this)(qn.x, qn.y) - x).norm();
            if (rn < res) {
                q = qn;
                res = rn;
                break;
            }
            step *= 0.5;
            if (h == 7) return std::nullopt;  // stalled
        }
    }
    return res <= tol ? std::optional<Vec2>(q) : std::nullopt;
}

std::optional<Vec2> AffineMap::invert(Vec2 x, Vec2, double, int) const {
    const Mat2 J{e1_.x, e2_.x, e1_.y, e2_.y};
    if (std::abs(J.det()) < 1e-300) return std::nullopt;
    return J.inverse().apply(x - o_);
}

json AffineMap::to_json() const {
    return {{"type", "affine"}, {"o", {o_.x, o_.y}}, {"e1", {e1_.x, e1_.y}}, {"e2", {e2_.x, e2_.y}}};
}

Vec2 AnnulusMap::operator()(double q1, double q2) const {
    const double th = t0_ + q1 * dt_;
    const double r = r0_ + q2 * (r1_ - r0_);
    return {c_.x + r * std::cos(th), c_.y + r * std::sin(th)};
}

Mat2 AnnulusMap::jacobian(double q1, double q2) const {
    const double th = t0_ + q1 * dt_;
    const double r = r0_ + q2 * (r1_ - r0_);
    return {-r * dt_ * std::sin(th), (r1_ - r0_) * std::cos(th),
            r * dt_ * std::cos(th), (r1_ - r0_) * std::sin(th)};
}

std::optional<Vec2> AnnulusMap::invert(Vec2 x, Vec2 seed, double, int) const {
    const Vec2 d = x - c_;
    const double r = d.norm();
    if (r < 1e-300) return std::nullopt;
    const double q2 = (r - r0_) / (r1_ - r0_);
    double th = std::atan2(d.y, d.x);
    double q1 = (th - t0_) / dt_;
    // choose the branch nearest the seed (q1 is 2*pi/dt_-periodic)
    const double period = 2 * M_PI / std::abs(dt_);
    q1 -= period * std::round((q1 - seed.x) / period);
    return Vec2{q1, q2};
}

json AnnulusMap::to_json() const {
    return {{"type", "annulus"}, {"center", {c_.x, c_.y}}, {"r0", r0_}, {"r1", r1_},
            {"theta0", t0_}, {"theta_extent", dt_}};
}

json BilinearMap::to_json() const {
    const Vec2 p00 = a_, p10 = a_ + b_, p01 = a_ + c_;
    const Vec2 p11 = a_ + b_ + c_ + d_;
    return {{"type", "bilinear"}, {"p00", {p00.x, p00.y}}, {"p10", {p10.x, p10.y}},
            {"p01", {p01.x, p01.y}}, {"p11", {p11.x, p11.y}}};
}

json CurveSumMap::to_json() const {
    return {{"type", "curve_sum"}, {"a", a_->to_json()}, {"b", b_->to_json()}, {"corner", {c_.x, c_.y}}};
}

std::shared_ptr<Mapping> Mapping::from_json(const json& j) {
    const std::string type = j.at("type");
    if (type == "affine")
        return std::make_shared<AffineMap>(Vec2{j["o"][0], j["o"][1]}, Vec2{j["e1"][0], j["e1"][1]},
                                           Vec2{j["e2"][0], j["e2"][1]});
    if (type == "annulus")
        return std::make_shared<AnnulusMap>(Vec2{j["center"][0], j["center"][1]}, j["r0"], j["r1"],
                                            j["theta0"], j["theta_extent"]);
    if (type == "bilinear")
        return std::make_shared<BilinearMap>(Vec2{j["p00"][0], j["p00"][1]},
                                             Vec2{j["p10"][0], j["p10"][1]},
                                             Vec2{j["p01"][0], j["p01"][1]},
                                             Vec2{j["p11"][0], j["p11"][1]});
    if (type == "curve_sum")
        return std::make_shared<CurveSumMap>(BoundaryCurve::from_json(j["a"]),
                                             BoundaryCurve::from_json(j["b"]),
                                             Vec2{j["corner"][0], j["corner"][1]});
    throw ConfigError("unknown mapping type: " + type);
}

std::string to_string(PatchKind k) {
    switch (k) {
        case PatchKind::S: return "S";
        case PatchKind::C1: return "C1";
        case PatchKind::C2: return "C2";
        case PatchKind::I: return "I";
    }
    return "?";
}

PatchKind patch_kind_from_string(const std::string& s) {
    if (s == "S") return PatchKind::S;
    if (s == "C1") return PatchKind::C1;
    if (s == "C2") return PatchKind::C2;
    if (s == "I") return PatchKind::I;
    throw ConfigError("unknown patch kind: " + s);
}

int Subpatch::n_points() const {
    int n = 0;
    for (int j = j0; j <= j1; ++j) n += i1 - row_begin(j) + 1;
    return n;
}

std::optional<Vec2> Patch::invert_point(Vec2 x) const {
    // seed from a coarse sample of the parameter domain
    Vec2 best_q{0.5, 0.5};
    double best = 1e300;
    const int ns = 9;
    for (int a = 0; a <= ns; ++a)
        for (int b = 0; b <= ns; ++b) {
            const double q1 = static_cast<double>(a) / ns, q2 = static_cast<double>(b) / ns;
            if (kind == PatchKind::C1 && q1 < 0.5 && q2 < 0.5) continue;
            const double d = ((*map)(q1, q2) - x).norm();
            if (d < best) {
                best = d;
                best_q = {q1, q2};
            }
        }
    return map->invert(x, best_q, 1e-10, 50);
}

bool Patch::contains(Vec2 x, Vec2* q_out, double margin) const {
    auto q = invert_point(x);
    if (!q) return false;
    if (((*map)(q->x, q->y) - x).norm() > 1e-8) return false;
    const double lo = -margin, hi = 1.0 + margin;
    if (periodic1) {
        if (q->y < lo || q->y > hi) return false;
    } else {
        if (q->x < lo || q->x > hi || q->y < lo || q->y > hi) return false;
    }
    if (kind == PatchKind::C1 && q->x < 0.5 - margin && q->y < 0.5 - margin) return false;
    if (q_out) *q_out = *q;
    return true;
}

std::array<double, 2> Patch::max_spacing() const {
    std::array<double, 2> ms{0.0, 0.0};
    const int wrap = periodic1 ? np1 : np1 - 1;
    for (int j = 0; j < np2; ++j)
        for (int i = 0; i < wrap; ++i) {
            const int in = periodic1 ? (i + 1) % np1 : i + 1;
            if (!lattice_valid(i, j) || !lattice_valid(in, j)) continue;
            const Vec2 a = (*map)(i * h1, j * h2), b = (*map)((i + 1) * h1, j * h2);
            ms[0] = std::max(ms[0], (b - a).norm());
        }
    for (int j = 0; j + 1 < np2; ++j)
        for (int i = 0; i < np1; ++i) {
            if (!lattice_valid(i, j) || !lattice_valid(i, j + 1)) continue;
            const Vec2 a = (*map)(i * h1, j * h2), b = (*map)(i * h1, (j + 1) * h2);
            ms[1] = std::max(ms[1], (b - a).norm());
        }
    return ms;
}

void subdivide_Q(Patch& patch, int r, int s, int n0, int nv) {
    if (r < 1 || s < 1) throw UsageError("subdivide_Q: r, s must be >= 1");
    if (patch.kind == PatchKind::C1) throw UsageError("subdivide_Q: use subdivide_L for C1");
    patch.r = r;
    patch.s = s;
    patch.n_cell = n0;
    patch.nv = nv;
    patch.i_corner = patch.j_corner = -1;

    if (patch.periodic1) {
        patch.np1 = r * (n0 - 1);
        patch.h1 = 1.0 / patch.np1;
    } else {
        patch.np1 = r * (n0 - 1) + 2 * nv + 1;
        patch.h1 = 1.0 / (patch.np1 - 1);
    }
    patch.np2 = s * (n0 - 1) + 2 * nv + 1;
    patch.h2 = 1.0 / (patch.np2 - 1);

    patch.subpatches.clear();
    for (int b = 0; b < s; ++b)
        for (int a = 0; a < r; ++a) {
            Subpatch sp;
            sp.patch_index = patch.index;
            sp.local_index = b * r + a;
            if (patch.periodic1) {
                sp.i0 = a * (n0 - 1) - nv;
                sp.i1 = (a + 1) * (n0 - 1) + nv;
                if (r == 1) {  // single cell covers the whole circle
                    sp.i0 = 0;
                    sp.i1 = patch.np1 - 1;
                }
            } else {
                sp.i0 = a * (n0 - 1);
                sp.i1 = (a + 1) * (n0 - 1) + 2 * nv;
            }
            sp.j0 = b * (n0 - 1);
            sp.j1 = (b + 1) * (n0 - 1) + 2 * nv;
            sp.i_cut = sp.i0;
            sp.j_cut = sp.j0;
            patch.subpatches.push_back(sp);
        }
}

void subdivide_L(Patch& patch, int r, int n1, int nv) {
    if (r < 2 || r % 2 != 0) throw UsageError("subdivide_L: r must be even and >= 2");
    if (patch.kind != PatchKind::C1) throw UsageError("subdivide_L: patch must be C1");
    patch.r = patch.s = r;
    patch.n_cell = n1;
    patch.nv = nv;

    const int N = r * (n1 + 1) - 1;
    patch.np1 = patch.np2 = N + 2 * nv;
    patch.h1 = patch.h2 = 1.0 / (N + 2 * nv - 1);
    const int m = r / 2;
    const int ic = (nv - 1) + m * (n1 + 1);
    patch.i_corner = patch.j_corner = ic;

    const int NP = patch.np1;
    auto cell_lo = [&](int a) { return (nv - 1) + a * (n1 + 1); };

    auto make_box = [&](int a, int b) {
        Subpatch sp;
        sp.patch_index = patch.index;
        sp.i0 = std::max(0, cell_lo(a) - nv);
        sp.i1 = std::min(NP - 1, cell_lo(a + 1) + nv);
        sp.j0 = std::max(0, cell_lo(b) - nv);
        sp.j1 = std::min(NP - 1, cell_lo(b + 1) + nv);
        return sp;
    };

    patch.subpatches.clear();

    // H_0: the union of the three corner-adjacent cell boxes, L-shaped
    {
        Subpatch sp;
        sp.patch_index = patch.index;
        sp.local_index = 0;
        sp.i0 = std::max(0, cell_lo(m - 1) - nv);
        sp.i1 = std::min(NP - 1, cell_lo(m + 1) + nv);
        sp.j0 = std::max(0, cell_lo(m - 1) - nv);
        sp.j1 = std::min(NP - 1, cell_lo(m + 1) + nv);
        sp.i_cut = ic;
        sp.j_cut = ic;
        sp.l_shaped = true;
        patch.subpatches.push_back(sp);
    }

    int li = 1;
    auto add_cell = [&](int a, int b) {
        Subpatch sp = make_box(a, b);
        // clip against the L domain (no penetration past the reentrant walls)
        if (!(sp.i0 >= ic || sp.j0 >= ic)) {
            if (sp.j1 < ic) {
                sp.i0 = std::max(sp.i0, ic);
            } else if (sp.i1 < ic) {
                sp.j0 = std::max(sp.j0, ic);
            } else {
                throw GeometryError("subdivide_L: unexpected L-shaped cell subpatch");
            }
        }
        sp.i_cut = sp.i0;
        sp.j_cut = sp.j0;
        sp.local_index = li++;
        patch.subpatches.push_back(sp);
    };

    // block 1: left arm; block 2: upper right; block 3: bottom arm
    for (int b = m; b < 2 * m; ++b)
        for (int a = 0; a < m; ++a)
            if (!(a == m - 1 && b == m)) add_cell(a, b);
    for (int b = m; b < 2 * m; ++b)
        for (int a = m; a < 2 * m; ++a)
            if (!(a == m && b == m)) add_cell(a, b);
    for (int b = 0; b < m; ++b)
        for (int a = m; a < 2 * m; ++a)
            if (!(a == m && b == m - 1)) add_cell(a, b);
}

namespace {

void det_sign_sweep(const Patch& p, int n_samples) {
    int sign = 0;
    for (int a = 0; a <= n_samples; ++a)
        for (int b = 0; b <= n_samples; ++b) {
            const double q1 = static_cast<double>(a) / n_samples;
            const double q2 = static_cast<double>(b) / n_samples;
            if (p.kind == PatchKind::C1 && q1 < 0.5 && q2 < 0.5) continue;
            const double d = p.map->jacobian(q1, q2).det();
            if (std::abs(d) < 1e-14) throw GeometryError("mapping Jacobian vanishes");
            const int s = d > 0 ? 1 : -1;
            if (sign == 0) sign = s;
            if (s != sign) throw GeometryError("mapping Jacobian changes sign");
        }
}

}  // namespace

Patch build_c1_patch(std::shared_ptr<BoundaryCurve> ellA, std::shared_ptr<BoundaryCurve> ellB,
                     Vec2 corner, const std::string& wall_tag) {
    const double scale = std::max(1e-12, (ellA->point(0.0) - ellA->point(1.0)).norm());
    if ((ellA->point(0.5) - corner).norm() > 1e-8 * scale ||
        (ellB->point(0.5) - corner).norm() > 1e-8 * scale)
        throw GeometryError("build_c1_patch: curves must pass through the corner at t=1/2");
    const Vec2 ta = ellA->derivative(0.5), tb = ellB->derivative(0.5);
    if (std::abs(ta.x * tb.y - ta.y * tb.x) < 1e-12 * ta.norm() * tb.norm())
        throw GeometryError("build_c1_patch: tangents at the corner are parallel");

    Patch p;
    p.kind = PatchKind::C1;
    p.map = std::make_shared<CurveSumMap>(std::move(ellA), std::move(ellB), corner);
    for (auto& s : p.sides) s = SideInfo{false, ""};
    p.wall_q1 = SideInfo{true, wall_tag};
    p.wall_q2 = SideInfo{true, wall_tag};
    det_sign_sweep(p, 100);
    return p;
}

Patch build_c2_patch(std::shared_ptr<BoundaryCurve> ellA, std::shared_ptr<BoundaryCurve> ellB,
                     Vec2 corner, const std::string& wall_tag) {
    const double scale = std::max(1e-12, (ellA->point(0.0) - ellA->point(1.0)).norm());
    if ((ellA->point(1.0) - corner).norm() > 1e-8 * scale ||
        (ellB->point(1.0) - corner).norm() > 1e-8 * scale)
        throw GeometryError("build_c2_patch: curves must end at the corner (t=1)");
    const Vec2 ta = ellA->derivative(1.0), tb = ellB->derivative(1.0);
    if (std::abs(ta.x * tb.y - ta.y * tb.x) < 1e-12 * ta.norm() * tb.norm())
        throw GeometryError("build_c2_patch: tangents at the corner are parallel");

    Patch p;
    p.kind = PatchKind::C2;
    p.map = std::make_shared<CurveSumMap>(std::move(ellA), std::move(ellB), corner);
    p.sides[0] = SideInfo{false, ""};          // W
    p.sides[1] = SideInfo{true, wall_tag};     // E = arc BC
    p.sides[2] = SideInfo{false, ""};          // S
    p.sides[3] = SideInfo{true, wall_tag};     // N = arc AC
    det_sign_sweep(p, 100);
    return p;
}

void refine(DomainDecomposition& dec, double hbar) {
    if (hbar <= 0) throw UsageError("refine: hbar must be positive");
    dec.hbar = hbar;
    for (auto& p : dec.patches) {
        int steps = 0;
        for (;;) {
            const auto ms = p.max_spacing();
            if (ms[0] <= hbar && ms[1] <= hbar) break;
            if (++steps > 60) throw GeometryError("refine: did not converge");
            if (p.kind == PatchKind::C1) {
                const double f = std::max(ms[0], ms[1]) / hbar;
                int r = static_cast<int>(std::ceil(p.r * f));
                if (r % 2) ++r;
                r = std::max(r, p.r + 2);
                subdivide_L(p, r, p.n_cell, p.nv);
            } else {
                int r = p.r, s = p.s;
                if (ms[0] > hbar) r = std::max(r + 1, static_cast<int>(std::ceil(r * ms[0] / hbar)));
                if (ms[1] > hbar) s = std::max(s + 1, static_cast<int>(std::ceil(s * ms[1] / hbar)));
                subdivide_Q(p, r, s, p.n_cell, p.nv);
            }
        }
    }
    dec.assign_global_ids();
}

int DomainDecomposition::total_subpatches() const {
    int n = 0;
    for (const auto& p : patches) n += static_cast<int>(p.subpatches.size());
    return n;
}

int DomainDecomposition::total_points() const {
    int n = 0;
    for (const auto& p : patches)
        for (const auto& sp : p.subpatches) n += sp.n_points();
    return n;
}

void DomainDecomposition::assign_global_ids() {
    int id = 0;
    for (auto& p : patches)
        for (auto& sp : p.subpatches) sp.global_id = id++;
}

const Subpatch& DomainDecomposition::subpatch(int global_id) const {
    for (const auto& p : patches)
        for (const auto& sp : p.subpatches)
            if (sp.global_id == global_id) return sp;
    throw UsageError("bad subpatch id");
}

EndInfo classify_end(const Patch& p, const Subpatch& sp, int axis, int line, bool high_end) {
    EndInfo e;
    if (axis == 0) {
        const int j = line;
        const int i_end = high_end ? sp.i1 : sp.row_begin(j);
        if (!p.periodic1 && i_end == 0) {
            e.side = &p.sides[0];
        } else if (!p.periodic1 && i_end == p.np1 - 1) {
            e.side = &p.sides[1];
        } else if (p.kind == PatchKind::C1 && i_end == p.i_corner && j < p.j_corner) {
            e.side = &p.wall_q1;
        }
    } else {
        const int i = line;
        const int j_end = high_end ? sp.j1 : sp.col_begin(i);
        if (j_end == 0) {
            e.side = &p.sides[2];
        } else if (j_end == p.np2 - 1) {
            e.side = &p.sides[3];
        } else if (p.kind == PatchKind::C1 && j_end == p.j_corner && i < p.i_corner) {
            e.side = &p.wall_q2;
        }
    }
    e.internal = !(e.side && e.side->on_gamma);
    return e;
}

std::vector<uint8_t> fringe_mask(const Patch& p, const Subpatch& sp, int nf) {
    const int ni = sp.ni(), nj = sp.nj();
    std::vector<uint8_t> mask(static_cast<size_t>(ni) * nj, 0);
    auto at = [&](int i, int j) -> uint8_t& {
        return mask[static_cast<size_t>(j - sp.j0) * ni + (i - sp.i0)];
    };
    for (int j = sp.j0; j <= sp.j1; ++j)
        for (int i = sp.row_begin(j); i <= sp.i1; ++i) at(i, j) = 1;

    for (int j = sp.j0; j <= sp.j1; ++j) {
        const int ib = sp.row_begin(j);
        if (classify_end(p, sp, 0, j, false).internal)
            for (int k = 0; k < nf && ib + k <= sp.i1; ++k) at(ib + k, j) = 2;
        if (classify_end(p, sp, 0, j, true).internal)
            for (int k = 0; k < nf && sp.i1 - k >= ib; ++k) at(sp.i1 - k, j) = 2;
    }
    for (int i = sp.i0; i <= sp.i1; ++i) {
        const int jb = sp.col_begin(i);
        if (classify_end(p, sp, 1, i, false).internal)
            for (int k = 0; k < nf && jb + k <= sp.j1; ++k) at(i, jb + k) = 2;
        if (classify_end(p, sp, 1, i, true).internal)
            for (int k = 0; k < nf && sp.j1 - k >= jb; ++k) at(i, sp.j1 - k) = 2;
    }
    return mask;
}

int fringe_size(const Patch& p, const Subpatch& sp, int nf) {
    auto mask = fringe_mask(p, sp, nf);
    return static_cast<int>(std::count(mask.begin(), mask.end(), uint8_t{2}));
}

OverlapReport check_min_overlap(const DomainDecomposition& dec) {
    OverlapReport rep;
    const int depth = 2 * dec.nv + 1;
    for (size_t pi = 0; pi < dec.patches.size(); ++pi) {
        const Patch& p = dec.patches[pi];
        auto test_point = [&](int side, int i, int j) {
            if (!p.lattice_valid(i, j)) return;
            const Vec2 x = p.physical(i, j);
            for (size_t po = 0; po < dec.patches.size(); ++po) {
                if (po == pi) continue;
                if (dec.patches[po].contains(x, nullptr, 1e-9)) return;
            }
            rep.pass = false;
            rep.orphans.push_back({static_cast<int>(pi), side, i, j, x});
        };
        // W, E (absent for periodic q1)
        if (!p.periodic1) {
            if (!p.sides[0].on_gamma)
                for (int j = 0; j < p.np2; ++j)
                    for (int i = 0; i < std::min(depth, p.np1); ++i) test_point(0, i, j);
            if (!p.sides[1].on_gamma)
                for (int j = 0; j < p.np2; ++j)
                    for (int i = std::max(0, p.np1 - depth); i < p.np1; ++i) test_point(1, i, j);
        }
        if (!p.sides[2].on_gamma)
            for (int i = 0; i < p.np1; ++i)
                for (int j = 0; j < std::min(depth, p.np2); ++j) test_point(2, i, j);
        if (!p.sides[3].on_gamma)
            for (int i = 0; i < p.np1; ++i)
                for (int j = std::max(0, p.np2 - depth); j < p.np2; ++j) test_point(3, i, j);
    }
    // special S-C1 rule: an S patch must reach each C1 corner point
    for (const auto& p : dec.patches) {
        if (p.kind != PatchKind::C1) continue;
        const Vec2 corner = (*p.map)(0.5, 0.5);
        bool reached = false;
        for (const auto& ps : dec.patches) {
            if (ps.kind != PatchKind::S) continue;
            Vec2 q;
            if (!ps.contains(corner, &q, 1e-7)) continue;
            // corner must be on a Gamma side of the S patch
            const double tol = 1e-6;
            if ((ps.sides[0].on_gamma && std::abs(q.x) < tol) ||
                (ps.sides[1].on_gamma && std::abs(q.x - 1) < tol) ||
                (ps.sides[2].on_gamma && std::abs(q.y) < tol) ||
                (ps.sides[3].on_gamma && std::abs(q.y - 1) < tol)) {
                reached = true;
                break;
            }
        }
        if (!reached) {
            rep.pass = false;
            rep.s_c1_failures.push_back("C1 patch " + std::to_string(p.index) +
                                        ": no S patch reaches its corner point");
        }
    }
    return rep;
}

std::string OverlapReport::summary() const {
    std::ostringstream os;
    os << (pass ? "PASS" : "FAIL") << ": " << orphans.size() << " orphan layer points";
    for (size_t k = 0; k < std::min<size_t>(orphans.size(), 8); ++k) {
        const auto& o = orphans[k];
        os << "\n  patch " << o.patch << " side " << o.side << " (" << o.i << "," << o.j
           << ") at (" << o.x.x << "," << o.x.y << ")";
    }
    for (const auto& f : s_c1_failures) os << "\n  " << f;
    return os.str();
}

json DomainDecomposition::to_json() const {
    json jp = json::array();
    for (const auto& p : patches) {
        json sides = json::array();
        for (const auto& s : p.sides) sides.push_back({{"on_gamma", s.on_gamma}, {"tag", s.tag}});
        json pj = {{"kind", to_string(p.kind)}, {"mapping", p.map->to_json()},
                   {"r", p.r},     {"s", p.s},
                   {"n_cell", p.n_cell}, {"nv", p.nv},
                   {"periodic1", p.periodic1}, {"sides", sides}};
        if (p.kind == PatchKind::C1) {
            pj["wall_q1_tag"] = p.wall_q1.tag;
            pj["wall_q2_tag"] = p.wall_q2.tag;
        }
        json table = json::array();
        for (const auto& sp : p.subpatches)
            table.push_back({sp.i0, sp.i1, sp.j0, sp.j1, sp.i_cut, sp.j_cut});
        pj["subpatches"] = table;
        jp.push_back(pj);
    }
    return {{"format", "fcs-mesh"}, {"version", 1},
            {"nv", nv}, {"n0", n0}, {"n1", n1}, {"nf", nf}, {"patches", jp}};
}

DomainDecomposition DomainDecomposition::from_json(const json& j) {
    if (j.value("format", "") != "fcs-mesh" || j.value("version", 0) != 1)
        throw ConfigError("mesh file: unknown format/version");
    DomainDecomposition dec;
    dec.nv = j["nv"];
    dec.n0 = j["n0"];
    dec.n1 = j["n1"];
    dec.nf = j["nf"];
    int idx = 0;
    for (const auto& pj : j["patches"]) {
        Patch p;
        p.kind = patch_kind_from_string(pj["kind"]);
        p.index = idx++;
        p.map = Mapping::from_json(pj["mapping"]);
        p.periodic1 = pj.value("periodic1", false);
        for (int k = 0; k < 4; ++k) {
            p.sides[k].on_gamma = pj["sides"][k]["on_gamma"];
            p.sides[k].tag = pj["sides"][k]["tag"];
        }
        if (p.kind == PatchKind::C1) {
            p.wall_q1 = SideInfo{true, pj.value("wall_q1_tag", "wall")};
            p.wall_q2 = SideInfo{true, pj.value("wall_q2_tag", "wall")};
            subdivide_L(p, pj["r"], pj["n_cell"], pj["nv"]);
        } else {
            subdivide_Q(p, pj["r"], pj["s"], pj["n_cell"], pj["nv"]);
        }
        if (pj.contains("subpatches") &&
            pj["subpatches"].size() != p.subpatches.size())
            throw ConfigError("mesh file: subpatch table does not match r/s parameters");
        dec.patches.push_back(std::move(p));
    }
    dec.assign_global_ids();
    return dec;
}

}  // namespace fcs::geom
