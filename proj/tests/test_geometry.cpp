#include "fcs/geometry.hpp"

#include <cmath>
#include <set>

#include "doctest.h"
#include "fcs/errors.hpp"

using namespace fcs;
using namespace fcs::geom;

namespace {

Patch unit_patch(PatchKind kind, Vec2 origin, Vec2 e1, Vec2 e2) {
    Patch p;
    p.kind = kind;
    p.map = std::make_shared<AffineMap>(origin, e1, e2);
    return p;
}

// brute-force fringe oracle: flood from internal-side boundary points
int fringe_oracle(const Patch& p, const Subpatch& sp, int nf) {
    int count = 0;
    for (int j = sp.j0; j <= sp.j1; ++j)
        for (int i = sp.row_begin(j); i <= sp.i1; ++i) {
            bool fr = false;
            // walk in each of the four lattice directions up to nf-1 steps;
            // fringe if an internal subpatch boundary is reached
            const int dirs[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
            for (auto& d : dirs) {
                for (int k = 0; k < nf; ++k) {
                    const int ii = i + k * d[0], jj = j + k * d[1];
                    if (!sp.valid(ii, jj)) break;
                    const bool at_edge = !sp.valid(ii + d[0], jj + d[1]);
                    if (at_edge) {
                        // which side is this? classify via the line ends
                        EndInfo e;
                        if (d[0] != 0)
                            e = classify_end(p, sp, 0, jj, d[0] > 0);
                        else
                            e = classify_end(p, sp, 1, ii, d[1] > 0);
                        if (e.internal) fr = true;
                        break;
                    }
                }
                if (fr) break;
            }
            if (fr) ++count;
        }
    return count;
}

}  // namespace

TEST_CASE("subdivide_L combinatorics r=4 (Fig. 3 configuration)") {
    auto p = build_c1_patch(std::make_shared<Segment>(Vec2{0, 1}, Vec2{0, -1}),
                            std::make_shared<Segment>(Vec2{1, 0}, Vec2{-1, 0}), Vec2{0, 0});
    // preliminary squares: 3/4 r^2 = 12; overlapping subpatches: 12 - 3 + 1 = 10
    subdivide_L(p, 4, 9, 3);
    CHECK(3 * 4 * 4 / 4 == 12);
    CHECK(p.subpatches.size() == 10);
    int l_shaped = 0;
    for (const auto& sp : p.subpatches) l_shaped += sp.l_shaped ? 1 : 0;
    CHECK(l_shaped == 1);

    // overlap width between axis-aligned neighbors is exactly 2nv+1
    const int want = 2 * 3 + 1;
    for (const auto& a : p.subpatches)
        for (const auto& b : p.subpatches) {
            if (a.local_index >= b.local_index) continue;
            if (a.j0 == b.j0 && a.j1 == b.j1) {
                const int shared = std::min(a.i1, b.i1) - std::max(a.i0, b.i0) + 1;
                if (shared > 0) CHECK(shared == want);
            }
            if (a.i0 == b.i0 && a.i1 == b.i1) {
                const int shared = std::min(a.j1, b.j1) - std::max(a.j0, b.j0) + 1;
                if (shared > 0) CHECK(shared == want);
            }
        }
    // H_0 against its arm-continuation neighbors
    const auto& h0 = p.subpatches[0];
    for (const auto& b : p.subpatches) {
        if (b.local_index == 0) continue;
        if (b.j0 >= h0.j_cut && b.j1 <= h0.j1 && b.i1 < h0.i1 && b.i1 >= h0.i0) {
            const int shared = b.i1 - h0.i0 + 1;
            CHECK(shared == want);
        }
    }
}

TEST_CASE("subdivide_L r=2 degenerates to the corner subpatch alone") {
    auto p = build_c1_patch(std::make_shared<Segment>(Vec2{0, 1}, Vec2{0, -1}),
                            std::make_shared<Segment>(Vec2{1, 0}, Vec2{-1, 0}), Vec2{0, 0});
    subdivide_L(p, 2, 9, 3);
    CHECK(p.subpatches.size() == 1);
    CHECK(p.subpatches[0].l_shaped);
}

TEST_CASE("subpatch counting law |Theta| = 3/4 r^2 - 2") {
    auto p = build_c1_patch(std::make_shared<Segment>(Vec2{0, 1}, Vec2{0, -1}),
                            std::make_shared<Segment>(Vec2{1, 0}, Vec2{-1, 0}), Vec2{0, 0});
    for (int r : {4, 6, 8, 10}) {
        subdivide_L(p, r, 9, 3);
        CHECK(static_cast<int>(p.subpatches.size()) == 3 * r * r / 4 - 2);
    }
    CHECK_THROWS_AS(subdivide_L(p, 5, 9, 3), UsageError);
}

TEST_CASE("C1 lattice geometry: h and corner index") {
    auto p = build_c1_patch(std::make_shared<Segment>(Vec2{0, 1}, Vec2{0, -1}),
                            std::make_shared<Segment>(Vec2{1, 0}, Vec2{-1, 0}), Vec2{0, 0});
    const int r = 4, n1 = 9, nv = 3;
    subdivide_L(p, r, n1, nv);
    const int N = r * (n1 + 1) - 1;
    CHECK(p.np1 == N + 2 * nv);
    CHECK(p.h1 == doctest::Approx(1.0 / (N + 2 * nv - 1)).epsilon(1e-15));
    // the reentrant corner sits exactly at parameter (1/2, 1/2)
    CHECK(p.i_corner * p.h1 == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(p.map->operator()(0.5, 0.5).norm() < 1e-14);  // M(1/2,1/2) = corner
}

TEST_CASE("subdivide_Q basics") {
    auto p = unit_patch(PatchKind::I, {0, 0}, {1, 0}, {0, 1});
    SUBCASE("single subpatch covers Q") {
        subdivide_Q(p, 1, 1, 83, 9);
        CHECK(p.subpatches.size() == 1);
        CHECK(p.np1 == 83 + 18);
        CHECK(p.subpatches[0].n_points() == 101 * 101);
    }
    SUBCASE("two subpatches overlap by 2nv+1 lines") {
        subdivide_Q(p, 2, 1, 83, 9);
        CHECK(p.subpatches.size() == 2);
        CHECK(p.np1 == 2 * 82 + 19);  // 183 lattice points
        const auto& a = p.subpatches[0];
        const auto& b = p.subpatches[1];
        CHECK(a.ni() == 101);
        CHECK(b.ni() == 101);
        CHECK(a.i1 - b.i0 + 1 == 19);
    }
    SUBCASE("7x7 Riemann4-type configuration") {
        subdivide_Q(p, 7, 7, 83, 9);
        CHECK(p.subpatches.size() == 49);
        int pts = 0;
        for (const auto& sp : p.subpatches) pts += sp.n_points();
        CHECK(pts == 49 * 101 * 101);  // ~500k points counted per subpatch
        CHECK(p.np1 == 7 * 82 + 19);   // 593 distinct lattice points per side
    }
}

TEST_CASE("c2 patch: corner at image of (1,1), det sign constant") {
    // perpendicular straight arcs -> exact square corner
    auto c2 = build_c2_patch(std::make_shared<Segment>(Vec2{-1, 0}, Vec2{0, 0}),
                             std::make_shared<Segment>(Vec2{0, -1}, Vec2{0, 0}), Vec2{0, 0});
    const Vec2 corner = (*c2.map)(1.0, 1.0);
    CHECK(corner.norm() < 1e-15);
    const Vec2 far = (*c2.map)(0.0, 0.0);
    CHECK(far.x == doctest::Approx(-1.0));
    CHECK(far.y == doctest::Approx(-1.0));

    // 40-degree wedge-tip arcs: mapping stays orientation-consistent
    const double a = 20.0 * M_PI / 180.0;
    auto w = build_c2_patch(
        std::make_shared<Segment>(Vec2{std::cos(a), std::sin(a)}, Vec2{0, 0}),
        std::make_shared<Segment>(Vec2{std::cos(a), -std::sin(a)}, Vec2{0, 0}), Vec2{0, 0});
    CHECK((*w.map)(1.0, 1.0).norm() < 1e-15);

    // degenerate: parallel tangents
    CHECK_THROWS_AS(build_c2_patch(std::make_shared<Segment>(Vec2{-1, 0}, Vec2{0, 0}),
                                   std::make_shared<Segment>(Vec2{1, 0}, Vec2{0, 0}), Vec2{0, 0}),
                    GeometryError);
}

TEST_CASE("c1 patch: affine L from perpendicular unit-speed segments") {
    // arms through the corner: A->D spans [0,1] with C at t=1/2
    auto c1 = build_c1_patch(std::make_shared<Segment>(Vec2{0, 0.5}, Vec2{0, -0.5}),
                             std::make_shared<Segment>(Vec2{0.5, 0}, Vec2{-0.5, 0}), Vec2{0, 0});
    CHECK((*c1.map)(0.5, 0.5).norm() < 1e-15);
    // area of the L image: 3/4 of the full-square image area by Monte-Carlo style quadrature
    const int n = 400;
    int in_l = 0;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            const double q1 = (a + 0.5) / n, q2 = (b + 0.5) / n;
            if (q1 < 0.5 && q2 < 0.5) continue;
            ++in_l;
        }
    double area = 0.0;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            const double q1 = (a + 0.5) / n, q2 = (b + 0.5) / n;
            if (q1 < 0.5 && q2 < 0.5) continue;
            area += std::abs(c1.map->jacobian(q1, q2).det()) / (n * n);
        }
    const double full = 1.0;  // unit-speed segments: |det J| = 1, square image area 1
    CHECK(area == doctest::Approx(0.75 * full).epsilon(1e-3));
    CHECK(in_l == 3 * n * n / 4);
}

TEST_CASE("mapping round-trip on annulus and curve-sum") {
    AnnulusMap ann({0.3, -0.2}, 0.25, 0.7, 0.3, 2 * M_PI);
    for (double q1 : {0.0, 0.21, 0.77, 0.99})
        for (double q2 : {0.0, 0.4, 1.0}) {
            const Vec2 x = ann(q1, q2);
            const auto q = ann.invert(x, {q1 + 0.03, q2}, 1e-10, 50);
            REQUIRE(q.has_value());
            CHECK(std::abs(q->x - q1) < 1e-9);
            CHECK(std::abs(q->y - q2) < 1e-9);
        }
    CurveSumMap cs(std::make_shared<CircularArc>(Vec2{0, 0}, 1.0, 0.2, 1.1),
                   std::make_shared<Segment>(Vec2{0.5, -0.5}, Vec2{1.2, 0.4}),
                   Vec2{1.2, 0.4});
    for (double q1 : {0.1, 0.5, 0.9})
        for (double q2 : {0.1, 0.6, 0.95}) {
            const Vec2 x = cs(q1, q2);
            const auto q = cs.invert(x, {0.5, 0.5}, 1e-10, 50);
            REQUIRE(q.has_value());
            CHECK((cs(q->x, q->y) - x).norm() < 1e-9);
        }
}

TEST_CASE("refine increases cell counts until the bound holds") {
    DomainDecomposition dec;
    auto p = unit_patch(PatchKind::I, {0, 0}, {2, 0}, {0, 1});
    p.index = 0;
    subdivide_Q(p, 1, 1, 11, 3);
    dec.patches.push_back(p);
    dec.nv = 3;
    dec.n0 = 11;

    const auto ms0 = dec.patches[0].max_spacing();
    refine(dec, std::max(ms0[0], ms0[1]) + 1e-12);
    CHECK(dec.patches[0].r == 1);  // already satisfying the bound: unchanged
    CHECK(dec.patches[0].s == 1);

    refine(dec, std::max(ms0[0], ms0[1]) / 2);
    CHECK(dec.patches[0].r >= 2);
    CHECK(dec.patches[0].r <= 3);
    const auto ms1 = dec.patches[0].max_spacing();
    CHECK(ms1[0] <= std::max(ms0[0], ms0[1]) / 2);

    // C1 refinement keeps r = s and r even
    auto c1 = build_c1_patch(std::make_shared<Segment>(Vec2{0, 0.5}, Vec2{0, -0.5}),
                             std::make_shared<Segment>(Vec2{0.5, 0}, Vec2{-0.5, 0}), Vec2{0, 0});
    c1.index = 0;
    subdivide_L(c1, 2, 9, 3);
    DomainDecomposition dc;
    dc.patches.push_back(c1);
    const auto cs0 = dc.patches[0].max_spacing();
    refine(dc, std::max(cs0[0], cs0[1]) / 2);
    CHECK(dc.patches[0].r == dc.patches[0].s);
    CHECK(dc.patches[0].r % 2 == 0);
    CHECK(dc.patches[0].r >= 4);
}

TEST_CASE("min-overlap: two I patches") {
    auto make_pair = [](double x2) {
        DomainDecomposition dec;
        dec.nv = 9;
        auto p1 = unit_patch(PatchKind::I, {0, 0}, {1, 0}, {0, 1});
        p1.index = 0;
        p1.sides[0] = {true, "wall"};
        p1.sides[2] = {true, "wall"};
        p1.sides[3] = {true, "wall"};
        subdivide_Q(p1, 1, 1, 83, 9);  // h = 0.01
        auto p2 = unit_patch(PatchKind::I, {x2, 0}, {1, 0}, {0, 1});
        p2.index = 1;
        p2.sides[1] = {true, "wall"};
        p2.sides[2] = {true, "wall"};
        p2.sides[3] = {true, "wall"};
        subdivide_Q(p2, 1, 1, 83, 9);
        dec.patches = {p1, p2};
        dec.assign_global_ids();
        return dec;
    };
    auto good = make_pair(0.5);
    CHECK(check_min_overlap(good).pass);
    auto bad = make_pair(0.95);  // 19 points * 0.01 = 0.19 > 0.05 overlap
    auto rep = check_min_overlap(bad);
    CHECK_FALSE(rep.pass);
    CHECK(rep.orphans.size() > 0);
}

TEST_CASE("fringe regions") {
    auto p = unit_patch(PatchKind::I, {0, 0}, {1, 0}, {0, 1});
    p.index = 0;
    SUBCASE("all sides external -> empty fringe") {
        for (auto& s : p.sides) s = {true, "wall"};
        subdivide_Q(p, 1, 1, 83, 9);
        CHECK(fringe_size(p, p.subpatches[0], 5) == 0);
    }
    SUBCASE("one internal side -> nf x width strip") {
        for (auto& s : p.sides) s = {true, "wall"};
        p.sides[1] = {false, ""};  // E side interior
        subdivide_Q(p, 1, 1, 83, 9);
        CHECK(fringe_size(p, p.subpatches[0], 5) == 5 * 101);
    }
    SUBCASE("oracle cross-check on the L-shaped corner subpatch") {
        auto c1 = build_c1_patch(std::make_shared<Segment>(Vec2{0, 0.5}, Vec2{0, -0.5}),
                                 std::make_shared<Segment>(Vec2{0.5, 0}, Vec2{-0.5, 0}),
                                 Vec2{0, 0});
        subdivide_L(c1, 4, 9, 3);
        for (const auto& sp : c1.subpatches)
            CHECK(fringe_size(c1, sp, 5) == fringe_oracle(c1, sp, 5));
    }
    SUBCASE("oracle on interior subpatches of a split Q patch") {
        for (auto& s : p.sides) s = {true, "wall"};
        subdivide_Q(p, 3, 3, 23, 4);
        for (const auto& sp : p.subpatches)
            CHECK(fringe_size(p, sp, 5) == fringe_oracle(p, sp, 5));
    }
}

TEST_CASE("grid index set matches grid cardinality") {
    auto c1 = build_c1_patch(std::make_shared<Segment>(Vec2{0, 0.5}, Vec2{0, -0.5}),
                             std::make_shared<Segment>(Vec2{0.5, 0}, Vec2{-0.5, 0}), Vec2{0, 0});
    subdivide_L(c1, 4, 9, 3);
    for (const auto& sp : c1.subpatches) {
        int brute = 0;
        std::set<std::pair<double, double>> phys;
        for (int j = sp.j0; j <= sp.j1; ++j)
            for (int i = sp.i0; i <= sp.i1; ++i)
                if (sp.valid(i, j)) {
                    ++brute;
                    const Vec2 x = c1.physical(i, j);
                    phys.insert({x.x, x.y});
                }
        CHECK(brute == sp.n_points());
        CHECK(static_cast<int>(phys.size()) == sp.n_points());
        // C1 subpatches carry at most N_Q = (n0+2nv)^2 points, n0 = 2*n1+1
        CHECK(sp.n_points() <= (19 + 2 * 3) * (19 + 2 * 3));
    }
}

TEST_CASE("mesh file round trip") {
    DomainDecomposition dec;
    dec.nv = 4;
    dec.n0 = 23;
    auto p = unit_patch(PatchKind::I, {0, 0}, {1, 0}, {0, 0.5});
    p.index = 0;
    for (auto& s : p.sides) s = {true, "wall"};
    subdivide_Q(p, 2, 1, 23, 4);
    dec.patches.push_back(p);
    auto c1 = build_c1_patch(std::make_shared<Segment>(Vec2{0, 0.5}, Vec2{0, -0.5}),
                             std::make_shared<Segment>(Vec2{0.5, 0}, Vec2{-0.5, 0}), Vec2{0, 0});
    c1.index = 1;
    subdivide_L(c1, 4, 9, 3);
    dec.patches.push_back(c1);
    dec.assign_global_ids();

    const auto j = dec.to_json();
    auto back = DomainDecomposition::from_json(j);
    CHECK(back.patches.size() == 2);
    CHECK(back.total_subpatches() == dec.total_subpatches());
    CHECK(back.patches[1].subpatches[0].l_shaped);
    for (size_t k = 0; k < dec.patches[1].subpatches.size(); ++k) {
        CHECK(back.patches[1].subpatches[k].i0 == dec.patches[1].subpatches[k].i0);
        CHECK(back.patches[1].subpatches[k].j1 == dec.patches[1].subpatches[k].j1);
    }
    const Vec2 a = dec.patches[1].physical(5, 7), b = back.patches[1].physical(5, 7);
    CHECK((a - b).norm() < 1e-15);
}
