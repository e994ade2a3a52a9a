#ifndef FCS_GEOMETRY_HPP
#define FCS_GEOMETRY_HPP

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fcs/linalg.hpp"
#include "json.hpp"

namespace fcs::geom {

using nlohmann::json;

/** Smooth injective curve [0,1] -> R^2. */
class BoundaryCurve {
  public:
    virtual ~BoundaryCurve() = default;
    virtual Vec2 point(double t) const = 0;
    virtual Vec2 derivative(double t) const;  // central finite difference by default
    virtual json to_json() const = 0;
    static std::shared_ptr<BoundaryCurve> from_json(const json& j);
};

class Segment : public BoundaryCurve {
  public:
    Segment(Vec2 a, Vec2 b) : a_(a), b_(b) {}
    Vec2 point(double t) const override { return a_ + t * (b_ - a_); }
    Vec2 derivative(double) const override { return b_ - a_; }
    json to_json() const override;

  private:
    Vec2 a_, b_;
};

class CircularArc : public BoundaryCurve {
  public:
    CircularArc(Vec2 center, double radius, double theta0, double theta1)
        : c_(center), r_(radius), t0_(theta0), t1_(theta1) {}
    Vec2 point(double t) const override {
        const double th = t0_ + t * (t1_ - t0_);
        return {c_.x + r_ * std::cos(th), c_.y + r_ * std::sin(th)};
    }
    Vec2 derivative(double t) const override {
        const double th = t0_ + t * (t1_ - t0_);
        return {-r_ * (t1_ - t0_) * std::sin(th), r_ * (t1_ - t0_) * std::cos(th)};
    }
    json to_json() const override;

  private:
    Vec2 c_;
    double r_, t0_, t1_;
};

/** Parameter-space -> physical mapping M. jacobian() returns dM/dq. */
class Mapping {
  public:
    virtual ~Mapping() = default;
    virtual Vec2 operator()(double q1, double q2) const = 0;
    virtual Mat2 jacobian(double q1, double q2) const;  // FD fallback
    /** Damped Newton by default; analytic in subclasses where available. */
    virtual std::optional<Vec2> invert(Vec2 x, Vec2 seed, double tol = 1e-10,
                                       int max_iter = 50) const;
    virtual json to_json() const = 0;
    static std::shared_ptr<Mapping> from_json(const json& j);
};

/** origin + q1*e1 + q2*e2 */
class AffineMap : public Mapping {
  public:
    AffineMap(Vec2 origin, Vec2 e1, Vec2 e2) : o_(origin), e1_(e1), e2_(e2) {}
    Vec2 operator()(double q1, double q2) const override {
        return o_ + q1 * e1_ + q2 * e2_;
    }
    Mat2 jacobian(double, double) const override { return {e1_.x, e2_.x, e1_.y, e2_.y}; }
    std::optional<Vec2> invert(Vec2 x, Vec2, double, int) const override;
    json to_json() const override;

  private:
    Vec2 o_, e1_, e2_;
};

/** Annular ring around a circle: q1 = angle fraction (periodic when the
 *  angular extent is a full turn), q2 = radial fraction. */
class AnnulusMap : public Mapping {
  public:
    AnnulusMap(Vec2 center, double r0, double r1, double theta0, double theta_extent)
        : c_(center), r0_(r0), r1_(r1), t0_(theta0), dt_(theta_extent) {}
    Vec2 operator()(double q1, double q2) const override;
    Mat2 jacobian(double q1, double q2) const override;
    std::optional<Vec2> invert(Vec2 x, Vec2 seed, double tol, int max_iter) const override;
    bool full_turn() const { return std::abs(std::abs(dt_) - 2 * M_PI) < 1e-14; }
    json to_json() const override;

  private:
    Vec2 c_;
    double r0_, r1_, t0_, dt_;
};

/** Bilinear quad: corners p00, p10, p01, p11. */
class BilinearMap : public Mapping {
  public:
    BilinearMap(Vec2 p00, Vec2 p10, Vec2 p01, Vec2 p11)
        : a_(p00), b_(p10 - p00), c_(p01 - p00), d_(p11 - p10 - p01 + p00) {}
    Vec2 operator()(double q1, double q2) const override {
        return a_ + q1 * b_ + q2 * c_ + (q1 * q2) * d_;
    }
    Mat2 jacobian(double q1, double q2) const override {
        const Vec2 dq1 = b_ + q2 * d_, dq2 = c_ + q1 * d_;
        return {dq1.x, dq2.x, dq1.y, dq2.y};
    }
    json to_json() const override;

  private:
    Vec2 a_, b_, c_, d_;
};

/** Corner mapping l_A(q1) + l_B(q2) - C (both C1 and C2 patch kinds). */
class CurveSumMap : public Mapping {
  public:
    CurveSumMap(std::shared_ptr<BoundaryCurve> a, std::shared_ptr<BoundaryCurve> b, Vec2 corner)
        : a_(std::move(a)), b_(std::move(b)), c_(corner) {}
    Vec2 operator()(double q1, double q2) const override {
        return a_->point(q1) + b_->point(q2) - c_;
    }
    Mat2 jacobian(double q1, double q2) const override {
        const Vec2 da = a_->derivative(q1), db = b_->derivative(q2);
        return {da.x, db.x, da.y, db.y};
    }
    json to_json() const override;

  private:
    std::shared_ptr<BoundaryCurve> a_, b_;
    Vec2 c_;
};

enum class PatchKind { S, C1, C2, I };
std::string to_string(PatchKind k);
PatchKind patch_kind_from_string(const std::string& s);

/** Parameter-polygon side of a patch. Sides fully on the physical boundary
 *  carry the boundary tag used to look up boundary conditions. */
struct SideInfo {
    bool on_gamma = false;
    std::string tag;  // empty for interior sides
};

/** Lattice index set of one subpatch. valid(i,j) is the bounding box minus
 *  the quadrant {i < i_cut && j < j_cut}; rectangles have i_cut=i0, j_cut=j0. */
struct Subpatch {
    int patch_index = -1;
    int local_index = -1;
    int global_id = -1;
    int i0 = 0, i1 = 0, j0 = 0, j1 = 0;
    int i_cut = 0, j_cut = 0;
    bool l_shaped = false;

    int ni() const { return i1 - i0 + 1; }
    int nj() const { return j1 - j0 + 1; }
    bool valid(int i, int j) const {
        if (i < i0 || i > i1 || j < j0 || j > j1) return false;
        return !(i < i_cut && j < j_cut);
    }
    int row_begin(int j) const { return j >= j_cut ? i0 : i_cut; }
    int col_begin(int i) const { return i >= i_cut ? j0 : j_cut; }
    int n_points() const;
};

class Patch {
  public:
    PatchKind kind = PatchKind::I;
    int index = -1;
    std::shared_ptr<Mapping> map;
    bool periodic1 = false;  // q1 wraps (annulus patches)

    int r = 1, s = 1;    // preliminary cells per direction (r == s for C1)
    int n_cell = 83;     // points per preliminary cell side (n0, or n1 for C1)
    int nv = 9;

    // lattice: np1 x np2 points, spacing (h1, h2) in parameter space
    int np1 = 0, np2 = 0;
    double h1 = 0, h2 = 0;
    int i_corner = -1, j_corner = -1;  // reentrant corner lattice index (C1 only)

    // W, E, S, N parameter sides; C1 adds the two reentrant wall sides below.
    std::array<SideInfo, 4> sides;
    SideInfo wall_q2;  // C1: side on arc AC (j = j_corner, i < i_corner)
    SideInfo wall_q1;  // C1: side on arc BC (i = i_corner, j < j_corner)

    std::vector<Subpatch> subpatches;

    Vec2 param_of(int i, int j) const { return {i * h1, j * h2}; }
    Vec2 physical(int i, int j) const {
        const Vec2 q = param_of(i, j);
        return (*map)(q.x, q.y);
    }
    /** Lattice membership (L-shaped domain for C1, full box otherwise). */
    bool lattice_valid(int i, int j) const {
        if (i < 0 || i >= np1 || j < 0 || j >= np2) return false;
        if (kind == PatchKind::C1) return i >= i_corner || j >= j_corner;
        return true;
    }
    /** Is physical point x inside this patch (param-domain membership after
     *  inversion)? Fills q_out with the parameter coordinates when it is. */
    bool contains(Vec2 x, Vec2* q_out, double margin = 1e-9) const;
    std::optional<Vec2> invert_point(Vec2 x) const;

    /** max physical distance of consecutive lattice points, per direction */
    std::array<double, 2> max_spacing() const;
};

struct DomainDecomposition {
    std::vector<Patch> patches;
    int nv = 9, n0 = 83, n1 = 43, nf = 5;
    double hbar = 0.0;  // 0 = no bound requested

    int total_subpatches() const;
    int total_points() const;  // counted per subpatch (with overlap multiplicity)
    const Subpatch& subpatch(int global_id) const;
    void assign_global_ids();

    json to_json() const;
    static DomainDecomposition from_json(const json& j);
};

/** Fig.-3-style subdivision of the L parameter space: 3/4 r^2 preliminary
 *  squares; overlapping subpatches are those minus the three corner-adjacent
 *  squares plus the L-shaped corner subpatch H_0. */
void subdivide_L(Patch& patch, int r, int n1, int nv);

/** r x s overlapping rectangles on Q; cells carry n0 points per side and are
 *  extended by nv steps per side, so interior subpatches hold (n0+2nv)^2
 *  points and neighbors share a (2nv+1)-point overlap. */
void subdivide_Q(Patch& patch, int r, int s, int n0, int nv);

Patch build_c1_patch(std::shared_ptr<BoundaryCurve> ellA, std::shared_ptr<BoundaryCurve> ellB,
                     Vec2 corner, const std::string& wall_tag = "wall");
Patch build_c2_patch(std::shared_ptr<BoundaryCurve> ellA, std::shared_ptr<BoundaryCurve> ellB,
                     Vec2 corner, const std::string& wall_tag = "wall");

/** Increase r (and s) until every patch's physical grid size is <= hbar. */
void refine(DomainDecomposition& dec, double hbar);

struct OverlapReport {
    bool pass = true;
    struct Orphan {
        int patch, side, i, j;
        Vec2 x;
    };
    std::vector<Orphan> orphans;
    std::vector<std::string> s_c1_failures;
    std::string summary() const;
};

/** Verify the (2nv+1)-point layer next to every interior patch side lies in
 *  the union of the other patches, and that every C1 corner point is reached
 *  by an S-type patch along the boundary. */
OverlapReport check_min_overlap(const DomainDecomposition& dec);

/** Fringe membership mask for one subpatch: 0 = outside the subpatch,
 *  1 = interior, 2 = fringe (within nf points of an internal side). */
std::vector<uint8_t> fringe_mask(const Patch& p, const Subpatch& sp, int nf);

/** Count of fringe points (mask == 2). */
int fringe_size(const Patch& p, const Subpatch& sp, int nf);

/** Side classification of a line end used by fringe/BC logic. */
struct EndInfo {
    bool internal = true;       // receives data from a donor
    const SideInfo* side = nullptr;  // non-null when the end lies on a patch side
};
EndInfo classify_end(const Patch& p, const Subpatch& sp, int axis, int line, bool high_end);

}  // namespace fcs::geom

#endif
