#ifndef FCS_RUNTIME_HPP
#define FCS_RUNTIME_HPP

#include <functional>
#include <memory>
#include <vector>

#include "fcs/bc.hpp"
#include "fcs/euler.hpp"
#include "fcs/geometry.hpp"
#include "fcs/subpatch_data.hpp"
#include "fcs/viscosity.hpp"

namespace fcs::run {

/** Coincident-grid transfer between subpatches of one patch. */
struct CopyEntry {
    int dst = 0;      // linear index in the recipient bounding box
    int src_sub = 0;  // donor global subpatch id
    int src = 0;      // linear index in the donor bounding box
    double w = 1.0;   // viscosity-plan weight (normalized window of the donor)
};

/** Tensor-product Lagrange interpolation from a donor subpatch. */
struct InterpEntry {
    int dst = 0;
    int src_sub = 0;
    int si0 = 0, sj0 = 0;  // stencil origin (local donor indices)
    std::array<double, 6> wx{}, wy{};
    double w = 1.0;
};

struct PlanEntries {
    std::vector<CopyEntry> copies;
    std::vector<InterpEntry> interps;
};

/** Exchange/interpolation schedule: one solution-entry set per recipient
 *  (covering its fringe exactly) plus the weighted viscosity-blend set. */
struct CommPlan {
    std::vector<PlanEntries> solution;  // indexed by recipient global id
    std::vector<PlanEntries> visc;
    int interp_width = 6;

    struct Stats {
        long copies = 0, interps = 0, visc_entries = 0;
    };
    Stats stats() const;
};

struct RankAssignment {
    int n_workers = 1;
    std::vector<int> worker_of;  // by global subpatch id
};

/** Deterministic round robin by global subpatch index. */
RankAssignment assign_ranks(int n_subpatches, int n_workers);

struct EngineConfig {
    double cfl = 0.5;
    double T = 1.0;
    int workers = 1;
    int nf = 5;
    int n_cont = 25;
    fc::FilterSpec filter;
    visc::ClassifierConfig classifier;
    visc::ViscosityWeights visc_weights;
    int interp_width = 6;
    bool validate_overlap = true;
    int smear_radius = 10;
    long max_steps = 1000000000L;
    int output_every = 0;  // steps between scheduled writes; 0 = final only
};

using InitialCondition = std::function<std::array<double, 4>(double x, double y)>;

/** The driver: owns the decomposition, per-subpatch data, plans and the
 *  worker pool, and advances the solution per the overall algorithm. */
class Engine {
  public:
    Engine(geom::DomainDecomposition dec, BcTable bcs, InitialCondition ic, EngineConfig cfg);
    ~Engine();

    void init();

    struct RunStats {
        long steps = 0;
        double t = 0.0;
        double wall_seconds = 0.0;
        double seconds_per_step = 0.0;
    };
    /** on_output(step, t) runs on worker 0 at the configured cadence and once
     *  at the end of the run. */
    RunStats run(std::function<void(long, double)> on_output = nullptr);

    std::vector<SubpatchData>& subs() { return subs_; }
    const std::vector<SubpatchData>& subs() const { return subs_; }
    const geom::DomainDecomposition& dec() const { return dec_; }
    const CommPlan& plan() const { return plan_; }
    const RankAssignment& ranks() const { return ranks_; }
    double time() const { return t_; }
    int total_points() const;

    /** One fringe-exchange round over all subpatches (test hook). */
    void exchange_solution();

  private:
    struct Workers;
    void build_subpatch_data();
    void build_plan();
    void apply_ic();
    void step_phase(int worker, int phase, int stage);
    friend struct Workers;

    geom::DomainDecomposition dec_;
    BcTable bcs_;
    InitialCondition ic_;
    EngineConfig cfg_;
    std::unique_ptr<visc::Classifier> classifier_;
    std::vector<SubpatchData> subs_;
    CommPlan plan_;
    RankAssignment ranks_;
    std::vector<double> dt_local_;
    double t_ = 0.0, dt_ = 0.0;
    long step_ = 0;
    bool initialized_ = false;
};

}  // namespace fcs::run

#endif
