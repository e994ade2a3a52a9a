#ifndef FCS_FC_CORE_HPP
#define FCS_FC_CORE_HPP

#include <memory>
#include <vector>

namespace fcs::fc {

/** Filter constants for the exponential spectral filter
 *  exp(-alpha * (k/M)^(2p)) applied to the continuation coefficients. */
struct FilterSpec {
    double alpha = 23.025850929940457;  // -ln(1e-10)
    int p = 7;                          // per-step filter, 2p = 14
    int p_smear = 2;                    // strong smearing filter, 2p = 4
};

/** One-dimensional grid samples F_j = F(j*h). */
struct GridLine {
    std::vector<double> values;
    double h = 0.0;
};

/**
 * FC-Gram continuation + FFT differentiation + exponential filtering for one
 * line length. Degree d = 2 throughout: the continuation blends the boundary
 * parabola (through the last/first 3 samples) to zero across an n_cont-cell
 * gap, producing a smooth periodic extension on [0, period) with
 * period = (n_points - 1 + n_cont) * h.
 *
 * Immutable after construction; all apply methods are const and thread-safe
 * (per-thread scratch buffers internally).
 */
class FcOperator {
  public:
    static constexpr int degree = 2;

    FcOperator(int n_points, int n_cont, FilterSpec filter);
    ~FcOperator();
    FcOperator(const FcOperator&) = delete;
    FcOperator& operator=(const FcOperator&) = delete;

    int n_points() const { return n_; }
    int n_cont() const { return n_cont_; }
    int n_ext() const { return n_ext_; }              // samples per period
    int n_modes() const { return n_modes_; }          // retained bins (incl. DC)
    double period() const { return period_; }         // in units of h*(N-1)=1
    const std::vector<double>& filter_profile() const { return filter_profile_; }
    const std::vector<double>& smear_profile() const { return smear_profile_; }

    /** Gap values of the periodic extension (n_cont - 1 of them). */
    void continuation(const double* in, double* gap_out) const;

    /** d^order/dx^order at the nodes; x in units where the line spans [0,1].
     *  order must be 1 or 2. Strided access: element i lives at p[i*stride]. */
    void derivative(const double* in, int in_stride, double* out, int out_stride,
                    int order) const;

    /** Per-step exponential filter (profile exp(-alpha (k/M)^{2p})). */
    void filter(const double* in, int in_stride, double* out, int out_stride) const;

    /** Strongly filtered line used by the t=0 discontinuity smearing. */
    void strong_filter(const double* in, int in_stride, double* out, int out_stride) const;

    /** Trigonometric evaluation of the continuation at arbitrary x in [0, period).
     *  Slow; intended for validation. */
    double evaluate(const std::vector<double>& in, double x) const;

    /** Magnitudes of the continuation's Fourier coefficients (n_ext/2+1 bins,
     *  normalized by the transform length). */
    void spectrum(const double* in, int in_stride, std::vector<double>& mag) const;

    /** Shared blend-to-zero matrix, (n_cont-1) x 3, row-major.
     *  Depends only on (degree, n_cont); cached per n_cont. */
    static const std::vector<double>& blend_matrix(int n_cont);

  private:
    struct Impl;
    void apply_profile(const double* in, int in_stride, double* out, int out_stride,
                       const std::vector<double>& profile) const;

    int n_, n_cont_, n_ext_, n_modes_;
    double period_;
    std::vector<double> filter_profile_, smear_profile_;
    const std::vector<double>* blend_;  // borrowed from the static cache
    std::unique_ptr<Impl> impl_;
};

/** mask*strong_filtered + (1-mask)*line, the t=0 discontinuity smearing. */
GridLine smear_initial_data(const FcOperator& op, const GridLine& line,
                            const std::vector<double>& mask);

GridLine fc_derivative(const FcOperator& op, const GridLine& line, int order);
GridLine apply_filter(const FcOperator& op, const GridLine& line);

/** Process-wide operator cache keyed by (n_points, n_cont, filter constants). */
class OperatorCache {
  public:
    static OperatorCache& instance();
    std::shared_ptr<const FcOperator> get(int n_points, int n_cont, FilterSpec filter);
    std::shared_ptr<const FcOperator> get(int n_points);  // defaults: n_cont=25

  private:
    OperatorCache() = default;
    struct Impl;
};

std::shared_ptr<const FcOperator> build_fc_operator(int n_points, int n_cont = 25,
                                                    int filter_order = 14,
                                                    double filter_alpha = 23.025850929940457);

}  // namespace fcs::fc

#endif
