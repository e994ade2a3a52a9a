#ifndef FCS_VISCOSITY_HPP
#define FCS_VISCOSITY_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "fcs/field.hpp"
#include "fcs/geometry.hpp"

namespace fcs::visc {

constexpr double kGamma = 1.4;

/** Mach-number proxy Phi = |u| sqrt(rho/(gamma p)) of one state sample. */
double proxy_value(double rho, double rho_u, double rho_v, double E);

/** Maximum wave speed bound |u| + a, a = sqrt(gamma p / rho). */
double mwsb_value(double rho, double rho_u, double rho_v, double E);

/** Small fully-connected classifier: values in tau classes 1..4
 *  (1 = discontinuous, 2 = kink, 3 = oscillatory-rough, 4 = smooth). */
class MlpClassifier {
  public:
    static constexpr int kInput = 7;
    static constexpr int kClasses = 4;

    MlpClassifier() = default;
    static MlpClassifier load(const std::string& path);
    void save(const std::string& path) const;

    /** logits for one already-normalized stencil */
    void forward(const double* in, double* logits) const;
    int classify_stencil(const double* in) const;

    // layer sizes: weights[l] is (rows x cols) row-major, y = W x + b
    std::vector<std::vector<double>> weights, biases;
    std::vector<int> rows, cols;
    int activation = 1;  // 1 = tanh

    bool empty() const { return weights.empty(); }
};

struct ClassifierConfig {
    enum class Variant { ann, fallback };
    Variant variant = Variant::fallback;
    std::string weight_path;
    int stencil_width = 7;   // ann sliding window
    int window = 32;         // fallback FC window
    double abs_floor = 1e-4; // stencil spans below this count as smooth
};

class Classifier {
  public:
    explicit Classifier(ClassifierConfig cfg);

    /** per-point classes along one grid line (values, n) -> tau[n] */
    void classify_line(const double* values, int n, uint8_t* tau) const;

    /** 2D classification: per-direction line sweeps combined by min. */
    void classify(const Field& proxy, const geom::Subpatch& sp, Field* tau_out) const;

    const ClassifierConfig& config() const { return cfg_; }

  private:
    ClassifierConfig cfg_;
    MlpClassifier mlp_;
};

/** Per-class viscosity weights c(tau), tau = 1..4. */
struct ViscosityWeights {
    std::array<double, 4> c = {1.5, 1.0, 0.25, 0.0};
};

/** mu_hat = c(tau) * h_loc * speed, zeroed on the fringe. tau/speed/h_loc are
 *  bounding-box fields; fringe_mask uses the geometry encoding (2 = fringe). */
void preliminary_viscosity(const Field& tau, const Field& speed, const Field& h_loc,
                           const std::vector<uint8_t>& fringe_mask, ViscosityWeights w,
                           Field* mu_hat);

/** Raw (unnormalized) partition-of-unity window of a subpatch evaluated at
 *  fractional lattice coordinates (u, v) (unwrapped for periodic patches):
 *  product of squared-sine ramps rising from 0 at fringe depth nf to 1 at the
 *  (2nv+1)-band edge next to each internal side; 1 toward physical-boundary
 *  sides. Identically zero on the fringe so blend donors are never fringe
 *  recipients. */
double raw_window(const geom::Patch& p, const geom::Subpatch& sp, double u, double v, int nf);

/** Training data generator + trainer for the stencil classifier (offline). */
struct TrainConfig {
    int per_class = 6000;
    int epochs = 48;
    double lr = 2e-3;
    int batch = 64;
    uint64_t seed = 20240601;
    double holdout_fraction = 0.2;
};

struct TrainReport {
    double holdout_accuracy = 0.0;
    std::array<double, 4> per_class_accuracy{};
};

/** Generate a labeled synthetic stencil (class 1..4) into out[7]. */
int synth_stencil(uint64_t rng_state, int want_class, double* out);

TrainReport train_classifier(const TrainConfig& cfg, MlpClassifier* out);

}  // namespace fcs::visc

#endif
