#pragma once

#include <stdexcept>

#include "isac/costs.hpp"

namespace isac {

// Every posterior weight underflowed to zero; surfaced to the caller, which
// may reinitialize or continue with a uniform cloud.
class DegenerateUpdateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Particle {
    Vec2 pos{0.0, 0.0};
    Vec2 vel{0.0, 0.0};
    double weight = 0.0;
    // augmented path-gain state (PF-SLTR-A)
    cdouble beta{0.0, 0.0};
    // marginalized path-gain sufficient statistics (RBPF-SLTR-A)
    cdouble beta_mean{0.0, 0.0};
    double beta_var = 1.0;
};

struct ParticleCloud {
    std::vector<Particle> particles;
    long step = 0;
};

struct FilterSettings {
    int n_par = 200;
    double n_thres = 100.0;  // resampling threshold on the effective sample size
    double xi = 1.0;
    double accel_intensity = 1.0;   // q_a, white-acceleration PSD of the CV model
    double beta_walk_std = 0.1;     // PF-SLTR-A random-walk proposal, per component
    double beta_process_var = 0.02; // RBPF complex random-walk variance per step
    int gate_grid = 15;             // N_tg, PF-ILTR grid points per axis
    std::uint64_t seed = 1;
    // initialization box
    double init_vel_halfwidth = 2.0;  // m/s per axis
};

// Pointers to whichever transmit reference the active scheme needs.
struct TxReference {
    const TxTimeSignal* time = nullptr;
    const TxFreqSignal* freq = nullptr;
    const ConstellationCube* cw = nullptr;
};

double ess(const ParticleCloud& cloud);

Vec2 estimate_position(const ParticleCloud& cloud);

// Constant-velocity prediction with exact white-acceleration discretization;
// weights unchanged.
void cv_propagate(ParticleCloud& cloud, double dt, const FilterSettings& settings);

// u_i proportional to eta_i * exp(-xi (h_i - min h)); +inf costs map to zero
// weight. Throws DegenerateUpdateError when all mass vanishes.
void gibbs_update(ParticleCloud& cloud, const std::vector<double>& costs, double xi);

void systematic_resample(ParticleCloud& cloud, std::uint64_t seed);

// Particles drawn uniformly over a box around `truth` sized to the tracking
// gate (range/cross-range), velocities in a +-init_vel_halfwidth box.
// beta_init/beta_spread seed the augmented-gain states of the baselines.
ParticleCloud init_cloud(const TargetTruth& truth, const RadarConfig& cfg,
                         const FilterSettings& settings, std::uint64_t seed,
                         cdouble beta_init = {1.0, 0.0}, double beta_spread = 0.5,
                         const Vec2& station = {0.0, 0.0}, double boresight = 0.0);

// One tracking step of each filter. The snapshot cube is time-domain for the
// pulsed scheme (converted internally for frequency-domain costs) and
// frequency-domain for CW. Station geometry enters through the polar
// translation of each particle.
void pf_sltr_step(ParticleCloud& cloud, const SnapshotCube& y, const TxReference& tx,
                  const RadarConfig& cfg, const FilterSettings& settings,
                  const Vec2& station = {0.0, 0.0}, double boresight = 0.0);

void pf_iltr_step(ParticleCloud& cloud, const SnapshotCube& y, const TxReference& tx,
                  const RadarConfig& cfg, const FilterSettings& settings,
                  const Vec2& station = {0.0, 0.0}, double boresight = 0.0);

void pf_sltr_a_step(ParticleCloud& cloud, const SnapshotCube& y, const TxReference& tx,
                    const RadarConfig& cfg, const FilterSettings& settings,
                    const Vec2& station = {0.0, 0.0}, double boresight = 0.0);

void rbpf_sltr_a_step(ParticleCloud& cloud, const SnapshotCube& y, const TxReference& tx,
                      const RadarConfig& cfg, const FilterSettings& settings,
                      const Vec2& station = {0.0, 0.0}, double boresight = 0.0);

// alpha_i^xi / sum_j alpha_j^xi (with 0^0 := 1).
std::vector<double> entropy_power(const std::vector<double>& alpha, double xi);

double entropy(const std::vector<double>& weights);

}  // namespace isac
