#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <random>
#include <utility>
#include <vector>

#include "drclab/types.hpp"

namespace drclab {

enum class NoiseKind { UniformBall, TruncatedGaussian };

/// Bounded zero-mean i.i.d. noise with a certified per-coordinate
/// second-moment floor. Every sample satisfies ||w|| <= bound().
class BoundedNoiseSpec {
  public:
    static BoundedNoiseSpec uniform_ball(int dim, double radius);
    // Per-coordinate std sigma, norm truncated at 4*sigma*sqrt(dim)
    // by rejection (keeps the mean exactly zero).
    static BoundedNoiseSpec truncated_gaussian(int dim, double sigma);
    static BoundedNoiseSpec zero(int dim) { return uniform_ball(dim, 0.0); }

    Vector sample(std::mt19937_64& rng) const;

    NoiseKind kind() const { return kind_; }
    int dim() const { return dim_; }
    double bound() const { return bound_; }
    double variance_floor() const { return variance_floor_; }

  private:
    BoundedNoiseSpec(NoiseKind kind, int dim, double bound, double floor, double sigma)
        : kind_(kind), dim_(dim), bound_(bound), variance_floor_(floor), sigma_(sigma) {}

    NoiseKind kind_;
    int dim_;
    double bound_;
    double variance_floor_;
    double sigma_;  // gaussian only
};

/// Known stable discrete-time plant
///   x_{t+1} = A x_t + B u_t + w_t,   y_t = C x_t + e_t,
/// with cached Markov operators G^[s] = C A^{s-1} B and the derived
/// decay quantities psi(i), R_{G*} and R_nat.
class SystemModel {
  public:
    SystemModel(Matrix A, Matrix B, Matrix C, BoundedNoiseSpec noise_w, BoundedNoiseSpec noise_e);

    int dim_x() const { return static_cast<int>(A_.rows()); }
    int dim_u() const { return static_cast<int>(B_.cols()); }
    int dim_y() const { return static_cast<int>(C_.rows()); }

    const Matrix& A() const { return A_; }
    const Matrix& B() const { return B_; }
    const Matrix& C() const { return C_; }
    const BoundedNoiseSpec& noise_w() const { return noise_w_; }
    const BoundedNoiseSpec& noise_e() const { return noise_e_; }

    double spectral_radius() const { return spectral_radius_; }

    /// G^[s] = C A^{s-1} B, s >= 1. Cached.
    const Matrix& markov(int s) const;

    /// psi(i) = sum_{j >= i} ||C A^{j-1} B||_2, truncated when the
    /// geometric tail bound falls below 1e-12 of the partial sum.
    double psi(int i) const;

    /// R_{G*} = 1 + psi(1).
    double r_gstar() const;

    /// R_nat = bound_e + bound_w * sum_{j>=0} ||C A^j||_2; a valid bound
    /// on ||y^nat_t|| for all t.
    double r_nat() const;

    struct DecayEnvelope {
        double c;
        double rho_hat;  // psi(i) <= c * rho_hat^i
    };
    DecayEnvelope decay_envelope() const;

  private:
    struct Cache;
    Cache& cache() const;

    Matrix A_, B_, C_;
    BoundedNoiseSpec noise_w_, noise_e_;
    double spectral_radius_;
    std::shared_ptr<Cache> cache_;  // shared across copies; mutex-guarded
};

/// Realized trajectory state. noise_log[k] = (w, e) drawn at step k+1;
/// replaying it through the recurrence reproduces output_history
/// bit-exactly.
struct SimState {
    long t = 1;  // index of the next step to observe (1-based)
    Vector x;
    std::vector<Vector> input_history;
    std::vector<Vector> output_history;
    std::vector<std::pair<Vector, Vector>> noise_log;
};

/// Single-owner sequential simulator. observe() emits y_t = C x_t + e_t
/// (idempotent until the matching apply()); apply(u) advances
/// x_{t+1} = A x_t + B u_t + w_t.
class Simulator {
  public:
    Simulator(SystemModel model, std::uint64_t seed);
    // Forced noise for deterministic tests and replays; entry k is the
    // (w, e) pair of step k+1. Sampling beyond the list fails.
    Simulator(SystemModel model, std::vector<std::pair<Vector, Vector>> forced_noise);

    const Vector& observe();
    void apply(const Vector& u);
    Vector step(const Vector& u);  // observe + apply

    const SimState& state() const { return state_; }
    const SystemModel& model() const { return model_; }

  private:
    Vector draw_w();
    Vector draw_e();

    SystemModel model_;
    SimState state_;
    std::mt19937_64 rng_;
    std::vector<std::pair<Vector, Vector>> forced_;
    bool use_forced_ = false;
    bool observed_ = false;  // y_t already emitted for the current t
    Vector pending_y_;
    Vector pending_e_;
};

/// y^nat_t = y_t - sum_{s=1}^{t-1} G^[s] u_{t-s}; past_inputs is
/// u_1..u_{t-1} oldest first.
Vector natural_output(const Vector& y_t, const std::vector<Vector>& past_inputs,
                      const SystemModel& model);

/// O(1)-per-step tracker for the natural output: feed each applied input,
/// obtain y^nat_t = y_t - C xi_t with xi_{t+1} = A xi_t + B u_t.
class NaturalOutputTracker {
  public:
    explicit NaturalOutputTracker(const SystemModel& model)
        : model_(&model), xi_(Vector::Zero(model.dim_x())) {}

    Vector natural(const Vector& y_t) const { return y_t - model_->C() * xi_; }
    void push_input(const Vector& u) { xi_ = model_->A() * xi_ + model_->B() * u; }

  private:
    const SystemModel* model_;
    Vector xi_;
};

/// Recomputes the output sequence from a logged noise/input record using
/// the same arithmetic as the simulator (bit-exact).
std::vector<Vector> replay_outputs(const SystemModel& model,
                                   const std::vector<std::pair<Vector, Vector>>& noise_log,
                                   const std::vector<Vector>& inputs);

struct MemoryLengths {
    int m;
    int h;
};

/// Smallest m with psi(m) <= R_{G*}/T and smallest h with psi(h) <= R_M/T,
/// each at least 1. Throws if no index <= 10^4 qualifies.
MemoryLengths select_memory(const SystemModel& model, double radius, long horizon);

}  // namespace drclab
