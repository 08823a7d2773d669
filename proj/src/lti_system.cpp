#include "drclab/lti_system.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace drclab {

namespace {

double spectral_norm(const Matrix& M) {
    if (M.rows() == 0 || M.cols() == 0) return 0.0;
    return M.jacobiSvd().singularValues()(0);
}

}  // namespace

// ---------------------------------------------------------------------------
// BoundedNoiseSpec

BoundedNoiseSpec BoundedNoiseSpec::uniform_ball(int dim, double radius) {
    if (dim < 1) throw std::invalid_argument("noise dimension must be positive");
    if (radius < 0.0) throw std::invalid_argument("noise radius must be nonnegative");
    // Uniform on the ball: E[x_i^2] = radius^2 / (dim + 2).
    const double floor = radius * radius / (dim + 2);
    return BoundedNoiseSpec(NoiseKind::UniformBall, dim, radius, floor, 0.0);
}

BoundedNoiseSpec BoundedNoiseSpec::truncated_gaussian(int dim, double sigma) {
    if (dim < 1) throw std::invalid_argument("noise dimension must be positive");
    if (sigma < 0.0) throw std::invalid_argument("noise sigma must be nonnegative");
    const double bound = 4.0 * sigma * std::sqrt(static_cast<double>(dim));
    // Rejection at 4 sigma sqrt(d) shaves under 0.2% off the per-coordinate
    // second moment in the worst case (d = 1), so 0.99 sigma^2 is a true floor.
    const double floor = 0.99 * sigma * sigma;
    return BoundedNoiseSpec(NoiseKind::TruncatedGaussian, dim, bound, floor, sigma);
}

Vector BoundedNoiseSpec::sample(std::mt19937_64& rng) const {
    if (bound_ == 0.0) return Vector::Zero(dim_);
    std::normal_distribution<double> gauss(0.0, 1.0);
    if (kind_ == NoiseKind::UniformBall) {
        Vector dir(dim_);
        double n = 0.0;
        do {
            for (int i = 0; i < dim_; ++i) dir(i) = gauss(rng);
            n = dir.norm();
        } while (n == 0.0);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        const double r = bound_ * std::pow(unif(rng), 1.0 / dim_);
        return dir * (r / n);
    }
    Vector z(dim_);
    do {
        for (int i = 0; i < dim_; ++i) z(i) = sigma_ * gauss(rng);
    } while (z.norm() > bound_);
    return z;
}

// ---------------------------------------------------------------------------
// SystemModel

struct SystemModel::Cache {
    std::mutex mu;
    std::vector<Matrix> powers;        // powers[k] = A^k
    std::deque<Matrix> markov;         // markov[s-1] = G^[s]; deque keeps references stable
    std::vector<double> markov_norms;  // ||G^[s]||_2
    double norm_B = 0.0, norm_C = 0.0;
    // ||A^n||_2 <= c0 * rho_hat^n
    double c0 = 0.0, rho_hat = 0.0;
    bool envelope_ready = false;
    // prefix[j] = sum_{k=1}^{j} ||G^[k]||_2, prefix[0] = 0
    std::vector<double> prefix{0.0};
    bool psi_ready = false;
    double psi_total = 0.0;
    double r_nat = -1.0;

    void ensure_power(const Matrix& A, int k) {
        if (powers.empty()) powers.push_back(Matrix::Identity(A.rows(), A.cols()));
        while (static_cast<int>(powers.size()) <= k) powers.push_back(powers.back() * A);
    }

    void ensure_markov(const Matrix& A, const Matrix& B, const Matrix& C, int s) {
        ensure_power(A, s - 1);
        while (static_cast<int>(markov.size()) < s) {
            const int k = static_cast<int>(markov.size()) + 1;
            markov.push_back(C * powers[k - 1] * B);
            markov_norms.push_back(spectral_norm(markov.back()));
            prefix.push_back(prefix.back() + markov_norms.back());
        }
    }

    void ensure_envelope(const Matrix& A, const Matrix& B, const Matrix& C) {
        if (envelope_ready) return;
        norm_B = spectral_norm(B);
        norm_C = spectral_norm(C);
        int kstar = -1;
        double theta = 0.0;
        double running_max = 1.0;  // max over ||A^r||_2, r < kstar
        for (int k = 1; k <= 2000; ++k) {
            ensure_power(A, k);
            const double nk = spectral_norm(powers[k]);
            if (nk < 1.0) {
                kstar = k;
                theta = nk;
                break;
            }
            running_max = std::max(running_max, nk);
        }
        if (kstar < 0)
            throw std::runtime_error("could not certify power decay of A within 2000 steps");
        // Flooring theta away from zero keeps the envelope finite for
        // nilpotent A; the bound stays valid since theta <= theta_eff < 1.
        const double theta_eff = std::max(theta, 1e-6);
        rho_hat = std::pow(theta_eff, 1.0 / kstar);
        c0 = running_max / theta_eff;
        envelope_ready = true;
    }

    // Upper bound on sum_{j > j0} ||C A^{j-1} B||_2.
    double markov_tail_bound(int j0) const {
        return norm_C * norm_B * c0 * std::pow(rho_hat, j0) / (1.0 - rho_hat);
    }

    void ensure_psi(const Matrix& A, const Matrix& B, const Matrix& C) {
        if (psi_ready) return;
        ensure_envelope(A, B, C);
        int j = 0;
        double sum = 0.0;
        for (;;) {
            ++j;
            ensure_markov(A, B, C, j);
            sum = prefix[j];
            const double tail = markov_tail_bound(j);
            if (tail <= 1e-12 * sum || tail <= 1e-300) break;
            if (j > 200000) throw std::runtime_error("psi series failed to converge");
        }
        psi_total = sum;
        psi_ready = true;
    }
};

SystemModel::SystemModel(Matrix A, Matrix B, Matrix C, BoundedNoiseSpec noise_w,
                         BoundedNoiseSpec noise_e)
    : A_(std::move(A)),
      B_(std::move(B)),
      C_(std::move(C)),
      noise_w_(std::move(noise_w)),
      noise_e_(std::move(noise_e)),
      cache_(std::make_shared<Cache>()) {
    if (A_.rows() != A_.cols()) throw std::invalid_argument("A must be square");
    if (B_.rows() != A_.rows()) throw std::invalid_argument("B row count must match A");
    if (C_.cols() != A_.rows()) throw std::invalid_argument("C column count must match A");
    if (noise_w_.dim() != A_.rows())
        throw std::invalid_argument("state noise dimension must match A");
    if (noise_e_.dim() != C_.rows())
        throw std::invalid_argument("output noise dimension must match C");

    spectral_radius_ = A_.eigenvalues().cwiseAbs().maxCoeff();
    if (!(spectral_radius_ < 1.0 - 1e-10))
        throw std::invalid_argument("system must be stable: spectral radius of A is " +
                                    std::to_string(spectral_radius_));
}

SystemModel::Cache& SystemModel::cache() const { return *cache_; }

const Matrix& SystemModel::markov(int s) const {
    if (s < 1) throw std::invalid_argument("markov operator index must be >= 1");
    Cache& c = cache();
    std::lock_guard<std::mutex> lock(c.mu);
    c.ensure_markov(A_, B_, C_, s);
    return c.markov[s - 1];
}

double SystemModel::psi(int i) const {
    if (i < 1) throw std::invalid_argument("psi index must be >= 1");
    Cache& c = cache();
    std::lock_guard<std::mutex> lock(c.mu);
    c.ensure_psi(A_, B_, C_);
    const int computed = static_cast<int>(c.prefix.size()) - 1;
    const int lead = std::min(i - 1, computed);
    return std::max(0.0, c.psi_total - c.prefix[lead]);
}

double SystemModel::r_gstar() const { return 1.0 + psi(1); }

double SystemModel::r_nat() const {
    Cache& c = cache();
    std::lock_guard<std::mutex> lock(c.mu);
    if (c.r_nat >= 0.0) return c.r_nat;
    c.ensure_envelope(A_, B_, C_);
    double sum = 0.0;
    int j = 0;
    for (;;) {
        c.ensure_power(A_, j);
        sum += spectral_norm(C_ * c.powers[j]);
        // tail over k > j: sum_k ||C A^k||_2 <= ||C|| c0 rho^{j+1}/(1-rho)
        const double tail = c.norm_C * c.c0 * std::pow(c.rho_hat, j + 1) / (1.0 - c.rho_hat);
        if (tail <= 1e-12 * sum || tail <= 1e-300) {
            sum += tail;
            break;
        }
        ++j;
        if (j > 200000) throw std::runtime_error("r_nat series failed to converge");
    }
    c.r_nat = noise_e_.bound() + noise_w_.bound() * sum;
    return c.r_nat;
}

SystemModel::DecayEnvelope SystemModel::decay_envelope() const {
    Cache& c = cache();
    std::lock_guard<std::mutex> lock(c.mu);
    c.ensure_envelope(A_, B_, C_);
    // psi(i) <= ||C|| ||B|| c0 rho^{i-1}/(1-rho) = (that / rho) * rho^i
    const double cc = c.norm_C * c.norm_B * c.c0 / (c.rho_hat * (1.0 - c.rho_hat));
    return DecayEnvelope{cc, c.rho_hat};
}

// ---------------------------------------------------------------------------
// Simulator

Simulator::Simulator(SystemModel model, std::uint64_t seed)
    : model_(std::move(model)), rng_(seed) {
    state_.x = Vector::Zero(model_.dim_x());
}

Simulator::Simulator(SystemModel model, std::vector<std::pair<Vector, Vector>> forced_noise)
    : model_(std::move(model)), rng_(0), forced_(std::move(forced_noise)), use_forced_(true) {
    state_.x = Vector::Zero(model_.dim_x());
}

Vector Simulator::draw_w() {
    if (use_forced_) {
        const std::size_t k = static_cast<std::size_t>(state_.t - 1);
        if (k >= forced_.size()) throw std::runtime_error("forced noise exhausted");
        return forced_[k].first;
    }
    return model_.noise_w().sample(rng_);
}

Vector Simulator::draw_e() {
    if (use_forced_) {
        const std::size_t k = static_cast<std::size_t>(state_.t - 1);
        if (k >= forced_.size()) throw std::runtime_error("forced noise exhausted");
        return forced_[k].second;
    }
    return model_.noise_e().sample(rng_);
}

const Vector& Simulator::observe() {
    if (!observed_) {
        pending_e_ = draw_e();
        pending_y_ = model_.C() * state_.x + pending_e_;
        observed_ = true;
    }
    return pending_y_;
}

void Simulator::apply(const Vector& u) {
    if (u.size() != model_.dim_u()) throw std::invalid_argument("input dimension mismatch");
    observe();  // y_t and e_t must exist before the state advances
    const Vector w = draw_w();
    state_.output_history.push_back(pending_y_);
    state_.input_history.push_back(u);
    state_.noise_log.emplace_back(w, pending_e_);
    state_.x = model_.A() * state_.x + model_.B() * u + w;
    state_.t += 1;
    observed_ = false;
}

Vector Simulator::step(const Vector& u) {
    Vector y = observe();
    apply(u);
    return y;
}

// ---------------------------------------------------------------------------
// Free operations

Vector natural_output(const Vector& y_t, const std::vector<Vector>& past_inputs,
                      const SystemModel& model) {
    if (y_t.size() != model.dim_y()) throw std::invalid_argument("output dimension mismatch");
    Vector ynat = y_t;
    const int t_minus_1 = static_cast<int>(past_inputs.size());
    for (int s = 1; s <= t_minus_1; ++s) {
        ynat -= model.markov(s) * past_inputs[t_minus_1 - s];  // u_{t-s}
    }
    return ynat;
}

std::vector<Vector> replay_outputs(const SystemModel& model,
                                   const std::vector<std::pair<Vector, Vector>>& noise_log,
                                   const std::vector<Vector>& inputs) {
    if (inputs.size() > noise_log.size())
        throw std::invalid_argument("replay needs a noise pair per input");
    std::vector<Vector> outputs;
    outputs.reserve(inputs.size());
    Vector x = Vector::Zero(model.dim_x());
    for (std::size_t k = 0; k < inputs.size(); ++k) {
        Vector y = model.C() * x + noise_log[k].second;
        outputs.push_back(std::move(y));
        x = model.A() * x + model.B() * inputs[k] + noise_log[k].first;
    }
    return outputs;
}

MemoryLengths select_memory(const SystemModel& model, double radius, long horizon) {
    if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    if (radius <= 0.0) throw std::invalid_argument("radius must be positive");
    const double thresh_m = model.r_gstar() / static_cast<double>(horizon);
    const double thresh_h = radius / static_cast<double>(horizon);
    auto smallest = [&](double thresh) {
        for (int i = 1; i <= 10000; ++i) {
            if (model.psi(i) <= thresh) return i;
        }
        throw std::runtime_error("psi decays too slowly: no memory length <= 10^4 qualifies");
    };
    return MemoryLengths{smallest(thresh_m), smallest(thresh_h)};
}

}  // namespace drclab
