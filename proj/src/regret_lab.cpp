#include "drclab/regret_lab.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>
#include <stdexcept>

namespace drclab {

namespace {

/// d_u x dim map of u = M^[0..m-1] applied to window entries starting at
/// `offset` (window is newest first; missing entries count as zero), laid
/// out like DrcParams::vectorize().
Matrix input_map(const std::deque<Vector>& window, int m, int d_u, int d_y, int offset) {
    const int q = d_u * d_y;
    Matrix U = Matrix::Zero(d_u, m * q);
    for (int s = 0; s < m; ++s) {
        const std::size_t idx = static_cast<std::size_t>(offset + s);
        if (idx >= window.size()) break;
        for (int r = 0; r < d_u; ++r)
            for (int k = 0; k < d_y; ++k) U(r, s * q + r * d_y + k) = window[idx](k);
    }
    return U;
}

std::vector<Vector> window_vec(const std::deque<Vector>& window) {
    return std::vector<Vector>(window.begin(), window.end());
}

struct Objective {
    std::function<double(const Vector&)> value;
    std::function<Vector(const Vector&)> grad;
};

/// Projected gradient descent with diminishing steps gamma_0 / sqrt(k),
/// 8 starts, best-iterate tracking, relative-improvement stop.
ComparatorResult minimize_over_set(const DrcConstraintSet& set, const Objective& obj,
                                   unsigned long seed) {
    constexpr long kCapPerStart = 12500;
    constexpr int kCheckEvery = 200;
    constexpr double kRelTol = 1e-8;

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    ComparatorResult out;
    out.best_params = Vector::Zero(set.dim());
    out.cost = obj.value(out.best_params);
    out.converged = true;

    for (int start = 0; start < 8; ++start) {
        Vector P = Vector::Zero(set.dim());
        if (start > 0) {
            for (int i = 0; i < set.dim(); ++i) P(i) = gauss(rng);
            const double n = P.norm();
            if (n > 0.0) P *= set.radius() * u01(rng) / n;
            P = set.project(P);
        }

        Vector g = obj.grad(P);
        if (g.norm() == 0.0) {
            const double v = obj.value(P);
            if (v < out.cost) {
                out.cost = v;
                out.best_params = P;
            }
            continue;
        }
        const double gamma0 = set.radius() / g.norm();

        double best = obj.value(P);
        Vector best_P = P;
        double checkpoint = best;
        bool settled = false;
        for (long k = 1; k <= kCapPerStart; ++k) {
            P = set.project(P - (gamma0 / std::sqrt(static_cast<double>(k))) * obj.grad(P));
            ++out.iterations;
            const double v = obj.value(P);
            if (v < best) {
                best = v;
                best_P = P;
            }
            if (k % kCheckEvery == 0) {
                if (checkpoint - best < kRelTol * std::max(1.0, std::abs(best))) {
                    settled = true;
                    break;
                }
                checkpoint = best;
            }
        }
        if (!settled) out.converged = false;
        if (best < out.cost) {
            out.cost = best;
            out.best_params = best_P;
        }
    }
    return out;
}

bool all_quadratic(const std::vector<LossSpec>& losses) {
    for (const auto& l : losses)
        if (!l.is_quadratic()) return false;
    return true;
}

/// Assembled quadratic P' M P + q' P + c for an affine family
/// z_t(P) = z0_t + J_t P fed through quadratic losses.
struct QuadraticObjective {
    Matrix M;
    Vector q;
    double c = 0.0;

    Objective make() const {
        return Objective{
            [this](const Vector& P) { return P.dot(M * P) + q.dot(P) + c; },
            [this](const Vector& P) { return Vector(2.0 * (M * P) + q); },
        };
    }
};

void accumulate_quadratic(QuadraticObjective& acc, const LossSpec& loss, const Matrix& J,
                          const Vector& z0) {
    const Matrix& Q = loss.quadratic_form();
    const Vector r = z0 - loss.target();
    acc.M += J.transpose() * Q * J;
    acc.q += 2.0 * J.transpose() * (Q * r);
    acc.c += r.dot(Q * r);
}

/// Affine maps of the REPLAYED closed loop: z_t(P) = [y^P_t; u^P_t],
/// y^P_t = y^nat_t + C Xi_t, Xi_{t+1} = A Xi_t + B u^P_t. visit(t, J, z0)
/// is called for every t in [1, to_t].
template <typename Visitor>
void for_each_replay_map(const EpisodeTrace& trace, long to_t, Visitor&& visit) {
    const SystemModel& model = trace.config.model;
    const int d_u = model.dim_u(), d_y = model.dim_y(), d_x = model.dim_x();
    const int dim = trace.m * d_u * d_y;

    Matrix X = Matrix::Zero(d_x, dim);  // d Xi_t / d P
    std::deque<Vector> window;
    for (long t = 1; t <= to_t; ++t) {
        const EpisodeStep& step = trace.steps[static_cast<std::size_t>(t - 1)];
        window.push_front(step.ynat);
        if (static_cast<int>(window.size()) > trace.m) window.pop_back();

        const Matrix U = input_map(window, trace.m, d_u, d_y, 0);
        Matrix J(d_y + d_u, dim);
        J.topRows(d_y) = model.C() * X;
        J.bottomRows(d_u) = U;
        Vector z0(d_y + d_u);
        z0 << step.ynat, Vector::Zero(d_u);

        visit(t, J, z0);
        X = model.A() * X + model.B() * U;
    }
}

/// Affine maps of the truncated memory-less loss: u_t uses the window at
/// offset 0 and ytilde adds G^[s] times the window at offset s.
template <typename Visitor>
void for_each_truncated_map(const EpisodeTrace& trace, long to_t, Visitor&& visit) {
    const SystemModel& model = trace.config.model;
    const int d_u = model.dim_u(), d_y = model.dim_y();
    const int dim = trace.m * d_u * d_y;

    std::deque<Vector> window;
    for (long t = 1; t <= to_t; ++t) {
        const EpisodeStep& step = trace.steps[static_cast<std::size_t>(t - 1)];
        window.push_front(step.ynat);
        if (static_cast<int>(window.size()) > trace.m + trace.h) window.pop_back();

        Matrix J(d_y + d_u, dim);
        Matrix Jy = Matrix::Zero(d_y, dim);
        for (int s = 1; s <= trace.h; ++s)
            Jy += model.markov(s) * input_map(window, trace.m, d_u, d_y, s);
        J.topRows(d_y) = Jy;
        J.bottomRows(d_u) = input_map(window, trace.m, d_u, d_y, 0);
        Vector z0(d_y + d_u);
        z0 << step.ynat, Vector::Zero(d_u);

        visit(t, J, z0);
    }
}

void check_range(const EpisodeTrace& trace, long from_t, long to_t) {
    if (from_t < 1 || to_t > trace.T())
        throw std::invalid_argument("regret_lab: step range outside the trace");
}

ComparatorResult minimize_affine_family(
    const EpisodeTrace& trace, long from_t, long to_t,
    const std::function<void(long, const std::function<void(long, const Matrix&, const Vector&)>&)>&
        sweep) {
    const SystemModel& model = trace.config.model;
    const DrcConstraintSet set(trace.m, model.dim_u(), model.dim_y(), trace.config.r_m);
    if (from_t > to_t) {
        ComparatorResult out;
        out.best_params = Vector::Zero(set.dim());
        return out;
    }
    check_range(trace, from_t, to_t);

    if (all_quadratic(trace.losses)) {
        QuadraticObjective acc;
        acc.M = Matrix::Zero(set.dim(), set.dim());
        acc.q = Vector::Zero(set.dim());
        sweep(to_t, [&](long t, const Matrix& J, const Vector& z0) {
            if (t >= from_t)
                accumulate_quadratic(acc, trace.losses[static_cast<std::size_t>(t - 1)], J, z0);
        });
        return minimize_over_set(set, acc.make(), trace.config.seed ^ 0x9e3779b97f4a7c15ULL);
    }

    // generic losses: evaluate the affine maps on every call
    const Objective obj{
        [&, from_t, to_t](const Vector& P) {
            double total = 0.0;
            sweep(to_t, [&](long t, const Matrix& J, const Vector& z0) {
                if (t >= from_t)
                    total +=
                        trace.losses[static_cast<std::size_t>(t - 1)].value(z0 + J * P);
            });
            return total;
        },
        [&, from_t, to_t](const Vector& P) {
            Vector g = Vector::Zero(trace.m * trace.config.model.dim_u() *
                                    trace.config.model.dim_y());
            sweep(to_t, [&](long t, const Matrix& J, const Vector& z0) {
                if (t >= from_t)
                    g += J.transpose() *
                         trace.losses[static_cast<std::size_t>(t - 1)].gradient(z0 + J * P);
            });
            return g;
        },
    };
    return minimize_over_set(set, obj, trace.config.seed ^ 0x9e3779b97f4a7c15ULL);
}

}  // namespace

EpisodeTrace run_episode(const EpisodeConfig& config) {
    const SystemModel& model = config.model;
    const int d_u = model.dim_u(), d_y = model.dim_y();
    const int d_z = d_y + d_u;
    if (config.T < 1) throw std::invalid_argument("run_episode: horizon must be positive");
    if (!(config.r_m > 0.0)) throw std::invalid_argument("run_episode: R_M must be positive");
    if (config.m < 0 || config.h < 0 || (config.m == 0 && config.h != 0))
        throw std::invalid_argument("run_episode: bad memory override (m = h = 0 selects auto)");

    EpisodeTrace trace{config};
    if (config.m > 0) {
        trace.m = config.m;
        trace.h = config.h;
    } else {
        const MemoryLengths mem = select_memory(model, config.r_m, config.T);
        trace.m = mem.m;
        trace.h = mem.h;
    }

    if (!config.losses_override.empty()) {
        if (static_cast<long>(config.losses_override.size()) < config.T)
            throw std::invalid_argument("run_episode: loss override shorter than the horizon");
        trace.losses.assign(config.losses_override.begin(),
                            config.losses_override.begin() + config.T);
    } else {
        const std::uint64_t loss_seed = config.seed * 0x9e3779b97f4a7c15ULL + 17;
        switch (config.loss_case) {
            case 1:
                trace.losses = convex_only_sequence(config.T, d_z, loss_seed);
                break;
            case 2:
                trace.losses =
                    decaying_curvature_sequence(0.0, config.curvature, config.T, d_z, loss_seed);
                break;
            case 3:
            case 4:
                trace.losses = decaying_curvature_sequence(config.alpha, config.curvature,
                                                           config.T, d_z, loss_seed);
                break;
            default:
                throw std::invalid_argument("run_episode: loss case must be 1, 2, 3 or 4");
        }
    }
    for (const auto& l : trace.losses)
        if (l.dim() != d_z) throw std::invalid_argument("run_episode: loss dimension mismatch");

    if (!config.lambda_override.empty()) {
        if (static_cast<long>(config.lambda_override.size()) != config.T)
            throw std::invalid_argument("run_episode: lambda override length mismatch");
        trace.lambda_stream = LambdaSchedule::custom(config.lambda_override).values();
    } else if (config.loss_case == 1) {
        trace.lambda_stream = make_lambda_schedule(1, config.T).values();
    } else {
        trace.lambda_stream =
            make_lambda_schedule(config.loss_case, config.T, h_tilde(model, config.curvature),
                                 config.alpha)
                .values();
    }

    const double transfer = noise_transfer_factor(model);
    const DrcConstraintSet set(trace.m, d_u, d_y, config.r_m);
    Simulator sim(model, config.seed);
    NaturalOutputTracker tracker(model);
    StepState state;
    Vector P = Vector::Zero(set.dim());

    std::deque<Vector> window;               // y^nat, newest first
    std::vector<DrcParams> params_hist;      // P_1..P_t
    params_hist.reserve(static_cast<std::size_t>(config.T));
    trace.steps.reserve(static_cast<std::size_t>(config.T));
    trace.H_stream.reserve(static_cast<std::size_t>(config.T));

    for (long t = 1; t <= config.T; ++t) {
        EpisodeStep step;
        step.y = sim.observe();
        step.ynat = tracker.natural(step.y);
        window.push_front(step.ynat);
        if (static_cast<int>(window.size()) > trace.m + trace.h) window.pop_back();

        const DrcParams params = DrcParams::from_vector(P, trace.m, d_u, d_y);
        params_hist.push_back(params);
        const auto win = window_vec(window);
        step.u = control_input(params, win);
        sim.apply(step.u);
        tracker.push_input(step.u);

        const LossSpec& loss = trace.losses[static_cast<std::size_t>(t - 1)];
        Vector z(d_z);
        z << step.y, step.u;
        step.loss = loss.value(z);

        const LossContext ctx = make_loss_context(model, loss, trace.m, trace.h, t, win);
        std::vector<DrcParams> param_window;
        param_window.reserve(static_cast<std::size_t>(trace.h + 1));
        for (long s = t - trace.h; s <= t; ++s)
            param_window.push_back(params_hist[static_cast<std::size_t>(std::max(s, 1L) - 1)]);
        step.memory_loss = memory_loss_F(param_window, ctx);
        step.unary_loss = memoryless_f(params, ctx);

        step.lambda = trace.lambda_stream[static_cast<std::size_t>(t - 1)];
        step.H = loss.curvature() * transfer;
        P = drc_agd_update(P, ctx, step.lambda, transfer, state, set);
        step.eta = step_rate(state);
        step.params = params.vectorize();

        const auto& noise = sim.state().noise_log.back();
        step.w = noise.first;
        step.e = noise.second;

        trace.realized_total += step.loss;
        trace.H_stream.push_back(step.H);
        trace.steps.push_back(std::move(step));
    }

    double L = 0.0;
    for (const auto& l : trace.losses) L = std::max(L, l.lipschitz_scale());
    trace.constants = BoundConstants::from_control(L, config.r_m, model.r_gstar(), model.r_nat(),
                                                   trace.m, trace.h, d_u, d_y);
    trace.bound = regret_bound_control(trace.constants, trace.H_stream, trace.lambda_stream);
    return trace;
}

double replay_fixed_cost(const EpisodeTrace& trace, const Vector& P, long from_t, long to_t) {
    if (from_t > to_t) return 0.0;
    check_range(trace, from_t, to_t);
    const SystemModel& model = trace.config.model;
    const DrcParams params = DrcParams::from_vector(P, trace.m, model.dim_u(), model.dim_y());

    Vector xi = Vector::Zero(model.dim_x());
    std::deque<Vector> window;
    double total = 0.0;
    for (long t = 1; t <= to_t; ++t) {
        const EpisodeStep& step = trace.steps[static_cast<std::size_t>(t - 1)];
        window.push_front(step.ynat);
        if (static_cast<int>(window.size()) > trace.m) window.pop_back();
        const Vector u = control_input(params, window_vec(window));
        const Vector y = step.ynat + model.C() * xi;
        if (t >= from_t) {
            Vector z(y.size() + u.size());
            z << y, u;
            total += trace.losses[static_cast<std::size_t>(t - 1)].value(z);
        }
        xi = model.A() * xi + model.B() * u;
    }
    return total;
}

ComparatorResult best_fixed_drc(const EpisodeTrace& trace, long from_t, long to_t) {
    return minimize_affine_family(
        trace, from_t, to_t,
        [&trace](long upto, const std::function<void(long, const Matrix&, const Vector&)>& fn) {
            for_each_replay_map(trace, upto, fn);
        });
}

ComparatorResult best_memoryless_fit(const EpisodeTrace& trace, long from_t, long to_t) {
    return minimize_affine_family(
        trace, from_t, to_t,
        [&trace](long upto, const std::function<void(long, const Matrix&, const Vector&)>& fn) {
            for_each_truncated_map(trace, upto, fn);
        });
}

double ldc_rollout(const EpisodeTrace& trace, const LdcController& controller) {
    const SystemModel& model = trace.config.model;
    const int d_pi = static_cast<int>(controller.A_pi.rows());
    if (controller.A_pi.cols() != d_pi || controller.B_pi.rows() != d_pi ||
        controller.B_pi.cols() != model.dim_y() || controller.C_pi.rows() != model.dim_u() ||
        controller.C_pi.cols() != d_pi || controller.D_pi.rows() != model.dim_u() ||
        controller.D_pi.cols() != model.dim_y())
        throw std::invalid_argument("ldc_rollout: controller shape mismatch");

    Vector x = Vector::Zero(model.dim_x());
    Vector s = Vector::Zero(d_pi);
    double total = 0.0;
    for (long t = 1; t <= trace.T(); ++t) {
        const EpisodeStep& step = trace.steps[static_cast<std::size_t>(t - 1)];
        const Vector y = model.C() * x + step.e;
        const Vector u = controller.C_pi * s + controller.D_pi * y;
        Vector z(y.size() + u.size());
        z << y, u;
        total += trace.losses[static_cast<std::size_t>(t - 1)].value(z);
        x = model.A() * x + model.B() * u + step.w;
        s = controller.A_pi * s + controller.B_pi * y;
    }
    return total;
}

RegretDecomposition decompose_regret(const EpisodeTrace& trace,
                                     const ComparatorResult& tail_comparator, int ldc_samples) {
    if (ldc_samples < 1) throw std::invalid_argument("decompose_regret: need at least one LDC");
    const long T = trace.T();
    const long mh = std::min<long>(trace.m + trace.h, T);

    RegretDecomposition out;
    for (long t = 1; t <= mh; ++t)
        out.burn_in += trace.steps[static_cast<std::size_t>(t - 1)].loss;
    for (long t = mh + 1; t <= T; ++t) {
        const EpisodeStep& step = trace.steps[static_cast<std::size_t>(t - 1)];
        out.algo_truncation += step.loss - step.memory_loss;
    }

    const ComparatorResult f_min = best_memoryless_fit(trace, mh + 1, T);
    double memory_sum = 0.0;
    for (long t = mh + 1; t <= T; ++t)
        memory_sum += trace.steps[static_cast<std::size_t>(t - 1)].memory_loss;
    out.f_policy = memory_sum - f_min.cost;
    out.comparator_truncation = f_min.cost - tail_comparator.cost;

    // diagnostic: full-horizon best fixed DRC against sampled LDC rollouts
    const ComparatorResult full_drc = best_fixed_drc(trace, 1, T);
    const SystemModel& model = trace.config.model;
    LdcController zero{Matrix::Zero(0, 0), Matrix::Zero(0, model.dim_y()),
                       Matrix::Zero(model.dim_u(), 0), Matrix::Zero(model.dim_u(), model.dim_y())};
    double best_ldc = ldc_rollout(trace, zero);
    std::mt19937_64 rng(trace.config.seed ^ 0x5eedULL);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const int d_pi = model.dim_x();
    for (int i = 1; i < ldc_samples; ++i) {
        LdcController ctl{Matrix(d_pi, d_pi), Matrix(d_pi, model.dim_y()),
                          Matrix(model.dim_u(), d_pi), Matrix(model.dim_u(), model.dim_y())};
        for (Matrix* mat : {&ctl.A_pi, &ctl.B_pi, &ctl.C_pi, &ctl.D_pi})
            for (int r = 0; r < mat->rows(); ++r)
                for (int c = 0; c < mat->cols(); ++c) (*mat)(r, c) = 0.3 * gauss(rng);
        const double norm = ctl.A_pi.jacobiSvd().singularValues()(0);
        if (norm > 0.5) ctl.A_pi *= 0.5 / norm;
        best_ldc = std::min(best_ldc, ldc_rollout(trace, ctl));
    }
    out.policy_gap = full_drc.cost - best_ldc;
    return out;
}

RegretReport evaluate_episode(const EpisodeTrace& trace, int ldc_samples) {
    const long mh = trace.m + trace.h;
    const ComparatorResult comp = best_fixed_drc(trace, mh + 1, trace.T());

    RegretReport report;
    report.realized = trace.realized_total;
    report.comparator = comp.cost;
    report.regret = report.realized - report.comparator;
    report.bound = trace.bound;
    report.decomposition = decompose_regret(trace, comp, ldc_samples);
    report.comparator_converged = comp.converged;
    return report;
}

RateFit fit_rate(const std::vector<double>& horizons, const std::vector<double>& regrets) {
    if (horizons.size() != regrets.size())
        throw std::invalid_argument("fit_rate: mismatched lengths");
    if (horizons.size() < 4) throw std::invalid_argument("fit_rate: need at least 4 horizons");

    RateFit fit;
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < horizons.size(); ++i) {
        if (!(horizons[i] > 1.0)) throw std::invalid_argument("fit_rate: horizons must exceed 1");
        if (regrets[i] > 0.0) {
            lx.push_back(std::log(horizons[i]));
            ly.push_back(std::log(regrets[i]));
            fit.log_ratio.push_back(regrets[i] / std::log(horizons[i]));
        } else {
            ++fit.excluded;
        }
    }
    if (fit.excluded > 0)
        fit.warning = "fit_rate: excluded " + std::to_string(fit.excluded) +
                      " nonpositive regret value(s) from the log-log fit";
    if (lx.size() < 2)
        throw std::invalid_argument("fit_rate: fewer than two positive regrets to fit");

    const double n = static_cast<double>(lx.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    const double denom = n * sxx - sx * sx;
    if (denom <= 0.0) throw std::invalid_argument("fit_rate: degenerate horizon spread");
    fit.exponent = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.exponent * sx) / n;
    return fit;
}

}  // namespace drclab
