#pragma once

// AdamW + one-cycle training of the unrolled network's stage parameters.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>

#include "asc/asc_model.hpp"
#include "asc/unfolded/network.hpp"

namespace asc {

struct TrainConfig {
    std::size_t stages = 4;
    double init_t = 0.01;
    double init_rho = 0.005;
    double lambda = 300.0;
    std::size_t epochs = 50;
    std::size_t batch_size = 16;
    double peak_lr = 2e-3;
    double weight_decay = 0.05;
    bool decay_rho = false;  // weight decay on t only unless set
    // one-cycle shape
    double warmup_fraction = 0.3;
    double div_factor = 25.0;          // initial lr = peak / div_factor
    double final_div_factor = 1e4;     // final lr = peak / final_div_factor
    // adaptive moments
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    LossMode loss_mode = LossMode::norm;
    std::uint64_t seed = 0;

    static TrainConfig reference_recipe() { return TrainConfig{}; }

    void validate() const
    {
        require(stages >= 1, "TrainConfig: stages must be >= 1");
        require(lambda >= 0.0, "TrainConfig: lambda must be >= 0");
        require(epochs >= 1 && batch_size >= 1, "TrainConfig: epochs and batch size must be >= 1");
        require(peak_lr >= 0.0 && weight_decay >= 0.0, "TrainConfig: lr and weight decay must be >= 0");
        require(warmup_fraction > 0.0 && warmup_fraction < 1.0, "TrainConfig: warmup fraction must lie in (0, 1)");
        require(div_factor > 0.0 && final_div_factor > 0.0, "TrainConfig: lr divisors must be positive");
        require(init_rho >= 0.0, "TrainConfig: initial threshold must be >= 0");
    }

    bool operator==(const TrainConfig&) const = default;
};

/// Cosine one-cycle learning rate: anneal from peak/div_factor up to peak over
/// the warmup fraction of the run, then down to peak/final_div_factor at the
/// last step. Phase boundaries follow the usual convention of ending the
/// warmup at step warmup_fraction * total - 1.
inline double lr_schedule(std::size_t step, std::size_t total_steps, const TrainConfig& cfg)
{
    require(step < total_steps, "lr_schedule: step out of range");
    const double peak = cfg.peak_lr;
    const double initial = peak / cfg.div_factor;
    const double final_lr = peak / cfg.final_div_factor;
    const double warm_end = std::max(cfg.warmup_fraction * static_cast<double>(total_steps) - 1.0, 0.0);
    const double last = static_cast<double>(total_steps) - 1.0;
    const double s = static_cast<double>(step);

    auto cos_anneal = [](double from, double to, double pct) { return to + (from - to) * 0.5 * (1.0 + std::cos(kPi * pct)); };
    if (s <= warm_end) {
        if (warm_end == 0.0) return peak;
        return cos_anneal(initial, peak, s / warm_end);
    }
    if (last <= warm_end) return peak;
    return cos_anneal(peak, final_lr, (s - warm_end) / (last - warm_end));
}

struct EpochLog {
    std::size_t epoch = 0;
    double train_loss = 0.0;  // mean of the batch losses used for this epoch's updates
    double val_loss = 0.0;    // mean loss on the validation set after the epoch (NaN if none)
    double lr = 0.0;          // learning rate of the epoch's last step
    double wallclock_ms = 0.0;
};

struct StepLog {
    std::size_t step = 0;
    std::size_t epoch = 0;
    double lr = 0.0;
    double batch_loss = 0.0;            // mean per-sample loss of the batch before the update
    StageParams params_before;
    std::vector<std::size_t> batch;     // training-set indices
};

struct TrainResult {
    StageParams params;
    std::vector<EpochLog> epochs;
    std::vector<StepLog> steps;
};

class TrainingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Decoupled-weight-decay Adam over a flat parameter vector.
class AdamW {
public:
    explicit AdamW(std::size_t n, const TrainConfig& cfg) : m_(n, 0.0), v_(n, 0.0), cfg_(cfg) {}

    void step(std::vector<double>& params, const std::vector<double>& grads, const std::vector<bool>& decay, double lr)
    {
        ++t_;
        const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
        const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
        for (std::size_t i = 0; i < params.size(); ++i) {
            if (decay[i]) params[i] *= 1.0 - lr * cfg_.weight_decay;
            m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * grads[i];
            v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * grads[i] * grads[i];
            const double mhat = m_[i] / bc1;
            const double vhat = v_[i] / bc2;
            params[i] -= lr * mhat / (std::sqrt(vhat) + cfg_.eps);
        }
    }

private:
    std::vector<double> m_, v_;
    TrainConfig cfg_;
    std::size_t t_ = 0;
};

inline double mean_loss(const StageParams& params, const Dictionary& dict, const std::vector<CVector>& data,
                        double lambda, LossMode mode)
{
    if (data.empty()) return std::numeric_limits<double>::quiet_NaN();
    double acc = 0.0;
    for (const auto& s : data) {
        const auto fw = forward_network(params, dict, s);
        acc += compute_loss(s, fw.recon, fw.z, lambda, mode);
    }
    return acc / static_cast<double>(data.size());
}

/// Trains (t_k, rho_k) on vectorised images. The shuffle is seeded, batches
/// are processed in order and gradients are summed in sample order, so a run
/// is reproducible bit for bit.
inline TrainResult train(const std::vector<CVector>& train_set, const std::vector<CVector>& val_set,
                         const TrainConfig& cfg, const Dictionary& dict,
                         std::optional<StageParams> init = std::nullopt)
{
    cfg.validate();
    require(!train_set.empty(), "train: empty training set");

    TrainResult out;
    out.params = init ? *init : StageParams::uniform(cfg.stages, cfg.init_t, cfg.init_rho);
    out.params.validate();
    const std::size_t n_stages = out.params.stages();

    const std::size_t batches_per_epoch = (train_set.size() + cfg.batch_size - 1) / cfg.batch_size;
    const std::size_t total_steps = batches_per_epoch * cfg.epochs;

    // flat layout: [t_0, rho_0, t_1, rho_1, ...]
    std::vector<double> flat(2 * n_stages);
    std::vector<bool> decay(2 * n_stages);
    for (std::size_t k = 0; k < n_stages; ++k) {
        decay[2 * k] = true;
        decay[2 * k + 1] = cfg.decay_rho;
    }
    auto unpack = [&](StageParams& p) {
        for (std::size_t k = 0; k < n_stages; ++k) {
            p.t[k] = flat[2 * k];
            p.rho[k] = flat[2 * k + 1];
        }
    };
    for (std::size_t k = 0; k < n_stages; ++k) {
        flat[2 * k] = out.params.t[k];
        flat[2 * k + 1] = out.params.rho[k];
    }

    AdamW opt(flat.size(), cfg);
    std::mt19937_64 rng(cfg.seed);
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    const auto start = std::chrono::steady_clock::now();
    std::size_t step = 0;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        double lr = 0.0;
        for (std::size_t b = 0; b < batches_per_epoch; ++b, ++step) {
            const std::size_t lo = b * cfg.batch_size;
            const std::size_t hi = std::min(lo + cfg.batch_size, order.size());
            const double inv = 1.0 / static_cast<double>(hi - lo);

            std::vector<double> grads(flat.size(), 0.0);
            double batch_loss = 0.0;
            for (std::size_t i = lo; i < hi; ++i) {
                const CVector& s = train_set[order[i]];
                const auto fw = forward_network(out.params, dict, s);
                const auto g = backward(fw.tape, dict, s, cfg.lambda, cfg.loss_mode);
                batch_loss += g.loss * inv;
                for (std::size_t k = 0; k < n_stages; ++k) {
                    grads[2 * k] += g.d_t[k] * inv;
                    grads[2 * k + 1] += g.d_rho[k] * inv;
                }
            }
            if (!std::isfinite(batch_loss)) {
                std::ostringstream msg;
                msg << "train: non-finite loss at epoch " << epoch + 1 << ", batch " << b + 1;
                throw TrainingError(msg.str());
            }

            lr = lr_schedule(step, total_steps, cfg);
            StepLog sl;
            sl.step = step;
            sl.epoch = epoch;
            sl.lr = lr;
            sl.batch_loss = batch_loss;
            sl.params_before = out.params;
            sl.batch.assign(order.begin() + static_cast<std::ptrdiff_t>(lo), order.begin() + static_cast<std::ptrdiff_t>(hi));
            out.steps.push_back(std::move(sl));

            opt.step(flat, grads, decay, lr);
            for (std::size_t k = 0; k < n_stages; ++k) flat[2 * k + 1] = std::max(flat[2 * k + 1], 0.0);
            unpack(out.params);

            epoch_loss += batch_loss * static_cast<double>(hi - lo);
        }

        EpochLog log;
        log.epoch = epoch + 1;
        log.train_loss = epoch_loss / static_cast<double>(train_set.size());
        log.val_loss = mean_loss(out.params, dict, val_set, cfg.lambda, cfg.loss_mode);
        log.lr = lr;
        log.wallclock_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        out.epochs.push_back(log);
    }
    return out;
}

inline std::vector<CVector> vectorize(const std::vector<ComplexImage>& images)
{
    std::vector<CVector> out;
    out.reserve(images.size());
    for (const auto& im : images) out.push_back(im.vec());
    return out;
}

inline TrainResult train(const std::vector<ComplexImage>& train_set, const std::vector<ComplexImage>& val_set,
                         const TrainConfig& cfg, const Dictionary& dict)
{
    return train(vectorize(train_set), vectorize(val_set), cfg, dict);
}

} // namespace asc
