#pragma once

// Experiment configuration as versioned JSON. Unknown keys are rejected.

#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include "json.hpp"

#include "asc/io/dataset.hpp"
#include "asc/metrics.hpp"

namespace asc::io {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kConfigVersion = 1;

// L1 weight used for the desk-scale experiments. Images are normalised to
// unit energy, so the weight has to be small next to the per-pixel magnitude
// (~1/16 on a 16 x 16 image).
inline constexpr double kDeskLambda = 0.1;

struct ExperimentConfig {
    RadarGrid radar{};
    bool aligned = true;  // spatial grid derived from radar
    SpatialGrid spatial{};
    DftNorm norm = DftNorm::backward;
    std::size_t memory_budget = kDefaultMemoryBudget;
    IstaConfig ista{};
    std::size_t omp_sparsity = 40;
    AmpConfig amp{};
    TrainConfig train{};
    DatasetSpec dataset{};
    std::string dataset_dir;
    std::string dictionary_path;
    std::string checkpoint_path;
    std::uint64_t seed = 7;

    static ExperimentConfig desk()
    {
        ExperimentConfig c;
        c.train.lambda = kDeskLambda;
        // 200 training images in batches of 16 for 70 epochs is about the
        // same number of optimiser steps as 275 images for 50 epochs.
        c.train.epochs = 70;
        c.dataset.train.noise_sigma = 0.1;
        c.dataset.test.noise_sigma = 0.2;
        c.dataset.test.jitter = 0.0;
        return c;
    }

    /// 80 x 80 grids as used for the full-size experiments.
    static ExperimentConfig full_scale()
    {
        ExperimentConfig c = desk();
        c.radar.n_freq = c.radar.n_aspect = 80;
        return c;
    }

    SpatialGrid spatial_grid() const { return aligned ? SpatialGrid::aligned_to(radar) : spatial; }

    void set_seed(std::uint64_t s)
    {
        seed = s;
        train.seed = s;
        dataset.seed = s;
    }

    void validate() const
    {
        radar.validate();
        spatial_grid().validate();
        ista.validate();
        amp.validate();
        train.validate();
        dataset.train.validate();
        dataset.test.validate();
        require(omp_sparsity >= 1, "config: omp.sparsity must be >= 1");
    }
};

namespace detail {

// Reads fields out of one JSON object and complains about anything left over.
class Section {
public:
    Section(const nlohmann::json& j, std::string name) : j_(j), name_(std::move(name))
    {
        if (!j_.is_object()) throw ConfigError("config: '" + name_ + "' must be an object");
    }

    template <class T>
    void read(const char* key, T& out)
    {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        try {
            out = j_.at(key).get<T>();
        } catch (const nlohmann::json::exception&) {
            throw ConfigError("config: bad value for '" + name_ + "." + key + "'");
        }
    }

    bool has(const char* key)
    {
        seen_.insert(key);
        return j_.contains(key);
    }

    Section sub(const char* key) { return Section(j_.at(key), name_ + "." + key); }

    void finish() const
    {
        for (const auto& [k, v] : j_.items())
            if (!seen_.count(k)) throw ConfigError("config: unknown key '" + name_ + "." + k + "'");
    }

private:
    const nlohmann::json& j_;
    std::string name_;
    std::set<std::string> seen_;
};

inline void read_distribution(Section s, SceneDistribution& d)
{
    s.read("k_min", d.k_min);
    s.read("k_max", d.k_max);
    s.read("amp_min", d.amp_min);
    s.read("amp_max", d.amp_max);
    s.read("noise_sigma", d.noise_sigma);
    s.read("jitter", d.jitter);
    s.read("empty_probability", d.empty_probability);
    s.finish();
}

inline nlohmann::json write_distribution(const SceneDistribution& d)
{
    return {{"k_min", d.k_min},         {"k_max", d.k_max},   {"amp_min", d.amp_min},
            {"amp_max", d.amp_max},     {"noise_sigma", d.noise_sigma}, {"jitter", d.jitter},
            {"empty_probability", d.empty_probability}};
}

} // namespace detail

inline ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig c = ExperimentConfig::desk())
{
    detail::Section root(j, "config");
    int version = 0;
    root.read("version", version);
    if (version != kConfigVersion) throw ConfigError("config: missing or unsupported version (expected 1)");

    if (root.has("radar")) {
        auto s = root.sub("radar");
        double deg = c.radar.synth_angle * 180.0 / kPi;
        s.read("f_center", c.radar.f_center);
        s.read("bandwidth", c.radar.bandwidth);
        s.read("synth_angle_deg", deg);
        s.read("n_freq", c.radar.n_freq);
        s.read("n_aspect", c.radar.n_aspect);
        c.radar.synth_angle = deg * kPi / 180.0;
        s.finish();
    }
    if (root.has("spatial")) {
        auto s = root.sub("spatial");
        s.read("aligned", c.aligned);
        s.read("m", c.spatial.m);
        s.read("n", c.spatial.n);
        s.read("x_spacing", c.spatial.x_spacing);
        s.read("y_spacing", c.spatial.y_spacing);
        std::string norm = c.norm == DftNorm::unitary ? "unitary" : "backward";
        s.read("norm", norm);
        if (norm != "backward" && norm != "unitary") throw ConfigError("config: spatial.norm must be backward or unitary");
        c.norm = norm == "unitary" ? DftNorm::unitary : DftNorm::backward;
        s.read("memory_budget", c.memory_budget);
        s.finish();
    }
    if (root.has("ista")) {
        auto s = root.sub("ista");
        s.read("step", c.ista.step);
        s.read("threshold", c.ista.threshold);
        s.read("max_iters", c.ista.max_iters);
        s.read("stop_tol", c.ista.stop_tol);
        s.finish();
    }
    if (root.has("omp")) {
        auto s = root.sub("omp");
        s.read("sparsity", c.omp_sparsity);
        s.finish();
    }
    if (root.has("amp")) {
        auto s = root.sub("amp");
        std::string policy = c.amp.policy == AmpThreshold::fixed ? "fixed" : "residual_scaled";
        s.read("damping", c.amp.damping);
        s.read("max_iters", c.amp.max_iters);
        s.read("stop_tol", c.amp.stop_tol);
        s.read("threshold", c.amp.threshold);
        s.read("policy", policy);
        if (policy != "fixed" && policy != "residual_scaled") throw ConfigError("config: amp.policy must be fixed or residual_scaled");
        c.amp.policy = policy == "fixed" ? AmpThreshold::fixed : AmpThreshold::residual_scaled;
        s.finish();
    }
    if (root.has("train")) {
        auto s = root.sub("train");
        auto& t = c.train;
        std::string loss = t.loss_mode == LossMode::squared ? "squared" : "norm";
        s.read("stages", t.stages);
        s.read("init_t", t.init_t);
        s.read("init_rho", t.init_rho);
        s.read("lambda", t.lambda);
        s.read("epochs", t.epochs);
        s.read("batch_size", t.batch_size);
        s.read("peak_lr", t.peak_lr);
        s.read("weight_decay", t.weight_decay);
        s.read("decay_rho", t.decay_rho);
        s.read("warmup_fraction", t.warmup_fraction);
        s.read("div_factor", t.div_factor);
        s.read("final_div_factor", t.final_div_factor);
        s.read("beta1", t.beta1);
        s.read("beta2", t.beta2);
        s.read("eps", t.eps);
        s.read("loss", loss);
        if (loss != "norm" && loss != "squared") throw ConfigError("config: train.loss must be norm or squared");
        t.loss_mode = loss == "squared" ? LossMode::squared : LossMode::norm;
        s.finish();
    }
    if (root.has("dataset")) {
        auto s = root.sub("dataset");
        s.read("n_train", c.dataset.n_train);
        s.read("n_val", c.dataset.n_val);
        s.read("n_test", c.dataset.n_test);
        s.read("crop", c.dataset.crop);
        if (s.has("train")) detail::read_distribution(s.sub("train"), c.dataset.train);
        if (s.has("test")) detail::read_distribution(s.sub("test"), c.dataset.test);
        s.finish();
    }
    if (root.has("paths")) {
        auto s = root.sub("paths");
        s.read("dataset", c.dataset_dir);
        s.read("dictionary", c.dictionary_path);
        s.read("checkpoint", c.checkpoint_path);
        s.finish();
    }
    std::uint64_t seed = c.seed;
    root.read("seed", seed);
    root.finish();
    c.set_seed(seed);
    try {
        c.validate();
    } catch (const ContractError& e) {
        throw ConfigError(e.what());
    }
    return c;
}

inline nlohmann::json to_json(const ExperimentConfig& c)
{
    const auto& t = c.train;
    return {
        {"version", kConfigVersion},
        {"radar",
         {{"f_center", c.radar.f_center},
          {"bandwidth", c.radar.bandwidth},
          {"synth_angle_deg", c.radar.synth_angle * 180.0 / kPi},
          {"n_freq", c.radar.n_freq},
          {"n_aspect", c.radar.n_aspect}}},
        {"spatial",
         {{"aligned", c.aligned},
          {"m", c.spatial.m},
          {"n", c.spatial.n},
          {"x_spacing", c.spatial.x_spacing},
          {"y_spacing", c.spatial.y_spacing},
          {"norm", c.norm == DftNorm::unitary ? "unitary" : "backward"},
          {"memory_budget", c.memory_budget}}},
        {"ista",
         {{"step", c.ista.step}, {"threshold", c.ista.threshold}, {"max_iters", c.ista.max_iters}, {"stop_tol", c.ista.stop_tol}}},
        {"omp", {{"sparsity", c.omp_sparsity}}},
        {"amp",
         {{"damping", c.amp.damping},
          {"max_iters", c.amp.max_iters},
          {"stop_tol", c.amp.stop_tol},
          {"threshold", c.amp.threshold},
          {"policy", c.amp.policy == AmpThreshold::fixed ? "fixed" : "residual_scaled"}}},
        {"train",
         {{"stages", t.stages},
          {"init_t", t.init_t},
          {"init_rho", t.init_rho},
          {"lambda", t.lambda},
          {"epochs", t.epochs},
          {"batch_size", t.batch_size},
          {"peak_lr", t.peak_lr},
          {"weight_decay", t.weight_decay},
          {"decay_rho", t.decay_rho},
          {"warmup_fraction", t.warmup_fraction},
          {"div_factor", t.div_factor},
          {"final_div_factor", t.final_div_factor},
          {"beta1", t.beta1},
          {"beta2", t.beta2},
          {"eps", t.eps},
          {"loss", t.loss_mode == LossMode::squared ? "squared" : "norm"}}},
        {"dataset",
         {{"n_train", c.dataset.n_train},
          {"n_val", c.dataset.n_val},
          {"n_test", c.dataset.n_test},
          {"crop", c.dataset.crop},
          {"train", detail::write_distribution(c.dataset.train)},
          {"test", detail::write_distribution(c.dataset.test)}}},
        {"paths", {{"dataset", c.dataset_dir}, {"dictionary", c.dictionary_path}, {"checkpoint", c.checkpoint_path}}},
        {"seed", c.seed},
    };
}

inline ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = ExperimentConfig::desk())
{
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config " + path.string());
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config " + path.string() + ": " + e.what());
    }
    return config_from_json(j, std::move(base));
}

inline void save_config(const std::filesystem::path& path, const ExperimentConfig& c)
{
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    os << to_json(c).dump(2) << "\n";
}

} // namespace asc::io
