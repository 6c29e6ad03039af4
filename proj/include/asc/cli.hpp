#pragma once

// Command-line front end. run_cli returns 0 on success, 1 on usage errors and
// 2 on runtime failures.

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "asc/io/binary.hpp"
#include "asc/io/config.hpp"
#include "asc/io/dataset.hpp"
#include "asc/io/export.hpp"
#include "asc/metrics.hpp"

namespace asc::cli {

namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> threads;
    bool full_scale = false;

    void attach(CLI::App* app)
    {
        app->add_option("--config", config, "experiment config (JSON)");
        app->add_option("--seed", seed, "random seed; overrides the config");
        app->add_option("--threads", threads, "worker threads (default: ASC_THREADS or all cores)");
        app->add_flag("--full-scale", full_scale, "80 x 80 grids instead of the 16 x 16 desk default");
    }

    io::ExperimentConfig load() const
    {
        auto base = full_scale ? io::ExperimentConfig::full_scale() : io::ExperimentConfig::desk();
        auto cfg = config.empty() ? base : io::load_config(config, base);
        if (seed) cfg.set_seed(*seed);
        return cfg;
    }

    std::size_t thread_count() const { return threads ? std::max<std::size_t>(1, *threads) : io::default_thread_count(); }
};

inline Dictionary require_dictionary(const std::string& path, const char* cmd)
{
    if (path.empty())
        throw UsageError(std::string(cmd) + ": --dict is required; create one with `asc_cli dict build --out dict.bin`");
    return io::load_dictionary(path);
}

inline void check_image(const ComplexImage& img, const Dictionary& dict)
{
    if (img.rows() * img.cols() != dict.rows())
        throw std::runtime_error("image of " + std::to_string(img.rows()) + " x " + std::to_string(img.cols()) +
                                 " does not match a dictionary with " + std::to_string(dict.rows()) + " rows");
}

inline std::vector<CVector> load_vectors(const fs::path& root, const io::Manifest& m, const std::string& split,
                                         const Dictionary& dict)
{
    auto imgs = io::load_split(root, m, split);
    if (imgs.empty()) throw std::runtime_error("dataset has no '" + split + "' split");
    for (const auto& im : imgs) check_image(im, dict);
    return vectorize(imgs);
}

inline MethodSpec method_from_name(const std::string& name, const io::ExperimentConfig& cfg,
                                   const std::optional<StageParams>& params)
{
    if (name == "ista") return {"ISTA", IstaMethod{cfg.ista}};
    if (name == "omp") return {"OMP", OmpMethod{cfg.omp_sparsity}};
    if (name == "amp") return {"AMP", AmpMethod{cfg.amp}};
    if (name == "unfolded") {
        if (!params) throw UsageError("solve --method unfolded needs --checkpoint");
        return {"Unfolded", UnfoldedMethod{*params}};
    }
    throw UsageError("unknown method '" + name + "' (expected ista, omp, amp or unfolded)");
}

inline std::vector<std::size_t> parse_stage_list(const std::string& s)
{
    std::vector<std::size_t> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        std::size_t pos = 0;
        unsigned long v = 0;
        try {
            v = std::stoul(tok, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != tok.size() || v == 0) throw UsageError("--stages expects a comma-separated list of positive integers");
        out.push_back(v);
    }
    if (out.empty()) throw UsageError("--stages is empty");
    return out;
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    CLI::App app{"Attributed scattering centre extraction toolkit", "asc_cli"};
    app.require_subcommand(1);

    // dict build
    Common dict_common;
    std::string dict_out;
    auto* dict_cmd = app.add_subcommand("dict", "dictionary operations");
    dict_cmd->require_subcommand(1);
    auto* dict_build = dict_cmd->add_subcommand("build", "build and cache the image-domain dictionary");
    dict_common.attach(dict_build);
    dict_build->add_option("--out", dict_out, "dictionary cache file")->required();

    // synth
    Common synth_common;
    std::string synth_out;
    auto* synth = app.add_subcommand("synth", "synthesise a train/val/test dataset with a manifest");
    synth_common.attach(synth);
    synth->add_option("--out", synth_out, "output directory")->required();

    // solve
    Common solve_common;
    std::string solve_method = "ista", solve_dict, solve_input, solve_ckpt, solve_recon, solve_code, solve_csv;
    auto* solve = app.add_subcommand("solve", "sparse-code one image");
    solve_common.attach(solve);
    solve->add_option("--method", solve_method, "ista | omp | amp | unfolded");
    solve->add_option("--dict", solve_dict, "dictionary cache file");
    solve->add_option("--input", solve_input, "complex image file")->required();
    solve->add_option("--checkpoint", solve_ckpt, "trained unfolded parameters");
    solve->add_option("--recon", solve_recon, "write the reconstructed image here");
    solve->add_option("--code", solve_code, "write the sparse code (M x N image file) here");
    solve->add_option("--csv", solve_csv, "per-iteration trace CSV");

    // train
    Common train_common;
    std::string train_data, train_dict, train_out, train_log;
    auto* train_cmd = app.add_subcommand("train", "train the unfolded network");
    train_common.attach(train_cmd);
    train_cmd->add_option("--data", train_data, "dataset directory (from synth)")->required();
    train_cmd->add_option("--dict", train_dict, "dictionary cache file");
    train_cmd->add_option("--out", train_out, "checkpoint file")->required();
    train_cmd->add_option("--log", train_log, "per-epoch CSV log");

    // bench
    Common bench_common;
    std::string bench_mode = "methods", bench_data, bench_dict, bench_ckpt, bench_csv, bench_stages = "2,4,6,8";
    std::string bench_split = "test";
    auto* bench = app.add_subcommand("bench", "method comparison or stage-count sweep");
    bench_common.attach(bench);
    bench->add_option("--mode", bench_mode, "methods | stages")->check(CLI::IsMember({"methods", "stages"}));
    bench->add_option("--data", bench_data, "dataset directory (from synth)")->required();
    bench->add_option("--dict", bench_dict, "dictionary cache file");
    bench->add_option("--checkpoint", bench_ckpt, "trained unfolded parameters (methods mode; trained on the fly if absent)");
    bench->add_option("--stages", bench_stages, "stage counts for --mode stages");
    bench->add_option("--split", bench_split, "evaluation split")->check(CLI::IsMember({"train", "val", "test"}));
    bench->add_option("--csv", bench_csv, "benchmark CSV");

    // extract
    Common extract_common;
    std::string extract_dict, extract_code, extract_csv;
    std::optional<double> extract_floor;
    auto* extract = app.add_subcommand("extract", "list scatterers from a sparse code");
    extract_common.attach(extract);
    extract->add_option("--dict", extract_dict, "dictionary cache file");
    extract->add_option("--code", extract_code, "sparse code from solve --code")->required();
    extract->add_option("--floor", extract_floor, "magnitude floor (default 0.1 x max |z|)");
    extract->add_option("--csv", extract_csv, "scatterer CSV");

    // export
    Common export_common;
    std::string export_input, export_out;
    bool export_db = false;
    auto* exp = app.add_subcommand("export", "write |image| as an 8-bit PGM");
    export_common.attach(exp);
    exp->add_option("--input", export_input, "complex image file")->required();
    exp->add_option("--out", export_out, "PGM file")->required();
    exp->add_flag("--db", export_db, "20 log10 scale with a -40 dB floor");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        if (app.get_subcommands().empty())
            err << app.help();
        else
            err << app.get_subcommands().back()->help();
        return 1;
    }

    try {
        if (dict_build->parsed()) {
            const auto cfg = dict_common.load();
            const auto dict = make_dictionary(cfg.radar, cfg.spatial_grid(), cfg.memory_budget, cfg.norm);
            io::save_dictionary(dict_out, dict);
            const auto L = spectral_step_bound(dict);
            out << "dictionary " << dict.rows() << " x " << dict.cols() << " written to " << dict_out
                << "; largest Gram eigenvalue " << L.value << "\n";
        } else if (synth->parsed()) {
            const auto cfg = synth_common.load();
            const auto m = io::synthesize_dataset(cfg.dataset, cfg.radar, cfg.spatial_grid(), synth_out, cfg.norm,
                                                  synth_common.thread_count());
            out << "wrote " << m.entries.size() << " images and manifest.json to " << synth_out << "\n";
        } else if (solve->parsed()) {
            const auto cfg = solve_common.load();
            const auto dict = require_dictionary(solve_dict, "solve");
            const auto img = io::load_image(solve_input);
            check_image(img, dict);
            const CVector s = img.vec();
            std::optional<StageParams> params;
            if (!solve_ckpt.empty()) params = io::load_checkpoint(solve_ckpt, dict);
            const auto method = method_from_name(solve_method, cfg, params);

            CVector z;
            SolverTrace trace;
            if (solve_method == "ista") {
                auto r = ista_solve(dict, s, cfg.ista);
                z = std::move(r.z);
                trace = std::move(r.trace);
                for (const auto& w : r.warnings) err << "warning: " << w << "\n";
            } else if (solve_method == "amp") {
                auto r = amp_solve(dict, s, cfg.amp);
                z = std::move(r.z);
                trace = std::move(r.trace);
            } else if (solve_method == "omp") {
                auto r = omp_solve(dict, s, cfg.omp_sparsity);
                z = std::move(r.z);
                for (std::size_t i = 0; i < r.residual_norms.size(); ++i)
                    trace.push_back({i, r.residual_norms[i], r.residual_norms[i], 0.0, 0});
            } else {
                const auto fw = forward_network(*params, dict, s);
                z = fw.z;
                const auto t0 = std::chrono::steady_clock::now();
                trace.push_back(make_trace_entry(0, dict.apply(fw.tape.z0) - s, fw.tape.z0, cfg.train.lambda, t0));
                for (std::size_t k = 0; k < fw.tape.stages.size(); ++k) {
                    const auto& zk = fw.tape.stages[k].z;
                    trace.push_back(make_trace_entry(k + 1, dict.apply(zk) - s, zk, cfg.train.lambda, t0));
                }
            }
            const CVector recon = dict.apply(z);
            std::size_t nnz = 0;
            for (const auto& v : z) nnz += std::abs(v) > 1e-6;
            out << method.name << ": residual loss " << residual_loss(s, recon) << ", nonzeros " << nnz << "\n";
            if (!solve_recon.empty()) io::save_image(solve_recon, ComplexImage::from_vector(recon, img.rows(), img.cols()));
            if (!solve_code.empty()) {
                const auto& sp = dict.geometry() ? dict.geometry()->spatial : SpatialGrid{dict.cols(), 1};
                io::save_image(solve_code, ComplexImage::from_vector(z, sp.m, sp.n));
            }
            if (!solve_csv.empty()) {
                auto os = io::open_csv(solve_csv);
                io::write_trace_csv(os, trace);
            }
        } else if (train_cmd->parsed()) {
            const auto cfg = train_common.load();
            const auto dict = require_dictionary(train_dict, "train");
            const auto m = io::load_manifest(fs::path(train_data) / "manifest.json");
            const auto tr = load_vectors(train_data, m, "train", dict);
            const auto va = load_vectors(train_data, m, "val", dict);
            const auto res = train(tr, va, cfg.train, dict);
            io::save_checkpoint(train_out, res.params, dict.grid_fingerprint());
            if (!train_log.empty()) {
                auto os = io::open_csv(train_log);
                io::write_train_log_csv(os, res.epochs);
            }
            const auto& last = res.epochs.back();
            out << "trained " << res.params.stages() << " stages for " << res.epochs.size() << " epochs; train loss "
                << last.train_loss << ", val loss " << last.val_loss << "; checkpoint " << train_out << "\n";
        } else if (bench->parsed()) {
            const auto cfg = bench_common.load();
            const auto dict = require_dictionary(bench_dict, "bench");
            const auto m = io::load_manifest(fs::path(bench_data) / "manifest.json");
            const auto eval = load_vectors(bench_data, m, bench_split, dict);
            std::vector<BenchmarkRow> rows;
            if (bench_mode == "stages") {
                const auto counts = parse_stage_list(bench_stages);
                const auto tr = load_vectors(bench_data, m, "train", dict);
                const auto va = load_vectors(bench_data, m, "val", dict);
                rows = run_stage_sweep(tr, va, eval, counts, cfg.train, dict).rows;
                out << format_table(rows, "Stage Number");
            } else {
                StageParams params;
                if (!bench_ckpt.empty()) {
                    params = io::load_checkpoint(bench_ckpt, dict);
                } else {
                    const auto tr = load_vectors(bench_data, m, "train", dict);
                    const auto va = load_vectors(bench_data, m, "val", dict);
                    params = train(tr, va, cfg.train, dict).params;
                }
                const std::vector<MethodSpec> methods = {{"AMP", AmpMethod{cfg.amp}},
                                                         {"OMP", OmpMethod{cfg.omp_sparsity}},
                                                         {"ISTA", IstaMethod{cfg.ista}},
                                                         {"Unfolded", UnfoldedMethod{params}}};
                rows = run_benchmark(eval, methods, dict);
                out << format_table(rows, "Method");
            }
            if (!bench_csv.empty()) {
                auto os = io::open_csv(bench_csv);
                io::write_benchmark_csv(os, rows);
            }
        } else if (extract->parsed()) {
            (void)extract_common.load();
            const auto dict = require_dictionary(extract_dict, "extract");
            const auto code = io::load_image(extract_code);
            if (code.rows() * code.cols() != dict.cols())
                throw std::runtime_error("code length does not match the dictionary's column count");
            const CVector z = code.vec();
            const double floor = extract_floor ? *extract_floor : default_magnitude_floor(z);
            const auto ascs = extract_ascs(z, dict, floor);
            out << ascs.size() << " scatterers above " << floor << "\n";
            if (!extract_csv.empty()) {
                auto os = io::open_csv(extract_csv);
                io::write_asc_csv(os, ascs);
            } else {
                io::write_asc_csv(out, ascs);
            }
        } else if (exp->parsed()) {
            (void)export_common.load();
            io::export_magnitude_image(io::load_image(export_input), export_out,
                                       export_db ? io::MagnitudeScale::db : io::MagnitudeScale::linear);
            out << "wrote " << export_out << "\n";
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const io::ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

} // namespace asc::cli
