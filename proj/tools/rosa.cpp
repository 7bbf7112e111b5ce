// rosa: synthesize, preprocess, train, detect, fuse and evaluate
// radar + oximeter sleep-event pipelines.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rosa/core/session_io.hpp"
#include "rosa/core/types.hpp"
#include "rosa/dsp/preprocess.hpp"
#include "rosa/fusion/fusion.hpp"
#include "rosa/kern/kernels.hpp"
#include "rosa/metrics/metrics.hpp"
#include "rosa/net/model.hpp"
#include "rosa/net/train.hpp"
#include "rosa/plot/svg.hpp"
#include "rosa/sim/simulator.hpp"

namespace fs = std::filesystem;
using namespace rosa;

namespace {

std::vector<fs::path> list_sessions(const fs::path& root) {
    std::vector<fs::path> out;
    if (!fs::is_directory(root)) throw DataError("not a directory: " + root.string());
    for (const auto& e : fs::directory_iterator(root))
        if (e.is_directory() && fs::exists(e.path() / "manifest.json")) out.push_back(e.path());
    std::sort(out.begin(), out.end());
    if (out.empty()) throw DataError("no sessions under " + root.string());
    return out;
}

dsp::ThreeChannelSpectrogram spectrogram_for(const fs::path& dir) {
    const fs::path spec = dir / "spectrogram.spec";
    if (fs::exists(spec)) return dsp::load_spectrogram(spec);
    return dsp::preprocess_session(load_session(dir));
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir, int subjects,
                 std::uint64_t seed) {
    sim::CohortConfig cfg;
    if (!config_path.empty()) cfg = sim::load_cohort_config(config_path);
    if (subjects > 0) cfg.n_subjects = subjects;
    if (seed != 0) cfg.seed = seed;
    const auto dirs = sim::generate_cohort(cfg, out_dir);
    std::cout << "wrote " << dirs.size() << " sessions under " << out_dir << "\n";
    return 0;
}

int cmd_preprocess(const std::string& session_dir, const std::string& out_file) {
    const auto session = load_session(session_dir);
    const auto spec = dsp::preprocess_session(session);
    const fs::path out = out_file.empty() ? fs::path(session_dir) / "spectrogram.spec"
                                          : fs::path(out_file);
    dsp::save_spectrogram(spec, out);
    std::cout << "wrote " << out.string() << " (" << spec.n_range_bins() << " x "
              << spec.n_frames() << ")\n";
    return 0;
}

int cmd_train(const std::string& data_dir, const std::string& arch_path,
              const std::string& train_path, const std::string& out_model,
              const std::string& log_path, int holdout_fold) {
    net::ArchConfig arch;
    if (!arch_path.empty()) arch = net::load_arch_config(arch_path);
    net::TrainConfig cfg;
    if (!train_path.empty()) cfg = net::load_train_config(train_path);

    const auto dirs = list_sessions(data_dir);
    const auto folds = net::fold_assignment(int(dirs.size()), cfg.folds);
    std::vector<net::TrainSample> samples;
    for (std::size_t i = 0; i < dirs.size(); ++i) {
        if (holdout_fold >= 0 && folds[i] == holdout_fold) continue;
        auto session = load_session(dirs[i]);
        samples.push_back(
            net::make_sample(session.id, spectrogram_for(dirs[i]), session.events));
    }
    std::ofstream log;
    if (!log_path.empty()) {
        log.open(log_path);
        if (!log) throw DataError("cannot write log: " + log_path);
    }
    auto model = net::train_model(samples, arch, cfg, log.is_open() ? &log : nullptr);
    net::save_model(model, out_model);
    std::cout << "trained on " << samples.size() << " sessions -> " << out_model << "\n";
    return 0;
}

int cmd_detect(const std::string& model_path, const std::string& session_dir,
               const std::string& out_file) {
    auto model = net::load_model(model_path);
    const auto spec = spectrogram_for(session_dir);
    net::TrainSample s = net::make_sample("x", spec, {});
    const auto dets = model.detect(s.x);
    const fs::path out = out_file.empty() ? fs::path(session_dir) / "detections.jsonl"
                                          : fs::path(out_file);
    save_detections(dets, out);
    std::cout << "wrote " << dets.size() << " detections -> " << out.string() << "\n";
    return 0;
}

int cmd_fuse(const std::string& session_dir, const std::string& det_file,
             const std::string& params_path, const std::string& out_file, bool accepted_only) {
    fusion::FusionParams params;
    if (!params_path.empty()) params = fusion::load_fusion_params(params_path);
    const auto session = load_session(session_dir);
    const fs::path in = det_file.empty() ? fs::path(session_dir) / "detections.jsonl"
                                         : fs::path(det_file);
    const auto dets = load_detections(in);
    const auto fused = fusion::fuse_session(dets, session.spo2, params);
    const fs::path out = out_file.empty() ? fs::path(session_dir) / "fused.jsonl"
                                          : fs::path(out_file);
    save_detections(accepted_only ? fused.accepted : fused.all, out);
    std::cout << "fused " << dets.size() << " detections (" << fused.accepted.size()
              << " accepted) -> " << out.string() << "\n";
    return 0;
}

int cmd_gridsearch(const std::string& data_dir, const std::string& det_name,
                   const std::string& out_file) {
    std::vector<fusion::GridSearchInput> inputs;
    for (const auto& dir : list_sessions(data_dir)) {
        auto session = load_session(dir);
        fusion::GridSearchInput in;
        in.detections = load_detections(dir / det_name);
        in.spo2 = session.spo2;
        in.tst_h = session.duration_s / 3600.0;
        in.true_ahi = metrics::compute_ahi(session.events, in.tst_h);
        inputs.push_back(std::move(in));
    }
    const auto params = fusion::grid_search_thresholds(inputs, fusion::default_t1_grid(),
                                                       fusion::default_t2_grid());
    fusion::save_fusion_params(params, out_file);
    std::cout << "best thresholds t1=" << params.t1 << " t2=" << params.t2 << " -> " << out_file
              << "\n";
    return 0;
}

int cmd_evaluate(const std::string& data_dir, const std::string& radar_name,
                 const std::string& fused_name, const std::string& out_json,
                 const std::string& out_csv, double decision_threshold) {
    std::vector<metrics::SessionEval> radar, fused;
    for (const auto& dir : list_sessions(data_dir)) {
        auto session = load_session(dir);
        metrics::SessionEval ev;
        ev.ground_truth = session.events;
        ev.spo2 = session.spo2;
        ev.tst_h = session.duration_s / 3600.0;
        ev.detections = load_detections(dir / radar_name);
        radar.push_back(ev);
        const fs::path ff = dir / fused_name;
        if (fs::exists(ff)) {
            ev.detections = load_detections(ff);
            fused.push_back(std::move(ev));
        }
    }
    metrics::AgreementReport report;
    report.methods.push_back(metrics::evaluate_odi3(radar));
    report.methods.push_back(metrics::evaluate_method("radar", radar, decision_threshold));
    if (!fused.empty())
        report.methods.push_back(metrics::evaluate_method("fused", fused, decision_threshold));
    metrics::save_report_json(report, out_json, decision_threshold);
    if (!out_csv.empty()) metrics::save_report_csv(report, out_csv);
    for (const auto& m : report.methods) {
        std::cout << m.method << ": icc=";
        if (m.icc) std::cout << *m.icc;
        else std::cout << "/";
        std::cout << " ap50=";
        if (m.ap50) std::cout << *m.ap50;
        else std::cout << "/";
        std::cout << "\n";
    }
    return 0;
}

int cmd_plot(const std::string& kind, const std::string& session_dir,
             const std::string& det_file, const std::string& out_file) {
    if (kind == "heatmap") {
        const auto spec = spectrogram_for(session_dir);
        plot::save_spectrogram_heatmap(spec.channels[1], out_file);
    } else if (kind == "timeline") {
        const auto session = load_session(session_dir);
        const fs::path in = det_file.empty() ? fs::path(session_dir) / "detections.jsonl"
                                             : fs::path(det_file);
        plot::save_event_timeline(session.duration_s, session.events, load_detections(in),
                                  out_file);
    } else {
        throw DataError("unknown plot kind: " + kind);
    }
    std::cout << "wrote " << out_file << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"radar + oximeter sleep apnea-hypopnea pipeline"};
    app.require_subcommand(1);
    std::string backend = "auto";
    app.add_option("--backend", backend, "kernel backend: auto, scalar or avx2");

    std::string config, out, data, arch_path, train_path, model_path, session_dir, det_file,
        params_path, radar_name = "detections.jsonl", fused_name = "fused.jsonl",
        out_csv, log_path, plot_kind;
    int subjects = 0, holdout_fold = -1;
    std::uint64_t seed = 0;
    bool accepted_only = false;
    double decision_threshold = 0.5;

    auto* c_sim = app.add_subcommand("simulate", "generate a synthetic cohort");
    c_sim->add_option("--config", config, "cohort config JSON");
    c_sim->add_option("--out", out, "output directory")->required();
    c_sim->add_option("--subjects", subjects, "override subject count");
    c_sim->add_option("--seed", seed, "override master seed");

    auto* c_pre = app.add_subcommand("preprocess", "session -> three-channel spectrogram");
    c_pre->add_option("--session", session_dir, "session directory")->required();
    c_pre->add_option("--out", out, "output .spec (default: <session>/spectrogram.spec)");

    auto* c_train = app.add_subcommand("train", "fit the segment detector");
    c_train->add_option("--data", data, "cohort directory")->required();
    c_train->add_option("--arch", arch_path, "architecture JSON");
    c_train->add_option("--train-config", train_path, "training JSON");
    c_train->add_option("--out", out, "model output path")->required();
    c_train->add_option("--log", log_path, "per-step CSV loss log");
    c_train->add_option("--holdout-fold", holdout_fold, "exclude this fold from training");

    auto* c_det = app.add_subcommand("detect", "run the detector on one session");
    c_det->add_option("--model", model_path, "trained model")->required();
    c_det->add_option("--session", session_dir, "session directory")->required();
    c_det->add_option("--out", out, "detections output (default: <session>/detections.jsonl)");

    auto* c_fuse = app.add_subcommand("fuse", "rescore detections with oximetry");
    c_fuse->add_option("--session", session_dir, "session directory")->required();
    c_fuse->add_option("--detections", det_file, "radar detections jsonl");
    c_fuse->add_option("--params", params_path, "fusion parameter JSON");
    c_fuse->add_option("--out", out, "fused output (default: <session>/fused.jsonl)");
    c_fuse->add_flag("--accepted-only", accepted_only, "write only accepted detections");

    auto* c_grid = app.add_subcommand("gridsearch", "tune fusion thresholds on a cohort");
    c_grid->add_option("--data", data, "cohort directory")->required();
    c_grid->add_option("--detections-name", radar_name, "per-session detections file name");
    c_grid->add_option("--out", out, "fusion parameter JSON output")->required();

    auto* c_eval = app.add_subcommand("evaluate", "cohort agreement report");
    c_eval->add_option("--data", data, "cohort directory")->required();
    c_eval->add_option("--radar-name", radar_name, "per-session radar detections file");
    c_eval->add_option("--fused-name", fused_name, "per-session fused detections file");
    c_eval->add_option("--out", out, "report JSON output")->required();
    c_eval->add_option("--csv", out_csv, "report CSV output");
    c_eval->add_option("--decision-threshold", decision_threshold, "score cut for AHI counting");

    auto* c_plot = app.add_subcommand("plot", "figures: heatmap or timeline");
    c_plot->add_option("kind", plot_kind, "heatmap | timeline")->required();
    c_plot->add_option("--session", session_dir, "session directory")->required();
    c_plot->add_option("--detections", det_file, "detections jsonl (timeline)");
    c_plot->add_option("--out", out, "SVG output path")->required();

    try {
        app.parse(argc, argv);
        kern::set_backend(backend);
        if (c_sim->parsed()) return cmd_simulate(config, out, subjects, seed);
        if (c_pre->parsed()) return cmd_preprocess(session_dir, out);
        if (c_train->parsed())
            return cmd_train(data, arch_path, train_path, out, log_path, holdout_fold);
        if (c_det->parsed()) return cmd_detect(model_path, session_dir, out);
        if (c_fuse->parsed())
            return cmd_fuse(session_dir, det_file, params_path, out, accepted_only);
        if (c_grid->parsed()) return cmd_gridsearch(data, radar_name, out);
        if (c_eval->parsed())
            return cmd_evaluate(data, radar_name, fused_name, out, out_csv, decision_threshold);
        if (c_plot->parsed()) return cmd_plot(plot_kind, session_dir, det_file, out);
        return 2;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 4;
    }
}
