// Command-line front end: chains the simulator, sanitizer, map builder,
// network, and respiration pipeline into reproducible runs with file
// artifacts. One seed governs a whole run; every write is deterministic.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "wisense/csi.hpp"
#include "wisense/csi_map.hpp"
#include "wisense/io.hpp"
#include "wisense/metrics.hpp"
#include "wisense/net.hpp"
#include "wisense/respiration.hpp"
#include "wisense/sanitize.hpp"
#include "wisense/scenario.hpp"
#include "wisense/simulate.hpp"
#include "wisense/skeleton.hpp"
#include "wisense/train.hpp"

namespace fs = std::filesystem;
using namespace wisense;

namespace {

std::string joined(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail("cannot create directory " + dir + ": " + ec.message());
}

std::string pair_input_name(std::size_t idx) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "pair_%04zu.input.csv", idx);
    return buf;
}

std::string pair_target_name(std::size_t idx) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "pair_%04zu.target.pgm", idx);
    return buf;
}

std::string pred_name(std::size_t idx) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "pred_%04zu.pgm", idx);
    return buf;
}

NetConfig reduced_config() {
    NetConfig cfg;
    cfg.c1 = 2;
    cfg.c2 = 3;
    cfg.c3 = 4;
    cfg.se_reduction = 2;
    cfg.fc_channels = 4;
    cfg.d1 = 3;
    cfg.d2 = 3;
    cfg.d3 = 2;
    return cfg;
}

std::vector<double> frame_times_s(const CsiTrace& trace) {
    std::vector<double> t(trace.frames.size());
    for (std::size_t i = 0; i < trace.frames.size(); i++)
        t[i] = static_cast<double>(trace.frames[i].t_us) / 1e6;
    return t;
}

// ---- simulate ------------------------------------------------------------------

int cmd_simulate(const std::string& scenario_path, const std::string& out_dir, long long seed) {
    Scenario sc = read_scenario(scenario_path);
    if (seed >= 0) sc.seed = static_cast<std::uint64_t>(seed);
    const SimResult res = simulate(sc);
    ensure_dir(out_dir);
    write_trace(joined(out_dir, "trace.csv"), res.trace);
    std::cout << "trace.csv: " << res.trace.frames.size() << " frames, "
              << res.trace.frames.front().antennas << " antennas, " << kSubcarrierCount
              << " subcarriers\n";

    const std::vector<double> t_s = frame_times_s(res.trace);
    if (!res.truth.chest_displacement_m.empty()) {
        write_curve(joined(out_dir, "displacement.csv"), t_s, res.truth.chest_displacement_m);
        std::cout << "displacement.csv: chest ground truth\n";
    }
    if (!sc.reflectors.empty()) {
        std::ofstream out(joined(out_dir, "reflectors.csv"), std::ios::binary);
        if (!out) fail("cannot open " + joined(out_dir, "reflectors.csv") + " for writing");
        out << "t_s,reflector,x,y\n";
        for (std::size_t i = 0; i < res.truth.reflector_xy.size(); i++)
            for (std::size_t r = 0; r < res.truth.reflector_xy[i].size(); r++)
                out << fmt_g17(t_s[i]) << ',' << r << ','
                    << fmt_g17(res.truth.reflector_xy[i][r][0]) << ','
                    << fmt_g17(res.truth.reflector_xy[i][r][1]) << "\n";
        if (!out) fail("write failed: " + joined(out_dir, "reflectors.csv"));
        write_skeleton_csv(joined(out_dir, "skeleton.csv"), res.truth.skeleton);
        std::cout << "reflectors.csv, skeleton.csv: motion ground truth\n";
    }
    return 0;
}

// ---- sanitize ------------------------------------------------------------------

int cmd_sanitize(const std::string& trace_path, const std::string& out_dir) {
    const CsiTrace trace = read_trace(trace_path);
    const AntennaSelection sel = select_antennas(trace, 0, trace.frames.size());
    const SanitizedStreams s = conjugate_multiply(trace, sel, 0, trace.frames.size());
    ensure_dir(out_dir);

    {
        std::ofstream out(joined(out_dir, "antenna_selection.csv"), std::ios::binary);
        if (!out) fail("cannot open " + joined(out_dir, "antenna_selection.csv") + " for writing");
        out << "reference,first,discarded,var0,var1,var2\n";
        out << sel.reference << ',' << sel.first << ',' << sel.discarded << ','
            << fmt_g17(sel.variance[0]) << ',' << fmt_g17(sel.variance[1]) << ','
            << fmt_g17(sel.variance[2]) << "\n";
        if (!out) fail("write failed: " + joined(out_dir, "antenna_selection.csv"));
    }
    {
        std::ofstream out(joined(out_dir, "conjugate.csv"), std::ios::binary);
        if (!out) fail("cannot open " + joined(out_dir, "conjugate.csv") + " for writing");
        out << "# reference = " << sel.reference << "\n# first = " << sel.first
            << "\n# delta = " << fmt_g17(s.delta) << "\n# gamma = " << fmt_g17(s.gamma) << "\n";
        out << "frame,sc,cm_re,cm_im,rel_phase,amp_first,amp_ref\n";
        const std::size_t n = s.frame_count();
        for (std::size_t f = 0; f < n; f++)
            for (int sc = 0; sc < kSubcarrierCount; sc++) {
                const std::size_t idx = static_cast<std::size_t>(sc) * n + f;
                out << f << ',' << sc << ',' << fmt_g17(s.cm[idx].real()) << ','
                    << fmt_g17(s.cm[idx].imag()) << ',' << fmt_g17(s.rel_phase[idx]) << ','
                    << fmt_g17(s.amp_first[idx]) << ',' << fmt_g17(s.amp_ref[idx]) << "\n";
            }
        if (!out) fail("write failed: " + joined(out_dir, "conjugate.csv"));
    }
    std::cout << "reference antenna " << sel.reference << ", first antenna " << sel.first
              << ", discarded " << sel.discarded << "\n";
    std::cout << "conjugate.csv: " << s.frame_count() << " frames\n";
    return 0;
}

// ---- posemap -------------------------------------------------------------------

SanitizedStreams sanitize_full(const CsiTrace& trace) {
    const AntennaSelection sel = select_antennas(trace, 0, trace.frames.size());
    return conjugate_multiply(trace, sel, 0, trace.frames.size());
}

int cmd_posemap(const std::string& trace1_path, const std::string& trace2_path,
                const std::string& truth_path, const std::string& out_dir) {
    const CsiTrace trace1 = read_trace(trace1_path);
    const CsiTrace trace2 = read_trace(trace2_path);
    if (trace1.sample_rate_hz != trace2.sample_rate_hz)
        fail("posemap: receiver traces have different sample rates");
    const SanitizedStreams s1 = sanitize_full(trace1);
    const SanitizedStreams s2 = sanitize_full(trace2);
    const std::size_t frames = std::min(s1.frame_count(), s2.frame_count());

    std::vector<SkeletonParams> skeleton;
    if (!truth_path.empty()) skeleton = read_skeleton_csv(truth_path);

    ensure_dir(out_dir);
    const std::size_t count = pose_map_count(frames);
    if (count == 0) fail("posemap: traces shorter than one map window (20 frames)");
    std::size_t written = 0;
    for (std::size_t k = 3; k < 3 + count; k++) {
        const auto [begin, end] = pose_map_window(k);
        const CsiMap m1 = build_csi_map(s1, begin, end, 1);
        const CsiMap m2 = build_csi_map(s2, begin, end, 2);
        const NetInput input = stack_receivers(m1, m2);
        const std::size_t idx = k - 3;
        write_netinput(joined(out_dir, pair_input_name(idx)), input);
        if (!skeleton.empty()) {
            const std::size_t video_frame = kMapStride * k;
            if (video_frame >= skeleton.size())
                fail("posemap: ground-truth skeleton has no frame " + std::to_string(video_frame));
            write_pgm(joined(out_dir, pair_target_name(idx)),
                      render_skeleton(skeleton[video_frame]));
        }
        written++;
    }
    std::cout << written << (skeleton.empty() ? " input maps" : " (input, target) pairs")
              << " written to " << out_dir << "\n";
    return 0;
}

// ---- dataset loading -----------------------------------------------------------

std::vector<TrainSample> load_dataset(const std::string& dir, bool require_targets) {
    if (!fs::exists(dir)) fail("dataset path does not exist: " + dir);
    std::vector<TrainSample> samples;
    for (std::size_t idx = 0;; idx++) {
        const std::string in_path = joined(dir, pair_input_name(idx));
        if (!fs::exists(in_path)) break;
        TrainSample s;
        s.input = read_netinput(in_path);
        const std::string target_path = joined(dir, pair_target_name(idx));
        if (fs::exists(target_path)) {
            s.target = read_pgm(target_path);
        } else if (require_targets) {
            fail("missing target figure: " + target_path);
        }
        samples.push_back(std::move(s));
    }
    if (samples.empty()) fail("no pair_0000.input.csv under dataset path: " + dir);
    return samples;
}

// ---- train ---------------------------------------------------------------------

int cmd_train(const std::string& dataset_dir, const std::string& checkpoint_path, int epochs,
              double lr, int batch, long long seed, bool reduced) {
    const std::vector<TrainSample> dataset = load_dataset(dataset_dir, true);
    TrainConfig cfg;
    cfg.epochs = epochs;
    cfg.learning_rate = lr;
    cfg.batch_size = batch;
    cfg.seed = seed >= 0 ? static_cast<std::uint64_t>(seed) : 0;
    const NetConfig net_cfg = reduced ? reduced_config() : NetConfig{};

    const TrainResult res = train(dataset, cfg, net_cfg);
    std::cout << "parameters: " << res.params.total_parameters() << "\n";
    for (std::size_t e = 0; e < res.epoch_loss.size(); e++)
        std::cout << "epoch " << (e + 1) << ": mean bce " << fmt_g17(res.epoch_loss[e]) << "\n";
    save_checkpoint(checkpoint_path, res.params);
    std::cout << "checkpoint written to " << checkpoint_path << "\n";
    return 0;
}

// ---- infer ---------------------------------------------------------------------

int cmd_infer(const std::string& checkpoint_path, const std::string& input_path,
              const std::string& out_path, const std::string& dataset_dir,
              const std::string& out_dir) {
    const NetParams params = load_checkpoint(checkpoint_path);
    if (!input_path.empty()) {
        if (out_path.empty()) fail("infer: --input requires --out");
        write_pgm(out_path, infer(params, read_netinput(input_path)));
        std::cout << out_path << " written\n";
        return 0;
    }
    if (dataset_dir.empty() || out_dir.empty())
        fail("infer: pass --input/--out or --dataset/--out-dir");
    const std::vector<TrainSample> dataset = load_dataset(dataset_dir, false);
    ensure_dir(out_dir);
    for (std::size_t i = 0; i < dataset.size(); i++)
        write_pgm(joined(out_dir, pred_name(i)), infer(params, dataset[i].input));
    std::cout << dataset.size() << " figures written to " << out_dir << "\n";
    return 0;
}

// ---- evaluate ------------------------------------------------------------------

int cmd_evaluate(const std::string& pred_dir, const std::string& truth_dir,
                 std::vector<double> psi, const std::string& out_dir) {
    if (psi.empty()) psi = {25.0, 30.0, 40.0, 50.0};
    std::vector<PoseFigure> preds, truths;
    for (std::size_t idx = 0;; idx++) {
        const std::string pred_path = joined(pred_dir, pred_name(idx));
        if (!fs::exists(pred_path)) break;
        std::string truth_path = joined(truth_dir, pair_target_name(idx));
        if (!fs::exists(truth_path)) truth_path = joined(truth_dir, pred_name(idx));
        preds.push_back(read_pgm(pred_path));
        truths.push_back(read_pgm(truth_path));
    }
    if (preds.empty()) fail("no pred_0000.pgm under prediction path: " + pred_dir);

    std::vector<PcsResult> results;
    for (double p : psi) results.push_back(pcs_suite(preds, truths, p));

    std::printf("%-10s", "psi");
    for (double p : psi) std::printf(" %9.4g", p);
    std::printf("\n%-10s", "pcs %");
    for (const PcsResult& r : results) std::printf(" %9.2f", r.percent);
    std::printf("\n%-10s %9.2f (same at every psi)\n", "avg dist", results.front().mean_distance);

    if (!out_dir.empty()) {
        ensure_dir(out_dir);
        std::ofstream out(joined(out_dir, "evaluation.csv"), std::ios::binary);
        if (!out) fail("cannot open " + joined(out_dir, "evaluation.csv") + " for writing");
        out << "psi,pcs_percent,mean_distance\n";
        for (std::size_t i = 0; i < psi.size(); i++)
            out << fmt_g17(psi[i]) << ',' << fmt_g17(results[i].percent) << ','
                << fmt_g17(results[i].mean_distance) << "\n";
        if (!out) fail("write failed: " + joined(out_dir, "evaluation.csv"));
    }
    return 0;
}

// ---- breathe -------------------------------------------------------------------

int cmd_breathe(const std::string& trace_path, const std::string& truth_path,
                const std::string& out_dir) {
    const CsiTrace trace = read_trace(trace_path);
    const SanitizedStreams streams = sanitize_full(trace);
    const BreatheResult res = breathe(streams, trace.sample_rate_hz);
    ensure_dir(out_dir);

    const std::size_t n = res.denoised.samples.size();
    std::vector<double> t_s(n);
    for (std::size_t i = 0; i < n; i++) t_s[i] = static_cast<double>(i) / trace.sample_rate_hz;
    write_curve(joined(out_dir, "curve.csv"), t_s, res.denoised.samples);
    {
        std::ofstream out(joined(out_dir, "peaks.csv"), std::ios::binary);
        if (!out) fail("cannot open " + joined(out_dir, "peaks.csv") + " for writing");
        out << "t_s,index\n";
        for (std::size_t idx : res.peaks)
            out << fmt_g17(static_cast<double>(idx) / trace.sample_rate_hz) << ',' << idx << "\n";
        if (!out) fail("write failed: " + joined(out_dir, "peaks.csv"));
    }
    {
        std::ofstream out(joined(out_dir, "apnea.csv"), std::ios::binary);
        if (!out) fail("cannot open " + joined(out_dir, "apnea.csv") + " for writing");
        out << "start_s,end_s\n";
        for (const auto& [a, b] : res.apnea.apnea_intervals)
            out << fmt_g17(a) << ',' << fmt_g17(b) << "\n";
        if (!out) fail("write failed: " + joined(out_dir, "apnea.csv"));
    }

    std::cout << "selected stream: " << (res.selected.curve.source.amplitude ? "amplitude" : "phase")
              << " subcarrier " << res.selected.curve.source.subcarrier << ", rnr "
              << fmt_g17(res.selected.rnr_value) << "\n";
    std::cout << "respiration rate: " << fmt_g17(res.rate_bpm) << " bpm (" << res.peaks.size()
              << " peaks)\n";
    std::cout << "apnea intervals: " << res.apnea.apnea_intervals.size() << "\n";
    if (!truth_path.empty()) {
        std::vector<double> tt, tv;
        read_curve(truth_path, tt, tv);
        if (tv.size() != n) fail("breathe: truth curve has " + std::to_string(tv.size()) +
                                 " samples, trace has " + std::to_string(n));
        std::cout << "pearson vs truth: " << fmt_g17(pearson(res.denoised.samples, tv)) << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"WiFi channel-state sensing toolkit"};
    app.require_subcommand(1);

    std::string scenario_path, out_dir, trace_path, trace2_path, truth_path;
    std::string dataset_dir, checkpoint_path, input_path, out_path, pred_dir;
    long long seed = -1;
    int epochs = 10, batch = 16;
    double lr = 1e-3;
    bool reduced = false;
    std::vector<double> psi;

    CLI::App* sim = app.add_subcommand("simulate", "generate a trace from a scenario file");
    sim->add_option("--scenario", scenario_path, "scenario file")->required();
    sim->add_option("--out-dir", out_dir, "artifact directory")->required();
    sim->add_option("--seed", seed, "override the scenario seed");

    CLI::App* san = app.add_subcommand("sanitize", "antenna selection + conjugate multiplication");
    san->add_option("--trace", trace_path, "trace CSV")->required();
    san->add_option("--out-dir", out_dir, "artifact directory")->required();

    CLI::App* pm = app.add_subcommand("posemap", "build network input maps from two receivers");
    pm->add_option("--trace", trace_path, "receiver 1 trace CSV")->required();
    pm->add_option("--trace2", trace2_path, "receiver 2 trace CSV")->required();
    pm->add_option("--truth", truth_path, "skeleton ground truth CSV (adds target figures)");
    pm->add_option("--out-dir", out_dir, "artifact directory")->required();

    CLI::App* tr = app.add_subcommand("train", "train the pose network");
    tr->add_option("--dataset", dataset_dir, "directory of (input, target) pairs")->required();
    tr->add_option("--checkpoint", checkpoint_path, "output checkpoint path")->required();
    tr->add_option("--epochs", epochs, "training epochs");
    tr->add_option("--lr", lr, "learning rate");
    tr->add_option("--batch", batch, "batch size");
    tr->add_option("--seed", seed, "init/shuffle seed");
    tr->add_flag("--reduced", reduced, "narrow test-size network");

    CLI::App* in = app.add_subcommand("infer", "run the pose network on inputs");
    in->add_option("--checkpoint", checkpoint_path, "checkpoint path")->required();
    in->add_option("--input", input_path, "single input CSV");
    in->add_option("--out", out_path, "single output PGM");
    in->add_option("--dataset", dataset_dir, "directory of inputs");
    in->add_option("--out-dir", out_dir, "directory for predicted figures");

    CLI::App* ev = app.add_subcommand("evaluate", "PCS table for predictions vs annotations");
    ev->add_option("--pred", pred_dir, "directory of pred_*.pgm")->required();
    ev->add_option("--truth", truth_path, "directory of annotation figures")->required();
    ev->add_option("--psi", psi, "thresholds (default 25 30 40 50)");
    ev->add_option("--out-dir", out_dir, "directory for evaluation.csv");

    CLI::App* br = app.add_subcommand("breathe", "respiration curve, rate, and apnea report");
    br->add_option("--trace", trace_path, "trace CSV")->required();
    br->add_option("--truth", truth_path, "chest displacement CSV for Pearson scoring");
    br->add_option("--out-dir", out_dir, "artifact directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return cmd_simulate(scenario_path, out_dir, seed);
        if (san->parsed()) return cmd_sanitize(trace_path, out_dir);
        if (pm->parsed()) return cmd_posemap(trace_path, trace2_path, truth_path, out_dir);
        if (tr->parsed())
            return cmd_train(dataset_dir, checkpoint_path, epochs, lr, batch, seed, reduced);
        if (in->parsed()) return cmd_infer(checkpoint_path, input_path, out_path, dataset_dir, out_dir);
        if (ev->parsed()) return cmd_evaluate(pred_dir, truth_path, psi, out_dir);
        if (br->parsed()) return cmd_breathe(trace_path, truth_path, out_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    std::cerr << "error: no subcommand\n";
    return 1;
}
