#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cli/commands.hpp"
#include "cli/run_config.hpp"

using namespace latefusion;
using namespace latefusion::cli;

namespace {

// Flags that may override the --config file. Unset optionals leave the file
// (or built-in default) value alone.
struct Overrides
{
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::optional<std::string> class_name;
    std::optional<double> tau_match, tau_match_openvocab, tau_gt;
    std::optional<int> epochs;
    std::optional<double> lr, pos_weight, neg_weight;
    std::optional<std::size_t> hidden, batch_size;
    bool full_batch = false;
    std::optional<double> threshold;
    bool rescore = false;
    std::optional<std::string> difficulty, ap_mode;
    std::optional<double> score_floor;
    bool keep_van = false;

    void apply(RunConfig &cfg) const
    {
        if (seed) cfg.seed = *seed;
        if (threads) cfg.threads = *threads;
        if (class_name) cfg.class_name = *class_name;
        if (tau_match) cfg.match.tau_match = *tau_match;
        if (tau_match_openvocab) cfg.match.tau_match_openvocab = *tau_match_openvocab;
        if (tau_gt) cfg.match.tau_gt = *tau_gt;
        if (epochs) cfg.train.epochs = *epochs;
        if (lr) cfg.train.lr = *lr;
        if (pos_weight) cfg.train.pos_weight = *pos_weight;
        if (neg_weight) cfg.train.neg_weight = *neg_weight;
        if (hidden) cfg.train.hidden = {*hidden};
        if (batch_size) cfg.train.batch_size = *batch_size;
        if (full_batch) cfg.train.batch_size = 0;
        if (threshold) cfg.threshold = *threshold;
        if (rescore) cfg.rescore = true;
        if (difficulty) cfg.difficulty = *difficulty;
        if (ap_mode) cfg.ap_mode = parse_ap_mode(*ap_mode);
        if (score_floor) cfg.score_floor = *score_floor;
        if (keep_van) cfg.eval.ignore_van = false;
    }
};

struct CameraFlags
{
    std::string camera, camera2;
    bool camera_openvocab = false;
    bool camera2_openvocab = false;

    void add(CLI::App *cmd)
    {
        cmd->add_option("--camera", camera, "Camera detection directory")->required();
        cmd->add_option("--camera2", camera2, "Second camera detection directory (dual layout)");
        cmd->add_flag("--camera-openvocab", camera_openvocab, "First camera is open-vocabulary (lower match threshold)");
        cmd->add_flag("--camera2-openvocab", camera2_openvocab, "Second camera is open-vocabulary");
    }

    std::vector<CameraSource> sources() const
    {
        std::vector<CameraSource> out{{camera, camera_openvocab}};
        if (!camera2.empty())
            out.push_back({camera2, camera2_openvocab});
        return out;
    }
};

void add_common(CLI::App *cmd, Overrides &o)
{
    cmd->add_option("--seed", o.seed, "Random seed");
    cmd->add_option("--threads", o.threads, "Worker threads for per-frame work");
    cmd->add_option("--class", o.class_name, "Evaluated object class (default Car)");
}

void add_match_thresholds(CLI::App *cmd, Overrides &o)
{
    cmd->add_option("--tau-match", o.tau_match, "IoU threshold for camera matching");
    cmd->add_option("--tau-match-openvocab", o.tau_match_openvocab, "IoU threshold for open-vocabulary cameras");
    cmd->add_option("--tau-gt", o.tau_gt, "IoU threshold for positive labels");
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"LiDAR detection verification by late fusion with camera detections"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "TOML run configuration (flags take precedence)");

    Overrides o;

    SynthArgs synth;
    std::string synth_config, synth_out;
    auto *synth_cmd = app.add_subcommand("synth", "Generate a synthetic KITTI-format dataset");
    synth_cmd->add_option("synth_config", synth_config, "Synthetic dataset TOML config")->required();
    synth_cmd->add_option("--out", synth_out, "Output directory")->required();
    synth_cmd->add_option("--seed", synth.seed, "Override the master seed");
    synth_cmd->add_option("--frames", synth.frames, "Override the frame count");
    synth_cmd->add_option("--threads", o.threads, "Worker threads");

    MatchArgs match;
    CameraFlags match_cams;
    std::string m_lidar, m_gt, m_meta, m_out, m_out_test, m_train_frames, m_test_frames;
    auto *match_cmd = app.add_subcommand("match", "Build verifier features and labels");
    match_cmd->add_option("--lidar", m_lidar, "LiDAR detection directory")->required();
    match_cams.add(match_cmd);
    match_cmd->add_option("--gt", m_gt, "Ground-truth label directory")->required();
    match_cmd->add_option("--meta", m_meta, "Frame metadata file (frame width height)");
    match_cmd->add_option("--out", m_out, "Feature CSV (training rows when splitting)")->required();
    match_cmd->add_option("--train-fraction", match.train_fraction, "Split frames into train/test");
    match_cmd->add_option("--out-test", m_out_test, "Test feature CSV");
    match_cmd->add_option("--train-frames", m_train_frames, "Write the training frame list here");
    match_cmd->add_option("--test-frames", m_test_frames, "Write the test frame list here");
    add_match_thresholds(match_cmd, o);
    add_common(match_cmd, o);

    TrainArgs train;
    std::string t_features, t_out;
    auto *train_cmd = app.add_subcommand("train", "Train the verifier network");
    train_cmd->add_option("--features", t_features, "Feature CSV")->required();
    train_cmd->add_option("--out", t_out, "Model file (JSON)")->required();
    train_cmd->add_option("--epochs", o.epochs, "Training epochs (default 50)");
    train_cmd->add_option("--lr", o.lr, "Adam learning rate (default 0.0001)");
    train_cmd->add_option("--pos-weight", o.pos_weight, "Positive class weight (default 10)");
    train_cmd->add_option("--neg-weight", o.neg_weight, "Negative class weight (default 1)");
    train_cmd->add_option("--hidden", o.hidden, "Hidden layer width (default 64)");
    train_cmd->add_option("--batch-size", o.batch_size, "Mini-batch size (default 256)");
    train_cmd->add_flag("--full-batch", o.full_batch, "Use the whole set as one batch");
    add_common(train_cmd, o);

    FilterArgs filter;
    CameraFlags filter_cams;
    std::string f_model, f_lidar, f_meta, f_out, f_frames;
    auto *filter_cmd = app.add_subcommand("filter", "Drop LiDAR detections the verifier rejects");
    filter_cmd->add_option("--model", f_model, "Model file")->required();
    filter_cmd->add_option("--lidar", f_lidar, "LiDAR detection directory")->required();
    filter_cams.add(filter_cmd);
    filter_cmd->add_option("--meta", f_meta, "Frame metadata file");
    filter_cmd->add_option("--out", f_out, "Output detection directory")->required();
    filter_cmd->add_option("--frames", f_frames, "Only process the frames listed in this file");
    filter_cmd->add_option("--threshold", o.threshold, "Acceptance threshold on the verifier output (default 0.5)");
    filter_cmd->add_flag("--rescore", o.rescore, "Multiply kept scores by the verifier probability");
    add_match_thresholds(filter_cmd, o);
    add_common(filter_cmd, o);

    EvalArgs eval;
    std::string e_gt, e_det, e_out, e_out_pr, e_frames;
    auto *eval_cmd = app.add_subcommand("eval", "2D average precision per difficulty band");
    eval_cmd->add_option("--gt", e_gt, "Ground-truth label directory")->required();
    eval_cmd->add_option("--det", e_det, "Detection directory")->required();
    eval_cmd->add_option("--difficulty", o.difficulty, "easy, moderate, hard or all (default all)");
    eval_cmd->add_option("--ap-mode", o.ap_mode, "11, 40 or both (default 40)");
    eval_cmd->add_option("--score-floor", o.score_floor, "Minimum score for the TP/FP counts");
    eval_cmd->add_option("--out", e_out, "JSON report");
    eval_cmd->add_option("--out-pr", e_out_pr, "CSV of PR curve points");
    eval_cmd->add_option("--frames", e_frames, "Only evaluate the frames listed in this file");
    eval_cmd->add_flag("--keep-van", o.keep_van, "Do not ignore Van ground truth");
    add_common(eval_cmd, o);

    BandsArgs bands;
    std::string b_gt, b_det, b_out, b_frames;
    auto *bands_cmd = app.add_subcommand("bands", "TP/FP counts per confidence band");
    bands_cmd->add_option("--gt", b_gt, "Ground-truth label directory")->required();
    bands_cmd->add_option("--det", b_det, "Detection directory")->required();
    bands_cmd->add_option("--difficulty", o.difficulty, "easy, moderate or hard (default hard)");
    bands_cmd->add_option("--out", b_out, "Output CSV");
    bands_cmd->add_option("--frames", b_frames, "Only count the frames listed in this file");
    bands_cmd->add_flag("--keep-van", o.keep_van, "Do not ignore Van ground truth");
    add_common(bands_cmd, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInputError;
    }

    RunConfig cfg;
    const int config_status = guarded(std::cerr, [&] {
        if (!config_path.empty())
            cfg = load_run_config(config_path);
        o.apply(cfg);
        return 0;
    });
    if (config_status != 0)
        return config_status;

    if (*synth_cmd) {
        synth.config = synth_config;
        synth.out_dir = synth_out;
        synth.threads = cfg.threads;
        return cmd_synth(synth, std::cout, std::cerr);
    }
    if (*match_cmd) {
        match.cfg = cfg;
        match.lidar_dir = m_lidar;
        match.cameras = match_cams.sources();
        match.gt_dir = m_gt;
        match.meta = m_meta;
        match.out = m_out;
        match.out_test = m_out_test;
        match.train_frames = m_train_frames;
        match.test_frames = m_test_frames;
        return cmd_match(match, std::cout, std::cerr);
    }
    if (*train_cmd) {
        train.cfg = cfg;
        train.features = t_features;
        train.out = t_out;
        return cmd_train(train, std::cout, std::cerr);
    }
    if (*filter_cmd) {
        filter.cfg = cfg;
        filter.model = f_model;
        filter.lidar_dir = f_lidar;
        filter.cameras = filter_cams.sources();
        filter.meta = f_meta;
        filter.out_dir = f_out;
        filter.frames = f_frames;
        return cmd_filter(filter, std::cout, std::cerr);
    }
    if (*eval_cmd) {
        eval.cfg = cfg;
        eval.gt_dir = e_gt;
        eval.det_dir = e_det;
        eval.out = e_out;
        eval.out_pr = e_out_pr;
        eval.frames = e_frames;
        return cmd_eval(eval, std::cout, std::cerr);
    }
    if (*bands_cmd) {
        bands.cfg = cfg;
        bands.gt_dir = b_gt;
        bands.det_dir = b_det;
        bands.out = b_out;
        bands.frames = b_frames;
        return cmd_bands(bands, std::cout, std::cerr);
    }
    return kInputError;
}
