#include "commands.hpp"

#include <algorithm>
#include <ostream>
#include <set>

#include <fmt/format.h>
#include <fmt/ostream.h>
#include <fmt/ranges.h>

#include "latefusion/eval.hpp"
#include "latefusion/kitti_io.hpp"
#include "latefusion/synth.hpp"
#include "latefusion/verifier.hpp"

namespace latefusion::cli {

namespace fs = std::filesystem;

namespace {

FusionInputs fusion_inputs(const RunConfig &cfg, const fs::path &lidar, const std::vector<CameraSource> &cameras,
                           const fs::path &meta)
{
    FusionInputs in;
    in.lidar_dir = lidar;
    in.cameras = cameras;
    in.meta = load_frame_meta(meta, cfg.default_dims);
    in.config = cfg.match;
    in.class_name = cfg.class_name;
    in.threads = cfg.threads;
    return in;
}

std::vector<FrameId> frames_or_all(const fs::path &list, const fs::path &dir)
{
    return list.empty() ? list_frames(dir) : read_frame_list(list);
}

std::vector<Difficulty> requested_bands(const std::string &difficulty)
{
    if (difficulty == "all")
        return {Difficulty::Easy, Difficulty::Moderate, Difficulty::Hard};
    return {parse_difficulty(difficulty)};
}

std::size_t count_positives(const Dataset &d)
{
    return static_cast<std::size_t>(
        std::count_if(d.samples.begin(), d.samples.end(), [](const TrainingSample &s) { return s.label == 1; }));
}

std::string dataset_id(const fs::path &dir)
{
    const fs::path clean = dir.lexically_normal();
    return clean.has_filename() ? clean.filename().string() : clean.parent_path().filename().string();
}

} // namespace

int guarded(std::ostream &err, const std::function<int()> &body)
{
    try {
        return body();
    } catch (const NumericError &e) {
        fmt::print(err, "error: {}\n", e.what());
        return kNumericError;
    } catch (const IoError &e) {
        fmt::print(err, "error: {}\n", e.what());
        return kIoError;
    } catch (const fs::filesystem_error &e) {
        fmt::print(err, "error: {}\n", e.what());
        return kIoError;
    } catch (const std::exception &e) {
        fmt::print(err, "error: {}\n", e.what());
        return kInputError;
    }
}

int cmd_synth(const SynthArgs &args, std::ostream &out, std::ostream &err)
{
    return guarded(err, [&] {
        SynthConfig cfg = load_synth_config(args.config);
        if (args.seed)
            cfg.seed = *args.seed;
        if (args.frames)
            cfg.n_frames = *args.frames;
        generate_dataset(cfg, args.out_dir, args.threads);
        fmt::print(out, "synth: wrote {} frames (seed {}) to {}\n", cfg.n_frames, cfg.seed, args.out_dir.string());
        return int{kOk};
    });
}

int cmd_match(const MatchArgs &args, std::ostream &out, std::ostream &err)
{
    return guarded(err, [&] {
        const FusionInputs in = fusion_inputs(args.cfg, args.lidar_dir, args.cameras, args.meta);
        const std::vector<FrameId> frames = list_frames(args.lidar_dir);
        const Dataset data = build_dataset(in, args.gt_dir, frames);
        const auto layout_name = to_string(data.layout);

        if (!args.train_fraction) {
            write_dataset_csv(data, args.out);
            fmt::print(out, "match: {} frames, {} samples ({} positive), layout {} -> {}\n", frames.size(),
                       data.samples.size(), count_positives(data), layout_name, args.out.string());
            return int{kOk};
        }

        if (args.out_test.empty())
            throw InputError("--train-fraction needs --out-test");
        const FrameSplit split = split_frames(frames, *args.train_fraction, args.cfg.seed);
        const Dataset train = select_frames(data, split.train);
        const Dataset test = select_frames(data, split.test);
        write_dataset_csv(train, args.out);
        write_dataset_csv(test, args.out_test);
        if (!args.train_frames.empty())
            write_frame_list(split.train, args.train_frames);
        if (!args.test_frames.empty())
            write_frame_list(split.test, args.test_frames);
        fmt::print(out, "match: {} frames split {}/{} (seed {}), layout {}\n", frames.size(), split.train.size(),
                   split.test.size(), args.cfg.seed, layout_name);
        fmt::print(out, "  train: {} samples ({} positive) -> {}\n", train.samples.size(), count_positives(train),
                   args.out.string());
        fmt::print(out, "  test:  {} samples ({} positive) -> {}\n", test.samples.size(), count_positives(test),
                   args.out_test.string());
        return int{kOk};
    });
}

int cmd_train(const TrainArgs &args, std::ostream &out, std::ostream &err)
{
    return guarded(err, [&] {
        TrainConfig tc = args.cfg.train;
        tc.seed = args.cfg.seed;
        tc.threshold = args.cfg.threshold;
        tc.validate();
        fmt::print(out, "train: epochs={} lr={} pos_weight={} neg_weight={} hidden={} batch_size={} seed={}\n",
                   tc.epochs, tc.lr, tc.pos_weight, tc.neg_weight, fmt::join(tc.hidden, "x"),
                   tc.batch_size == 0 ? std::string("full") : std::to_string(tc.batch_size), tc.seed);

        const Dataset data = read_dataset_csv(args.features);
        if (data.samples.empty()) {
            fmt::print(err, "warning: {} has no samples; writing the untrained model\n", args.features.string());
            save_model(init_model(data.layout, tc.hidden, tc.seed), tc, args.out);
            return int{kOk};
        }

        const TrainResult result = train(data, tc);
        for (const auto &w : result.log.warnings)
            fmt::print(err, "warning: {}\n", w);
        for (const auto &e : result.log.epochs)
            fmt::print(out, "epoch {:3d}  loss {:.6f}  recall {:.6f}  precision {:.6f}\n", e.epoch, e.loss, e.recall,
                       e.precision);
        save_model(result.model, tc, args.out);
        fmt::print(out, "train: {} samples, model -> {}\n", data.samples.size(), args.out.string());
        return int{kOk};
    });
}

int cmd_filter(const FilterArgs &args, std::ostream &out, std::ostream &err)
{
    return guarded(err, [&] {
        const ModelFile mf = load_model(args.model);
        const FusionInputs in = fusion_inputs(args.cfg, args.lidar_dir, args.cameras, args.meta);
        if (mf.model.layout != in.layout())
            throw InputError(fmt::format("model expects layout {} but {} camera source(s) were given",
                                         to_string(mf.model.layout), args.cameras.size()));
        const double threshold = args.cfg.threshold;
        if (!(threshold > 0.0 && threshold < 1.0))
            throw InputError(fmt::format("threshold {} outside (0, 1)", threshold));

        const std::vector<FrameId> frames = frames_or_all(args.frames, args.lidar_dir);
        fs::create_directories(args.out_dir);
        std::size_t total_in = 0, total_candidates = 0, total_kept = 0;
        for (const auto &frame : frames) {
            const FrameFeatures ff = build_frame_features(in, frame);
            const auto kept = filter_detections(mf.model, ff.candidates, ff.features, threshold, args.cfg.rescore);
            std::set<std::size_t> kept_index;
            for (const auto &d : kept)
                kept_index.insert(d.file_index);

            std::string text;
            std::size_t k = 0;
            for (const auto &d : ff.lidar) {
                const bool candidate = same_class(d.class_name, in.class_name);
                if (candidate && !kept_index.contains(d.file_index))
                    continue;
                if (candidate && args.cfg.rescore) {
                    text += format_detection_line(kept[k++]);
                } else {
                    text += d.raw_line;
                    k += candidate ? 1 : 0;
                }
                text += '\n';
            }
            write_text_file(frame_file(args.out_dir, frame), text);
            total_in += ff.lidar.size();
            total_candidates += ff.candidates.size();
            total_kept += kept.size();
        }
        fmt::print(out, "filter: {} frames, kept {} of {} {} detections ({} lines in) -> {}\n", frames.size(),
                   total_kept, total_candidates, in.class_name, total_in, args.out_dir.string());
        return int{kOk};
    });
}

int cmd_eval(const EvalArgs &args, std::ostream &out, std::ostream &err)
{
    return guarded(err, [&] {
        EvalOptions opts = args.cfg.eval;
        opts.class_name = args.cfg.class_name;
        opts.threads = args.cfg.threads;
        const std::vector<FrameId> frames = frames_or_all(args.frames, args.gt_dir);
        const auto eval_frames = load_eval_frames(args.gt_dir, args.det_dir, frames);
        const auto bands = requested_bands(args.cfg.difficulty);
        ApReport report = evaluate(eval_frames, bands, args.cfg.ap_mode, args.cfg.score_floor, opts);
        report.metadata.insert(report.metadata.begin(), {"detections", dataset_id(args.det_dir)});
        report.metadata.insert(report.metadata.begin(), {"ground_truth", dataset_id(args.gt_dir)});

        fmt::print(out, "{:<10} {:>11} {:>11} {:>8} {:>8} {:>8} {:>8}\n", "band", "AP11(%)", "AP40(%)", "GT", "TP", "FP", "FN");
        for (const auto &b : report.bands) {
            auto ap = [](const std::optional<double> &v) { return v ? fmt::format("{:.6f}", *v) : std::string("-"); };
            fmt::print(out, "{:<10} {:>11} {:>11} {:>8} {:>8} {:>8} {:>8}\n", to_string(b.difficulty), ap(b.ap_11),
                       ap(b.ap_40), b.gt_count, b.tp, b.fp, b.fn);
        }
        if (!args.out.empty())
            emit_report(report, args.out, ReportFormat::Json);
        if (!args.out_pr.empty())
            emit_report(report, args.out_pr, ReportFormat::Csv);
        return int{kOk};
    });
}

int cmd_bands(const BandsArgs &args, std::ostream &out, std::ostream &err)
{
    return guarded(err, [&] {
        EvalOptions opts = args.cfg.eval;
        opts.class_name = args.cfg.class_name;
        opts.threads = args.cfg.threads;
        const Difficulty band = args.cfg.difficulty == "all" ? Difficulty::Hard : parse_difficulty(args.cfg.difficulty);
        const std::vector<FrameId> frames = frames_or_all(args.frames, args.gt_dir);
        const auto eval_frames = load_eval_frames(args.gt_dir, args.det_dir, frames);
        std::size_t gt = 0;
        for (const auto &f : eval_frames)
            gt += band_gt_count(f.ground_truth, band, opts);
        if (gt == 0)
            throw InputError(fmt::format("no {} ground truth in the {} band", opts.class_name, to_string(band)));

        const BandHistogram h = band_histogram(eval_frames, band, opts);
        const std::string csv = format_band_csv(h);
        fmt::print(out, "confidence bands ({}):\n{}", to_string(band), csv);
        fmt::print(out, "total: tp {} fp {}\n", h.total_tp(), h.total_fp());
        if (!args.out.empty())
            write_text_file(args.out, csv);
        return int{kOk};
    });
}

} // namespace latefusion::cli
