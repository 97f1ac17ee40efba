#include "latefusion/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <toml.hpp>

#include "latefusion/detail/toml_reader.hpp"

#include "latefusion/parallel.hpp"
#include "latefusion/random.hpp"

namespace latefusion {

namespace {

enum Stream : std::uint64_t { kScene = 0, kLidar = 1, kCamera = 2, kCamera2 = 3 };

void check_dist(std::span<const double> dist, std::string_view what)
{
    double sum = 0.0;
    for (double p : dist) {
        if (!(p >= 0.0) || !std::isfinite(p))
            throw InputError(fmt::format("{}: probabilities must be non-negative", what));
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-6)
        throw InputError(fmt::format("{}: probabilities sum to {}, expected 1", what, sum));
}

void check_prob(double p, std::string_view what)
{
    if (!(p >= 0.0 && p <= 1.0))
        throw InputError(fmt::format("{} = {} outside [0, 1]", what, p));
}

double sample_score(Rng &rng, std::span<const double> dist)
{
    const auto band = rng.categorical(dist);
    return (static_cast<double>(band) + rng.uniform()) / 10.0;
}

// Box of the configured size range placed uniformly inside the image.
Box2D random_box(Rng &rng, const SynthConfig &cfg, const ImageDims &dims)
{
    const double w = std::min(rng.uniform(cfg.gt_width_min, cfg.gt_width_max), static_cast<double>(dims.width));
    const double h = std::min(w * rng.uniform(cfg.gt_aspect_min, cfg.gt_aspect_max), static_cast<double>(dims.height));
    const double x = rng.uniform(0.0, dims.width - w);
    const double y = rng.uniform(0.0, dims.height - h);
    return Box2D(x, y, x + w, y + h);
}

// Clips to the image and keeps each side at least 2 px.
Box2D clamp_box(double x0, double y0, double x1, double y1, const ImageDims &dims)
{
    constexpr double min_side = 2.0;
    auto fix = [&](double &lo, double &hi, double limit) {
        if (lo > hi)
            std::swap(lo, hi);
        lo = std::clamp(lo, 0.0, limit);
        hi = std::clamp(hi, 0.0, limit);
        if (hi - lo < min_side) {
            hi = std::min(limit, lo + min_side);
            lo = hi - min_side;
        }
    };
    fix(x0, x1, dims.width);
    fix(y0, y1, dims.height);
    return Box2D(x0, y0, x1, y1);
}

Box2D jitter(Rng &rng, const Box2D &b, double sigma, const ImageDims &dims)
{
    if (sigma == 0.0)
        return b;
    const double sx = sigma * b.width();
    const double sy = sigma * b.height();
    const double x0 = b.x_min() + sx * rng.normal();
    const double y0 = b.y_min() + sy * rng.normal();
    const double x1 = b.x_max() + sx * rng.normal();
    const double y1 = b.y_max() + sy * rng.normal();
    return clamp_box(x0, y0, x1, y1, dims);
}

Detection make_detection(const SynthConfig &cfg, const Box2D &box, double score, Modality modality, const FrameId &frame)
{
    Detection d;
    d.class_name = cfg.class_name;
    d.box = box;
    d.score = score;
    d.modality = modality;
    d.frame = frame;
    return d;
}

using detail::TomlReader;

void read_profile(const toml::table &t, const std::string &name, DetectorProfile &p, bool *open_vocab = nullptr)
{
    TomlReader r(t, name);
    r.read("detect_prob", p.detect_prob);
    r.read("box_jitter_sigma", p.box_jitter_sigma);
    r.read("fp_per_frame", p.fp_per_frame);
    r.read("tp_score_dist", p.tp_score_dist);
    r.read("fp_score_dist", p.fp_score_dist);
    r.read("fp_on_lidar_fp_prob", p.fp_on_lidar_fp_prob);
    if (open_vocab)
        r.read("open_vocabulary", *open_vocab);
    r.reject_unknown();
}

std::string format_dist(const std::array<double, 10> &d)
{
    return fmt::format("[{}]", fmt::join(d, ", "));
}

std::string format_profile(std::string_view name, const DetectorProfile &p)
{
    return fmt::format("[{}]\ndetect_prob = {}\nbox_jitter_sigma = {}\nfp_per_frame = {}\n"
                       "tp_score_dist = {}\nfp_score_dist = {}\nfp_on_lidar_fp_prob = {}\n",
                       name, p.detect_prob, p.box_jitter_sigma, p.fp_per_frame, format_dist(p.tp_score_dist),
                       format_dist(p.fp_score_dist), p.fp_on_lidar_fp_prob);
}

} // namespace

void DetectorProfile::validate(std::string_view name) const
{
    check_prob(detect_prob, fmt::format("{}.detect_prob", name));
    check_prob(fp_on_lidar_fp_prob, fmt::format("{}.fp_on_lidar_fp_prob", name));
    if (!(box_jitter_sigma >= 0.0) || !std::isfinite(box_jitter_sigma))
        throw InputError(fmt::format("{}.box_jitter_sigma must be >= 0", name));
    if (!(fp_per_frame >= 0.0) || !std::isfinite(fp_per_frame))
        throw InputError(fmt::format("{}.fp_per_frame must be >= 0", name));
    check_dist(tp_score_dist, fmt::format("{}.tp_score_dist", name));
    check_dist(fp_score_dist, fmt::format("{}.fp_score_dist", name));
}

SynthConfig SynthConfig::defaults()
{
    SynthConfig cfg;
    // LiDAR: finds nearly everything, but over-fires with spurious boxes whose
    // scores cover every band (more of them at low confidence).
    cfg.lidar.detect_prob = 0.95;
    cfg.lidar.box_jitter_sigma = 0.03;
    cfg.lidar.fp_per_frame = 2.0;
    cfg.lidar.tp_score_dist = {0.0, 0.0, 0.0, 0.0, 0.01, 0.02, 0.04, 0.10, 0.25, 0.58};
    cfg.lidar.fp_score_dist = {0.18, 0.15, 0.13, 0.11, 0.10, 0.09, 0.08, 0.07, 0.05, 0.04};
    cfg.lidar.fp_on_lidar_fp_prob = 0.0;

    cfg.camera.detect_prob = 0.85;
    cfg.camera.box_jitter_sigma = 0.04;
    cfg.camera.fp_per_frame = 0.5;
    cfg.camera.tp_score_dist = {0.0, 0.0, 0.0, 0.02, 0.05, 0.08, 0.15, 0.20, 0.25, 0.25};
    cfg.camera.fp_score_dist = {0.05, 0.10, 0.15, 0.20, 0.15, 0.12, 0.10, 0.07, 0.04, 0.02};
    cfg.camera.fp_on_lidar_fp_prob = 0.1;
    return cfg;
}

void SynthConfig::validate() const
{
    if (n_frames < 1)
        throw InputError("n_frames must be >= 1");
    if (gt_min_per_frame < 0 || gt_max_per_frame < gt_min_per_frame)
        throw InputError("ground-truth count range is invalid");
    if (!(gt_width_min >= 2.0 && gt_width_max >= gt_width_min && gt_width_max <= image.width))
        throw InputError("ground-truth width range must lie within [2, image width]");
    if (!(gt_aspect_min > 0.0 && gt_aspect_max >= gt_aspect_min))
        throw InputError("ground-truth aspect range is invalid");
    if (gt_width_min * gt_aspect_min < 2.0)
        throw InputError("smallest ground-truth box must be at least 2 px tall");
    check_dist(occlusion_probs, "ground_truth.occlusion_probs");
    check_prob(truncation_prob, "ground_truth.truncation_prob");
    check_prob(truncation_max, "ground_truth.truncation_max");
    if (class_name.empty() || class_name.find_first_of(" \t\r\n") != std::string::npos)
        throw InputError("class_name must be a single token");
    lidar.validate("lidar");
    camera.validate("camera");
    if (camera2)
        camera2->validate("camera2");
}

SynthConfig parse_synth_config(std::string_view toml_text, const std::string &source)
{
    toml::table root;
    try {
        root = toml::parse(toml_text, source);
    } catch (const toml::parse_error &e) {
        throw InputError(fmt::format("{}: {}", source, e.description()));
    }

    SynthConfig cfg = SynthConfig::defaults();
    try {
        TomlReader r(root, "");
        r.read("seed", cfg.seed);
        r.read("n_frames", cfg.n_frames);
        r.read("class_name", cfg.class_name);
        if (auto *t = r.sub("image")) {
            TomlReader ir(*t, "image");
            int w = cfg.image.width, h = cfg.image.height;
            ir.read("width", w);
            ir.read("height", h);
            ir.reject_unknown();
            if (w <= 0 || h <= 0)
                throw InputError("image dims must be positive");
            cfg.image = ImageDims(w, h);
        }
        if (auto *t = r.sub("ground_truth")) {
            TomlReader gr(*t, "ground_truth");
            gr.read("min_per_frame", cfg.gt_min_per_frame);
            gr.read("max_per_frame", cfg.gt_max_per_frame);
            gr.read("width_min", cfg.gt_width_min);
            gr.read("width_max", cfg.gt_width_max);
            gr.read("aspect_min", cfg.gt_aspect_min);
            gr.read("aspect_max", cfg.gt_aspect_max);
            gr.read("occlusion_probs", cfg.occlusion_probs);
            gr.read("truncation_prob", cfg.truncation_prob);
            gr.read("truncation_max", cfg.truncation_max);
            gr.reject_unknown();
        }
        if (auto *t = r.sub("lidar"))
            read_profile(*t, "lidar", cfg.lidar);
        if (auto *t = r.sub("camera"))
            read_profile(*t, "camera", cfg.camera);
        if (auto *t = r.sub("camera2")) {
            cfg.camera2 = cfg.camera;
            read_profile(*t, "camera2", *cfg.camera2, &cfg.camera2_open_vocabulary);
        }
        r.reject_unknown();
        cfg.validate();
    } catch (const InputError &e) {
        throw InputError(fmt::format("{}: {}", source, e.what()));
    }
    return cfg;
}

SynthConfig load_synth_config(const std::filesystem::path &path)
{
    if (!std::filesystem::exists(path))
        throw InputError(fmt::format("config file not found: {}", path.string()));
    return parse_synth_config(read_text_file(path), path.string());
}

std::string format_synth_config(const SynthConfig &cfg)
{
    std::string out = fmt::format("seed = {}\nn_frames = {}\nclass_name = \"{}\"\n\n", cfg.seed, cfg.n_frames, cfg.class_name);
    out += fmt::format("[image]\nwidth = {}\nheight = {}\n\n", cfg.image.width, cfg.image.height);
    out += fmt::format("[ground_truth]\nmin_per_frame = {}\nmax_per_frame = {}\nwidth_min = {}\nwidth_max = {}\n"
                       "aspect_min = {}\naspect_max = {}\nocclusion_probs = [{}]\ntruncation_prob = {}\ntruncation_max = {}\n\n",
                       cfg.gt_min_per_frame, cfg.gt_max_per_frame, cfg.gt_width_min, cfg.gt_width_max, cfg.gt_aspect_min,
                       cfg.gt_aspect_max, fmt::join(cfg.occlusion_probs, ", "), cfg.truncation_prob, cfg.truncation_max);
    out += format_profile("lidar", cfg.lidar) + "\n";
    out += format_profile("camera", cfg.camera);
    if (cfg.camera2)
        out += "\n" + format_profile("camera2", *cfg.camera2) +
               fmt::format("open_vocabulary = {}\n", cfg.camera2_open_vocabulary);
    return out;
}

Scene generate_scene(const SynthConfig &cfg, const FrameId &frame, std::uint64_t frame_seed)
{
    Rng rng(frame_seed);
    Scene scene;
    scene.frame = frame;
    scene.dims = cfg.image;
    const auto count = rng.between(cfg.gt_min_per_frame, cfg.gt_max_per_frame);
    for (std::int64_t i = 0; i < count; ++i) {
        GroundTruthObject g;
        g.class_name = cfg.class_name;
        g.box = random_box(rng, cfg, cfg.image);
        g.occlusion = static_cast<int>(rng.categorical(cfg.occlusion_probs));
        g.truncation = rng.bernoulli(cfg.truncation_prob) ? rng.uniform(0.0, cfg.truncation_max) : 0.0;
        scene.ground_truth.push_back(std::move(g));
    }
    return scene;
}

GeneratedDetections generate_detections(std::span<const GroundTruthObject> gts, const DetectorProfile &profile,
                                        std::uint64_t seed, Modality modality, const FrameId &frame,
                                        const ImageDims &dims, const SynthConfig &cfg,
                                        std::span<const Box2D> lidar_false_positives)
{
    Rng rng(seed);
    GeneratedDetections out;
    for (const auto &g : gts) {
        if (g.is_dont_care() || !rng.bernoulli(profile.detect_prob))
            continue;
        const Box2D box = jitter(rng, g.box, profile.box_jitter_sigma, dims);
        out.detections.push_back(make_detection(cfg, box, sample_score(rng, profile.tp_score_dist), modality, frame));
    }
    const auto spurious = rng.poisson(profile.fp_per_frame);
    for (std::uint64_t i = 0; i < spurious; ++i) {
        const Box2D box = random_box(rng, cfg, dims);
        out.false_positive_boxes.push_back(box);
        out.detections.push_back(make_detection(cfg, box, sample_score(rng, profile.fp_score_dist), modality, frame));
    }
    for (const auto &anchor : lidar_false_positives) {
        if (!rng.bernoulli(profile.fp_on_lidar_fp_prob))
            continue;
        const Box2D box = jitter(rng, anchor, profile.box_jitter_sigma, dims);
        out.false_positive_boxes.push_back(box);
        out.detections.push_back(make_detection(cfg, box, sample_score(rng, profile.fp_score_dist), modality, frame));
    }
    for (std::size_t i = 0; i < out.detections.size(); ++i)
        out.detections[i].file_index = i;
    return out;
}

SynthFrame generate_frame(const SynthConfig &cfg, std::uint64_t index)
{
    const FrameId frame = FrameId::from_index(index);
    SynthFrame f;
    f.scene = generate_scene(cfg, frame, derive_seed(cfg.seed, index, kScene));
    const auto &gts = f.scene.ground_truth;
    f.lidar = generate_detections(gts, cfg.lidar, derive_seed(cfg.seed, index, kLidar), Modality::Lidar, frame,
                                  f.scene.dims, cfg);
    f.camera = generate_detections(gts, cfg.camera, derive_seed(cfg.seed, index, kCamera), Modality::Camera, frame,
                                   f.scene.dims, cfg, f.lidar.false_positive_boxes);
    if (cfg.camera2)
        f.camera2 = generate_detections(gts, *cfg.camera2, derive_seed(cfg.seed, index, kCamera2), Modality::Camera2,
                                        frame, f.scene.dims, cfg, f.lidar.false_positive_boxes);
    return f;
}

void generate_dataset(const SynthConfig &cfg, const std::filesystem::path &out_dir, unsigned threads)
{
    cfg.validate();
    namespace fs = std::filesystem;
    std::error_code ec;
    for (const char *sub : {"label", "lidar", "camera"}) {
        fs::create_directories(out_dir / sub, ec);
        if (ec)
            throw IoError(fmt::format("cannot create {}: {}", (out_dir / sub).string(), ec.message()));
    }
    if (cfg.camera2) {
        fs::create_directories(out_dir / "camera2", ec);
        if (ec)
            throw IoError(fmt::format("cannot create {}: {}", (out_dir / "camera2").string(), ec.message()));
    }

    FrameMeta meta(std::nullopt);
    std::vector<FrameId> ids;
    for (int i = 0; i < cfg.n_frames; ++i) {
        ids.push_back(FrameId::from_index(static_cast<std::uint64_t>(i)));
        meta.add(ids.back(), cfg.image);
    }

    parallel_for(ids.size(), threads, [&](std::size_t i) {
        const SynthFrame f = generate_frame(cfg, i);
        write_label_file(f.scene.ground_truth, frame_file(out_dir / "label", ids[i]));
        write_detection_file(f.lidar.detections, frame_file(out_dir / "lidar", ids[i]));
        write_detection_file(f.camera.detections, frame_file(out_dir / "camera", ids[i]));
        if (f.camera2)
            write_detection_file(f.camera2->detections, frame_file(out_dir / "camera2", ids[i]));
    });
    write_frame_meta(meta, out_dir / "frame_meta.txt");
    write_text_file(out_dir / "synth_config.toml", format_synth_config(cfg));
}

} // namespace latefusion
