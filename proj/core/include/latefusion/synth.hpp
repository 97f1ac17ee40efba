#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "latefusion/geometry.hpp"
#include "latefusion/kitti_io.hpp"

namespace latefusion {

/// Behaviour of one simulated detector.
struct DetectorProfile
{
    double detect_prob = 0.95;
    /// Standard deviation of each box edge, as a fraction of the box size.
    double box_jitter_sigma = 0.03;
    /// Poisson mean of spurious boxes per frame.
    double fp_per_frame = 2.0;
    /// Probability mass over the ten confidence bands [0, 0.1), ..., [0.9, 1].
    std::array<double, 10> tp_score_dist{};
    std::array<double, 10> fp_score_dist{};
    /// Chance this detector also fires next to each LiDAR false positive.
    double fp_on_lidar_fp_prob = 0.0;

    void validate(std::string_view name) const;
};

struct SynthConfig
{
    std::uint64_t seed = 7;
    int n_frames = 500;
    ImageDims image{1242, 375};
    std::string class_name = "Car";

    int gt_min_per_frame = 2;
    int gt_max_per_frame = 8;
    double gt_width_min = 30.0;
    double gt_width_max = 260.0;
    /// Box height as a fraction of its width.
    double gt_aspect_min = 0.45;
    double gt_aspect_max = 0.85;
    std::array<double, 4> occlusion_probs{0.55, 0.25, 0.15, 0.05};
    double truncation_prob = 0.15;
    double truncation_max = 0.6;

    DetectorProfile lidar;
    DetectorProfile camera;
    std::optional<DetectorProfile> camera2;
    bool camera2_open_vocabulary = true;

    /// Over-firing LiDAR, complementary camera, no second camera.
    static SynthConfig defaults();
    void validate() const;
};

SynthConfig parse_synth_config(std::string_view toml_text, const std::string &source = "<config>");
SynthConfig load_synth_config(const std::filesystem::path &path);
/// TOML text that parses back to an identical config.
std::string format_synth_config(const SynthConfig &cfg);

struct Scene
{
    FrameId frame;
    ImageDims dims;
    std::vector<GroundTruthObject> ground_truth;
};

/// Ground truth for one frame: non-degenerate boxes inside the image.
Scene generate_scene(const SynthConfig &cfg, const FrameId &frame, std::uint64_t frame_seed);

struct GeneratedDetections
{
    std::vector<Detection> detections;
    /// Boxes of the spurious detections (not derived from ground truth).
    std::vector<Box2D> false_positive_boxes;
};

/// Simulates a detector on one frame. Every GT object is found with
/// detect_prob and jittered; Poisson(fp_per_frame) spurious boxes are added,
/// plus one near each of `lidar_false_positives` with fp_on_lidar_fp_prob.
GeneratedDetections generate_detections(std::span<const GroundTruthObject> gts, const DetectorProfile &profile,
                                        std::uint64_t seed, Modality modality, const FrameId &frame,
                                        const ImageDims &dims, const SynthConfig &cfg,
                                        std::span<const Box2D> lidar_false_positives = {});

struct SynthFrame
{
    Scene scene;
    GeneratedDetections lidar;
    GeneratedDetections camera;
    std::optional<GeneratedDetections> camera2;
};

/// Frame `index`, seeded from (master seed, index) only.
SynthFrame generate_frame(const SynthConfig &cfg, std::uint64_t index);

/// Writes label/, lidar/, camera/ (and camera2/), frame_meta.txt and
/// synth_config.toml under out_dir.
void generate_dataset(const SynthConfig &cfg, const std::filesystem::path &out_dir, unsigned threads = 1);

} // namespace latefusion
