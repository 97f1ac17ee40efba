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

enum class FeatureLayout { Single11, Dual17 };

std::size_t feature_count(FeatureLayout layout) noexcept;
std::string_view to_string(FeatureLayout layout);
FeatureLayout parse_feature_layout(std::string_view text);

/// Column names in vector order, e.g. "l_cx" ... "iou_lc2".
std::span<const std::string_view> feature_names(FeatureLayout layout);

/// Verifier input for one LiDAR detection. Slot order:
///   0-3   LiDAR box (cx, cy, w, h), normalized
///   4-7   camera box, normalized
///   8, 9  LiDAR score, camera score
///   10    IoU(LiDAR, camera)
///   11-16 (dual layout) second camera box, score, IoU
/// Slots of an absent camera match are exactly zero.
class FeatureVector
{
public:
    static constexpr std::size_t max_size = 17;

    FeatureVector() = default;
    explicit FeatureVector(FeatureLayout layout) : layout_(layout) {}
    FeatureVector(FeatureLayout layout, std::span<const double> values);

    FeatureLayout layout() const noexcept { return layout_; }
    std::size_t size() const noexcept { return feature_count(layout_); }
    std::span<const double> values() const noexcept { return {values_.data(), size()}; }
    std::span<double> values() noexcept { return {values_.data(), size()}; }
    double operator[](std::size_t i) const { return values_[i]; }
    double &operator[](std::size_t i) { return values_[i]; }

    friend bool operator==(const FeatureVector &, const FeatureVector &) = default;

private:
    FeatureLayout layout_ = FeatureLayout::Single11;
    std::array<double, max_size> values_{};
};

namespace slot {
inline constexpr std::size_t lidar_box = 0;
inline constexpr std::size_t camera_box = 4;
inline constexpr std::size_t lidar_score = 8;
inline constexpr std::size_t camera_score = 9;
inline constexpr std::size_t camera_iou = 10;
inline constexpr std::size_t camera2_box = 11;
inline constexpr std::size_t camera2_score = 15;
inline constexpr std::size_t camera2_iou = 16;
} // namespace slot

struct MatchConfig
{
    double tau_match = 0.5;
    double tau_match_openvocab = 0.3;
    double tau_gt = 0.7;

    void validate() const;
};

struct CameraMatch
{
    const Detection *detection = nullptr;
    std::size_t index = 0;
    double iou = 0.0;
};

/// Camera detection with the highest IoU against the LiDAR box, provided that
/// IoU is positive and at least tau. Ties go to the higher camera score, then
/// the lower list index.
std::optional<CameraMatch> match_camera(const Detection &lidar, std::span<const Detection> cams, double tau);

FeatureVector build_feature_vector(const Detection &lidar, const std::optional<CameraMatch> &first,
                                   const std::optional<CameraMatch> &second, const ImageDims &dims,
                                   FeatureLayout layout);

/// 1 when the best IoU against `gts` reaches tau_gt (inclusive), else 0.
/// Callers pass ground truth already restricted to the evaluated class.
int label_sample(const Detection &lidar, std::span<const GroundTruthObject> gts, double tau_gt);

/// Ground-truth objects of `class_name` (case-insensitive), DontCare excluded.
std::vector<GroundTruthObject> labeling_targets(std::span<const GroundTruthObject> gts, std::string_view class_name);

struct TrainingSample
{
    FeatureVector features;
    int label = 0;
    FrameId frame;
    std::size_t lidar_index = 0;
};

struct Dataset
{
    FeatureLayout layout = FeatureLayout::Single11;
    std::vector<TrainingSample> samples;
};

struct CameraSource
{
    std::filesystem::path dir;
    bool open_vocabulary = false;
};

struct FusionInputs
{
    std::filesystem::path lidar_dir;
    std::vector<CameraSource> cameras; // one or two
    FrameMeta meta;
    MatchConfig config;
    std::string class_name = "Car";
    unsigned threads = 1;

    FeatureLayout layout() const;
};

/// Detections of one frame together with their verifier features. `features`
/// is aligned with `candidates`; `lidar` holds every parsed line of the
/// LiDAR file, including other classes.
struct FrameFeatures
{
    FrameId frame;
    std::vector<Detection> lidar;
    std::vector<Detection> candidates;
    std::vector<FeatureVector> features;
};

/// Builds features for every candidate LiDAR detection of one frame. A missing
/// camera file leaves that camera's slots zero-filled.
FrameFeatures build_frame_features(const FusionInputs &in, const FrameId &frame);

/// One labeled sample per candidate LiDAR detection, ordered by frame then
/// input order. Every LiDAR frame needs a label file in `gt_dir`.
Dataset build_dataset(const FusionInputs &in, const std::filesystem::path &gt_dir,
                      std::span<const FrameId> frames = {});

struct FrameSplit
{
    std::vector<FrameId> train;
    std::vector<FrameId> test;
};

/// Seeded frame-level partition. Train gets round(fraction * n) frames,
/// clamped so neither side is empty. Both halves come back sorted.
FrameSplit split_frames(std::span<const FrameId> frames, double train_fraction, std::uint64_t seed);

Dataset select_frames(const Dataset &data, std::span<const FrameId> frames);

std::string format_dataset_csv(const Dataset &data);
void write_dataset_csv(const Dataset &data, const std::filesystem::path &path);
Dataset parse_dataset_csv(std::string_view text, const std::string &source = "<csv>");
Dataset read_dataset_csv(const std::filesystem::path &path);

} // namespace latefusion
