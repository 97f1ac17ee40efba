#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "latefusion/kitti_io.hpp"

namespace latefusion {

enum class MatchOutcome { TruePositive, FalsePositive, Ignored };

struct EvalOptions
{
    std::string class_name = "Car";
    double iou_threshold = 0.7;
    double dont_care_iou = 0.5;
    /// Treat "Van" ground truth as ignorable when evaluating cars.
    bool ignore_van = true;
    unsigned threads = 1;
};

/// Classifies each detection of one frame. Detections are visited by score
/// (descending, stable); the result is aligned with the input order.
///
/// A detection first claims the unclaimed in-band ground truth with the
/// highest IoU >= iou_threshold (TP). Failing that it is ignored when it
/// overlaps ignorable ground truth (harder band, Van) at iou_threshold or a
/// DontCare region at dont_care_iou; otherwise it is a FP, including
/// duplicates on already-claimed objects. Detections of other classes are
/// ignored.
std::vector<MatchOutcome> match_for_eval(std::span<const Detection> dets, std::span<const GroundTruthObject> gts,
                                         Difficulty band, const EvalOptions &opts = {});

/// Ground truth of the evaluated class inside the band.
std::size_t band_gt_count(std::span<const GroundTruthObject> gts, Difficulty band, const EvalOptions &opts = {});

struct ScoredOutcome
{
    double score = 0.0;
    MatchOutcome outcome = MatchOutcome::FalsePositive;
};

struct PRPoint
{
    double score_threshold = 0.0;
    double precision = 1.0;
    double recall = 0.0;
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
};

/// One point per distinct score, walking the ranking from the highest score
/// down. Ignored detections are skipped. Throws InputError when gt_count is 0.
std::vector<PRPoint> pr_curve(std::span<const ScoredOutcome> ranked, std::size_t gt_count);

/// Interpolated AP over `levels` recall points, in percent. 11-point uses
/// {0, 0.1, ..., 1}; 40-point uses {1/40, ..., 1}.
double ap_11(std::span<const PRPoint> pr);
double ap_40(std::span<const PRPoint> pr);

/// One frame's evaluation inputs.
struct EvalFrame
{
    FrameId frame;
    std::vector<Detection> detections;
    std::vector<GroundTruthObject> ground_truth;
};

/// Reads every frame listed (or every label file in gt_dir). A frame without
/// a detection file contributes no detections.
std::vector<EvalFrame> load_eval_frames(const std::filesystem::path &gt_dir, const std::filesystem::path &det_dir,
                                        std::span<const FrameId> frames = {});

struct TpFp
{
    std::size_t tp = 0;
    std::size_t fp = 0;
};

/// Counts over detections scoring at least `score_floor`.
TpFp tp_fp_table(std::span<const Detection> dets, std::span<const GroundTruthObject> gts, Difficulty band,
                 double score_floor, const EvalOptions &opts = {});
TpFp tp_fp_table(std::span<const EvalFrame> frames, Difficulty band, double score_floor, const EvalOptions &opts = {});

struct BandHistogram
{
    static constexpr std::size_t bins = 10;
    std::array<std::size_t, bins> tp{};
    std::array<std::size_t, bins> fp{};

    static std::size_t bin_of(double score);
    std::size_t total_tp() const;
    std::size_t total_fp() const;
};

BandHistogram band_histogram(std::span<const Detection> dets, std::span<const GroundTruthObject> gts, Difficulty band,
                             const EvalOptions &opts = {});
BandHistogram band_histogram(std::span<const EvalFrame> frames, Difficulty band, const EvalOptions &opts = {});

enum class ApMode { Ap11, Ap40, Both };
ApMode parse_ap_mode(std::string_view text);
std::string_view to_string(ApMode mode);

struct BandReport
{
    Difficulty difficulty = Difficulty::Moderate;
    std::optional<double> ap_11;
    std::optional<double> ap_40;
    std::size_t gt_count = 0;
    std::size_t tp = 0; // at the score floor
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::vector<PRPoint> pr_curve;
};

struct ApReport
{
    std::vector<std::pair<std::string, std::string>> metadata;
    std::vector<BandReport> bands;

    const BandReport &band(Difficulty d) const;
};

/// Pools every frame in (score descending, frame, index) order and evaluates
/// each requested band. Throws InputError when a band has no ground truth.
ApReport evaluate(std::span<const EvalFrame> frames, std::span<const Difficulty> bands, ApMode mode,
                  double score_floor = 0.0, const EvalOptions &opts = {});

enum class ReportFormat { Json, Csv };

/// JSON holds the whole report; CSV holds the PR points of every band. All
/// reals use fixed 6-decimal formatting.
std::string format_report(const ApReport &report, ReportFormat format);
void emit_report(const ApReport &report, const std::filesystem::path &path, ReportFormat format);
ApReport parse_report_json(std::string_view text);

/// CSV with header `band,tp,fp`, one row per confidence band.
std::string format_band_csv(const BandHistogram &h);

} // namespace latefusion
