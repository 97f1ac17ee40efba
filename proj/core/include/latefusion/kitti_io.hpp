#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "latefusion/error.hpp"
#include "latefusion/geometry.hpp"

namespace latefusion {

/// Frame identifier as it appears in file names ("000123"). Compared by
/// numeric value, then by spelling.
class FrameId
{
public:
    FrameId() = default;
    explicit FrameId(std::string text);
    static FrameId from_index(std::uint64_t index, int width = 6);

    const std::string &str() const noexcept { return text_; }
    std::uint64_t value() const noexcept { return value_; }

    friend bool operator==(const FrameId &a, const FrameId &b) { return a.text_ == b.text_; }
    friend std::strong_ordering operator<=>(const FrameId &a, const FrameId &b)
    {
        if (auto c = a.value_ <=> b.value_; c != 0)
            return c;
        return a.text_ <=> b.text_;
    }

private:
    std::string text_;
    std::uint64_t value_ = 0;
};

enum class Modality { Lidar, Camera, Camera2 };
std::string_view to_string(Modality m);

enum class Difficulty { Easy, Moderate, Hard, Ignored };
std::string_view to_string(Difficulty d);
Difficulty parse_difficulty(std::string_view text);

/// One line of a KITTI label file. The 3D fields are carried through
/// untouched: dims (h, w, l), location (x, y, z), rotation_y.
struct GroundTruthObject
{
    std::string class_name;
    double truncation = 0.0;
    int occlusion = 0;
    double alpha = -10.0;
    Box2D box;
    std::array<double, 7> extra3d{-1.0, -1.0, -1.0, -1000.0, -1000.0, -1000.0, -10.0};

    bool is_dont_care() const;
};

/// One line of a KITTI result file (label fields plus a trailing score).
struct Detection
{
    std::string class_name;
    Box2D box;
    double score = 0.0;
    Modality modality = Modality::Lidar;
    FrameId frame;
    double truncation = -1.0;
    int occlusion = -1;
    double alpha = -10.0;
    std::array<double, 7> extra3d{-1.0, -1.0, -1.0, -1000.0, -1000.0, -1000.0, -10.0};
    /// Position among the parsed objects of the source file.
    std::size_t file_index = 0;
    /// Source text of the line, without the newline. Empty for generated detections.
    std::string raw_line;
};

struct ParseIssue
{
    std::size_t line = 0;
    std::string message;
};

/// Result of a lenient scan: every non-empty line becomes either an item or an issue.
template <typename T>
struct ScanResult
{
    std::vector<T> items;
    std::vector<ParseIssue> issues;
    std::size_t lines = 0;
};

ScanResult<GroundTruthObject> scan_labels(std::string_view text);
ScanResult<Detection> scan_detections(std::string_view text, Modality modality, const FrameId &frame);

/// Strict parsers: the first malformed line raises ParseError.
std::vector<GroundTruthObject> parse_label_file(const std::filesystem::path &path);
std::vector<Detection> parse_detection_file(const std::filesystem::path &path, Modality modality);

/// Min-max rescales scores into [0, 1] when any of them lies outside that
/// range. A file whose scores are all equal and out of range maps to 1.
void rescale_scores(std::span<Detection> detections);

/// parse_detection_file followed by rescale_scores.
std::vector<Detection> load_detections(const std::filesystem::path &path, Modality modality);

/// KITTI devkit difficulty for a ground-truth object. Bands are cumulative:
/// an Easy object also satisfies the Moderate and Hard predicates.
Difficulty assign_difficulty(const GroundTruthObject &g);
bool within_band(const GroundTruthObject &g, Difficulty band);

/// Case-insensitive class name comparison.
bool same_class(std::string_view a, std::string_view b);

std::string format_detection_line(const Detection &d);
std::string format_label_line(const GroundTruthObject &g);
void write_detection_file(std::span<const Detection> detections, const std::filesystem::path &path);
void write_label_file(std::span<const GroundTruthObject> objects, const std::filesystem::path &path);

/// Per-frame image sizes with a fallback for frames that are not listed.
class FrameMeta
{
public:
    FrameMeta() = default;
    explicit FrameMeta(std::optional<ImageDims> fallback) : fallback_(fallback) {}

    void add(const FrameId &frame, ImageDims dims);
    ImageDims dims(const FrameId &frame) const;
    bool contains(const FrameId &frame) const { return table_.contains(frame); }
    std::size_t size() const noexcept { return table_.size(); }
    const std::map<FrameId, ImageDims> &entries() const noexcept { return table_; }

private:
    std::map<FrameId, ImageDims> table_;
    std::optional<ImageDims> fallback_ = ImageDims{};
};

/// Reads `frame width height` rows (or `frame WIDTHxHEIGHT`). A missing file
/// yields an empty table that answers with the fallback, when one is given.
FrameMeta load_frame_meta(const std::filesystem::path &path, std::optional<ImageDims> fallback = ImageDims{});
void write_frame_meta(const FrameMeta &meta, const std::filesystem::path &path);

/// Frames with a `<frame>.txt` file in the directory, sorted.
std::vector<FrameId> list_frames(const std::filesystem::path &dir);
std::filesystem::path frame_file(const std::filesystem::path &dir, const FrameId &frame);

/// Reads a frame list (first whitespace token of each non-empty line).
std::vector<FrameId> read_frame_list(const std::filesystem::path &path);
void write_frame_list(std::span<const FrameId> frames, const std::filesystem::path &path);

std::string read_text_file(const std::filesystem::path &path);
void write_text_file(const std::filesystem::path &path, std::string_view text);

} // namespace latefusion
