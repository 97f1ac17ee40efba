#include "latefusion/kitti_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>

namespace latefusion {

ParseError::ParseError(std::string source, std::size_t line, const std::string &what)
    : Error(fmt::format("{}:{}: {}", source, line, what)), source_(std::move(source)), line_(line)
{}

namespace {

std::vector<std::string_view> split_ws(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])))
            ++i;
        const std::size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])))
            ++i;
        if (i > start)
            out.push_back(line.substr(start, i - start));
    }
    return out;
}

bool is_blank(std::string_view line)
{
    return std::all_of(line.begin(), line.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

std::string_view strip_cr(std::string_view line)
{
    if (!line.empty() && line.back() == '\r')
        line.remove_suffix(1);
    return line;
}

// Visits each line of `text` with its 1-based line number.
template <typename F>
void for_each_line(std::string_view text, F &&visit)
{
    std::size_t number = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t end = text.find('\n', pos);
        const std::size_t stop = end == std::string_view::npos ? text.size() : end;
        visit(++number, strip_cr(text.substr(pos, stop - pos)));
        pos = stop + 1;
    }
}

double to_double(std::string_view token, std::string_view field)
{
    double value = 0.0;
    const char *first = token.data();
    const char *last = token.data() + token.size();
    if (!token.empty() && token.front() == '+')
        ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || !std::isfinite(value))
        throw std::invalid_argument(fmt::format("field '{}' is not a number: '{}'", field, token));
    return value;
}

int to_int_level(std::string_view token, std::string_view field)
{
    const double v = to_double(token, field);
    if (v != std::floor(v) || v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
        throw std::invalid_argument(fmt::format("field '{}' is not an integer: '{}'", field, token));
    return static_cast<int>(v);
}

Box2D parse_box(std::span<const std::string_view> tokens)
{
    const double l = to_double(tokens[0], "bbox_left");
    const double t = to_double(tokens[1], "bbox_top");
    const double r = to_double(tokens[2], "bbox_right");
    const double b = to_double(tokens[3], "bbox_bottom");
    if (l > r || t > b)
        throw std::invalid_argument(fmt::format("bbox has negative extent: {} {} {} {}", l, t, r, b));
    return Box2D(l, t, r, b);
}

std::array<double, 7> parse_extra(std::span<const std::string_view> tokens)
{
    static constexpr std::array<std::string_view, 7> names{"height", "width", "length", "x", "y", "z", "rotation_y"};
    std::array<double, 7> out{};
    for (std::size_t i = 0; i < 7; ++i)
        out[i] = to_double(tokens[i], names[i]);
    return out;
}

GroundTruthObject parse_label_tokens(std::span<const std::string_view> tok)
{
    if (tok.size() < 15)
        throw std::invalid_argument(fmt::format("expected at least 15 fields, found {}", tok.size()));
    GroundTruthObject g;
    g.class_name = std::string(tok[0]);
    g.truncation = to_double(tok[1], "truncated");
    g.occlusion = to_int_level(tok[2], "occluded");
    g.alpha = to_double(tok[3], "alpha");
    g.box = parse_box(tok.subspan(4, 4));
    g.extra3d = parse_extra(tok.subspan(8, 7));
    if (!g.is_dont_care()) {
        if (g.truncation < 0.0 || g.truncation > 1.0)
            throw std::invalid_argument(fmt::format("truncation {} outside [0, 1]", g.truncation));
        if (g.occlusion < 0 || g.occlusion > 3)
            throw std::invalid_argument(fmt::format("occlusion {} outside {{0, 1, 2, 3}}", g.occlusion));
    }
    return g;
}

Detection parse_detection_tokens(std::span<const std::string_view> tok)
{
    if (tok.size() < 16)
        throw std::invalid_argument(
            tok.size() == 15 ? std::string("missing score field (16th column)")
                             : fmt::format("expected 16 fields, found {}", tok.size()));
    Detection d;
    d.class_name = std::string(tok[0]);
    d.truncation = to_double(tok[1], "truncated");
    d.occlusion = to_int_level(tok[2], "occluded");
    d.alpha = to_double(tok[3], "alpha");
    d.box = parse_box(tok.subspan(4, 4));
    d.extra3d = parse_extra(tok.subspan(8, 7));
    d.score = to_double(tok[15], "score");
    return d;
}

template <typename T>
std::vector<T> strict(ScanResult<T> scan, const std::filesystem::path &path)
{
    if (!scan.issues.empty())
        throw ParseError(path.string(), scan.issues.front().line, scan.issues.front().message);
    return std::move(scan.items);
}

} // namespace

FrameId::FrameId(std::string text) : text_(std::move(text))
{
    if (text_.empty() || !std::all_of(text_.begin(), text_.end(), [](char c) { return c >= '0' && c <= '9'; }))
        throw InputError(fmt::format("frame id '{}' is not a non-negative integer", text_));
    const auto [ptr, ec] = std::from_chars(text_.data(), text_.data() + text_.size(), value_);
    if (ec != std::errc{})
        throw InputError(fmt::format("frame id '{}' is out of range", text_));
}

FrameId FrameId::from_index(std::uint64_t index, int width)
{
    return FrameId(fmt::format("{:0{}d}", index, width));
}

std::string_view to_string(Modality m)
{
    switch (m) {
    case Modality::Lidar: return "lidar";
    case Modality::Camera: return "camera";
    case Modality::Camera2: return "camera2";
    }
    return "?";
}

std::string_view to_string(Difficulty d)
{
    switch (d) {
    case Difficulty::Easy: return "easy";
    case Difficulty::Moderate: return "moderate";
    case Difficulty::Hard: return "hard";
    case Difficulty::Ignored: return "ignored";
    }
    return "?";
}

Difficulty parse_difficulty(std::string_view text)
{
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "easy")
        return Difficulty::Easy;
    if (lower == "moderate")
        return Difficulty::Moderate;
    if (lower == "hard")
        return Difficulty::Hard;
    throw InputError(fmt::format("unknown difficulty '{}' (expected easy, moderate or hard)", text));
}

bool same_class(std::string_view a, std::string_view b)
{
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
           });
}

bool GroundTruthObject::is_dont_care() const
{
    return same_class(class_name, "DontCare");
}

ScanResult<GroundTruthObject> scan_labels(std::string_view text)
{
    ScanResult<GroundTruthObject> out;
    for_each_line(text, [&](std::size_t number, std::string_view line) {
        if (is_blank(line))
            return;
        ++out.lines;
        try {
            out.items.push_back(parse_label_tokens(split_ws(line)));
        } catch (const std::exception &e) {
            out.issues.push_back({number, e.what()});
        }
    });
    return out;
}

ScanResult<Detection> scan_detections(std::string_view text, Modality modality, const FrameId &frame)
{
    ScanResult<Detection> out;
    for_each_line(text, [&](std::size_t number, std::string_view line) {
        if (is_blank(line))
            return;
        ++out.lines;
        try {
            Detection d = parse_detection_tokens(split_ws(line));
            d.modality = modality;
            d.frame = frame;
            d.file_index = out.items.size();
            d.raw_line = std::string(line);
            out.items.push_back(std::move(d));
        } catch (const std::exception &e) {
            out.issues.push_back({number, e.what()});
        }
    });
    return out;
}

std::vector<GroundTruthObject> parse_label_file(const std::filesystem::path &path)
{
    return strict(scan_labels(read_text_file(path)), path);
}

std::vector<Detection> parse_detection_file(const std::filesystem::path &path, Modality modality)
{
    const FrameId frame(path.stem().string());
    return strict(scan_detections(read_text_file(path), modality, frame), path);
}

void rescale_scores(std::span<Detection> detections)
{
    if (detections.empty())
        return;
    const auto [lo_it, hi_it] = std::minmax_element(detections.begin(), detections.end(),
        [](const Detection &a, const Detection &b) { return a.score < b.score; });
    const double lo = lo_it->score;
    const double hi = hi_it->score;
    if (lo >= 0.0 && hi <= 1.0)
        return;
    if (hi == lo) {
        for (auto &d : detections)
            d.score = 1.0;
        return;
    }
    for (auto &d : detections)
        d.score = (d.score - lo) / (hi - lo);
}

std::vector<Detection> load_detections(const std::filesystem::path &path, Modality modality)
{
    auto dets = parse_detection_file(path, modality);
    rescale_scores(dets);
    return dets;
}

bool within_band(const GroundTruthObject &g, Difficulty band)
{
    const double height = g.box.height();
    switch (band) {
    case Difficulty::Easy: return height >= 40.0 && g.occlusion <= 0 && g.truncation <= 0.15;
    case Difficulty::Moderate: return height >= 25.0 && g.occlusion <= 1 && g.truncation <= 0.30;
    case Difficulty::Hard: return height >= 25.0 && g.occlusion <= 2 && g.truncation <= 0.50;
    case Difficulty::Ignored: return true;
    }
    return false;
}

Difficulty assign_difficulty(const GroundTruthObject &g)
{
    for (Difficulty d : {Difficulty::Easy, Difficulty::Moderate, Difficulty::Hard})
        if (within_band(g, d))
            return d;
    return Difficulty::Ignored;
}

namespace {

std::string format_common(std::string_view cls, double trunc, int occl, double alpha, const Box2D &b,
                          const std::array<double, 7> &x)
{
    return fmt::format("{} {:.6f} {} {:.6f} {:.6f} {:.6f} {:.6f} {:.6f} {:.6f} {:.6f} {:.6f} {:.6f} {:.6f} {:.6f} {:.6f}",
        cls, trunc, occl, alpha, b.x_min(), b.y_min(), b.x_max(), b.y_max(),
        x[0], x[1], x[2], x[3], x[4], x[5], x[6]);
}

} // namespace

std::string format_detection_line(const Detection &d)
{
    return fmt::format("{} {:.6f}", format_common(d.class_name, d.truncation, d.occlusion, d.alpha, d.box, d.extra3d), d.score);
}

std::string format_label_line(const GroundTruthObject &g)
{
    return format_common(g.class_name, g.truncation, g.occlusion, g.alpha, g.box, g.extra3d);
}

void write_detection_file(std::span<const Detection> detections, const std::filesystem::path &path)
{
    std::string text;
    for (const auto &d : detections) {
        if (!detections.empty() && !(d.frame == detections.front().frame))
            throw InputError(fmt::format("{}: detections span several frames", path.string()));
        text += format_detection_line(d);
        text += '\n';
    }
    write_text_file(path, text);
}

void write_label_file(std::span<const GroundTruthObject> objects, const std::filesystem::path &path)
{
    std::string text;
    for (const auto &g : objects) {
        text += format_label_line(g);
        text += '\n';
    }
    write_text_file(path, text);
}

void FrameMeta::add(const FrameId &frame, ImageDims dims)
{
    if (!table_.emplace(frame, dims).second)
        throw InputError(fmt::format("duplicate frame {} in frame metadata", frame.str()));
}

ImageDims FrameMeta::dims(const FrameId &frame) const
{
    if (auto it = table_.find(frame); it != table_.end())
        return it->second;
    if (fallback_)
        return *fallback_;
    throw InputError(fmt::format("no image dimensions for frame {}", frame.str()));
}

FrameMeta load_frame_meta(const std::filesystem::path &path, std::optional<ImageDims> fallback)
{
    FrameMeta meta(fallback);
    if (path.empty() || !std::filesystem::exists(path)) {
        if (!fallback)
            throw IoError(fmt::format("frame metadata file not found: {}", path.string()));
        return meta;
    }
    const std::string text = read_text_file(path);
    for_each_line(text, [&](std::size_t number, std::string_view line) {
        if (is_blank(line) || line.front() == '#')
            return;
        const auto tok = split_ws(line);
        try {
            std::string_view w_tok, h_tok;
            if (tok.size() == 3) {
                w_tok = tok[1];
                h_tok = tok[2];
            } else if (tok.size() == 2 && tok[1].find('x') != std::string_view::npos) {
                const auto x = tok[1].find('x');
                w_tok = tok[1].substr(0, x);
                h_tok = tok[1].substr(x + 1);
            } else {
                throw std::invalid_argument("expected 'frame width height'");
            }
            const int w = to_int_level(w_tok, "width");
            const int h = to_int_level(h_tok, "height");
            if (w <= 0 || h <= 0)
                throw std::invalid_argument(fmt::format("image dims must be positive, got {}x{}", w, h));
            meta.add(FrameId(std::string(tok[0])), ImageDims(w, h));
        } catch (const ParseError &) {
            throw;
        } catch (const std::exception &e) {
            throw ParseError(path.string(), number, e.what());
        }
    });
    return meta;
}

void write_frame_meta(const FrameMeta &meta, const std::filesystem::path &path)
{
    std::string text;
    for (const auto &[frame, dims] : meta.entries())
        text += fmt::format("{} {} {}\n", frame.str(), dims.width, dims.height);
    write_text_file(path, text);
}

std::vector<FrameId> list_frames(const std::filesystem::path &dir)
{
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec))
        throw IoError(fmt::format("not a directory: {}", dir.string()));
    std::vector<FrameId> frames;
    for (const auto &entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".txt")
            continue;
        frames.emplace_back(entry.path().stem().string());
    }
    std::sort(frames.begin(), frames.end());
    return frames;
}

std::filesystem::path frame_file(const std::filesystem::path &dir, const FrameId &frame)
{
    return dir / (frame.str() + ".txt");
}

std::vector<FrameId> read_frame_list(const std::filesystem::path &path)
{
    std::vector<FrameId> frames;
    const std::string text = read_text_file(path);
    for_each_line(text, [&](std::size_t, std::string_view line) {
        const auto tok = split_ws(line);
        if (!tok.empty() && tok[0].front() != '#')
            frames.emplace_back(std::string(tok[0]));
    });
    return frames;
}

void write_frame_list(std::span<const FrameId> frames, const std::filesystem::path &path)
{
    std::string text;
    for (const auto &f : frames)
        text += f.str() + '\n';
    write_text_file(path, text);
}

std::string read_text_file(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError(fmt::format("cannot open {} for reading", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad())
        throw IoError(fmt::format("read failed: {}", path.string()));
    return std::move(ss).str();
}

void write_text_file(const std::filesystem::path &path, std::string_view text)
{
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError(fmt::format("cannot open {} for writing", path.string()));
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.flush();
    if (!out)
        throw IoError(fmt::format("write failed: {}", path.string()));
}

} // namespace latefusion
