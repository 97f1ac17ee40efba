#include "latefusion/matching.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "latefusion/parallel.hpp"
#include "latefusion/random.hpp"

namespace latefusion {

namespace {

constexpr std::array<std::string_view, 17> kFeatureNames{
    "l_cx", "l_cy", "l_w", "l_h",
    "c_cx", "c_cy", "c_w", "c_h",
    "s_l", "s_c", "iou_lc",
    "c2_cx", "c2_cy", "c2_w", "c2_h", "s_c2", "iou_lc2"};

void put_box(FeatureVector &v, std::size_t at, const NormalizedBox &n)
{
    v[at + 0] = n.cx;
    v[at + 1] = n.cy;
    v[at + 2] = n.w;
    v[at + 3] = n.h;
}

void put_match(FeatureVector &v, std::size_t box_at, std::size_t score_at, std::size_t iou_at,
               const std::optional<CameraMatch> &m, const ImageDims &dims)
{
    if (!m)
        return;
    put_box(v, box_at, normalize(m->detection->box, dims));
    v[score_at] = m->detection->score;
    v[iou_at] = m->iou;
}

std::vector<Detection> of_class(std::vector<Detection> dets, std::string_view class_name)
{
    std::erase_if(dets, [&](const Detection &d) { return !same_class(d.class_name, class_name); });
    return dets;
}

} // namespace

std::size_t feature_count(FeatureLayout layout) noexcept
{
    return layout == FeatureLayout::Dual17 ? 17 : 11;
}

std::string_view to_string(FeatureLayout layout)
{
    return layout == FeatureLayout::Dual17 ? "dual_17" : "single_11";
}

FeatureLayout parse_feature_layout(std::string_view text)
{
    if (text == "single_11")
        return FeatureLayout::Single11;
    if (text == "dual_17")
        return FeatureLayout::Dual17;
    throw InputError(fmt::format("unknown feature layout '{}'", text));
}

std::span<const std::string_view> feature_names(FeatureLayout layout)
{
    return {kFeatureNames.data(), feature_count(layout)};
}

FeatureVector::FeatureVector(FeatureLayout layout, std::span<const double> values) : layout_(layout)
{
    if (values.size() != size())
        throw InputError(fmt::format("feature vector needs {} values, got {}", size(), values.size()));
    std::copy(values.begin(), values.end(), values_.begin());
}

void MatchConfig::validate() const
{
    if (!(0.0 <= tau_match_openvocab && tau_match_openvocab <= tau_match && tau_match <= 1.0))
        throw InputError(fmt::format("match thresholds must satisfy 0 <= open-vocab ({}) <= standard ({}) <= 1",
                                     tau_match_openvocab, tau_match));
    if (!(tau_gt > 0.0 && tau_gt <= 1.0))
        throw InputError(fmt::format("ground-truth IoU threshold {} outside (0, 1]", tau_gt));
}

std::optional<CameraMatch> match_camera(const Detection &lidar, std::span<const Detection> cams, double tau)
{
    std::optional<CameraMatch> best;
    for (std::size_t i = 0; i < cams.size(); ++i) {
        const double overlap = iou(lidar.box, cams[i].box);
        if (overlap <= 0.0 || overlap < tau)
            continue;
        const bool better = !best || overlap > best->iou ||
                            (overlap == best->iou && cams[i].score > best->detection->score);
        if (better)
            best = CameraMatch{&cams[i], i, overlap};
    }
    return best;
}

FeatureVector build_feature_vector(const Detection &lidar, const std::optional<CameraMatch> &first,
                                   const std::optional<CameraMatch> &second, const ImageDims &dims,
                                   FeatureLayout layout)
{
    if (second && layout != FeatureLayout::Dual17)
        throw InputError("second camera match supplied for a single-camera layout");
    FeatureVector v(layout);
    put_box(v, slot::lidar_box, normalize(lidar.box, dims));
    v[slot::lidar_score] = lidar.score;
    put_match(v, slot::camera_box, slot::camera_score, slot::camera_iou, first, dims);
    if (layout == FeatureLayout::Dual17)
        put_match(v, slot::camera2_box, slot::camera2_score, slot::camera2_iou, second, dims);
    return v;
}

int label_sample(const Detection &lidar, std::span<const GroundTruthObject> gts, double tau_gt)
{
    double best = 0.0;
    for (const auto &g : gts)
        best = std::max(best, iou(lidar.box, g.box));
    return best >= tau_gt ? 1 : 0;
}

std::vector<GroundTruthObject> labeling_targets(std::span<const GroundTruthObject> gts, std::string_view class_name)
{
    std::vector<GroundTruthObject> out;
    for (const auto &g : gts)
        if (!g.is_dont_care() && same_class(g.class_name, class_name))
            out.push_back(g);
    return out;
}

FeatureLayout FusionInputs::layout() const
{
    if (cameras.empty() || cameras.size() > 2)
        throw InputError(fmt::format("expected one or two camera sources, got {}", cameras.size()));
    return cameras.size() == 2 ? FeatureLayout::Dual17 : FeatureLayout::Single11;
}

FrameFeatures build_frame_features(const FusionInputs &in, const FrameId &frame)
{
    const FeatureLayout layout = in.layout();
    FrameFeatures out;
    out.frame = frame;
    out.lidar = load_detections(frame_file(in.lidar_dir, frame), Modality::Lidar);

    std::array<std::vector<Detection>, 2> cams;
    for (std::size_t c = 0; c < in.cameras.size(); ++c) {
        const auto path = frame_file(in.cameras[c].dir, frame);
        if (std::filesystem::exists(path))
            cams[c] = of_class(load_detections(path, c == 0 ? Modality::Camera : Modality::Camera2), in.class_name);
    }

    const ImageDims dims = in.meta.dims(frame);
    for (const auto &d : out.lidar) {
        if (!same_class(d.class_name, in.class_name))
            continue;
        std::array<std::optional<CameraMatch>, 2> matches;
        for (std::size_t c = 0; c < in.cameras.size(); ++c) {
            const double tau = in.cameras[c].open_vocabulary ? in.config.tau_match_openvocab : in.config.tau_match;
            matches[c] = match_camera(d, cams[c], tau);
        }
        out.candidates.push_back(d);
        out.features.push_back(build_feature_vector(d, matches[0], matches[1], dims, layout));
    }
    return out;
}

Dataset build_dataset(const FusionInputs &in, const std::filesystem::path &gt_dir, std::span<const FrameId> frames)
{
    in.config.validate();
    const FeatureLayout layout = in.layout();
    const std::vector<FrameId> all = frames.empty() ? list_frames(in.lidar_dir)
                                                    : std::vector<FrameId>(frames.begin(), frames.end());

    std::vector<std::string> missing;
    for (const auto &f : all)
        if (!std::filesystem::exists(frame_file(gt_dir, f)))
            missing.push_back(f.str());
    if (!missing.empty())
        throw InputError(fmt::format("{} LiDAR frame(s) have no ground-truth label file in {}: {}",
                                     missing.size(), gt_dir.string(), fmt::join(missing, " ")));

    std::vector<std::vector<TrainingSample>> per_frame(all.size());
    parallel_for(all.size(), in.threads, [&](std::size_t i) {
        const FrameFeatures ff = build_frame_features(in, all[i]);
        const auto gts = labeling_targets(parse_label_file(frame_file(gt_dir, all[i])), in.class_name);
        auto &out = per_frame[i];
        out.reserve(ff.candidates.size());
        for (std::size_t k = 0; k < ff.candidates.size(); ++k)
            out.push_back({ff.features[k], label_sample(ff.candidates[k], gts, in.config.tau_gt), all[i],
                           ff.candidates[k].file_index});
    });

    Dataset data;
    data.layout = layout;
    for (auto &chunk : per_frame)
        std::move(chunk.begin(), chunk.end(), std::back_inserter(data.samples));
    return data;
}

FrameSplit split_frames(std::span<const FrameId> frames, double train_fraction, std::uint64_t seed)
{
    if (frames.size() < 2)
        throw InputError("need at least two frames to split");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw InputError(fmt::format("train fraction {} outside (0, 1)", train_fraction));

    std::vector<FrameId> order(frames.begin(), frames.end());
    std::sort(order.begin(), order.end());
    Rng rng(seed);
    rng.shuffle(order);

    const auto n = order.size();
    auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
    n_train = std::clamp<std::size_t>(n_train, 1, n - 1);

    FrameSplit split;
    split.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    split.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

Dataset select_frames(const Dataset &data, std::span<const FrameId> frames)
{
    Dataset out;
    out.layout = data.layout;
    for (const auto &s : data.samples)
        if (std::find(frames.begin(), frames.end(), s.frame) != frames.end())
            out.samples.push_back(s);
    return out;
}

std::string format_dataset_csv(const Dataset &data)
{
    std::string text = "frame,lidar_index";
    for (auto name : feature_names(data.layout))
        text += fmt::format(",{}", name);
    text += ",label\n";
    for (const auto &s : data.samples) {
        if (s.features.layout() != data.layout)
            throw InputError("sample layout differs from dataset layout");
        text += fmt::format("{},{}", s.frame.str(), s.lidar_index);
        for (double v : s.features.values())
            text += fmt::format(",{}", v);
        text += fmt::format(",{}\n", s.label);
    }
    return text;
}

void write_dataset_csv(const Dataset &data, const std::filesystem::path &path)
{
    write_text_file(path, format_dataset_csv(data));
}

Dataset parse_dataset_csv(std::string_view text, const std::string &source)
{
    auto split_commas = [](std::string_view line) {
        std::vector<std::string_view> out;
        std::size_t pos = 0;
        while (true) {
            const auto comma = line.find(',', pos);
            out.push_back(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
            if (comma == std::string_view::npos)
                break;
            pos = comma + 1;
        }
        return out;
    };

    Dataset data;
    std::size_t line_no = 0;
    std::size_t columns = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos)
            end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        if (line.empty())
            continue;

        const auto cells = split_commas(line);
        if (columns == 0) {
            if (cells.size() == 14)
                data.layout = FeatureLayout::Single11;
            else if (cells.size() == 20)
                data.layout = FeatureLayout::Dual17;
            else
                throw ParseError(source, line_no, fmt::format("header has {} columns, expected 14 or 20", cells.size()));
            const auto names = feature_names(data.layout);
            bool ok = cells[0] == "frame" && cells[1] == "lidar_index" && cells.back() == "label";
            for (std::size_t i = 0; ok && i < names.size(); ++i)
                ok = cells[2 + i] == names[i];
            if (!ok)
                throw ParseError(source, line_no, "unexpected header");
            columns = cells.size();
            continue;
        }

        if (cells.size() != columns)
            throw ParseError(source, line_no, fmt::format("row has {} columns, expected {}", cells.size(), columns));
        try {
            TrainingSample s;
            s.frame = FrameId(std::string(cells[0]));
            auto parse_uint = [](std::string_view cell) {
                std::size_t v = 0;
                const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
                if (ec != std::errc{} || ptr != cell.data() + cell.size())
                    throw std::invalid_argument(fmt::format("'{}' is not an unsigned integer", cell));
                return v;
            };
            s.lidar_index = parse_uint(cells[1]);
            s.features = FeatureVector(data.layout);
            for (std::size_t i = 0; i < s.features.size(); ++i) {
                const auto cell = cells[2 + i];
                double v = 0.0;
                const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
                if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(v))
                    throw std::invalid_argument(fmt::format("column {} is not a number: '{}'", feature_names(data.layout)[i], cell));
                s.features[i] = v;
            }
            const auto label = parse_uint(cells.back());
            if (label > 1)
                throw std::invalid_argument(fmt::format("label must be 0 or 1, got {}", label));
            s.label = static_cast<int>(label);
            data.samples.push_back(std::move(s));
        } catch (const std::exception &e) {
            throw ParseError(source, line_no, e.what());
        }
    }
    if (columns == 0)
        throw ParseError(source, 1, "missing header row");
    return data;
}

Dataset read_dataset_csv(const std::filesystem::path &path)
{
    return parse_dataset_csv(read_text_file(path), path.string());
}

} // namespace latefusion
