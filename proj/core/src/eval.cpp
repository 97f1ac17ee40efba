#include "latefusion/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "latefusion/parallel.hpp"

namespace latefusion {

namespace {

enum class GtRole { Counted, Ignorable, DontCare, Unrelated };

GtRole role_of(const GroundTruthObject &g, Difficulty band, const EvalOptions &opts)
{
    if (g.is_dont_care())
        return GtRole::DontCare;
    if (same_class(g.class_name, opts.class_name))
        return within_band(g, band) ? GtRole::Counted : GtRole::Ignorable;
    if (opts.ignore_van && same_class(opts.class_name, "Car") && same_class(g.class_name, "Van"))
        return GtRole::Ignorable;
    return GtRole::Unrelated;
}

std::vector<std::size_t> by_score_desc(std::span<const Detection> dets)
{
    std::vector<std::size_t> order(dets.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });
    return order;
}

// Mean interpolated precision over recall levels k/levels, k = first..levels.
// Level k is reached by a point when tp * levels >= k * gt, which keeps the
// comparison exact.
double interpolated_ap(std::span<const PRPoint> pr, std::size_t levels, std::size_t first)
{
    if (pr.empty())
        return 0.0;
    const std::size_t gt = pr.front().tp + pr.front().fn;
    std::vector<double> suffix_max(pr.size() + 1, 0.0);
    for (std::size_t i = pr.size(); i-- > 0;)
        suffix_max[i] = std::max(suffix_max[i + 1], pr[i].precision);

    double sum = 0.0;
    std::size_t idx = 0;
    for (std::size_t k = first; k <= levels; ++k) {
        while (idx < pr.size() && pr[idx].tp * levels < k * gt)
            ++idx;
        sum += suffix_max[idx];
    }
    return sum / static_cast<double>(levels - first + 1) * 100.0;
}

template <typename F>
void for_each_outcome(std::span<const EvalFrame> frames, Difficulty band, const EvalOptions &opts, F &&visit)
{
    std::vector<std::vector<MatchOutcome>> outcomes(frames.size());
    parallel_for(frames.size(), opts.threads, [&](std::size_t i) {
        outcomes[i] = match_for_eval(frames[i].detections, frames[i].ground_truth, band, opts);
    });
    for (std::size_t i = 0; i < frames.size(); ++i)
        for (std::size_t k = 0; k < outcomes[i].size(); ++k)
            visit(frames[i].detections[k], outcomes[i][k]);
}

} // namespace

std::vector<MatchOutcome> match_for_eval(std::span<const Detection> dets, std::span<const GroundTruthObject> gts,
                                         Difficulty band, const EvalOptions &opts)
{
    std::vector<GtRole> roles(gts.size());
    for (std::size_t g = 0; g < gts.size(); ++g)
        roles[g] = role_of(gts[g], band, opts);
    std::vector<bool> claimed(gts.size(), false);
    std::vector<MatchOutcome> out(dets.size(), MatchOutcome::Ignored);

    for (std::size_t d : by_score_desc(dets)) {
        const Detection &det = dets[d];
        if (!same_class(det.class_name, opts.class_name))
            continue;

        std::optional<std::size_t> best;
        double best_iou = 0.0;
        bool ignorable_hit = false;
        bool dont_care_hit = false;
        for (std::size_t g = 0; g < gts.size(); ++g) {
            const double overlap = iou(det.box, gts[g].box);
            switch (roles[g]) {
            case GtRole::Counted:
                if (!claimed[g] && overlap >= opts.iou_threshold && overlap > best_iou) {
                    best = g;
                    best_iou = overlap;
                }
                break;
            case GtRole::Ignorable:
                ignorable_hit = ignorable_hit || overlap >= opts.iou_threshold;
                break;
            case GtRole::DontCare:
                dont_care_hit = dont_care_hit || overlap >= opts.dont_care_iou;
                break;
            case GtRole::Unrelated:
                break;
            }
        }

        if (best) {
            claimed[*best] = true;
            out[d] = MatchOutcome::TruePositive;
        } else if (ignorable_hit || dont_care_hit) {
            out[d] = MatchOutcome::Ignored;
        } else {
            out[d] = MatchOutcome::FalsePositive;
        }
    }
    return out;
}

std::size_t band_gt_count(std::span<const GroundTruthObject> gts, Difficulty band, const EvalOptions &opts)
{
    return static_cast<std::size_t>(std::count_if(gts.begin(), gts.end(), [&](const GroundTruthObject &g) {
        return role_of(g, band, opts) == GtRole::Counted;
    }));
}

std::vector<PRPoint> pr_curve(std::span<const ScoredOutcome> ranked, std::size_t gt_count)
{
    if (gt_count == 0)
        throw InputError("no ground truth in the evaluated band; recall is undefined");
    std::vector<ScoredOutcome> kept;
    kept.reserve(ranked.size());
    std::copy_if(ranked.begin(), ranked.end(), std::back_inserter(kept),
                 [](const ScoredOutcome &s) { return s.outcome != MatchOutcome::Ignored; });
    std::stable_sort(kept.begin(), kept.end(), [](const ScoredOutcome &a, const ScoredOutcome &b) { return a.score > b.score; });

    std::vector<PRPoint> curve;
    std::size_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < kept.size(); ++i) {
        (kept[i].outcome == MatchOutcome::TruePositive ? tp : fp) += 1;
        if (i + 1 < kept.size() && kept[i + 1].score == kept[i].score)
            continue;
        PRPoint p;
        p.score_threshold = kept[i].score;
        p.tp = tp;
        p.fp = fp;
        p.fn = gt_count - std::min(tp, gt_count);
        p.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        p.recall = static_cast<double>(tp) / static_cast<double>(gt_count);
        curve.push_back(p);
    }
    return curve;
}

double ap_11(std::span<const PRPoint> pr)
{
    return interpolated_ap(pr, 10, 0);
}

double ap_40(std::span<const PRPoint> pr)
{
    return interpolated_ap(pr, 40, 1);
}

std::vector<EvalFrame> load_eval_frames(const std::filesystem::path &gt_dir, const std::filesystem::path &det_dir,
                                        std::span<const FrameId> frames)
{
    const std::vector<FrameId> ids = frames.empty() ? list_frames(gt_dir) : std::vector<FrameId>(frames.begin(), frames.end());
    std::vector<EvalFrame> out;
    out.reserve(ids.size());
    for (const auto &id : ids) {
        EvalFrame f;
        f.frame = id;
        f.ground_truth = parse_label_file(frame_file(gt_dir, id));
        const auto det_path = frame_file(det_dir, id);
        if (std::filesystem::exists(det_path))
            f.detections = load_detections(det_path, Modality::Lidar);
        out.push_back(std::move(f));
    }
    return out;
}

TpFp tp_fp_table(std::span<const Detection> dets, std::span<const GroundTruthObject> gts, Difficulty band,
                 double score_floor, const EvalOptions &opts)
{
    std::vector<Detection> above;
    std::copy_if(dets.begin(), dets.end(), std::back_inserter(above), [&](const Detection &d) { return d.score >= score_floor; });
    TpFp counts;
    for (auto o : match_for_eval(above, gts, band, opts)) {
        if (o == MatchOutcome::TruePositive)
            ++counts.tp;
        else if (o == MatchOutcome::FalsePositive)
            ++counts.fp;
    }
    return counts;
}

TpFp tp_fp_table(std::span<const EvalFrame> frames, Difficulty band, double score_floor, const EvalOptions &opts)
{
    TpFp counts;
    for_each_outcome(frames, band, opts, [&](const Detection &d, MatchOutcome o) {
        if (d.score < score_floor)
            return;
        if (o == MatchOutcome::TruePositive)
            ++counts.tp;
        else if (o == MatchOutcome::FalsePositive)
            ++counts.fp;
    });
    return counts;
}

std::size_t BandHistogram::bin_of(double score)
{
    if (!(score > 0.0))
        return 0;
    const double scaled = std::floor(score * static_cast<double>(bins));
    return scaled >= static_cast<double>(bins - 1) ? bins - 1 : static_cast<std::size_t>(scaled);
}

std::size_t BandHistogram::total_tp() const
{
    return std::accumulate(tp.begin(), tp.end(), std::size_t{0});
}

std::size_t BandHistogram::total_fp() const
{
    return std::accumulate(fp.begin(), fp.end(), std::size_t{0});
}

BandHistogram band_histogram(std::span<const Detection> dets, std::span<const GroundTruthObject> gts, Difficulty band,
                             const EvalOptions &opts)
{
    BandHistogram h;
    const auto outcomes = match_for_eval(dets, gts, band, opts);
    for (std::size_t i = 0; i < dets.size(); ++i) {
        if (outcomes[i] == MatchOutcome::TruePositive)
            ++h.tp[BandHistogram::bin_of(dets[i].score)];
        else if (outcomes[i] == MatchOutcome::FalsePositive)
            ++h.fp[BandHistogram::bin_of(dets[i].score)];
    }
    return h;
}

BandHistogram band_histogram(std::span<const EvalFrame> frames, Difficulty band, const EvalOptions &opts)
{
    BandHistogram h;
    for_each_outcome(frames, band, opts, [&](const Detection &d, MatchOutcome o) {
        if (o == MatchOutcome::TruePositive)
            ++h.tp[BandHistogram::bin_of(d.score)];
        else if (o == MatchOutcome::FalsePositive)
            ++h.fp[BandHistogram::bin_of(d.score)];
    });
    return h;
}

ApMode parse_ap_mode(std::string_view text)
{
    if (text == "11")
        return ApMode::Ap11;
    if (text == "40")
        return ApMode::Ap40;
    if (text == "both")
        return ApMode::Both;
    throw InputError(fmt::format("unknown AP mode '{}' (expected 11, 40 or both)", text));
}

std::string_view to_string(ApMode mode)
{
    switch (mode) {
    case ApMode::Ap11: return "11";
    case ApMode::Ap40: return "40";
    case ApMode::Both: return "both";
    }
    return "?";
}

const BandReport &ApReport::band(Difficulty d) const
{
    for (const auto &b : bands)
        if (b.difficulty == d)
            return b;
    throw InputError(fmt::format("report has no {} band", to_string(d)));
}

ApReport evaluate(std::span<const EvalFrame> frames, std::span<const Difficulty> bands, ApMode mode,
                  double score_floor, const EvalOptions &opts)
{
    ApReport report;
    report.metadata = {
        {"class", opts.class_name},
        {"iou_threshold", fmt::format("{:.6f}", opts.iou_threshold)},
        {"dont_care_iou", fmt::format("{:.6f}", opts.dont_care_iou)},
        {"ignore_van", opts.ignore_van ? "true" : "false"},
        {"ap_mode", std::string(to_string(mode))},
        {"score_floor", fmt::format("{:.6f}", score_floor)},
        {"frames", std::to_string(frames.size())},
    };

    for (Difficulty band : bands) {
        BandReport br;
        br.difficulty = band;
        for (const auto &f : frames)
            br.gt_count += band_gt_count(f.ground_truth, band, opts);
        if (br.gt_count == 0)
            throw InputError(fmt::format("no {} ground truth in the {} band", opts.class_name, to_string(band)));

        // Frames are already in order, so a stable sort by score yields
        // (score descending, frame, index).
        std::vector<ScoredOutcome> pooled;
        for_each_outcome(frames, band, opts, [&](const Detection &d, MatchOutcome o) {
            pooled.push_back({d.score, o});
            if (d.score >= score_floor) {
                if (o == MatchOutcome::TruePositive)
                    ++br.tp;
                else if (o == MatchOutcome::FalsePositive)
                    ++br.fp;
            }
        });
        br.fn = br.gt_count - br.tp;
        br.pr_curve = pr_curve(pooled, br.gt_count);
        if (mode != ApMode::Ap40)
            br.ap_11 = ap_11(br.pr_curve);
        if (mode != ApMode::Ap11)
            br.ap_40 = ap_40(br.pr_curve);
        report.bands.push_back(std::move(br));
    }
    return report;
}

} // namespace latefusion
