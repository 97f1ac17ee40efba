#include <gtest/gtest.h>

#include <algorithm>

#include "latefusion/eval.hpp"
#include "latefusion/random.hpp"
#include "oracles/ap_oracle.hpp"

using namespace latefusion;

namespace {

Detection det(double x0, double y0, double x1, double y1, double score, const char *cls = "Car")
{
    Detection d;
    d.class_name = cls;
    d.box = Box2D(x0, y0, x1, y1);
    d.score = score;
    return d;
}

// Large, unoccluded, untruncated: easy.
GroundTruthObject gt(double x0, double y0, double x1, double y1, const char *cls = "Car", int occlusion = 0)
{
    GroundTruthObject g;
    g.class_name = cls;
    g.box = Box2D(x0, y0, x1, y1);
    g.occlusion = occlusion;
    return g;
}

using MO = MatchOutcome;

std::vector<PRPoint> curve(std::initializer_list<std::pair<double, MO>> ranked, std::size_t gt)
{
    std::vector<ScoredOutcome> v;
    for (auto [s, o] : ranked)
        v.push_back({s, o});
    return pr_curve(v, gt);
}

} // namespace

TEST(Eval, GreedyMatchingByScore)
{
    const std::vector<GroundTruthObject> gts{gt(0, 0, 100, 100)};
    const std::vector<Detection> dets{det(0, 0, 100, 90, 0.6), det(0, 0, 100, 100, 0.9)};
    const auto o = match_for_eval(dets, gts, Difficulty::Hard);
    EXPECT_EQ(o[1], MO::TruePositive);
    EXPECT_EQ(o[0], MO::FalsePositive);  // duplicate
}

TEST(Eval, PrefersHighestIouAmongUnclaimed)
{
    const std::vector<GroundTruthObject> gts{gt(0, 0, 100, 100), gt(10, 0, 110, 100)};
    const std::vector<Detection> dets{det(9, 0, 109, 100, 0.9), det(0, 0, 100, 100, 0.8)};
    const auto o = match_for_eval(dets, gts, Difficulty::Hard);
    EXPECT_EQ(o[0], MO::TruePositive);
    EXPECT_EQ(o[1], MO::TruePositive);
}

TEST(Eval, IouBelowThresholdIsFalsePositive)
{
    const std::vector<GroundTruthObject> gts{gt(0, 0, 100, 100)};
    const std::vector<Detection> dets{det(0, 0, 100, 69, 0.9)};
    EXPECT_EQ(match_for_eval(dets, gts, Difficulty::Hard)[0], MO::FalsePositive);
    EXPECT_EQ(band_gt_count(gts, Difficulty::Hard), 1u);
}

TEST(Eval, HarderGroundTruthIsIgnoredNotFalsePositive)
{
    // occlusion 2 is outside easy but inside hard
    const std::vector<GroundTruthObject> gts{gt(0, 0, 100, 100, "Car", 2)};
    const std::vector<Detection> dets{det(0, 0, 100, 100, 0.9)};
    EXPECT_EQ(match_for_eval(dets, gts, Difficulty::Easy)[0], MO::Ignored);
    EXPECT_EQ(match_for_eval(dets, gts, Difficulty::Hard)[0], MO::TruePositive);
    EXPECT_EQ(band_gt_count(gts, Difficulty::Easy), 0u);
}

TEST(Eval, VanAndDontCareAreIgnored)
{
    const std::vector<GroundTruthObject> gts{gt(0, 0, 100, 100, "Van"), gt(200, 0, 300, 100, "DontCare")};
    const std::vector<Detection> dets{det(0, 0, 100, 100, 0.9), det(200, 0, 260, 100, 0.8), det(400, 0, 500, 100, 0.7)};
    const auto o = match_for_eval(dets, gts, Difficulty::Hard);
    EXPECT_EQ(o[0], MO::Ignored);
    EXPECT_EQ(o[1], MO::Ignored);  // IoU 0.6 with DontCare
    EXPECT_EQ(o[2], MO::FalsePositive);

    EvalOptions keep;
    keep.ignore_van = false;
    EXPECT_EQ(match_for_eval(dets, gts, Difficulty::Hard, keep)[0], MO::FalsePositive);
}

TEST(Eval, OtherClassesNeverCount)
{
    const std::vector<GroundTruthObject> gts{gt(0, 0, 100, 100, "Pedestrian")};
    const std::vector<Detection> dets{det(0, 0, 100, 100, 0.9, "Pedestrian"), det(0, 0, 100, 100, 0.8)};
    const auto o = match_for_eval(dets, gts, Difficulty::Hard);
    EXPECT_EQ(o[0], MO::Ignored);
    EXPECT_EQ(o[1], MO::FalsePositive);
}

TEST(Eval, PrCurveForTpThenFp)
{
    const auto pr = curve({{0.9, MO::TruePositive}, {0.8, MO::FalsePositive}}, 1);
    ASSERT_EQ(pr.size(), 2u);
    EXPECT_DOUBLE_EQ(pr[0].precision, 1.0);
    EXPECT_DOUBLE_EQ(pr[0].recall, 1.0);
    EXPECT_DOUBLE_EQ(pr[1].precision, 0.5);
    EXPECT_DOUBLE_EQ(pr[1].recall, 1.0);
    EXPECT_EQ(pr[1].fn, 0u);
    EXPECT_DOUBLE_EQ(ap_11(pr), 100.0);
    EXPECT_DOUBLE_EQ(ap_40(pr), 100.0);
}

TEST(Eval, ApOfFpThenTpIsFifty)
{
    const auto pr = curve({{0.9, MO::FalsePositive}, {0.8, MO::TruePositive}}, 1);
    EXPECT_DOUBLE_EQ(ap_11(pr), 50.0);
    EXPECT_DOUBLE_EQ(ap_40(pr), 50.0);
}

TEST(Eval, HalfRecallAtFullPrecision)
{
    const auto pr = curve({{0.9, MO::TruePositive}}, 2);
    EXPECT_DOUBLE_EQ(ap_11(pr), 6.0 / 11.0 * 100.0);
    EXPECT_DOUBLE_EQ(ap_40(pr), 50.0);
}

TEST(Eval, TiedScoresShareOnePoint)
{
    const auto pr = curve({{0.5, MO::FalsePositive}, {0.5, MO::TruePositive}, {0.4, MO::TruePositive}}, 2);
    ASSERT_EQ(pr.size(), 2u);
    EXPECT_EQ(pr[0].tp, 1u);
    EXPECT_EQ(pr[0].fp, 1u);
    EXPECT_DOUBLE_EQ(pr[0].precision, 0.5);
}

TEST(Eval, IgnoredDetectionsDoNotMoveTheCurve)
{
    const auto a = curve({{0.9, MO::TruePositive}, {0.7, MO::FalsePositive}}, 2);
    const auto b = curve({{0.9, MO::TruePositive}, {0.8, MO::Ignored}, {0.7, MO::FalsePositive}}, 2);
    EXPECT_EQ(ap_40(a), ap_40(b));
    EXPECT_EQ(a.size(), b.size());
}

TEST(Eval, NoGroundTruthIsAnError)
{
    EXPECT_THROW(curve({{0.9, MO::FalsePositive}}, 0), InputError);
    EXPECT_EQ(ap_40(curve({}, 3)), 0.0);
}

TEST(EvalProperty, ApMatchesBruteForce)
{
    Rng rng(99);
    for (int t = 0; t < 500; ++t) {
        const auto gt_count = std::int64_t(rng.between(1, 4));
        std::vector<oracle::RankedDet> dets;
        std::vector<ScoredOutcome> ranked;
        std::int64_t tps = 0;
        for (int i = 0, n = int(rng.between(0, 10)); i < n; ++i) {
            int kind = int(rng.below(3));
            if (kind == 0 && tps == gt_count)
                kind = 1;
            tps += kind == 0;
            const double score = double(rng.between(0, 5)) / 5.0;
            dets.push_back({score, kind});
            ranked.push_back({score, kind == 0 ? MO::TruePositive : kind == 1 ? MO::FalsePositive : MO::Ignored});
        }
        const auto pr = pr_curve(ranked, std::size_t(gt_count));
        EXPECT_EQ(ap_11(pr), oracle::brute_force_ap(dets, gt_count, false)) << t;
        EXPECT_EQ(ap_40(pr), oracle::brute_force_ap(dets, gt_count, true)) << t;
    }
}

TEST(EvalProperty, ApIsBoundedAndPerfectDetectorScoresHundred)
{
    Rng rng(3);
    for (int t = 0; t < 200; ++t) {
        const std::size_t gt_count = 1 + rng.below(6);
        std::vector<ScoredOutcome> perfect;
        for (std::size_t i = 0; i < gt_count; ++i)
            perfect.push_back({rng.uniform(), MO::TruePositive});
        const auto pr = pr_curve(perfect, gt_count);
        EXPECT_DOUBLE_EQ(ap_11(pr), 100.0);
        EXPECT_DOUBLE_EQ(ap_40(pr), 100.0);

        perfect.push_back({rng.uniform(), MO::FalsePositive});
        const double a = ap_40(pr_curve(perfect, gt_count));
        EXPECT_GE(a, 0.0);
        EXPECT_LE(a, 100.0);
    }
}

TEST(Eval, BandHistogramBins)
{
    EXPECT_EQ(BandHistogram::bin_of(0.0), 0u);
    EXPECT_EQ(BandHistogram::bin_of(0.05), 0u);
    EXPECT_EQ(BandHistogram::bin_of(0.1), 1u);
    EXPECT_EQ(BandHistogram::bin_of(0.95), 9u);
    EXPECT_EQ(BandHistogram::bin_of(1.0), 9u);
}

TEST(EvalProperty, HistogramPartitionsTpFpTable)
{
    Rng rng(17);
    std::vector<EvalFrame> frames;
    for (int f = 0; f < 30; ++f) {
        EvalFrame ef;
        ef.frame = FrameId::from_index(std::uint64_t(f));
        for (int g = 0; g < 4; ++g) {
            const double x = rng.uniform(0, 1000), y = rng.uniform(0, 300);
            ef.ground_truth.push_back(gt(x, y, x + 60, y + 40, "Car", int(rng.below(3))));
            if (rng.bernoulli(0.8))
                ef.detections.push_back(det(x + rng.uniform(-5, 5), y, x + 60, y + 40, rng.uniform()));
        }
        for (int k = 0; k < 3; ++k) {
            const double x = rng.uniform(0, 1000), y = rng.uniform(0, 300);
            ef.detections.push_back(det(x, y, x + 50, y + 30, rng.uniform()));
        }
        frames.push_back(std::move(ef));
    }
    for (Difficulty band : {Difficulty::Easy, Difficulty::Moderate, Difficulty::Hard}) {
        const auto h = band_histogram(frames, band);
        const auto t = tp_fp_table(frames, band, 0.0);
        EXPECT_EQ(h.total_tp(), t.tp);
        EXPECT_EQ(h.total_fp(), t.fp);
    }
    EvalOptions threaded;
    threaded.threads = 4;
    EXPECT_EQ(format_report(evaluate(frames, std::vector{Difficulty::Hard}, ApMode::Both), ReportFormat::Json),
              format_report(evaluate(frames, std::vector{Difficulty::Hard}, ApMode::Both, 0.0, threaded),
                            ReportFormat::Json));
}

TEST(Eval, BandCsvHasTenRows)
{
    const std::string csv = format_band_csv(BandHistogram{});
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 11);
    EXPECT_EQ(csv.substr(0, 11), "band,tp,fp\n");
    EXPECT_NE(csv.find("0.9-1.0,0,0\n"), std::string::npos);
}

TEST(Eval, ReportRoundTripsThroughJson)
{
    std::vector<EvalFrame> frames(1);
    frames[0].frame = FrameId("000000");
    frames[0].ground_truth = {gt(0, 0, 100, 100), gt(200, 0, 300, 100)};
    frames[0].detections = {det(0, 0, 100, 100, 0.9), det(500, 0, 600, 100, 0.8), det(200, 0, 300, 100, 0.3)};
    const std::vector<Difficulty> bands{Difficulty::Easy, Difficulty::Moderate, Difficulty::Hard};
    const ApReport r = evaluate(frames, bands, ApMode::Both);
    const BandReport &hard = r.band(Difficulty::Hard);
    EXPECT_EQ(hard.tp, 2u);
    EXPECT_EQ(hard.fp, 1u);
    EXPECT_EQ(hard.fn, 0u);
    // points: (1, 0.5) (0.5, 0.5) (2/3, 1)
    EXPECT_NEAR(*hard.ap_40, (20 * 1.0 + 20 * (2.0 / 3.0)) / 40.0 * 100.0, 1e-12);

    const std::string json = format_report(r, ReportFormat::Json);
    const ApReport back = parse_report_json(json);
    EXPECT_EQ(back.metadata, r.metadata);
    EXPECT_EQ(format_report(back, ReportFormat::Json), json);
    EXPECT_EQ(back.band(Difficulty::Easy).pr_curve.size(), 3u);
}

TEST(Eval, ApModeSelectsFields)
{
    std::vector<EvalFrame> frames(1);
    frames[0].ground_truth = {gt(0, 0, 100, 100)};
    const std::vector<Difficulty> bands{Difficulty::Hard};
    const auto only40 = evaluate(frames, bands, ApMode::Ap40);
    EXPECT_FALSE(only40.bands[0].ap_11);
    EXPECT_TRUE(only40.bands[0].ap_40);
    const std::string json = format_report(evaluate(frames, bands, ApMode::Both), ReportFormat::Json);
    EXPECT_NE(json.find("\"ap_11\": 0.000000"), std::string::npos);
    EXPECT_NE(json.find("\"ap_40\": 0.000000"), std::string::npos);
    EXPECT_THROW(parse_ap_mode("20"), InputError);
}

TEST(Eval, EmptyBandIsAnError)
{
    std::vector<EvalFrame> frames(1);
    frames[0].ground_truth = {gt(0, 0, 100, 10)};  // too short for any band
    const std::vector<Difficulty> bands{Difficulty::Hard};
    EXPECT_THROW(evaluate(frames, bands, ApMode::Ap40), InputError);
}
