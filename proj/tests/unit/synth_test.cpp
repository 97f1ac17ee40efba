#include <gtest/gtest.h>

#include <chrono>
#include <cmath>

#include "latefusion/eval.hpp"
#include "latefusion/kitti_io.hpp"
#include "latefusion/matching.hpp"
#include "latefusion/synth.hpp"
#include "support/temp_dir.hpp"

using namespace latefusion;
using testing_support::TempDir;

namespace {

std::string tree_digest(const std::filesystem::path &root)
{
    std::string all;
    std::vector<std::filesystem::path> files;
    for (const auto &e : std::filesystem::recursive_directory_iterator(root))
        if (e.is_regular_file())
            files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto &f : files)
        all += std::filesystem::relative(f, root).string() + "\n" + read_text_file(f);
    return all;
}

double total_variation(const std::array<std::size_t, 10> &counts, const std::array<double, 10> &target)
{
    double n = 0, tv = 0, mass = 0;
    for (auto c : counts)
        n += double(c);
    for (double t : target)
        mass += t;
    for (std::size_t i = 0; i < 10; ++i)
        tv += std::abs(double(counts[i]) / n - target[i] / mass);
    return tv / 2.0;
}

} // namespace

TEST(Synth, DefaultsMatchFixture)
{
    const SynthConfig fixture = load_synth_config(LATEFUSION_FIXTURES "/synth_default.toml");
    EXPECT_EQ(format_synth_config(fixture), format_synth_config(SynthConfig::defaults()));
}

TEST(Synth, ConfigEchoParsesBack)
{
    SynthConfig cfg = SynthConfig::defaults();
    cfg.camera2 = cfg.camera;
    cfg.camera2->box_jitter_sigma = 0.1;
    cfg.seed = 12345678901234ULL;
    const SynthConfig back = parse_synth_config(format_synth_config(cfg));
    EXPECT_EQ(format_synth_config(back), format_synth_config(cfg));
    ASSERT_TRUE(back.camera2);
    EXPECT_DOUBLE_EQ(back.camera2->box_jitter_sigma, 0.1);
}

TEST(Synth, ConfigErrors)
{
    EXPECT_THROW(parse_synth_config("n_frames = 5\nbogus = 1\n"), InputError);
    EXPECT_THROW(parse_synth_config("[lidar]\ndetect_prob = 1.5\n"), InputError);
    EXPECT_THROW(parse_synth_config("n_frames = \n"), InputError);
    try {
        load_synth_config("/no/such/config.toml");
        FAIL();
    } catch (const InputError &e) {
        EXPECT_NE(std::string(e.what()).find("/no/such/config.toml"), std::string::npos);
    }
}

TEST(Synth, FramesDependOnlyOnSeedAndIndex)
{
    const SynthConfig cfg = SynthConfig::defaults();
    const SynthFrame a = generate_frame(cfg, 17);
    (void)generate_frame(cfg, 3);
    const SynthFrame b = generate_frame(cfg, 17);
    ASSERT_EQ(a.lidar.detections.size(), b.lidar.detections.size());
    for (std::size_t i = 0; i < a.lidar.detections.size(); ++i) {
        EXPECT_EQ(a.lidar.detections[i].box, b.lidar.detections[i].box);
        EXPECT_EQ(a.lidar.detections[i].score, b.lidar.detections[i].score);
    }
    SynthConfig other = cfg;
    other.seed = 8;
    EXPECT_NE(format_label_line(generate_frame(other, 17).scene.ground_truth[0]),
              format_label_line(a.scene.ground_truth[0]));
}

TEST(Synth, FixedGroundTruthCount)
{
    SynthConfig cfg = SynthConfig::defaults();
    cfg.gt_min_per_frame = cfg.gt_max_per_frame = 5;
    for (std::uint64_t i = 0; i < 50; ++i) {
        const Scene s = generate_frame(cfg, i).scene;
        ASSERT_EQ(s.ground_truth.size(), 5u);
        for (const auto &g : s.ground_truth) {
            EXPECT_TRUE(normalize(g.box, s.dims).within_image());
            EXPECT_GT(area(g.box), 0.0);
        }
    }
}

TEST(Synth, NoiselessDetectorReproducesGroundTruth)
{
    SynthConfig cfg = SynthConfig::defaults();
    cfg.lidar.detect_prob = 1.0;
    cfg.lidar.box_jitter_sigma = 0.0;
    cfg.lidar.fp_per_frame = 0.0;
    for (std::uint64_t i = 0; i < 20; ++i) {
        const SynthFrame f = generate_frame(cfg, i);
        ASSERT_EQ(f.lidar.detections.size(), f.scene.ground_truth.size());
        for (std::size_t k = 0; k < f.lidar.detections.size(); ++k)
            EXPECT_EQ(f.lidar.detections[k].box, f.scene.ground_truth[k].box);
    }
}

TEST(Synth, PoissonFalsePositiveRate)
{
    SynthConfig cfg = SynthConfig::defaults();
    cfg.lidar.detect_prob = 0.0;
    cfg.lidar.fp_per_frame = 5.0;
    double total = 0;
    for (std::uint64_t i = 0; i < 1000; ++i)
        total += double(generate_frame(cfg, i).lidar.detections.size());
    EXPECT_NEAR(total / 1000.0, 5.0, 0.5);
}

TEST(Synth, ScoreBandsFollowProfile)
{
    const SynthConfig cfg = SynthConfig::defaults();
    std::array<std::size_t, 10> tp{}, fp{};
    std::size_t n_tp = 0, n_fp = 0;
    for (std::uint64_t i = 0; n_tp < 10000 || n_fp < 10000; ++i) {
        const SynthFrame f = generate_frame(cfg, i);
        const std::size_t spurious = f.lidar.false_positive_boxes.size();
        const std::size_t real = f.lidar.detections.size() - spurious;
        for (std::size_t k = 0; k < f.lidar.detections.size(); ++k) {
            const auto bin = BandHistogram::bin_of(f.lidar.detections[k].score);
            if (k < real) {
                ++tp[bin];
                ++n_tp;
            } else {
                ++fp[bin];
                ++n_fp;
            }
        }
    }
    EXPECT_LE(total_variation(tp, cfg.lidar.tp_score_dist), 0.05);
    EXPECT_LE(total_variation(fp, cfg.lidar.fp_score_dist), 0.05);
}

TEST(Synth, CameraOverlapSeparatesLidarFalsePositives)
{
    SynthConfig cfg = SynthConfig::defaults();
    cfg.camera.fp_on_lidar_fp_prob = 0.0;
    cfg.camera.detect_prob = 0.95;
    std::size_t tp = 0, fn = 0, tn = 0, fp = 0;
    for (std::uint64_t i = 0; i < 500; ++i) {
        const SynthFrame f = generate_frame(cfg, i);
        for (const auto &d : f.lidar.detections) {
            bool truth = false;
            for (const auto &g : f.scene.ground_truth)
                truth = truth || iou(d.box, g.box) >= 0.7;
            const bool seen = match_camera(d, f.camera.detections, MatchConfig{}.tau_match).has_value();
            (truth ? (seen ? tp : fn) : (seen ? fp : tn)) += 1;
        }
    }
    const double balanced = 0.5 * (double(tp) / double(tp + fn) + double(tn) / double(tn + fp));
    EXPECT_GE(balanced, 0.9);
}

TEST(Synth, DatasetTreeParsesAndIsDeterministic)
{
    TempDir a, b;
    SynthConfig cfg = SynthConfig::defaults();
    cfg.n_frames = 25;
    cfg.camera2 = cfg.camera;
    generate_dataset(cfg, a.path(), 1);
    generate_dataset(cfg, b.path(), 4);
    EXPECT_EQ(tree_digest(a.path()), tree_digest(b.path()));

    for (const char *sub : {"label", "lidar", "camera", "camera2"})
        EXPECT_EQ(list_frames(a / sub).size(), 25u) << sub;
    for (const auto &id : list_frames(a / "label")) {
        EXPECT_NO_THROW(parse_label_file(frame_file(a / "label", id)));
        EXPECT_NO_THROW(parse_detection_file(frame_file(a / "lidar", id), Modality::Lidar));
    }
    EXPECT_EQ(load_frame_meta(a / "frame_meta.txt", std::nullopt).size(), 25u);
    EXPECT_EQ(format_synth_config(load_synth_config(a / "synth_config.toml")), format_synth_config(cfg));
}

TEST(Synth, FiveHundredFramesUnderTenSeconds)
{
    TempDir dir;
    const auto start = std::chrono::steady_clock::now();
    generate_dataset(SynthConfig::defaults(), dir.path(), 1);
    const std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;
    EXPECT_LT(took.count(), 10.0);
    EXPECT_EQ(list_frames(dir / "lidar").size(), 500u);
}
