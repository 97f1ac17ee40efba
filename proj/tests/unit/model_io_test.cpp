#include <gtest/gtest.h>

#include <cstring>

#include "latefusion/random.hpp"
#include "latefusion/verifier.hpp"
#include "support/temp_dir.hpp"

using namespace latefusion;
using testing_support::TempDir;

namespace {

bool bit_equal(const MlpModel &a, const MlpModel &b)
{
    if (a.layout != b.layout || a.layers.size() != b.layers.size())
        return false;
    for (std::size_t l = 0; l < a.layers.size(); ++l) {
        const auto &x = a.layers[l], &y = b.layers[l];
        if (x.inputs != y.inputs || x.outputs != y.outputs || x.weight.size() != y.weight.size() ||
            x.bias.size() != y.bias.size())
            return false;
        if (std::memcmp(x.weight.data(), y.weight.data(), x.weight.size() * sizeof(double)) != 0 ||
            std::memcmp(x.bias.data(), y.bias.data(), x.bias.size() * sizeof(double)) != 0)
            return false;
    }
    return true;
}

} // namespace

TEST(ModelIo, SaveLoadIsBitExact)
{
    TempDir dir;
    Rng rng(21);
    for (int i = 0; i < 20; ++i) {
        MlpModel m = init_model(i % 2 ? FeatureLayout::Dual17 : FeatureLayout::Single11,
                                std::vector<std::size_t>{std::size_t(rng.between(1, 70))}, rng.next_u64());
        for (auto &l : m.layers)
            for (auto &b : l.bias)
                b = rng.normal() * std::pow(10.0, double(rng.between(-300, 300)));
        TrainConfig cfg;
        cfg.seed = rng.next_u64();
        cfg.lr = rng.uniform(1e-6, 1e-2);
        save_model(m, cfg, dir / "m.json");
        const ModelFile back = load_model(dir / "m.json");
        EXPECT_TRUE(bit_equal(m, back.model));
        EXPECT_EQ(back.config.seed, cfg.seed);
        EXPECT_EQ(back.config.lr, cfg.lr);
        EXPECT_EQ(back.config.hidden, cfg.hidden);
    }
}

TEST(ModelIo, DocumentsSchemaKeys)
{
    const std::string text = serialize_model(init_model(FeatureLayout::Single11, 4, 1), TrainConfig{});
    for (const char *key : {"\"schema_version\"", "\"feature_layout\"", "\"layer_dims\"", "\"weights\"", "\"biases\"",
                            "\"train_config\"", "\"seed\""})
        EXPECT_NE(text.find(key), std::string::npos) << key;
    EXPECT_NE(text.find("\"single_11\""), std::string::npos);
}

TEST(ModelIo, TruncatedFileIsRejected)
{
    const std::string text = serialize_model(init_model(FeatureLayout::Single11, 4, 1), TrainConfig{});
    EXPECT_THROW(deserialize_model(text.substr(0, text.size() / 2)), InputError);
}

TEST(ModelIo, ShapeMismatchIsRejected)
{
    std::string text = serialize_model(init_model(FeatureLayout::Single11, 4, 1), TrainConfig{});
    const auto pos = text.find("11", text.find("\"layer_dims\""));
    ASSERT_NE(pos, std::string::npos);
    text.replace(pos, 2, "12");
    EXPECT_THROW(deserialize_model(text), InputError);
}

TEST(ModelIo, WrongSchemaVersionIsRejected)
{
    std::string text = serialize_model(init_model(FeatureLayout::Single11, 4, 1), TrainConfig{});
    const auto pos = text.find("\"schema_version\": 1");
    ASSERT_NE(pos, std::string::npos);
    text.replace(pos, 19, "\"schema_version\": 9");
    EXPECT_THROW(deserialize_model(text), InputError);
}

TEST(ModelIo, MissingFileIsIoError)
{
    EXPECT_THROW(load_model("/nonexistent/model.json"), IoError);
}
