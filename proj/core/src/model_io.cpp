#include <cmath>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "latefusion/verifier.hpp"

namespace latefusion {

using json = nlohmann::ordered_json;

std::string serialize_model(const MlpModel &model, const TrainConfig &cfg)
{
    model.validate();
    json doc;
    doc["schema_version"] = kModelSchemaVersion;
    doc["feature_layout"] = std::string(to_string(model.layout));
    doc["layer_dims"] = model.layer_dims();
    json weights = json::array();
    json biases = json::array();
    for (const auto &l : model.layers) {
        weights.push_back(l.weight);
        biases.push_back(l.bias);
    }
    doc["weights"] = std::move(weights);
    doc["biases"] = std::move(biases);
    doc["train_config"] = {
        {"epochs", cfg.epochs},
        {"lr", cfg.lr},
        {"pos_weight", cfg.pos_weight},
        {"neg_weight", cfg.neg_weight},
        {"hidden", cfg.hidden},
        {"batch_size", cfg.batch_size},
        {"shuffle_each_epoch", cfg.shuffle_each_epoch},
        {"threshold", cfg.threshold},
    };
    doc["seed"] = cfg.seed;
    return doc.dump(1) + "\n";
}

ModelFile deserialize_model(std::string_view text, const std::string &source)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception &e) {
        throw InputError(fmt::format("{}: not a valid model file: {}", source, e.what()));
    }

    try {
        const int version = doc.at("schema_version").get<int>();
        if (version != kModelSchemaVersion)
            throw InputError(fmt::format("unsupported schema_version {} (expected {})", version, kModelSchemaVersion));

        ModelFile out;
        out.model.layout = parse_feature_layout(doc.at("feature_layout").get<std::string>());
        const auto dims = doc.at("layer_dims").get<std::vector<std::size_t>>();
        const auto &weights = doc.at("weights");
        const auto &biases = doc.at("biases");
        if (dims.size() < 2 || weights.size() != dims.size() - 1 || biases.size() != dims.size() - 1)
            throw InputError("layer_dims, weights and biases disagree");
        for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
            DenseLayer layer;
            layer.inputs = dims[l];
            layer.outputs = dims[l + 1];
            layer.weight = weights[l].get<std::vector<double>>();
            layer.bias = biases[l].get<std::vector<double>>();
            out.model.layers.push_back(std::move(layer));
        }
        out.model.validate();

        const auto &tc = doc.at("train_config");
        out.config.epochs = tc.at("epochs").get<int>();
        out.config.lr = tc.at("lr").get<double>();
        out.config.pos_weight = tc.at("pos_weight").get<double>();
        out.config.neg_weight = tc.at("neg_weight").get<double>();
        out.config.hidden = tc.at("hidden").get<std::vector<std::size_t>>();
        out.config.batch_size = tc.at("batch_size").get<std::size_t>();
        out.config.shuffle_each_epoch = tc.at("shuffle_each_epoch").get<bool>();
        out.config.threshold = tc.at("threshold").get<double>();
        out.config.seed = doc.at("seed").get<std::uint64_t>();
        return out;
    } catch (const json::exception &e) {
        throw InputError(fmt::format("{}: malformed model file: {}", source, e.what()));
    } catch (const InputError &e) {
        throw InputError(fmt::format("{}: {}", source, e.what()));
    }
}

void save_model(const MlpModel &model, const TrainConfig &cfg, const std::filesystem::path &path)
{
    write_text_file(path, serialize_model(model, cfg));
}

ModelFile load_model(const std::filesystem::path &path)
{
    return deserialize_model(read_text_file(path), path.string());
}

} // namespace latefusion
