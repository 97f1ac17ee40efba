#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "latefusion/kitti_io.hpp"
#include "latefusion/matching.hpp"

namespace latefusion {

/// Fully connected layer; weight is row-major (outputs x inputs).
struct DenseLayer
{
    std::size_t inputs = 0;
    std::size_t outputs = 0;
    std::vector<double> weight;
    std::vector<double> bias;

    DenseLayer() = default;
    DenseLayer(std::size_t inputs, std::size_t outputs)
        : inputs(inputs), outputs(outputs), weight(inputs * outputs, 0.0), bias(outputs, 0.0)
    {}

    double &w(std::size_t out, std::size_t in) { return weight[out * inputs + in]; }
    double w(std::size_t out, std::size_t in) const { return weight[out * inputs + in]; }

    friend bool operator==(const DenseLayer &, const DenseLayer &) = default;
};

/// Per-parameter tensors shaped like a model's layers (gradients, moments).
using ParameterSet = std::vector<DenseLayer>;

/// Feed-forward accept/reject network: ReLU hidden layers, one sigmoid output.
struct MlpModel
{
    FeatureLayout layout = FeatureLayout::Single11;
    std::vector<DenseLayer> layers;

    std::vector<std::size_t> layer_dims() const;
    std::size_t input_dim() const { return layers.empty() ? 0 : layers.front().inputs; }
    std::size_t parameter_count() const;

    /// Throws InputError when shapes are inconsistent or a parameter is not finite.
    void validate() const;

    friend bool operator==(const MlpModel &, const MlpModel &) = default;
};

struct TrainConfig
{
    int epochs = 50;
    double lr = 1e-4;
    double pos_weight = 10.0;
    double neg_weight = 1.0;
    std::vector<std::size_t> hidden = {64};
    /// 0 selects full-batch training.
    std::size_t batch_size = 256;
    std::uint64_t seed = 0;
    bool shuffle_each_epoch = true;
    double threshold = 0.5;

    void validate() const;
};

struct AdamState
{
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::int64_t t = 0;
    ParameterSet m;
    ParameterSet v;

    static AdamState for_model(const MlpModel &model, double lr);
};

struct Prediction
{
    double probability = 0.0;
    bool accepted = false;
};

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases.
MlpModel init_model(FeatureLayout layout, std::span<const std::size_t> hidden, std::uint64_t seed);
MlpModel init_model(FeatureLayout layout, std::size_t hidden_width, std::uint64_t seed);

double sigmoid(double z) noexcept;

/// Output probability (unclamped). Throws InputError on a dimension mismatch.
double forward(const MlpModel &model, std::span<const double> x);
double forward(const MlpModel &model, const FeatureVector &x);

inline constexpr double kProbabilityClamp = 1e-7;

/// -[w+ * y * ln p + w- * (1 - y) * ln(1 - p)], p clamped to [1e-7, 1 - 1e-7].
double weighted_bce(double p, int y, double pos_weight, double neg_weight) noexcept;

struct LabeledVector
{
    std::span<const double> x;
    int y = 0;
};

struct BackwardResult
{
    ParameterSet gradients;
    double loss = 0.0; // mean weighted loss over the batch
};

/// Mean-over-batch gradient of the weighted loss. Uses dL/dz = w * (p - y)
/// at the output pre-activation; ReLU'(0) is taken as 0.
BackwardResult backward(const MlpModel &model, std::span<const LabeledVector> batch, double pos_weight,
                        double neg_weight);
BackwardResult backward(const MlpModel &model, std::span<const TrainingSample> batch, double pos_weight,
                        double neg_weight);

/// Mean weighted loss without gradients.
double batch_loss(const MlpModel &model, std::span<const LabeledVector> batch, double pos_weight, double neg_weight);

/// Bias-corrected Adam update; increments state.t.
void adam_step(MlpModel &model, AdamState &state, const ParameterSet &gradients);

struct EpochStats
{
    int epoch = 0;
    double loss = 0.0;
    double recall = 0.0;
    double precision = 0.0;
};

struct TrainingLog
{
    std::vector<EpochStats> epochs;
    std::vector<std::string> warnings;
};

struct TrainResult
{
    MlpModel model;
    TrainingLog log;
};

/// Seeded mini-batch Adam training. Raises NumericError when the loss stops
/// being finite.
TrainResult train(const Dataset &data, const TrainConfig &cfg);

Prediction predict(const MlpModel &model, const FeatureVector &x, double threshold);

struct ConfusionCounts
{
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    double recall() const { return tp + fn ? double(tp) / double(tp + fn) : 0.0; }
    double precision() const { return tp + fp ? double(tp) / double(tp + fp) : 1.0; }
};

ConfusionCounts confusion(const MlpModel &model, std::span<const TrainingSample> samples, double threshold);

/// Indices of accepted detections, in input order.
std::vector<std::size_t> accepted_indices(const MlpModel &model, std::span<const FeatureVector> features,
                                          double threshold);

/// Keeps the detections the verifier accepts. Boxes and scores pass through
/// unchanged unless `rescore` is set, which multiplies each kept score by the
/// verifier probability.
std::vector<Detection> filter_detections(const MlpModel &model, std::span<const Detection> detections,
                                         std::span<const FeatureVector> features, double threshold,
                                         bool rescore = false);

/// Model file: JSON with schema_version, feature_layout, layer_dims, weights,
/// biases, train_config and seed. Doubles are written with round-trip precision.
struct ModelFile
{
    MlpModel model;
    TrainConfig config;
};

inline constexpr int kModelSchemaVersion = 1;

std::string serialize_model(const MlpModel &model, const TrainConfig &cfg);
ModelFile deserialize_model(std::string_view text, const std::string &source = "<model>");
void save_model(const MlpModel &model, const TrainConfig &cfg, const std::filesystem::path &path);
ModelFile load_model(const std::filesystem::path &path);

} // namespace latefusion
