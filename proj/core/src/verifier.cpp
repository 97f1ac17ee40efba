#include "latefusion/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "latefusion/random.hpp"

namespace latefusion {

namespace {

ParameterSet zeros_like(const MlpModel &model)
{
    ParameterSet out;
    out.reserve(model.layers.size());
    for (const auto &l : model.layers)
        out.emplace_back(l.inputs, l.outputs);
    return out;
}

void check_input(const MlpModel &model, std::span<const double> x)
{
    if (x.size() != model.input_dim())
        throw InputError(fmt::format("feature vector has {} values but the model expects {}", x.size(), model.input_dim()));
}

// Pre-activations of every layer for one input; activations are recomputed
// from them on demand.
struct ForwardTrace
{
    std::vector<std::vector<double>> pre;
    double probability = 0.0;
};

void dense(const DenseLayer &layer, std::span<const double> in, std::vector<double> &out)
{
    out.assign(layer.bias.begin(), layer.bias.end());
    for (std::size_t o = 0; o < layer.outputs; ++o) {
        const double *row = layer.weight.data() + o * layer.inputs;
        double acc = 0.0;
        for (std::size_t i = 0; i < layer.inputs; ++i)
            acc += row[i] * in[i];
        out[o] += acc;
    }
}

void trace_forward(const MlpModel &model, std::span<const double> x, ForwardTrace &trace,
                   std::vector<std::vector<double>> &activations)
{
    const std::size_t n = model.layers.size();
    trace.pre.resize(n);
    activations.resize(n);
    std::span<const double> input = x;
    for (std::size_t l = 0; l < n; ++l) {
        dense(model.layers[l], input, trace.pre[l]);
        if (l + 1 < n) {
            activations[l].resize(trace.pre[l].size());
            std::transform(trace.pre[l].begin(), trace.pre[l].end(), activations[l].begin(),
                           [](double z) { return z > 0.0 ? z : 0.0; });
            input = activations[l];
        }
    }
    trace.probability = sigmoid(trace.pre.back()[0]);
}

double class_weight(int y, double pos_weight, double neg_weight)
{
    return y == 1 ? pos_weight : neg_weight;
}

} // namespace

std::vector<std::size_t> MlpModel::layer_dims() const
{
    std::vector<std::size_t> dims;
    if (layers.empty())
        return dims;
    dims.push_back(layers.front().inputs);
    for (const auto &l : layers)
        dims.push_back(l.outputs);
    return dims;
}

std::size_t MlpModel::parameter_count() const
{
    std::size_t n = 0;
    for (const auto &l : layers)
        n += l.weight.size() + l.bias.size();
    return n;
}

void MlpModel::validate() const
{
    if (layers.empty())
        throw InputError("model has no layers");
    if (layers.front().inputs != feature_count(layout))
        throw InputError(fmt::format("model input dim {} does not match layout {}", layers.front().inputs, to_string(layout)));
    if (layers.back().outputs != 1)
        throw InputError("model output dim must be 1");
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const auto &l = layers[i];
        if (l.inputs == 0 || l.outputs == 0)
            throw InputError(fmt::format("layer {} has an empty dimension", i));
        if (i > 0 && layers[i - 1].outputs != l.inputs)
            throw InputError(fmt::format("layer {} expects {} inputs but previous layer yields {}", i, l.inputs, layers[i - 1].outputs));
        if (l.weight.size() != l.inputs * l.outputs || l.bias.size() != l.outputs)
            throw InputError(fmt::format("layer {} parameter shape mismatch", i));
        auto finite = [](double v) { return std::isfinite(v); };
        if (!std::all_of(l.weight.begin(), l.weight.end(), finite) || !std::all_of(l.bias.begin(), l.bias.end(), finite))
            throw InputError(fmt::format("layer {} has non-finite parameters", i));
    }
}

void TrainConfig::validate() const
{
    if (epochs < 1)
        throw InputError("epochs must be >= 1");
    if (!(lr > 0.0) || !std::isfinite(lr))
        throw InputError("learning rate must be positive");
    if (!(pos_weight > 0.0) || !(neg_weight > 0.0))
        throw InputError("class weights must be positive");
    if (hidden.empty() || std::find(hidden.begin(), hidden.end(), std::size_t{0}) != hidden.end())
        throw InputError("hidden layer widths must be >= 1");
    if (!(threshold > 0.0 && threshold < 1.0))
        throw InputError("decision threshold must lie in (0, 1)");
}

AdamState AdamState::for_model(const MlpModel &model, double lr)
{
    AdamState s;
    s.lr = lr;
    s.m = zeros_like(model);
    s.v = zeros_like(model);
    return s;
}

MlpModel init_model(FeatureLayout layout, std::span<const std::size_t> hidden, std::uint64_t seed)
{
    if (hidden.empty() || std::find(hidden.begin(), hidden.end(), std::size_t{0}) != hidden.end())
        throw InputError("hidden layer widths must be >= 1");
    MlpModel model;
    model.layout = layout;
    Rng rng(seed);
    std::size_t in = feature_count(layout);
    auto add = [&](std::size_t out) {
        DenseLayer layer(in, out);
        const double bound = 1.0 / std::sqrt(static_cast<double>(in));
        for (auto &w : layer.weight)
            w = rng.uniform(-bound, bound);
        model.layers.push_back(std::move(layer));
        in = out;
    };
    for (auto width : hidden)
        add(width);
    add(1);
    return model;
}

MlpModel init_model(FeatureLayout layout, std::size_t hidden_width, std::uint64_t seed)
{
    const std::size_t hidden[] = {hidden_width};
    return init_model(layout, hidden, seed);
}

double sigmoid(double z) noexcept
{
    if (z >= 0.0)
        return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double forward(const MlpModel &model, std::span<const double> x)
{
    check_input(model, x);
    ForwardTrace trace;
    std::vector<std::vector<double>> act;
    trace_forward(model, x, trace, act);
    return trace.probability;
}

double forward(const MlpModel &model, const FeatureVector &x)
{
    return forward(model, x.values());
}

double weighted_bce(double p, int y, double pos_weight, double neg_weight) noexcept
{
    const double q = std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp);
    return -(pos_weight * y * std::log(q) + neg_weight * (1 - y) * std::log(1.0 - q));
}

BackwardResult backward(const MlpModel &model, std::span<const LabeledVector> batch, double pos_weight,
                        double neg_weight)
{
    if (batch.empty())
        throw InputError("backward needs a non-empty batch");
    BackwardResult result;
    result.gradients = zeros_like(model);

    const std::size_t n_layers = model.layers.size();
    ForwardTrace trace;
    std::vector<std::vector<double>> act;
    std::vector<double> delta, next_delta;
    double loss_sum = 0.0;

    for (const auto &sample : batch) {
        check_input(model, sample.x);
        trace_forward(model, sample.x, trace, act);
        const double w = class_weight(sample.y, pos_weight, neg_weight);
        loss_sum += weighted_bce(trace.probability, sample.y, pos_weight, neg_weight);

        delta.assign(1, w * (trace.probability - sample.y));
        for (std::size_t l = n_layers; l-- > 0;) {
            const DenseLayer &layer = model.layers[l];
            DenseLayer &grad = result.gradients[l];
            std::span<const double> input = l == 0 ? sample.x : std::span<const double>(act[l - 1]);
            for (std::size_t o = 0; o < layer.outputs; ++o) {
                const double d = delta[o];
                if (d == 0.0)
                    continue;
                grad.bias[o] += d;
                double *row = grad.weight.data() + o * layer.inputs;
                for (std::size_t i = 0; i < layer.inputs; ++i)
                    row[i] += d * input[i];
            }
            if (l == 0)
                break;
            next_delta.assign(layer.inputs, 0.0);
            for (std::size_t o = 0; o < layer.outputs; ++o) {
                const double d = delta[o];
                if (d == 0.0)
                    continue;
                const double *row = layer.weight.data() + o * layer.inputs;
                for (std::size_t i = 0; i < layer.inputs; ++i)
                    next_delta[i] += row[i] * d;
            }
            const auto &pre = trace.pre[l - 1];
            for (std::size_t i = 0; i < layer.inputs; ++i)
                if (pre[i] <= 0.0)
                    next_delta[i] = 0.0;
            std::swap(delta, next_delta);
        }
    }

    const double scale = 1.0 / static_cast<double>(batch.size());
    for (auto &g : result.gradients) {
        for (auto &v : g.weight)
            v *= scale;
        for (auto &v : g.bias)
            v *= scale;
    }
    result.loss = loss_sum * scale;
    return result;
}

BackwardResult backward(const MlpModel &model, std::span<const TrainingSample> batch, double pos_weight,
                        double neg_weight)
{
    std::vector<LabeledVector> views;
    views.reserve(batch.size());
    for (const auto &s : batch)
        views.push_back({s.features.values(), s.label});
    return backward(model, views, pos_weight, neg_weight);
}

double batch_loss(const MlpModel &model, std::span<const LabeledVector> batch, double pos_weight, double neg_weight)
{
    if (batch.empty())
        return 0.0;
    double sum = 0.0;
    for (const auto &s : batch)
        sum += weighted_bce(forward(model, s.x), s.y, pos_weight, neg_weight);
    return sum / static_cast<double>(batch.size());
}

void adam_step(MlpModel &model, AdamState &state, const ParameterSet &gradients)
{
    if (gradients.size() != model.layers.size() || state.m.size() != model.layers.size() ||
        state.v.size() != model.layers.size())
        throw InputError("adam_step: parameter shapes differ");

    state.t += 1;
    const double t = static_cast<double>(state.t);
    const double c1 = 1.0 - std::pow(state.beta1, t);
    const double c2 = 1.0 - std::pow(state.beta2, t);

    auto update = [&](std::vector<double> &param, const std::vector<double> &g, std::vector<double> &m,
                      std::vector<double> &v) {
        if (param.size() != g.size() || param.size() != m.size() || param.size() != v.size())
            throw InputError("adam_step: parameter shapes differ");
        for (std::size_t i = 0; i < param.size(); ++i) {
            m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
            v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
            const double m_hat = m[i] / c1;
            const double v_hat = v[i] / c2;
            param[i] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
        }
    };
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        update(model.layers[l].weight, gradients[l].weight, state.m[l].weight, state.v[l].weight);
        update(model.layers[l].bias, gradients[l].bias, state.m[l].bias, state.v[l].bias);
    }
}

Prediction predict(const MlpModel &model, const FeatureVector &x, double threshold)
{
    if (!(threshold > 0.0 && threshold < 1.0))
        throw InputError(fmt::format("decision threshold {} outside (0, 1)", threshold));
    Prediction p;
    p.probability = forward(model, x);
    p.accepted = p.probability >= threshold;
    return p;
}

ConfusionCounts confusion(const MlpModel &model, std::span<const TrainingSample> samples, double threshold)
{
    ConfusionCounts c;
    for (const auto &s : samples) {
        const bool accepted = predict(model, s.features, threshold).accepted;
        if (accepted)
            (s.label == 1 ? c.tp : c.fp) += 1;
        else
            (s.label == 1 ? c.fn : c.tn) += 1;
    }
    return c;
}

TrainResult train(const Dataset &data, const TrainConfig &cfg)
{
    cfg.validate();
    if (data.samples.empty())
        throw InputError("training set is empty");
    for (const auto &s : data.samples)
        if (s.features.layout() != data.layout)
            throw InputError("training samples mix feature layouts");

    TrainResult result;
    const std::size_t positives = static_cast<std::size_t>(
        std::count_if(data.samples.begin(), data.samples.end(), [](const TrainingSample &s) { return s.label == 1; }));
    if (positives == 0)
        result.log.warnings.push_back("training set has no positive samples");
    if (positives == data.samples.size())
        result.log.warnings.push_back("training set has no negative samples");

    result.model = init_model(data.layout, cfg.hidden, cfg.seed);
    AdamState state = AdamState::for_model(result.model, cfg.lr);
    Rng shuffler(derive_seed(cfg.seed, 0x5348554646ULL));

    const std::size_t n = data.samples.size();
    const std::size_t batch = cfg.batch_size == 0 ? n : std::min(cfg.batch_size, n);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<LabeledVector> views;
    views.reserve(batch);

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        if (cfg.shuffle_each_epoch)
            shuffler.shuffle(order);
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t stop = std::min(n, start + batch);
            views.clear();
            for (std::size_t k = start; k < stop; ++k) {
                const auto &s = data.samples[order[k]];
                views.push_back({s.features.values(), s.label});
            }
            BackwardResult br = backward(result.model, views, cfg.pos_weight, cfg.neg_weight);
            if (!std::isfinite(br.loss))
                throw NumericError(fmt::format(
                    "loss became {} at epoch {} (batch starting at sample {}); lower the learning rate (currently {})",
                    br.loss, epoch, start, cfg.lr));
            adam_step(result.model, state, br.gradients);
            loss_sum += br.loss * static_cast<double>(stop - start);
        }

        const ConfusionCounts c = confusion(result.model, data.samples, cfg.threshold);
        result.log.epochs.push_back({epoch, loss_sum / static_cast<double>(n), c.recall(), c.precision()});
    }

    for (const auto &l : result.model.layers) {
        auto finite = [](double v) { return std::isfinite(v); };
        if (!std::all_of(l.weight.begin(), l.weight.end(), finite) || !std::all_of(l.bias.begin(), l.bias.end(), finite))
            throw NumericError(fmt::format("training produced non-finite parameters; lower the learning rate (currently {})", cfg.lr));
    }
    return result;
}

std::vector<std::size_t> accepted_indices(const MlpModel &model, std::span<const FeatureVector> features,
                                          double threshold)
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < features.size(); ++i)
        if (predict(model, features[i], threshold).accepted)
            out.push_back(i);
    return out;
}

std::vector<Detection> filter_detections(const MlpModel &model, std::span<const Detection> detections,
                                         std::span<const FeatureVector> features, double threshold, bool rescore)
{
    if (detections.size() != features.size())
        throw InputError(fmt::format("{} detections but {} feature vectors", detections.size(), features.size()));
    std::vector<Detection> kept;
    for (std::size_t i = 0; i < detections.size(); ++i) {
        const Prediction p = predict(model, features[i], threshold);
        if (!p.accepted)
            continue;
        kept.push_back(detections[i]);
        if (rescore) {
            kept.back().score *= p.probability;
            kept.back().raw_line.clear();
        }
    }
    return kept;
}

} // namespace latefusion
