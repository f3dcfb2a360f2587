#include "geods/nn.hpp"

#include "geods/error.hpp"
#include "geods/log.hpp"
#include "geods/random.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace geods::nn {

namespace {

constexpr int kModelFormatVersion = 1;

// Input entry feeding conv output (p,q,r) through kernel tap (u,v,w).
constexpr int conv_input_index(int out, int tap) {
    const int p = out & 1, q = (out >> 1) & 1, r = (out >> 2) & 1;
    const int u = tap & 1, v = (tap >> 1) & 1, w = (tap >> 2) & 1;
    return (p + u) + 3 * (q + v) + 9 * (r + w);
}

void check_finite(std::span<const double> p) {
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (!std::isfinite(p[i])) {
            throw IntegrityError("network parameter " + std::to_string(i) + " is not finite");
        }
    }
}

} // namespace

NetworkModel::NetworkModel() : params_(kParameterCount, 0.0) {}

NetworkModel::NetworkModel(std::vector<double> params) : params_(std::move(params)) {
    if (params_.size() != static_cast<std::size_t>(kParameterCount)) {
        throw IntegrityError("network expects " + std::to_string(kParameterCount) +
                             " parameters, got " + std::to_string(params_.size()));
    }
    check_finite(params_);
}

NetworkModel NetworkModel::initialize(std::uint64_t seed) {
    NetworkModel m;
    Rng rng(seed);
    auto glorot = [&](int offset, int count, int fan_in, int fan_out) {
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        for (int i = 0; i < count; ++i) {
            m.params_[static_cast<std::size_t>(offset + i)] = rng.uniform(-limit, limit);
        }
    };
    for (int ch = 0; ch < kConvChannels; ++ch) {
        glorot(kConvOffset + ch * (kKernelVolume + 1), kKernelVolume, kKernelVolume,
               kKernelVolume);
    }
    glorot(kDense1W, kHidden * kMerged, kMerged, kHidden);
    glorot(kDense2W, kHidden * kHidden, kHidden, kHidden);
    glorot(kOutW, kOutputs * kHidden, kHidden, kOutputs);
    m.meta.init_seed = seed;
    return m;
}

std::array<double, kOutputs> forward(const NetworkModel& model, const NetInput& in,
                                     Activations* acts) {
    const double* P = model.params().data();
    Activations local;
    Activations& a = acts ? *acts : local;

    for (int ch = 0; ch < kConvChannels; ++ch) {
        const double* k = P + kConvOffset + ch * (kKernelVolume + 1);
        const Block& x = in.blocks[static_cast<std::size_t>(ch)];
        for (int o = 0; o < kConvOutputs; ++o) {
            double s = k[kKernelVolume];
            for (int t = 0; t < kKernelVolume; ++t) {
                s += k[t] * x[static_cast<std::size_t>(conv_input_index(o, t))];
            }
            a.merged[static_cast<std::size_t>(ch * kConvOutputs + o)] = s;
        }
    }
    for (int s = 0; s < kScalarChannels; ++s) {
        a.merged[static_cast<std::size_t>(kConvChannels * kConvOutputs + s)] =
            in.scalars[static_cast<std::size_t>(s)];
    }

    for (int h = 0; h < kHidden; ++h) {
        const double* w = P + kDense1W + h * kMerged;
        double s = P[kDense1B + h];
        for (int i = 0; i < kMerged; ++i) s += w[i] * a.merged[static_cast<std::size_t>(i)];
        a.h1[static_cast<std::size_t>(h)] = std::tanh(s);
    }
    for (int h = 0; h < kHidden; ++h) {
        const double* w = P + kDense2W + h * kHidden;
        double s = P[kDense2B + h];
        for (int i = 0; i < kHidden; ++i) s += w[i] * a.h1[static_cast<std::size_t>(i)];
        a.h2[static_cast<std::size_t>(h)] = std::tanh(s);
    }
    for (int o = 0; o < kOutputs; ++o) {
        const double* w = P + kOutW + o * kHidden;
        double s = P[kOutB + o];
        for (int i = 0; i < kHidden; ++i) s += w[i] * a.h2[static_cast<std::size_t>(i)];
        a.out[static_cast<std::size_t>(o)] = s;
    }
    return a.out;
}

double example_loss(const std::array<double, kOutputs>& y, const std::array<double, kOutputs>& t) {
    double s = 0.0;
    for (int o = 0; o < kOutputs; ++o) {
        const double d = y[static_cast<std::size_t>(o)] - t[static_cast<std::size_t>(o)];
        s += d * d;
    }
    return s / kOutputs;
}

namespace {

// Adds scale * dL/dparams into grad; returns the example loss.
double accumulate_gradient(const NetworkModel& model, const NetInput& in,
                           const std::array<double, kOutputs>& target, double scale,
                           double* grad) {
    const double* P = model.params().data();
    Activations a;
    const auto y = forward(model, in, &a);

    std::array<double, kOutputs> g_out;
    for (int o = 0; o < kOutputs; ++o) {
        g_out[static_cast<std::size_t>(o)] =
            2.0 / kOutputs * (y[static_cast<std::size_t>(o)] - target[static_cast<std::size_t>(o)]);
    }

    std::array<double, kHidden> g_a2{};
    for (int o = 0; o < kOutputs; ++o) {
        const double g = g_out[static_cast<std::size_t>(o)];
        grad[kOutB + o] += scale * g;
        for (int i = 0; i < kHidden; ++i) {
            grad[kOutW + o * kHidden + i] += scale * g * a.h2[static_cast<std::size_t>(i)];
            g_a2[static_cast<std::size_t>(i)] += g * P[kOutW + o * kHidden + i];
        }
    }
    for (int i = 0; i < kHidden; ++i) {
        const double h = a.h2[static_cast<std::size_t>(i)];
        g_a2[static_cast<std::size_t>(i)] *= 1.0 - h * h;
    }

    std::array<double, kHidden> g_a1{};
    for (int h = 0; h < kHidden; ++h) {
        const double g = g_a2[static_cast<std::size_t>(h)];
        grad[kDense2B + h] += scale * g;
        for (int i = 0; i < kHidden; ++i) {
            grad[kDense2W + h * kHidden + i] += scale * g * a.h1[static_cast<std::size_t>(i)];
            g_a1[static_cast<std::size_t>(i)] += g * P[kDense2W + h * kHidden + i];
        }
    }
    for (int i = 0; i < kHidden; ++i) {
        const double h = a.h1[static_cast<std::size_t>(i)];
        g_a1[static_cast<std::size_t>(i)] *= 1.0 - h * h;
    }

    std::array<double, kMerged> g_m{};
    for (int h = 0; h < kHidden; ++h) {
        const double g = g_a1[static_cast<std::size_t>(h)];
        grad[kDense1B + h] += scale * g;
        for (int i = 0; i < kMerged; ++i) {
            grad[kDense1W + h * kMerged + i] += scale * g * a.merged[static_cast<std::size_t>(i)];
            g_m[static_cast<std::size_t>(i)] += g * P[kDense1W + h * kMerged + i];
        }
    }

    for (int ch = 0; ch < kConvChannels; ++ch) {
        const int off = kConvOffset + ch * (kKernelVolume + 1);
        const Block& x = in.blocks[static_cast<std::size_t>(ch)];
        for (int o = 0; o < kConvOutputs; ++o) {
            const double g = g_m[static_cast<std::size_t>(ch * kConvOutputs + o)];
            grad[off + kKernelVolume] += scale * g;
            for (int t = 0; t < kKernelVolume; ++t) {
                grad[off + t] += scale * g * x[static_cast<std::size_t>(conv_input_index(o, t))];
            }
        }
    }
    return example_loss(y, target);
}

} // namespace

std::vector<double> backward(const NetworkModel& model, const NetInput& input,
                             const std::array<double, kOutputs>& target) {
    std::vector<double> grad(kParameterCount, 0.0);
    accumulate_gradient(model, input, target, 1.0, grad.data());
    return grad;
}

Dataset make_dataset(std::span<const TrainingExample> examples, const NormalizationStats& stats) {
    Dataset d;
    d.inputs.reserve(examples.size());
    d.targets.reserve(examples.size());
    d.cell_ids.reserve(examples.size());
    for (const auto& x : examples) {
        d.inputs.push_back(normalize(x, stats));
        d.targets.push_back(normalize_target(x.target, stats));
        d.cell_ids.push_back(x.cell_id);
    }
    return d;
}

double batch_gradient(const NetworkModel& model, const Dataset& data,
                      std::span<const std::size_t> indices, std::span<double> grad) {
    if (grad.size() != static_cast<std::size_t>(kParameterCount)) {
        throw ShapeError("gradient buffer has wrong length");
    }
    std::fill(grad.begin(), grad.end(), 0.0);
    if (indices.empty()) {
        return 0.0;
    }
    const double scale = 1.0 / static_cast<double>(indices.size());
    double loss = 0.0;
    for (const std::size_t i : indices) {
        loss += accumulate_gradient(model, data.inputs[i], data.targets[i], scale, grad.data());
    }
    return loss * scale;
}

double mse(const NetworkModel& model, const Dataset& data) {
    if (data.size() == 0) {
        return std::nan("");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        s += example_loss(forward(model, data.inputs[i]), data.targets[i]);
    }
    return s / static_cast<double>(data.size());
}

void validate(const TrainSettings& s) {
    if (s.batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (s.epochs < 1) throw ConfigError("epochs must be >= 1");
    if (!(s.learning_rate >= 0.0)) throw ConfigError("learning_rate must be >= 0");
    if (!(s.momentum >= 0.0 && s.momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
    if (!(s.beta1 >= 0.0 && s.beta1 < 1.0) || !(s.beta2 >= 0.0 && s.beta2 < 1.0)) {
        throw ConfigError("adam betas must lie in [0, 1)");
    }
    if (!(s.epsilon > 0.0)) throw ConfigError("adam epsilon must be > 0");
}

std::vector<EpochRecord> train(NetworkModel& model, const Dataset& train_set,
                               const Dataset& validation_set, const TrainSettings& settings) {
    validate(settings);
    if (train_set.size() == 0) {
        throw ConfigError("training set is empty");
    }
    Rng rng(settings.seed);
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> grad(kParameterCount), m1(kParameterCount, 0.0), m2(kParameterCount, 0.0);
    std::span<double> params = model.params();
    long step = 0;
    double last_finite = std::nan("");
    std::vector<EpochRecord> history;

    for (int epoch = 1; epoch <= settings.epochs; ++epoch) {
        if (settings.shuffle) {
            for (std::size_t i = order.size() - 1; i > 0; --i) {
                std::swap(order[i], order[rng.index(i + 1)]);
            }
        }
        for (std::size_t lo = 0; lo < order.size();
             lo += static_cast<std::size_t>(settings.batch_size)) {
            const std::size_t hi =
                std::min(order.size(), lo + static_cast<std::size_t>(settings.batch_size));
            const double loss = batch_gradient(
                model, train_set, std::span<const std::size_t>(order).subspan(lo, hi - lo), grad);
            if (!std::isfinite(loss)) {
                throw DivergenceError("training diverged in epoch " + std::to_string(epoch),
                                      epoch, last_finite);
            }
            last_finite = loss;
            ++step;
            if (settings.optimizer == Optimizer::sgd) {
                for (int p = 0; p < kParameterCount; ++p) {
                    m1[p] = settings.momentum * m1[p] - settings.learning_rate * grad[p];
                    params[p] += m1[p];
                }
            } else {
                const double c1 = 1.0 - std::pow(settings.beta1, static_cast<double>(step));
                const double c2 = 1.0 - std::pow(settings.beta2, static_cast<double>(step));
                for (int p = 0; p < kParameterCount; ++p) {
                    m1[p] = settings.beta1 * m1[p] + (1.0 - settings.beta1) * grad[p];
                    m2[p] = settings.beta2 * m2[p] + (1.0 - settings.beta2) * grad[p] * grad[p];
                    params[p] -= settings.learning_rate * (m1[p] / c1) /
                                 (std::sqrt(m2[p] / c2) + settings.epsilon);
                }
            }
        }
        EpochRecord rec{epoch, mse(model, train_set), mse(model, validation_set)};
        if (!std::isfinite(rec.train_mse)) {
            throw DivergenceError("training diverged in epoch " + std::to_string(epoch), epoch,
                                  last_finite);
        }
        last_finite = rec.train_mse;
        history.push_back(rec);
        model.meta.history.push_back(rec);
        ++model.meta.epochs_trained;
    }
    model.meta.settings = settings;
    return history;
}

NetworkModel fit(std::span<const TrainingExample> train_examples,
                 std::span<const TrainingExample> validation_examples,
                 const TrainSettings& settings) {
    NetworkModel model = NetworkModel::initialize(settings.seed);
    model.norm = fit_normalization(train_examples);
    const Dataset tr = make_dataset(train_examples, *model.norm);
    const Dataset va = make_dataset(validation_examples, *model.norm);
    train(model, tr, va, settings);
    return model;
}

std::array<double, kOutputs> predict_denormalized(const NetworkModel& model,
                                                  const TrainingExample& raw) {
    if (!model.norm) {
        throw IntegrityError("model has no normalization statistics");
    }
    return denormalize_target(forward(model, normalize(raw, *model.norm)), *model.norm);
}

namespace {

using nlohmann::ordered_json;

ordered_json settings_json(const TrainSettings& s) {
    return {{"batch_size", s.batch_size},
            {"epochs", s.epochs},
            {"learning_rate", s.learning_rate},
            {"optimizer", s.optimizer == Optimizer::sgd ? "sgd" : "adam"},
            {"momentum", s.momentum},
            {"beta1", s.beta1},
            {"beta2", s.beta2},
            {"epsilon", s.epsilon},
            {"seed", s.seed},
            {"shuffle", s.shuffle}};
}

TrainSettings settings_from(const ordered_json& j) {
    TrainSettings s;
    s.batch_size = j.at("batch_size").get<int>();
    s.epochs = j.at("epochs").get<int>();
    s.learning_rate = j.at("learning_rate").get<double>();
    s.optimizer = j.at("optimizer").get<std::string>() == "adam" ? Optimizer::adam : Optimizer::sgd;
    s.momentum = j.at("momentum").get<double>();
    s.beta1 = j.at("beta1").get<double>();
    s.beta2 = j.at("beta2").get<double>();
    s.epsilon = j.at("epsilon").get<double>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.shuffle = j.at("shuffle").get<bool>();
    return s;
}

// NaN is not representable in JSON; store null.
ordered_json number_or_null(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(); }
double number_from(const ordered_json& j) { return j.is_null() ? std::nan("") : j.get<double>(); }

} // namespace

std::string serialize(const NetworkModel& model) {
    ordered_json j;
    j["format"] = "geods-network";
    j["version"] = kModelFormatVersion;
    j["architecture"] = {{"conv_channels", kConvChannels},
                         {"kernel", {2, 2, 2}},
                         {"block", {3, 3, 3}},
                         {"merged", kMerged},
                         {"hidden", {kHidden, kHidden}},
                         {"activation", "tanh"},
                         {"outputs", kOutputs},
                         {"parameter_count", kParameterCount}};
    j["channel_layout"] = channel_layout();
    j["layout_hash"] = model.layout_hash;
    if (model.norm) {
        const auto& n = *model.norm;
        j["normalization"] = {{"input_mean", n.input_mean},
                              {"input_std", n.input_std},
                              {"target_mean", n.target_mean},
                              {"target_std", n.target_std}};
    } else {
        j["normalization"] = nullptr;
    }
    ordered_json history = ordered_json::array();
    for (const auto& r : model.meta.history) {
        history.push_back({{"epoch", r.epoch},
                           {"train_mse", number_or_null(r.train_mse)},
                           {"validation_mse", number_or_null(r.validation_mse)}});
    }
    j["training"] = {{"init_seed", model.meta.init_seed},
                     {"epochs_trained", model.meta.epochs_trained},
                     {"settings", model.meta.settings ? settings_json(*model.meta.settings)
                                                      : ordered_json(nullptr)},
                     {"history", history},
                     {"config_hash", model.meta.config_hash}};
    j["parameters"] = std::vector<double>(model.params().begin(), model.params().end());
    return j.dump(1) + "\n";
}

NetworkModel deserialize(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const std::exception& e) {
        throw IntegrityError(std::string("model file is not valid JSON: ") + e.what());
    }
    try {
        if (j.at("format") != "geods-network") {
            throw IntegrityError("not a geods network model");
        }
        if (j.at("version").get<int>() != kModelFormatVersion) {
            throw IntegrityError("unsupported model version " + j.at("version").dump());
        }
        if (j.at("architecture").at("parameter_count").get<int>() != kParameterCount ||
            j.at("architecture").at("merged").get<int>() != kMerged) {
            throw IntegrityError("model architecture does not match this build");
        }
        NetworkModel m(j.at("parameters").get<std::vector<double>>());
        m.layout_hash = j.at("layout_hash").get<std::string>();
        if (!j.at("normalization").is_null()) {
            const auto& n = j.at("normalization");
            NormalizationStats s;
            s.input_mean = n.at("input_mean").get<decltype(s.input_mean)>();
            s.input_std = n.at("input_std").get<decltype(s.input_std)>();
            s.target_mean = n.at("target_mean").get<decltype(s.target_mean)>();
            s.target_std = n.at("target_std").get<decltype(s.target_std)>();
            m.norm = s;
        }
        const auto& t = j.at("training");
        m.meta.init_seed = t.at("init_seed").get<std::uint64_t>();
        m.meta.epochs_trained = t.at("epochs_trained").get<int>();
        if (!t.at("settings").is_null()) m.meta.settings = settings_from(t.at("settings"));
        m.meta.config_hash = t.value("config_hash", std::string());
        for (const auto& r : t.at("history")) {
            m.meta.history.push_back({r.at("epoch").get<int>(), number_from(r.at("train_mse")),
                                      number_from(r.at("validation_mse"))});
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw IntegrityError(std::string("malformed model file: ") + e.what());
    }
}

void save_model(const NetworkModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << serialize(model);
}

NetworkModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DependencyError("cannot read model file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return deserialize(ss.str());
}

} // namespace geods::nn
