#pragma once

#include "geods/features.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace geods::nn {

// Architecture constants.
inline constexpr int kConvChannels = kBlockChannels;   // one 2x2x2 filter per block
inline constexpr int kKernelVolume = 8;
inline constexpr int kConvOutputs = 8;                 // 3x3x3 valid-convolved by 2x2x2
inline constexpr int kMerged = kConvChannels * kConvOutputs + kScalarChannels; // 35
inline constexpr int kHidden = kMerged + 5;                                    // 40
inline constexpr int kOutputs = kTargets;

// Flat parameter layout.
inline constexpr int kConvOffset = 0; // per channel: 8 weights (u + 2v + 4w) then bias
inline constexpr int kDense1W = kConvOffset + kConvChannels * (kKernelVolume + 1);
inline constexpr int kDense1B = kDense1W + kHidden * kMerged;
inline constexpr int kDense2W = kDense1B + kHidden;
inline constexpr int kDense2B = kDense2W + kHidden * kHidden;
inline constexpr int kOutW = kDense2B + kHidden;
inline constexpr int kOutB = kOutW + kOutputs * kHidden;
inline constexpr int kParameterCount = kOutB + kOutputs;

static_assert(kMerged == 35);
static_assert(kHidden == 40);
static_assert(kParameterCount == 3198);

enum class Optimizer { sgd, adam };

struct TrainSettings {
    int batch_size = 32;
    int epochs = 120;
    double learning_rate = 1e-3;
    double momentum = 0.9;   // sgd only
    double beta1 = 0.9;      // adam only
    double beta2 = 0.999;
    double epsilon = 1e-8;
    Optimizer optimizer = Optimizer::sgd;
    std::uint64_t seed = 1;
    bool shuffle = true;
};

void validate(const TrainSettings& settings);

struct EpochRecord {
    int epoch = 0;
    double train_mse = 0.0;      // full training set, end-of-epoch parameters
    double validation_mse = 0.0; // NaN when no validation set
};

struct TrainingMeta {
    std::uint64_t init_seed = 0;
    int epochs_trained = 0;
    std::optional<TrainSettings> settings;
    std::vector<EpochRecord> history;
    std::string config_hash; // set by the pipeline; empty otherwise
};

/**
 * Four single-filter 2x2x2 valid convolutions (one per predictor block),
 * merged with the three scalars into 35 features, two tanh layers of 40
 * units and a linear 2-unit output.
 */
class NetworkModel {
public:
    /// All parameters zero.
    NetworkModel();
    /// Throws IntegrityError unless params.size() == kParameterCount and all are finite.
    explicit NetworkModel(std::vector<double> params);

    /// Glorot-uniform weights, zero biases.
    static NetworkModel initialize(std::uint64_t seed);

    std::span<double> params() { return params_; }
    std::span<const double> params() const { return params_; }

    std::optional<NormalizationStats> norm;
    std::string layout_hash = channel_layout_hash();
    TrainingMeta meta;

private:
    std::vector<double> params_;
};

/// Intermediate values of one forward pass.
struct Activations {
    std::array<double, kMerged> merged{};
    std::array<double, kHidden> h1{};
    std::array<double, kHidden> h2{};
    std::array<double, kOutputs> out{};
};

/// Normalized input -> normalized (sigma1, sigma2).
std::array<double, kOutputs> forward(const NetworkModel& model, const NetInput& input,
                                     Activations* acts = nullptr);

/// Per-example loss: mean over the two outputs of the squared error.
double example_loss(const std::array<double, kOutputs>& prediction,
                    const std::array<double, kOutputs>& target);

/// Gradient of example_loss with respect to every parameter (length kParameterCount).
std::vector<double> backward(const NetworkModel& model, const NetInput& input,
                             const std::array<double, kOutputs>& target);

/// Normalized training data.
struct Dataset {
    std::vector<NetInput> inputs;
    std::vector<std::array<double, kOutputs>> targets;
    std::vector<std::size_t> cell_ids;

    std::size_t size() const { return inputs.size(); }
};

Dataset make_dataset(std::span<const TrainingExample> examples, const NormalizationStats& stats);

/// Mean loss over the batch; grad receives the mean gradient, summed in index order.
double batch_gradient(const NetworkModel& model, const Dataset& data,
                      std::span<const std::size_t> indices, std::span<double> grad);

/// Mean example_loss over a dataset (NaN when empty).
double mse(const NetworkModel& model, const Dataset& data);

/// Mini-batch training; serial and deterministic for a given seed. Throws DivergenceError.
std::vector<EpochRecord> train(NetworkModel& model, const Dataset& train_set,
                               const Dataset& validation_set, const TrainSettings& settings);

/// Fits normalization on the training examples, then trains.
NetworkModel fit(std::span<const TrainingExample> train_examples,
                 std::span<const TrainingExample> validation_examples,
                 const TrainSettings& settings);

/// Raw predictors -> (sigma1, sigma2) in MPa. Throws IntegrityError without normalization stats.
std::array<double, kOutputs> predict_denormalized(const NetworkModel& model,
                                                  const TrainingExample& raw);

/// Versioned JSON container; output is byte-stable for a given model.
std::string serialize(const NetworkModel& model);
NetworkModel deserialize(const std::string& text);
void save_model(const NetworkModel& model, const std::filesystem::path& path);
NetworkModel load_model(const std::filesystem::path& path);

} // namespace geods::nn
