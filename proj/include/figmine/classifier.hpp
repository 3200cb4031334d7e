#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "figmine/features.hpp"
#include "figmine/image.hpp"

namespace figmine::classify {

enum class Modality { CT, CXR, Other };

inline constexpr std::array<const char*, 3> kClassNames{"CT", "CXR", "Other"};

const char* to_string(Modality m);
Modality modality_from_string(const std::string& s);

struct ModelParams {
  // weights[c] is the weight row for class c, in kClassNames order.
  std::vector<std::vector<double>> weights;  // 3 x feature_dim
  std::vector<double> bias;                  // 3
  std::vector<double> feature_mean;          // feature_dim, from the training set
  std::vector<double> feature_std;           // feature_dim, clamped at 1e-8

  static ModelParams zeros(std::size_t feature_dim);
  std::size_t feature_dim() const { return feature_mean.size(); }
};

struct Prediction {
  std::array<double, 3> probs{};  // nonnegative, sums to 1
  Modality label = Modality::CT;  // argmax; ties break in class order
};

struct Hyperparams {
  double learning_rate = 1e-4;
  int batch_size = 16;
  int epochs = 50;
  std::uint64_t seed = 0;
  double validation_fraction = 0.1;  // seeded holdout for best-epoch selection
};

struct Sample {
  FeatureVector features;
  Modality label = Modality::Other;
};

/// softmax(W * normalize(f) + b), max-subtracted for stability.
/// Throws DimensionMismatch when the feature size differs from the model's.
Prediction softmax_forward(const ModelParams& params, const FeatureVector& features);

/// Mean cross-entropy of the model over the samples.
double batch_loss(const ModelParams& params, const std::vector<Sample>& samples);

struct Gradients {
  std::vector<std::vector<double>> weights;
  std::vector<double> bias;
};

/// Analytic gradient of batch_loss with respect to weights and bias.
Gradients batch_gradient(const ModelParams& params, const std::vector<Sample>& samples);

struct TrainResult {
  ModelParams params;
  std::vector<double> loss_trace;      // training loss after each epoch
  std::vector<double> val_loss_trace;  // empty when validation_fraction == 0
  int best_epoch = 0;                  // 1-based epoch whose params were kept
};

/// Deterministic mini-batch gradient descent on mean cross-entropy.
/// Throws DegenerateDataset when a class is absent from the dataset.
TrainResult train(const std::vector<Sample>& dataset, const Hyperparams& hp);

Prediction predict(const ModelParams& params, const img::RasterImage& image);

nlohmann::ordered_json model_to_json(const ModelParams& params, const Hyperparams& hp);
ModelParams model_from_json(const nlohmann::json& j, Hyperparams* hp = nullptr);
void save_model(const ModelParams& params, const Hyperparams& hp,
                const std::filesystem::path& path);
ModelParams load_model(const std::filesystem::path& path, Hyperparams* hp = nullptr);

}  // namespace figmine::classify
