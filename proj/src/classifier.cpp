#include "figmine/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>

#include "figmine/errors.hpp"

namespace figmine::classify {

const char* to_string(Modality m) { return kClassNames[static_cast<int>(m)]; }

Modality modality_from_string(const std::string& s) {
  for (std::size_t i = 0; i < kClassNames.size(); ++i) {
    if (s == kClassNames[i]) return static_cast<Modality>(i);
  }
  raise(Errc::SchemaError, "unknown modality label: " + s);
}

ModelParams ModelParams::zeros(std::size_t feature_dim) {
  ModelParams params;
  params.weights.assign(3, std::vector<double>(feature_dim, 0.0));
  params.bias.assign(3, 0.0);
  params.feature_mean.assign(feature_dim, 0.0);
  params.feature_std.assign(feature_dim, 1.0);
  return params;
}

namespace {

constexpr double kStdFloor = 1e-8;

std::vector<double> normalize(const ModelParams& params, const FeatureVector& features) {
  std::vector<double> z(features.size());
  for (std::size_t j = 0; j < features.size(); ++j) {
    z[j] = (features[j] - params.feature_mean[j]) / std::max(params.feature_std[j], kStdFloor);
  }
  return z;
}

void check_dims(const ModelParams& params, const FeatureVector& features) {
  if (params.weights.size() != 3 || params.bias.size() != 3 ||
      params.feature_std.size() != params.feature_mean.size()) {
    raise(Errc::DimensionMismatch, "inconsistent model parameter shapes");
  }
  for (const auto& row : params.weights) {
    if (row.size() != params.feature_mean.size()) {
      raise(Errc::DimensionMismatch, "weight row size differs from normalization stats");
    }
  }
  if (features.size() != params.feature_mean.size()) {
    raise(Errc::DimensionMismatch,
          "feature size " + std::to_string(features.size()) + " != model dim " +
              std::to_string(params.feature_mean.size()));
  }
}

std::array<double, 3> softmax_probs(const ModelParams& params, const std::vector<double>& z) {
  std::array<double, 3> logits{};
  for (int c = 0; c < 3; ++c) {
    double dot = params.bias[c];
    for (std::size_t j = 0; j < z.size(); ++j) dot += params.weights[c][j] * z[j];
    logits[c] = dot;
  }
  const double max_logit = *std::max_element(logits.begin(), logits.end());
  std::array<double, 3> probs{};
  double sum = 0.0;
  for (int c = 0; c < 3; ++c) {
    probs[c] = std::exp(logits[c] - max_logit);
    sum += probs[c];
  }
  for (auto& p : probs) p /= sum;
  return probs;
}

// Deterministic Fisher-Yates; avoids std::shuffle, whose draws are
// implementation-defined.
void shuffle_indices(std::vector<std::size_t>* indices, std::mt19937_64* rng) {
  for (std::size_t i = indices->size(); i > 1; --i) {
    const std::size_t j = (*rng)() % i;
    std::swap((*indices)[i - 1], (*indices)[j]);
  }
}

}  // namespace

Prediction softmax_forward(const ModelParams& params, const FeatureVector& features) {
  check_dims(params, features);
  Prediction prediction;
  prediction.probs = softmax_probs(params, normalize(params, features));
  int best = 0;
  for (int c = 1; c < 3; ++c) {
    if (prediction.probs[c] > prediction.probs[best]) best = c;
  }
  prediction.label = static_cast<Modality>(best);
  return prediction;
}

double batch_loss(const ModelParams& params, const std::vector<Sample>& samples) {
  double loss = 0.0;
  for (const auto& sample : samples) {
    check_dims(params, sample.features);
    const auto probs = softmax_probs(params, normalize(params, sample.features));
    loss += -std::log(std::max(probs[static_cast<int>(sample.label)], 1e-300));
  }
  return samples.empty() ? 0.0 : loss / samples.size();
}

Gradients batch_gradient(const ModelParams& params, const std::vector<Sample>& samples) {
  const std::size_t dim = params.feature_dim();
  Gradients grad;
  grad.weights.assign(3, std::vector<double>(dim, 0.0));
  grad.bias.assign(3, 0.0);
  if (samples.empty()) return grad;

  for (const auto& sample : samples) {
    check_dims(params, sample.features);
    const auto z = normalize(params, sample.features);
    auto probs = softmax_probs(params, z);
    probs[static_cast<int>(sample.label)] -= 1.0;  // dL/dlogit = p - y
    for (int c = 0; c < 3; ++c) {
      grad.bias[c] += probs[c];
      for (std::size_t j = 0; j < dim; ++j) grad.weights[c][j] += probs[c] * z[j];
    }
  }
  const double inv_n = 1.0 / samples.size();
  for (int c = 0; c < 3; ++c) {
    grad.bias[c] *= inv_n;
    for (auto& g : grad.weights[c]) g *= inv_n;
  }
  return grad;
}

TrainResult train(const std::vector<Sample>& dataset, const Hyperparams& hp) {
  if (dataset.empty()) raise(Errc::DegenerateDataset, "empty dataset");
  std::array<std::size_t, 3> class_counts{};
  for (const auto& sample : dataset) ++class_counts[static_cast<int>(sample.label)];
  for (int c = 0; c < 3; ++c) {
    if (class_counts[c] == 0) {
      raise(Errc::DegenerateDataset, std::string("class absent from dataset: ") + kClassNames[c]);
    }
  }
  if (hp.batch_size < 1 || hp.epochs < 1 || hp.learning_rate < 0.0) {
    raise(Errc::ConfigError, "hyperparameters must be positive");
  }

  const std::size_t dim = dataset.front().features.size();
  ModelParams params = ModelParams::zeros(dim);

  // Normalization stats come from the full training set.
  for (const auto& sample : dataset) {
    if (sample.features.size() != dim) {
      raise(Errc::DimensionMismatch, "inconsistent feature sizes in dataset");
    }
    for (std::size_t j = 0; j < dim; ++j) params.feature_mean[j] += sample.features[j];
  }
  for (auto& m : params.feature_mean) m /= static_cast<double>(dataset.size());
  for (const auto& sample : dataset) {
    for (std::size_t j = 0; j < dim; ++j) {
      const double d = sample.features[j] - params.feature_mean[j];
      params.feature_std[j] += d * d;
    }
  }
  for (auto& s : params.feature_std) {
    s = std::max(std::sqrt(s / static_cast<double>(dataset.size())), kStdFloor);
  }

  std::mt19937_64 rng(hp.seed);
  std::vector<std::size_t> indices(dataset.size());
  for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
  shuffle_indices(&indices, &rng);

  std::size_t val_count = 0;
  if (hp.validation_fraction > 0.0 && dataset.size() >= 2) {
    val_count = std::min(dataset.size() - 1,
                         static_cast<std::size_t>(hp.validation_fraction * dataset.size()));
  }
  std::vector<std::size_t> val_indices(indices.begin(), indices.begin() + val_count);
  std::vector<std::size_t> train_indices(indices.begin() + val_count, indices.end());

  std::vector<Sample> train_set, val_set;
  for (auto i : train_indices) train_set.push_back(dataset[i]);
  for (auto i : val_indices) val_set.push_back(dataset[i]);

  TrainResult result;
  result.loss_trace.reserve(hp.epochs);
  ModelParams best_params = params;
  double best_val_loss = std::numeric_limits<double>::infinity();
  int best_epoch = 1;

  std::vector<Sample> batch;
  for (int epoch = 1; epoch <= hp.epochs; ++epoch) {
    shuffle_indices(&train_indices, &rng);
    for (std::size_t start = 0; start < train_indices.size();
         start += static_cast<std::size_t>(hp.batch_size)) {
      const std::size_t stop =
          std::min(train_indices.size(), start + static_cast<std::size_t>(hp.batch_size));
      batch.clear();
      for (std::size_t k = start; k < stop; ++k) batch.push_back(dataset[train_indices[k]]);

      const Gradients grad = batch_gradient(params, batch);
      for (int c = 0; c < 3; ++c) {
        params.bias[c] -= hp.learning_rate * grad.bias[c];
        for (std::size_t j = 0; j < dim; ++j) {
          params.weights[c][j] -= hp.learning_rate * grad.weights[c][j];
        }
      }
    }

    result.loss_trace.push_back(batch_loss(params, train_set));
    if (!val_set.empty()) {
      const double val_loss = batch_loss(params, val_set);
      result.val_loss_trace.push_back(val_loss);
      if (val_loss < best_val_loss) {
        best_val_loss = val_loss;
        best_params = params;
        best_epoch = epoch;
      }
    }
  }

  if (!val_set.empty()) {
    result.params = std::move(best_params);
    result.best_epoch = best_epoch;
  } else {
    result.params = std::move(params);
    result.best_epoch = hp.epochs;
  }
  return result;
}

Prediction predict(const ModelParams& params, const img::RasterImage& image) {
  return softmax_forward(params, extract_features(image));
}

nlohmann::ordered_json model_to_json(const ModelParams& params, const Hyperparams& hp) {
  nlohmann::ordered_json j;
  j["classes"] = kClassNames;
  j["feature_dim"] = params.feature_dim();
  j["weights"] = params.weights;
  j["bias"] = params.bias;
  j["feature_mean"] = params.feature_mean;
  j["feature_std"] = params.feature_std;
  j["hyperparams"] = {{"learning_rate", hp.learning_rate},
                      {"batch_size", hp.batch_size},
                      {"epochs", hp.epochs},
                      {"seed", hp.seed},
                      {"validation_fraction", hp.validation_fraction}};
  return j;
}

ModelParams model_from_json(const nlohmann::json& j, Hyperparams* hp) {
  const auto classes = j.at("classes").get<std::vector<std::string>>();
  if (classes != std::vector<std::string>{"CT", "CXR", "Other"}) {
    raise(Errc::SchemaError, "model class list must be exactly [CT, CXR, Other]");
  }
  ModelParams params;
  params.weights = j.at("weights").get<std::vector<std::vector<double>>>();
  params.bias = j.at("bias").get<std::vector<double>>();
  params.feature_mean = j.at("feature_mean").get<std::vector<double>>();
  params.feature_std = j.at("feature_std").get<std::vector<double>>();

  const auto dim = j.at("feature_dim").get<std::size_t>();
  if (params.feature_mean.size() != dim || params.feature_std.size() != dim ||
      params.weights.size() != 3 || params.bias.size() != 3) {
    raise(Errc::DimensionMismatch, "model JSON has inconsistent shapes");
  }
  for (const auto& row : params.weights) {
    if (row.size() != dim) raise(Errc::DimensionMismatch, "model JSON has inconsistent shapes");
  }
  for (double s : params.feature_std) {
    if (s <= 0.0) raise(Errc::SchemaError, "feature_std entries must be positive");
  }
  if (hp && j.contains("hyperparams")) {
    const auto& h = j.at("hyperparams");
    hp->learning_rate = h.value("learning_rate", hp->learning_rate);
    hp->batch_size = h.value("batch_size", hp->batch_size);
    hp->epochs = h.value("epochs", hp->epochs);
    hp->seed = h.value("seed", hp->seed);
    hp->validation_fraction = h.value("validation_fraction", hp->validation_fraction);
  }
  return params;
}

void save_model(const ModelParams& params, const Hyperparams& hp,
                const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(Errc::IoError, "cannot open model file for write: " + path.string());
  out << model_to_json(params, hp).dump(2) << "\n";
}

ModelParams load_model(const std::filesystem::path& path, Hyperparams* hp) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::IoError, "cannot open model file: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    raise(Errc::SchemaError, std::string("model JSON parse failure: ") + e.what());
  }
  return model_from_json(j, hp);
}

}  // namespace figmine::classify
