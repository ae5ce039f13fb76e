#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "wildlong/kernels/kernels.hpp"

namespace wildlong::taxonomy {

/// Multinomial logistic regression over embedding features.
struct TypeClassifier {
  std::vector<std::string> type_names;
  std::size_t dim = 0;
  std::vector<double> weights;  // num_types x dim, row-major
  std::vector<double> bias;     // num_types

  std::size_t num_types() const { return type_names.size(); }
  friend bool operator==(const TypeClassifier&, const TypeClassifier&) = default;
};

struct Prediction {
  std::uint32_t type = 0;
  std::vector<double> probabilities;
};

struct TrainOptions {
  double l2 = 1e-4;
  double lr = 0.5;
  int epochs = 300;
  std::uint64_t seed = 0;
  kernels::Exec exec = kernels::Exec::kSerial;
};

/// Labeled feature rows.
struct Batch {
  std::span<const std::vector<double>> features;
  std::span<const std::uint32_t> labels;
};

struct Gradient {
  std::vector<double> weights;
  std::vector<double> bias;
  /// Mean cross-entropy plus (l2/2)*||W||^2 at the evaluated point.
  double loss = 0.0;
};

/// Analytic gradient of mean cross-entropy + (l2/2)*||W||^2 (bias is not
/// regularized). Throws InputError on an empty batch, label out of range,
/// or dimension mismatch.
Gradient loss_gradient(const TypeClassifier& clf, Batch batch, double l2,
                       kernels::Exec exec = kernels::Exec::kSerial);

/// Full-batch gradient descent from a small seeded random start. Every type
/// index must appear in `labels`. `loss_history`, when given, receives the
/// loss before each epoch's update plus the final loss.
TypeClassifier classifier_train(std::span<const std::vector<double>> features,
                                std::span<const std::uint32_t> labels,
                                std::vector<std::string> type_names, const TrainOptions& options,
                                std::vector<double>* loss_history = nullptr);

/// Argmax type (ties to the lowest index) and full softmax distribution.
Prediction classifier_predict(const TypeClassifier& clf, std::span<const double> feature);

/// Versioned JSON checkpoint.
void save_classifier(const std::filesystem::path& path, const TypeClassifier& clf);
TypeClassifier load_classifier(const std::filesystem::path& path);

}  // namespace wildlong::taxonomy
