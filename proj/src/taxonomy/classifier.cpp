#include "wildlong/taxonomy/classifier.hpp"

#include <cmath>
#include <set>

#include <json.hpp>

#include "wildlong/error.hpp"
#include "wildlong/jsonl.hpp"
#include "wildlong/rng.hpp"

namespace wildlong::taxonomy {

namespace {

using kernels::MatrixView;

std::vector<double> flatten(std::span<const std::vector<double>> rows, std::size_t dim) {
  std::vector<double> flat;
  flat.reserve(rows.size() * dim);
  for (const auto& r : rows) {
    if (r.size() != dim) {
      throw InputError("feature dim " + std::to_string(r.size()) + " does not match classifier dim " +
                       std::to_string(dim));
    }
    flat.insert(flat.end(), r.begin(), r.end());
  }
  return flat;
}

// Gradient on an already-flattened batch.
Gradient gradient_flat(const TypeClassifier& clf, const std::vector<double>& flat, std::size_t n,
                       std::span<const std::uint32_t> labels, double l2, kernels::Exec exec) {
  const std::size_t k = clf.num_types();
  const std::size_t d = clf.dim;
  const MatrixView features{flat, n, d};
  const MatrixView weights{clf.weights, k, d};
  std::vector<double> residual(n * k);
  std::vector<double> loss(n);
  kernels::softmax_residuals(exec, features, weights, clf.bias, labels, residual, loss);

  Gradient g;
  g.weights.assign(k * d, 0.0);
  g.bias.assign(k, 0.0);
  kernels::accumulate_gradient(exec, features, MatrixView{residual, n, k}, g.weights, g.bias);

  double mean_loss = 0.0;
  for (double l : loss) mean_loss += l;
  mean_loss /= static_cast<double>(n);
  double sq = 0.0;
  for (std::size_t i = 0; i < g.weights.size(); ++i) {
    g.weights[i] += l2 * clf.weights[i];
    sq += clf.weights[i] * clf.weights[i];
  }
  g.loss = mean_loss + 0.5 * l2 * sq;
  return g;
}

void check_labels(std::span<const std::uint32_t> labels, std::size_t num_types) {
  for (auto l : labels) {
    if (l >= num_types) throw InputError("label " + std::to_string(l) + " out of range");
  }
}

}  // namespace

Gradient loss_gradient(const TypeClassifier& clf, Batch batch, double l2, kernels::Exec exec) {
  if (batch.features.empty()) throw InputError("empty batch");
  if (batch.features.size() != batch.labels.size()) {
    throw InputError("feature and label counts differ");
  }
  check_labels(batch.labels, clf.num_types());
  const auto flat = flatten(batch.features, clf.dim);
  return gradient_flat(clf, flat, batch.features.size(), batch.labels, l2, exec);
}

TypeClassifier classifier_train(std::span<const std::vector<double>> features,
                                std::span<const std::uint32_t> labels,
                                std::vector<std::string> type_names, const TrainOptions& options,
                                std::vector<double>* loss_history) {
  const std::size_t k = type_names.size();
  if (k == 0) throw InputError("classifier needs at least one type");
  if (features.size() != labels.size()) throw InputError("feature and label counts differ");
  if (features.size() < k) throw InputError("fewer training rows than types");
  if (features.front().empty()) throw InputError("features have zero dimension");
  if (options.lr <= 0.0 || options.l2 < 0.0 || options.epochs <= 0) {
    throw InputError("invalid training hyperparameters");
  }
  check_labels(labels, k);
  std::set<std::uint32_t> present(labels.begin(), labels.end());
  for (std::uint32_t t = 0; t < k; ++t) {
    if (!present.count(t)) throw InputError("type '" + type_names[t] + "' has no training rows");
  }

  TypeClassifier clf;
  clf.type_names = std::move(type_names);
  clf.dim = features.front().size();
  const auto flat = flatten(features, clf.dim);
  clf.weights.resize(k * clf.dim);
  clf.bias.assign(k, 0.0);
  Rng rng = make_rng(options.seed, 0x636c6173ULL);
  for (double& w : clf.weights) w = 0.01 * standard_normal(rng);

  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    const auto g = gradient_flat(clf, flat, features.size(), labels, options.l2, options.exec);
    if (loss_history) loss_history->push_back(g.loss);
    for (std::size_t i = 0; i < clf.weights.size(); ++i) clf.weights[i] -= options.lr * g.weights[i];
    for (std::size_t c = 0; c < k; ++c) clf.bias[c] -= options.lr * g.bias[c];
  }
  if (loss_history) {
    loss_history->push_back(
        gradient_flat(clf, flat, features.size(), labels, options.l2, options.exec).loss);
  }
  return clf;
}

Prediction classifier_predict(const TypeClassifier& clf, std::span<const double> feature) {
  if (feature.size() != clf.dim) {
    throw InputError("feature dim " + std::to_string(feature.size()) +
                     " does not match classifier dim " + std::to_string(clf.dim));
  }
  Prediction p;
  p.probabilities.resize(clf.num_types());
  kernels::softmax_row(feature.data(), MatrixView{clf.weights, clf.num_types(), clf.dim}, clf.bias,
                       0, p.probabilities.data());
  for (std::uint32_t c = 1; c < clf.num_types(); ++c) {
    if (p.probabilities[c] > p.probabilities[p.type]) p.type = c;
  }
  return p;
}

void save_classifier(const std::filesystem::path& path, const TypeClassifier& clf) {
  nlohmann::json j = {{"format", "wildlong.type_classifier"},
                      {"version", 1},
                      {"type_names", clf.type_names},
                      {"dim", clf.dim},
                      {"weights", clf.weights},
                      {"bias", clf.bias}};
  write_file_atomic(path, j.dump() + "\n");
}

TypeClassifier load_classifier(const std::filesystem::path& path) {
  auto j = nlohmann::json::parse(read_file(path), nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw FormatError(path.string() + " is not valid JSON");
  try {
    if (j.at("format") != "wildlong.type_classifier") throw FormatError("not a classifier checkpoint");
    if (j.at("version") != 1) throw FormatError("unsupported classifier checkpoint version");
    TypeClassifier clf;
    clf.type_names = j.at("type_names").get<std::vector<std::string>>();
    clf.dim = j.at("dim").get<std::size_t>();
    clf.weights = j.at("weights").get<std::vector<double>>();
    clf.bias = j.at("bias").get<std::vector<double>>();
    if (clf.weights.size() != clf.num_types() * clf.dim || clf.bias.size() != clf.num_types()) {
      throw FormatError("classifier checkpoint has inconsistent shapes");
    }
    return clf;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("classifier checkpoint: ") + e.what());
  }
}

}  // namespace wildlong::taxonomy
