#include "wildlong/taxonomy/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include "wildlong/error.hpp"
#include "wildlong/jsonl.hpp"
#include "wildlong/llm/gateway.hpp"
#include "wildlong/llm/templates.hpp"
#include "wildlong/meta/meta_model.hpp"
#include "wildlong/rng.hpp"

namespace wildlong::taxonomy {

namespace {

using kernels::MatrixView;

double weighted_sum(std::span<const double> values, std::span<const double> weights) {
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) s += weights[i] * values[i];
  return s;
}

// k-means++ seeding with D^2 * weight sampling.
std::vector<double> kmeanspp_init(const std::vector<double>& flat, std::size_t n, std::size_t dim,
                                  std::size_t k, std::span<const double> weights, Rng& rng) {
  std::vector<double> centroids;
  centroids.reserve(k * dim);
  std::vector<bool> chosen(n, false);
  auto take = [&](std::size_t i) {
    chosen[i] = true;
    centroids.insert(centroids.end(), flat.begin() + i * dim, flat.begin() + (i + 1) * dim);
  };

  const double total_w = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<double> probs(n);
  for (std::size_t i = 0; i < n; ++i) probs[i] = weights[i] / total_w;
  take(sample_categorical(rng, probs));

  // greedy seeding: several D^2 candidates per step, keep the lowest potential
  const std::size_t trials = 2 + static_cast<std::size_t>(std::log(static_cast<double>(k)));
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) {
    d2[i] = kernels::squared_distance(flat.data() + i * dim, centroids.data(), dim);
  }
  std::vector<double> cand_d2(n), best_d2(n);
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += weights[i] * d2[i];
    if (total <= 0.0) {
      // Every remaining point coincides with a centroid; take the first unused one.
      const auto it = std::find(chosen.begin(), chosen.end(), false);
      take(static_cast<std::size_t>(it - chosen.begin()));
      continue;
    }
    for (std::size_t i = 0; i < n; ++i) probs[i] = weights[i] * d2[i] / total;
    std::size_t best = n;
    double best_pot = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < trials; ++t) {
      const auto cand = sample_categorical(rng, probs);
      double pot = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        cand_d2[i] = std::min(d2[i], kernels::squared_distance(flat.data() + i * dim,
                                                               flat.data() + cand * dim, dim));
        pot += weights[i] * cand_d2[i];
      }
      if (pot < best_pot) {
        best_pot = pot;
        best = cand;
        best_d2.swap(cand_d2);
      }
    }
    take(best);
    d2.swap(best_d2);
  }
  return centroids;
}

// Reseeds each empty cluster with the point farthest from its centroid, taken
// from a cluster that keeps at least one member. Returns true if anything moved.
bool repair_empty_clusters(std::span<std::uint32_t> assignment, std::span<double> dist2,
                           std::size_t k) {
  std::vector<std::size_t> counts(k, 0);
  for (auto a : assignment) ++counts[a];
  bool moved = false;
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] != 0) continue;
    std::size_t far = assignment.size();
    for (std::size_t i = 0; i < assignment.size(); ++i) {
      if (counts[assignment[i]] < 2) continue;
      if (far == assignment.size() || dist2[i] > dist2[far]) far = i;
    }
    if (far == assignment.size()) break;
    --counts[assignment[far]];
    assignment[far] = static_cast<std::uint32_t>(c);
    dist2[far] = 0.0;
    counts[c] = 1;
    moved = true;
  }
  return moved;
}

KMeansResult lloyd(const std::vector<double>& flat, std::span<const double> weights, std::size_t n,
                   std::size_t dim, const KMeansOptions& options, Rng& rng) {
  const std::size_t k = options.k;
  std::vector<double> centroids = kmeanspp_init(flat, n, dim, k, weights, rng);

  KMeansResult result;
  result.assignment.assign(n, 0);
  std::vector<double> dist2(n, 0.0);
  const MatrixView pts{flat, n, dim};
  std::vector<double> next(k * dim);
  std::vector<double> mass(k);

  for (int iter = 0; iter < options.max_iters; ++iter) {
    kernels::assign_nearest(options.exec, pts, MatrixView{centroids, k, dim}, result.assignment,
                            dist2);
    repair_empty_clusters(result.assignment, dist2, k);
    result.inertia_history.push_back(weighted_sum(dist2, weights));

    std::fill(next.begin(), next.end(), 0.0);
    std::fill(mass.begin(), mass.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = result.assignment[i];
      mass[c] += weights[i];
      const double* p = pts.row(i);
      double* dst = next.data() + c * dim;
      for (std::size_t j = 0; j < dim; ++j) dst[j] += weights[i] * p[j];
    }
    double shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      double* dst = next.data() + c * dim;
      if (mass[c] > 0.0) {
        for (std::size_t j = 0; j < dim; ++j) dst[j] /= mass[c];
      } else {
        std::copy_n(centroids.data() + c * dim, dim, dst);
      }
      shift = std::max(shift, std::sqrt(kernels::squared_distance(dst, centroids.data() + c * dim, dim)));
    }
    centroids.swap(next);
    result.iterations = iter + 1;
    if (shift < options.tol) {
      result.converged = true;
      break;
    }
  }

  // Final assignment against the final centroids.
  kernels::assign_nearest(options.exec, pts, MatrixView{centroids, k, dim}, result.assignment,
                          dist2);
  result.inertia_history.push_back(weighted_sum(dist2, weights));

  result.model.dim = dim;
  result.model.inertia = result.inertia_history.back();
  result.model.centroids.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    result.model.centroids[c].assign(centroids.begin() + c * dim, centroids.begin() + (c + 1) * dim);
  }
  return result;
}

}  // namespace

std::size_t ClusterModel::nearest(std::span<const double> point) const {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = kernels::squared_distance(point.data(), centroids[c].data(), dim);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

KMeansResult kmeans_fit(std::span<const std::vector<double>> points, const KMeansOptions& options,
                        std::span<const double> weights_in) {
  const std::size_t n = points.size();
  const std::size_t k = options.k;
  if (n == 0) throw InputError("k-means needs at least one point");
  if (k == 0) throw InputError("k must be positive");
  if (options.restarts < 1) throw InputError("k-means needs at least one restart");
  if (k > n) {
    throw InputError("k (" + std::to_string(k) + ") exceeds number of points (" +
                     std::to_string(n) + ")");
  }
  const std::size_t dim = points.front().size();
  if (dim == 0) throw InputError("points have zero dimension");
  std::vector<double> flat;
  flat.reserve(n * dim);
  for (const auto& p : points) {
    if (p.size() != dim) throw InputError("inconsistent point dimensions");
    for (double x : p) {
      if (!std::isfinite(x)) throw InputError("non-finite point component");
    }
    flat.insert(flat.end(), p.begin(), p.end());
  }
  std::vector<double> weights(n, 1.0);
  if (!weights_in.empty()) {
    if (weights_in.size() != n) throw InputError("weights and points differ in length");
    for (std::size_t i = 0; i < n; ++i) {
      if (!(weights_in[i] > 0.0) || !std::isfinite(weights_in[i])) {
        throw InputError("point weights must be positive and finite");
      }
      weights[i] = weights_in[i];
    }
  }

  KMeansResult best;
  for (int r = 0; r < options.restarts; ++r) {
    Rng rng = make_rng(options.seed, 0x6b6d65616e73ULL + static_cast<std::uint64_t>(r));
    auto run = lloyd(flat, weights, n, dim, options, rng);
    if (r == 0 || run.model.inertia < best.model.inertia) best = std::move(run);
  }
  return best;
}

std::vector<std::vector<std::string>> cluster_exemplars(const KMeansResult& fit,
                                                        std::span<const std::vector<double>> points,
                                                        std::span<const std::string> names,
                                                        std::size_t per_cluster) {
  const std::size_t k = fit.model.k();
  std::vector<std::vector<std::pair<double, std::size_t>>> members(k);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto c = fit.assignment[i];
    members[c].emplace_back(
        kernels::squared_distance(points[i].data(), fit.model.centroids[c].data(), fit.model.dim), i);
  }
  std::vector<std::vector<std::string>> out(k);
  for (std::size_t c = 0; c < k; ++c) {
    std::sort(members[c].begin(), members[c].end());
    for (std::size_t m = 0; m < members[c].size() && m < per_cluster; ++m) {
      out[c].push_back(names[members[c][m].second]);
    }
  }
  return out;
}

std::vector<std::string> deduplicate_labels(std::vector<std::string> labels) {
  std::set<std::string> used;
  for (auto& label : labels) {
    if (used.insert(label).second) continue;
    int n = 2;
    while (used.count(label + " (" + std::to_string(n) + ")")) ++n;
    label += " (" + std::to_string(n) + ")";
    used.insert(label);
  }
  return labels;
}

ClusterModel label_clusters(ClusterModel model,
                            const std::vector<std::vector<std::string>>& exemplars,
                            llm::Gateway& gateway) {
  if (exemplars.size() != model.k()) throw InputError("need one exemplar list per cluster");
  std::vector<std::string> labels;
  for (std::size_t c = 0; c < model.k(); ++c) {
    if (exemplars[c].empty()) {
      throw InputError("cluster " + std::to_string(c) + " has no exemplars");
    }
    llm::CompletionRequest req{llm::render_cluster_label_prompt(exemplars[c]), 0.0, 64,
                               "cluster-label-" + std::to_string(c)};
    std::string reply;
    try {
      reply = gateway.complete(req);
    } catch (const BackendError& e) {
      throw BackendError("labeling cluster " + std::to_string(c) + ": " + e.what(), e.attempts(),
                         e.last_status());
    }
    std::string first_line = reply.substr(0, reply.find('\n'));
    std::erase_if(first_line, [](char ch) { return ch == '*' || ch == '"'; });
    auto label = meta::normalize_text(first_line);
    if (label.empty()) {
      throw ParseError("cluster " + std::to_string(c) + ": backend returned an empty label", reply);
    }
    labels.push_back(std::move(label));
  }
  model.labels = deduplicate_labels(std::move(labels));
  return model;
}

nlohmann::json to_json(const ClusterModel& model) {
  return {{"format", "wildlong.cluster_model"}, {"version", 1},      {"dim", model.dim},
          {"centroids", model.centroids},       {"labels", model.labels}, {"inertia", model.inertia}};
}

ClusterModel cluster_model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != "wildlong.cluster_model" || j.at("version") != 1) {
      throw FormatError("unsupported cluster model format/version");
    }
    ClusterModel m;
    m.dim = j.at("dim").get<std::size_t>();
    m.centroids = j.at("centroids").get<std::vector<std::vector<double>>>();
    m.labels = j.at("labels").get<std::vector<std::string>>();
    m.inertia = j.at("inertia").get<double>();
    for (const auto& c : m.centroids) {
      if (c.size() != m.dim) throw FormatError("centroid dimension mismatch");
    }
    if (!m.labels.empty() && m.labels.size() != m.centroids.size()) {
      throw FormatError("label count does not match centroid count");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("cluster model: ") + e.what());
  }
}

void save_cluster_model(const std::filesystem::path& path, const ClusterModel& model) {
  write_file_atomic(path, to_json(model).dump(2) + "\n");
}

ClusterModel load_cluster_model(const std::filesystem::path& path) {
  auto j = nlohmann::json::parse(read_file(path), nullptr, false);
  if (j.is_discarded()) throw FormatError(path.string() + " is not valid JSON");
  return cluster_model_from_json(j);
}

}  // namespace wildlong::taxonomy
