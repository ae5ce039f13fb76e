#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "wildlong/error.hpp"
#include "wildlong/taxonomy/classifier.hpp"

using namespace wildlong;
using namespace wildlong::taxonomy;

namespace {

TypeClassifier random_classifier(Rng& rng, std::size_t types, std::size_t dim, double scale) {
  TypeClassifier c;
  for (std::size_t t = 0; t < types; ++t) c.type_names.push_back("type " + std::to_string(t));
  c.dim = dim;
  c.weights.resize(types * dim);
  c.bias.resize(types);
  for (auto& w : c.weights) w = scale * standard_normal(rng);
  for (auto& b : c.bias) b = scale * standard_normal(rng);
  return c;
}

// Loss recomputed from scratch: mean -log softmax(label) + l2/2 ||W||^2.
double loss_oracle(const TypeClassifier& c, const std::vector<std::vector<double>>& x,
                   const std::vector<std::uint32_t>& y, double l2) {
  long double total = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::vector<long double> z(c.num_types());
    for (std::size_t k = 0; k < c.num_types(); ++k) {
      z[k] = c.bias[k];
      for (std::size_t j = 0; j < c.dim; ++j) z[k] += c.weights[k * c.dim + j] * x[i][j];
    }
    long double mx = *std::max_element(z.begin(), z.end()), s = 0;
    for (auto v : z) s += std::exp(v - mx);
    total += -(z[y[i]] - mx - std::log(s));
  }
  long double reg = 0;
  for (double w : c.weights) reg += static_cast<long double>(w) * w;
  return static_cast<double>(total / x.size() + 0.5L * l2 * reg);
}

struct Data {
  std::vector<std::vector<double>> x;
  std::vector<std::uint32_t> y;
};

Data random_batch_data(Rng& rng, std::size_t n, std::size_t dim, std::size_t types) {
  Data d;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row(dim);
    for (auto& v : row) v = standard_normal(rng);
    d.x.push_back(row);
    d.y.push_back(static_cast<std::uint32_t>(i % types));
  }
  return d;
}

}  // namespace

TEST_SUITE("classifier") {
  TEST_CASE("gradient agrees with central finite differences") {
    Rng rng = make_rng(61);
    for (double l2 : {0.0, 0.3}) {
      auto c = random_classifier(rng, 4, 5, 0.5);
      const auto d = random_batch_data(rng, 30, 5, 4);
      const auto g = loss_gradient(c, Batch{d.x, d.y}, l2);
      CHECK(g.loss == doctest::Approx(loss_oracle(c, d.x, d.y, l2)).epsilon(1e-10));
      const double h = 1e-6;
      for (std::size_t i = 0; i < c.weights.size(); ++i) {
        auto up = c, dn = c;
        up.weights[i] += h;
        dn.weights[i] -= h;
        const double fd = (loss_oracle(up, d.x, d.y, l2) - loss_oracle(dn, d.x, d.y, l2)) / (2 * h);
        CHECK(std::abs(fd - g.weights[i]) < 1e-6);
      }
      for (std::size_t k = 0; k < c.bias.size(); ++k) {
        auto up = c, dn = c;
        up.bias[k] += h;
        dn.bias[k] -= h;
        const double fd = (loss_oracle(up, d.x, d.y, l2) - loss_oracle(dn, d.x, d.y, l2)) / (2 * h);
        CHECK(std::abs(fd - g.bias[k]) < 1e-6);
      }
    }
  }

  TEST_CASE("gradient reduces to the penalty when predictions are certain") {
    TypeClassifier c;
    c.type_names = {"a", "b"};
    c.dim = 1;
    c.weights = {60.0, -60.0};
    c.bias = {0.0, 0.0};
    std::vector<std::vector<double>> x = {{1.0}, {-1.0}};
    std::vector<std::uint32_t> y = {0, 1};
    const auto g0 = loss_gradient(c, Batch{x, y}, 0.0);
    for (double v : g0.weights) CHECK(std::abs(v) < 1e-12);
    for (double v : g0.bias) CHECK(std::abs(v) < 1e-12);
    const auto g = loss_gradient(c, Batch{x, y}, 0.5);
    CHECK(g.weights[0] == doctest::Approx(30.0));
    CHECK(g.weights[1] == doctest::Approx(-30.0));
  }

  TEST_CASE("zero weights predict uniformly and pick type 0") {
    TypeClassifier c;
    c.type_names = {"a", "b", "c"};
    c.dim = 2;
    c.weights.assign(6, 0.0);
    c.bias.assign(3, 0.0);
    const auto p = classifier_predict(c, std::vector<double>{0.3, -2.0});
    CHECK(p.type == 0);
    for (double v : p.probabilities) CHECK(v == doctest::Approx(1.0 / 3));
  }

  TEST_CASE("a shared bias shift leaves predictions unchanged") {
    Rng rng = make_rng(62);
    auto c = random_classifier(rng, 5, 4, 1.0);
    auto shifted = c;
    for (auto& b : shifted.bias) b += 17.0;
    for (int i = 0; i < 50; ++i) {
      std::vector<double> x(4);
      for (auto& v : x) v = standard_normal(rng);
      const auto a = classifier_predict(c, x);
      const auto b = classifier_predict(shifted, x);
      CHECK(a.type == b.type);
      for (std::size_t k = 0; k < 5; ++k) CHECK(a.probabilities[k] == doctest::Approx(b.probabilities[k]));
    }
  }

  TEST_CASE("prediction is the argmax of the logits") {
    Rng rng = make_rng(63);
    auto c = random_classifier(rng, 6, 3, 2.0);
    for (int i = 0; i < 200; ++i) {
      std::vector<double> x(3);
      for (auto& v : x) v = standard_normal(rng);
      std::uint32_t arg = 0;
      double best = -1e300;
      for (std::uint32_t k = 0; k < 6; ++k) {
        double z = c.bias[k];
        for (std::size_t j = 0; j < 3; ++j) z += c.weights[k * 3 + j] * x[j];
        if (z > best) best = z, arg = k;
      }
      CHECK(classifier_predict(c, x).type == arg);
    }
  }

  TEST_CASE("strong regularization shrinks weights") {
    Rng rng = make_rng(64);
    const auto d = random_batch_data(rng, 60, 4, 3);
    TrainOptions o;
    o.l2 = 1e6;
    o.lr = 1e-7;
    o.epochs = 200;
    const auto c = classifier_train(d.x, d.y, {"a", "b", "c"}, o);
    double norm = 0;
    for (double w : c.weights) norm += w * w;
    CHECK(std::sqrt(norm) < 1e-2);
  }

  TEST_CASE("separable classes are learned and loss decreases") {
    Rng rng = make_rng(65);
    std::vector<std::vector<double>> x;
    std::vector<std::uint32_t> y;
    for (int i = 0; i < 200; ++i) {
      const std::uint32_t label = i % 2;
      x.push_back({(label ? 3.0 : -3.0) + standard_normal(rng), standard_normal(rng)});
      y.push_back(label);
    }
    std::vector<double> history;
    const auto c = classifier_train(x, y, {"neg", "pos"}, TrainOptions{}, &history);
    CHECK(history.front() > history.back());
    std::size_t correct = 0;
    for (std::size_t i = 0; i < x.size(); ++i) correct += classifier_predict(c, x[i]).type == y[i];
    CHECK(correct >= 190);
  }

  TEST_CASE("training is deterministic across executors") {
    Rng rng = make_rng(66);
    const auto d = random_batch_data(rng, 90, 6, 3);
    TrainOptions s;
    s.epochs = 50;
    s.seed = 3;
    auto o = s;
    o.exec = kernels::Exec::kOpenMP;
    const auto a = classifier_train(d.x, d.y, {"a", "b", "c"}, s);
    const auto b = classifier_train(d.x, d.y, {"a", "b", "c"}, s);
    const auto c = classifier_train(d.x, d.y, {"a", "b", "c"}, o);
    CHECK(a == b);
    CHECK(a == c);
  }

  TEST_CASE("save and load") {
    Rng rng = make_rng(67);
    const auto c = random_classifier(rng, 3, 4, 1.0);
    testing::TempDir dir;
    save_classifier(dir / "c.json", c);
    CHECK(load_classifier(dir / "c.json") == c);
  }

  TEST_CASE("input validation") {
    Rng rng = make_rng(68);
    auto c = random_classifier(rng, 2, 3, 1.0);
    std::vector<std::vector<double>> x = {{1, 2, 3}};
    std::vector<std::uint32_t> bad_label = {5};
    CHECK_THROWS_AS(loss_gradient(c, Batch{x, bad_label}, 0.0), InputError);
    std::vector<std::vector<double>> empty;
    std::vector<std::uint32_t> none;
    CHECK_THROWS_AS(loss_gradient(c, Batch{empty, none}, 0.0), InputError);
    std::vector<std::vector<double>> short_row = {{1, 2}};
    std::vector<std::uint32_t> zero = {0};
    CHECK_THROWS_AS(loss_gradient(c, Batch{short_row, zero}, 0.0), InputError);
    CHECK_THROWS_AS(classifier_train(x, zero, {"a", "b"}, TrainOptions{}), InputError);
  }
}
