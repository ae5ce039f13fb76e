#include <doctest.h>

#include <cmath>
#include <algorithm>
#include <cstring>

#include "wildlong/kernels/kernels.hpp"
#include "wildlong/rng.hpp"

using namespace wildlong;
using namespace wildlong::kernels;

namespace {

std::vector<double> random_matrix(Rng& rng, std::size_t rows, std::size_t cols) {
  std::vector<double> m(rows * cols);
  for (auto& v : m) v = standard_normal(rng);
  return m;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_SUITE("kernels") {
  TEST_CASE("assign_nearest serial and OpenMP agree bitwise") {
    Rng rng = make_rng(71);
    const std::size_t n = 5000, k = 13, d = 9;
    const auto pts = random_matrix(rng, n, d);
    auto cen = random_matrix(rng, k, d);
    std::copy(cen.begin(), cen.begin() + d, cen.begin() + d);  // rows 0 and 1 tie everywhere
    MatrixView pv{pts, n, d}, cv{cen, k, d};
    std::vector<std::uint32_t> a1(n), a2(n);
    std::vector<double> d1(n), d2(n);
    serial::assign_nearest(pv, cv, a1, d1);
    omp::assign_nearest(pv, cv, a2, d2);
    CHECK(a1 == a2);
    CHECK(bitwise_equal(d1, d2));
    CHECK(std::find(a1.begin(), a1.end(), 1u) == a1.end());
    for (std::size_t i = 0; i < n; i += 97) {
      double best = 1e300;
      std::uint32_t arg = 0;
      for (std::uint32_t c = 0; c < k; ++c) {
        const double s = squared_distance(pv.row(i), cv.row(c), d);
        if (s < best) best = s, arg = c;
      }
      CHECK(a1[i] == arg);
      CHECK(d1[i] == best);
    }
  }

  TEST_CASE("softmax_residuals and accumulate_gradient agree bitwise") {
    Rng rng = make_rng(72);
    const std::size_t n = 3000, k = 7, d = 11;
    const auto x = random_matrix(rng, n, d);
    const auto w = random_matrix(rng, k, d);
    const auto b = random_matrix(rng, 1, k);
    std::vector<std::uint32_t> labels(n);
    for (auto& l : labels) l = static_cast<std::uint32_t>(uniform_index(rng, k));
    MatrixView xv{x, n, d}, wv{w, k, d};
    std::vector<double> r1(n * k), r2(n * k), l1(n), l2(n);
    serial::softmax_residuals(xv, wv, b, labels, r1, l1);
    omp::softmax_residuals(xv, wv, b, labels, r2, l2);
    CHECK(bitwise_equal(r1, r2));
    CHECK(bitwise_equal(l1, l2));
    for (std::size_t i = 0; i < n; i += 101) {
      double s = 0;
      for (std::size_t c = 0; c < k; ++c) s += r1[i * k + c];
      CHECK(std::abs(s) < 1e-12);
      CHECK(l1[i] >= 0.0);
    }
    std::vector<double> gw1(k * d), gw2(k * d), gb1(k), gb2(k);
    MatrixView rv{r1, n, k};
    serial::accumulate_gradient(xv, rv, gw1, gb1);
    omp::accumulate_gradient(xv, rv, gw2, gb2);
    CHECK(bitwise_equal(gw1, gw2));
    CHECK(bitwise_equal(gb1, gb2));
  }

  TEST_CASE("softmax_row is stable for large logits") {
    std::vector<double> w = {1000.0, 999.0};
    std::vector<double> b = {0.0, 0.0};
    const double x = 1.0;
    double probs[2];
    const double loss = softmax_row(&x, MatrixView{w, 2, 1}, b, 1, probs);
    CHECK(std::isfinite(loss));
    CHECK(loss == doctest::Approx(1.0 + std::log1p(std::exp(-1.0))));
    CHECK(probs[0] + probs[1] == doctest::Approx(1.0));
  }
}
