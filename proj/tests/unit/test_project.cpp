#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "synthetic.hpp"
#include "oracles.hpp"
#include "tweetlens/errors.hpp"
#include "tweetlens/project.hpp"

using namespace tweetlens;
using namespace tweetlens::testing;

namespace {

double spearman(std::vector<double> a, std::vector<double> b) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto x, auto y) { return v[x] < v[y]; });
    std::vector<double> r(v.size());
    for (std::size_t k = 0; k < idx.size(); ++k) r[idx[k]] = static_cast<double>(k);
    return r;
  };
  const auto ra = ranks(a), rb = ranks(b);
  const double n = static_cast<double>(a.size());
  double d2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d2 += (ra[i] - rb[i]) * (ra[i] - rb[i]);
  return 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
}

std::vector<double> pairwise(const Matrix& y) {
  std::vector<double> d;
  for (std::size_t i = 0; i < y.rows; ++i) {
    for (std::size_t j = i + 1; j < y.rows; ++j) d.push_back(std::hypot(y(i, 0) - y(j, 0), y(i, 1) - y(j, 1)));
  }
  return d;
}

}  // namespace

TEST_CASE("analytic gradient matches central finite differences") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    std::mt19937_64 rng(seed);
    const Matrix x = random_matrix(10, 5, rng);
    const Matrix p = joint_affinities(x, 2.5);
    CHECK(fd_relative_error(p, random_matrix(10, 2, rng)) < 1e-4);
    CHECK(fd_relative_error(random_p(10, rng), random_matrix(10, 2, rng, 3.0)) < 1e-4);
  }
}

TEST_CASE("gradient is antisymmetric under a point reflection that swaps points") {
  const std::size_t n = 4;
  Matrix p(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) p(i, j) = i == j ? 0.0 : 1.0 / (n * (n - 1));
  }
  Matrix y(n, 2);
  y(0, 0) = 1.3, y(0, 1) = 0.4;
  y(1, 0) = -1.3, y(1, 1) = -0.4;
  y(2, 0) = 0.2, y(2, 1) = 2.0;
  y(3, 0) = -0.2, y(3, 1) = -2.0;
  const Matrix g = tsne_gradient(p, y);
  CHECK(g(0, 0) == doctest::Approx(-g(1, 0)));
  CHECK(g(0, 1) == doctest::Approx(-g(1, 1)));
  CHECK(g(2, 0) == doctest::Approx(-g(3, 0)));
  CHECK(g(2, 1) == doctest::Approx(-g(3, 1)));
}

TEST_CASE("joint affinities are symmetric, normalized and hit the entropy tolerance") {
  std::mt19937_64 rng(3);
  const Matrix x = random_matrix(60, 20, rng);
  AffinityReport report;
  const Matrix p = joint_affinities(x, 10.0, &report);
  CHECK(report.unconverged.empty());
  CHECK(report.max_entropy_error < 1e-5);
  double sum = 0.0;
  for (std::size_t i = 0; i < p.rows; ++i) {
    CHECK(p(i, i) == 0.0);
    for (std::size_t j = 0; j < p.cols; ++j) {
      sum += p(i, j);
      CHECK(p(i, j) == p(j, i));
    }
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("descent reaches a stationary layout") {
  std::mt19937_64 rng(12);
  const Matrix x = random_matrix(12, 4, rng);
  TsneConfig cfg;
  cfg.perplexity = 3.0;
  cfg.iterations = 3000;
  cfg.learning_rate = 50.0;
  const auto result = tsne_project(x, cfg);
  const Matrix g = tsne_gradient(joint_affinities(x, 3.0), result.y);
  double norm = 0.0;
  for (double v : g.data) norm += v * v;
  CHECK(std::sqrt(norm) < 1e-3);
}

TEST_CASE("two separated blobs stay separated; KL decreases after the exaggeration phase") {
  const auto blobs = two_blobs(50, 200, 12.0, 8);
  TsneConfig cfg;
  const auto a = tsne_project(blobs.x, cfg);
  REQUIRE(a.kl_trace.size() == 1000);
  for (double v : a.y.data) REQUIRE(std::isfinite(v));
  CHECK(linear_separability(a.y, blobs.label) >= 0.95);
  const double tail = std::accumulate(a.kl_trace.end() - 50, a.kl_trace.end(), 0.0) / 50.0;
  CHECK(tail < a.kl_trace[299]);

  CHECK(tsne_project(blobs.x, cfg).y.data == a.y.data);
}

TEST_CASE("pairwise-distance ranking agrees across seeds on the two-blob fixture") {
  const auto blobs = two_blobs(50, 200, 12.0, 8);
  TsneConfig cfg;
  const auto a = tsne_project(blobs.x, cfg);
  cfg.seed = 2;
  const auto b = tsne_project(blobs.x, cfg);
  const double rho = spearman(pairwise(a.y), pairwise(b.y));
  MESSAGE("spearman rho = " << rho);
  CHECK(rho >= 0.8);
}

TEST_CASE("tree-approximated gradient") {
  std::mt19937_64 rng(5);
  const Matrix x = random_matrix(40, 6, rng);
  const Matrix y = random_matrix(40, 2, rng, 2.0);
  SUBCASE("theta 0 with a full neighbourhood equals the exact gradient") {
    const auto sp = sparse_joint_affinities(x, 13.5);  // 3 * 13.5 >= n - 1
    Matrix dense(40, 40);
    for (std::size_t i = 0; i < 40; ++i) {
      CHECK(sp.row_ptr[i + 1] - sp.row_ptr[i] == 39);
      for (std::size_t k = sp.row_ptr[i]; k < sp.row_ptr[i + 1]; ++k) dense(i, sp.col[k]) = sp.val[k];
    }
    const Matrix exact = tsne_gradient(dense, y);
    const Matrix tree = tsne_gradient_bh(sp, y, 0.0);
    for (std::size_t k = 0; k < exact.data.size(); ++k) CHECK(tree.data[k] == doctest::Approx(exact.data[k]).epsilon(1e-9));
  }
  SUBCASE("theta 0.5 stays close") {
    const auto sp = sparse_joint_affinities(x, 5.0);
    const Matrix a = tsne_gradient_bh(sp, y, 0.0);
    const Matrix b = tsne_gradient_bh(sp, y, 0.5);
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < a.data.size(); ++k) {
      num += (a.data[k] - b.data[k]) * (a.data[k] - b.data[k]);
      den += a.data[k] * a.data[k];
    }
    CHECK(std::sqrt(num / den) < 0.05);
  }
  SUBCASE("duplicate points do not break the tree") {
    Matrix dup(6, 2, 0.5);
    dup(5, 0) = 3.0;
    const auto sp = sparse_joint_affinities(random_matrix(6, 3, rng), 1.0);
    for (double v : tsne_gradient_bh(sp, dup, 0.5).data) CHECK(std::isfinite(v));
  }
}

TEST_CASE("tree-approximated descent separates the blobs") {
  const auto blobs = two_blobs(150, 50, 12.0, 4);
  TsneConfig cfg;
  cfg.exact_limit = 0;
  const auto r = tsne_project(blobs.x, cfg);
  CHECK(r.kl_trace.size() == 1000);
  CHECK(linear_separability(r.y, blobs.label) >= 0.95);
}

TEST_CASE("degenerate and invalid inputs") {
  TsneConfig cfg;
  cfg.perplexity = 0.5;
  SUBCASE("identical points") {
    const auto r = tsne_project(Matrix(4, 3, 1.0), cfg);
    CHECK(r.degenerate);
    CHECK(r.warnings.size() == 1);
    CHECK(r.kl_trace.size() == 1000);
    for (double v : r.y.data) CHECK(std::isfinite(v));
  }
  SUBCASE("too few points") { CHECK_THROWS_AS(tsne_project(Matrix(3, 2, 1.0), cfg), TooFewPoints); }
  SUBCASE("perplexity too high") {
    cfg.perplexity = 30;
    std::mt19937_64 rng(1);
    CHECK_THROWS_AS(tsne_project(random_matrix(50, 2, rng), cfg), PerplexityTooHigh);
  }
  SUBCASE("iterations must outlast exaggeration") {
    cfg.iterations = 250;
    std::mt19937_64 rng(1);
    CHECK_THROWS_AS(tsne_project(random_matrix(10, 2, rng), cfg), InputError);
  }
}

TEST_CASE("layout CSV round trip") {
  Layout layout;
  layout.coords = {{"7", 0.1, -2.5e-9}, {"12", 1.0 / 3.0, 4.0}};
  std::stringstream ss;
  write_layout_csv(ss, layout);
  const auto back = read_layout_csv(ss);
  REQUIRE(back.size() == 2);
  CHECK(back[0].user_id == "7");
  CHECK(back[0].y == -2.5e-9);
  CHECK(back[1].x == 1.0 / 3.0);
  std::stringstream kl;
  write_kl_trace_csv(kl, {0.5, 0.25});
  CHECK(kl.str() == "iteration,kl\n1,0.5\n2,0.25\n");
}
