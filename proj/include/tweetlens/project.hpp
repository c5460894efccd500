#pragma once
// t-SNE projection of user vectors to the plane.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "tweetlens/embed.hpp"

namespace tweetlens {

struct TsneConfig {
  double perplexity = 30.0;
  int iterations = 1000;
  double early_exaggeration = 12.0;
  int exaggeration_iterations = 250;
  double learning_rate = 200.0;
  double initial_momentum = 0.5;
  double final_momentum = 0.8;
  int momentum_switch = 250;
  std::uint64_t seed = 1;
  // Above this many points the gradient uses a quadtree with opening angle theta.
  std::size_t exact_limit = 5000;
  double theta = 0.5;
};

// Row-major dense matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}
  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  const double* row(std::size_t r) const { return data.data() + r * cols; }
};

Matrix to_matrix(const std::vector<std::vector<double>>& rows);

struct AffinityReport {
  std::vector<std::size_t> unconverged;  // points whose bandwidth search missed tolerance
  double max_entropy_error = 0.0;
};

// Symmetric joint probabilities p_ij = (p_j|i + p_i|j) / 2n, dense.
Matrix joint_affinities(const Matrix& x, double perplexity, AffinityReport* report = nullptr);

// Same over each point's 3 * perplexity nearest neighbours, CSR layout.
struct SparseAffinities {
  std::vector<std::size_t> row_ptr;
  std::vector<std::size_t> col;
  std::vector<double> val;
};
SparseAffinities sparse_joint_affinities(const Matrix& x, double perplexity, AffinityReport* report = nullptr);

// Exact gradient of KL(P || Q) with Student-t Q. `y` is n x 2.
Matrix tsne_gradient(const Matrix& p, const Matrix& y);
// Quadtree approximation; theta = 0 reproduces the exact gradient for the given P.
Matrix tsne_gradient_bh(const SparseAffinities& p, const Matrix& y, double theta);

struct TsneResult {
  Matrix y;  // n x 2
  std::vector<double> kl_trace;
  bool degenerate = false;
  AffinityReport affinities;
  std::vector<std::string> warnings;
};

// Throws TooFewPoints (< 4) and PerplexityTooHigh. All-identical inputs return
// a seeded small-noise layout with `degenerate` set.
TsneResult tsne_project(const Matrix& x, const TsneConfig& cfg);

struct LayoutPoint {
  std::string user_id;
  double x = 0;
  double y = 0;
};

struct Layout {
  std::vector<LayoutPoint> coords;
  std::vector<double> kl_trace;
  std::vector<std::string> warnings;
};

Layout project_users(const std::vector<UserVector>& users, const TsneConfig& cfg);

void write_layout_csv(std::ostream& out, const Layout& layout);
std::vector<LayoutPoint> read_layout_csv(std::istream& in);
void write_kl_trace_csv(std::ostream& out, const std::vector<double>& trace);

}  // namespace tweetlens
