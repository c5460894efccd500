#include "tweetlens/project.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>

#include "parallel.hpp"
#include "tweetlens/errors.hpp"
#include "tweetlens/simd.hpp"

namespace tweetlens {

namespace {

constexpr double kEntropyTolerance = 1e-5;
constexpr int kMaxBandwidthSteps = 200;

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Box-Muller, so layouts do not depend on the standard library's distributions.
double gaussian(std::mt19937_64& rng) {
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

struct RowResult {
  bool converged = true;
  double entropy_error = 0.0;
};

// Fills `p` with the conditional distribution for squared distances `d`
// whose entropy matches log(perplexity).
RowResult calibrate_row(std::span<const double> d, double perplexity, std::span<double> p) {
  const double target = std::log(perplexity);
  const double dmin = *std::min_element(d.begin(), d.end());
  double beta = 1.0;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  RowResult out;
  for (int step = 0; step < kMaxBandwidthSteps; ++step) {
    double sum = 0.0;
    double weighted = 0.0;
    for (std::size_t j = 0; j < d.size(); ++j) {
      p[j] = std::exp(-(d[j] - dmin) * beta);
      sum += p[j];
      weighted += (d[j] - dmin) * p[j];
    }
    const double entropy = std::log(sum) + beta * weighted / sum;
    for (auto& v : p) v /= sum;
    const double diff = entropy - target;
    out.entropy_error = std::abs(diff);
    if (out.entropy_error < kEntropyTolerance) return out;
    if (diff > 0) {
      lo = beta;
      beta = std::isinf(hi) ? beta * 2.0 : (beta + hi) / 2.0;
    } else {
      hi = beta;
      beta = std::isinf(lo) ? beta / 2.0 : (beta + lo) / 2.0;
    }
  }
  out.converged = false;
  return out;
}

void merge_report(AffinityReport* report, const std::vector<RowResult>& rows) {
  if (report == nullptr) return;
  *report = {};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].converged) report->unconverged.push_back(i);
    report->max_entropy_error = std::max(report->max_entropy_error, rows[i].entropy_error);
  }
}

// ------------------------------------------------------------------ quadtree

class QuadTree {
 public:
  explicit QuadTree(const Matrix& y) : y_(y) {
    double minx = y(0, 0), maxx = minx, miny = y(0, 1), maxy = miny;
    for (std::size_t i = 1; i < y.rows; ++i) {
      minx = std::min(minx, y(i, 0));
      maxx = std::max(maxx, y(i, 0));
      miny = std::min(miny, y(i, 1));
      maxy = std::max(maxy, y(i, 1));
    }
    const double half = std::max({maxx - minx, maxy - miny, 1e-12}) / 2.0 * (1.0 + 1e-9);
    nodes_.emplace_back((minx + maxx) / 2.0, (miny + maxy) / 2.0, half);
    for (std::size_t i = 0; i < y.rows; ++i) insert(0, i, 0);
    finalize(0);
  }

  // Accumulates the repulsive force numerator into f and returns this point's
  // share of the normalization sum.
  double repulse(std::size_t i, double theta, double f[2]) const { return visit(0, i, theta, f); }

 private:
  struct Node {
    Node(double x, double y, double h) : cx(x), cy(y), half(h) {}
    double cx, cy, half;
    double comx = 0, comy = 0;
    std::size_t count = 0;
    int child[4] = {-1, -1, -1, -1};
    std::vector<std::size_t> points;  // leaves only
    bool leaf = true;
  };

  static constexpr int kMaxDepth = 48;

  int quadrant(const Node& n, std::size_t i) const {
    return (y_(i, 0) >= n.cx ? 1 : 0) + (y_(i, 1) >= n.cy ? 2 : 0);
  }

  void insert(std::size_t at, std::size_t i, int depth) {
    nodes_[at].comx += y_(i, 0);
    nodes_[at].comy += y_(i, 1);
    ++nodes_[at].count;
    if (nodes_[at].leaf) {
      if (nodes_[at].points.empty() || depth >= kMaxDepth) {
        nodes_[at].points.push_back(i);
        return;
      }
      // Split: push the resident points one level down.
      auto resident = std::move(nodes_[at].points);
      nodes_[at].points.clear();
      nodes_[at].leaf = false;
      for (std::size_t r : resident) descend(at, r, depth);
    }
    descend(at, i, depth);
  }

  void descend(std::size_t at, std::size_t i, int depth) {
    const int q = quadrant(nodes_[at], i);
    if (nodes_[at].child[q] < 0) {
      const Node& n = nodes_[at];
      const double h = n.half / 2.0;
      const double cx = n.cx + ((q & 1) ? h : -h);
      const double cy = n.cy + ((q & 2) ? h : -h);
      nodes_.emplace_back(cx, cy, h);
      nodes_[at].child[q] = static_cast<int>(nodes_.size() - 1);
    }
    // Only the child's own sums are updated from here on.
    insert(static_cast<std::size_t>(nodes_[at].child[q]), i, depth + 1);
  }

  void finalize(std::size_t at) {
    Node& n = nodes_[at];
    if (n.count > 0) {
      n.comx /= static_cast<double>(n.count);
      n.comy /= static_cast<double>(n.count);
    }
    for (int c : n.child) {
      if (c >= 0) finalize(static_cast<std::size_t>(c));
    }
  }

  double visit(std::size_t at, std::size_t i, double theta, double f[2]) const {
    const Node& n = nodes_[at];
    if (n.count == 0) return 0.0;
    if (n.leaf) {
      double z = 0.0;
      for (std::size_t j : n.points) {
        if (j == i) continue;
        const double dx = y_(i, 0) - y_(j, 0);
        const double dy = y_(i, 1) - y_(j, 1);
        const double q = 1.0 / (1.0 + dx * dx + dy * dy);
        z += q;
        f[0] += q * q * dx;
        f[1] += q * q * dy;
      }
      return z;
    }
    const double dx = y_(i, 0) - n.comx;
    const double dy = y_(i, 1) - n.comy;
    const double d2 = dx * dx + dy * dy;
    if (theta > 0 && (2.0 * n.half) * (2.0 * n.half) < theta * theta * d2) {
      const double q = 1.0 / (1.0 + d2);
      const double m = static_cast<double>(n.count);
      f[0] += m * q * q * dx;
      f[1] += m * q * q * dy;
      return m * q;
    }
    double z = 0.0;
    for (int c : n.child) {
      if (c >= 0) z += visit(static_cast<std::size_t>(c), i, theta, f);
    }
    return z;
  }

  const Matrix& y_;
  std::vector<Node> nodes_;
};

// Gradient with P scaled by `exaggeration`; KL against the unscaled P.
struct GradientEval {
  Matrix grad;
  double kl = 0.0;
};

GradientEval exact_step(const Matrix& p, const Matrix& y, double exaggeration) {
  const std::size_t n = y.rows;
  Matrix num(n, n);
  std::vector<double> row_z(n, 0.0);
  detail::parallel_for(n, [&](std::size_t i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double dx = y(i, 0) - y(j, 0);
      const double dy = y(i, 1) - y(j, 1);
      num(i, j) = 1.0 / (1.0 + dx * dx + dy * dy);
      row_z[i] += num(i, j);
    }
  });
  const double z = std::accumulate(row_z.begin(), row_z.end(), 0.0);
  GradientEval out{Matrix(n, 2), 0.0};
  std::vector<double> row_kl(n, 0.0);
  detail::parallel_for(n, [&](std::size_t i) {
    double gx = 0.0, gy = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double q = num(i, j) / z;
      const double mult = (exaggeration * p(i, j) - q) * num(i, j);
      gx += mult * (y(i, 0) - y(j, 0));
      gy += mult * (y(i, 1) - y(j, 1));
      if (p(i, j) > 0) row_kl[i] += p(i, j) * std::log(p(i, j) / q);
    }
    out.grad(i, 0) = 4.0 * gx;
    out.grad(i, 1) = 4.0 * gy;
  });
  out.kl = std::accumulate(row_kl.begin(), row_kl.end(), 0.0);
  return out;
}

GradientEval bh_step(const SparseAffinities& p, const Matrix& y, double theta, double exaggeration) {
  const std::size_t n = y.rows;
  const QuadTree tree(y);
  Matrix rep(n, 2);
  std::vector<double> row_z(n, 0.0);
  detail::parallel_for(n, [&](std::size_t i) {
    double f[2] = {0.0, 0.0};
    row_z[i] = tree.repulse(i, theta, f);
    rep(i, 0) = f[0];
    rep(i, 1) = f[1];
  }, 16);
  const double z = std::accumulate(row_z.begin(), row_z.end(), 0.0);
  GradientEval out{Matrix(n, 2), 0.0};
  std::vector<double> row_kl(n, 0.0);
  detail::parallel_for(n, [&](std::size_t i) {
    double ax = 0.0, ay = 0.0;
    for (std::size_t k = p.row_ptr[i]; k < p.row_ptr[i + 1]; ++k) {
      const std::size_t j = p.col[k];
      const double dx = y(i, 0) - y(j, 0);
      const double dy = y(i, 1) - y(j, 1);
      const double q = 1.0 / (1.0 + dx * dx + dy * dy);
      ax += exaggeration * p.val[k] * q * dx;
      ay += exaggeration * p.val[k] * q * dy;
      row_kl[i] += p.val[k] * std::log(p.val[k] * z / q);
    }
    out.grad(i, 0) = 4.0 * (ax - rep(i, 0) / z);
    out.grad(i, 1) = 4.0 * (ay - rep(i, 1) / z);
  }, 16);
  out.kl = std::accumulate(row_kl.begin(), row_kl.end(), 0.0);
  return out;
}

void validate(const TsneConfig& cfg, std::size_t n) {
  if (n < 4) throw TooFewPoints(n, 4);
  if (!(cfg.perplexity > 0)) throw InputError("perplexity must be positive");
  if (cfg.perplexity >= static_cast<double>(n - 1) / 3.0) throw PerplexityTooHigh(cfg.perplexity, n);
  if (cfg.exaggeration_iterations < 0 || cfg.iterations <= cfg.exaggeration_iterations) {
    throw InputError("t-SNE iterations must exceed the early-exaggeration phase");
  }
  if (!(cfg.learning_rate > 0)) throw InputError("learning rate must be positive");
  if (cfg.theta < 0) throw InputError("theta must be non-negative");
}

std::string format_double(double x) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

}  // namespace

Matrix to_matrix(const std::vector<std::vector<double>>& rows) {
  Matrix m(rows.size(), rows.empty() ? 0 : rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols) throw InputError("vectors differ in dimension");
    std::copy(rows[i].begin(), rows[i].end(), m.data.begin() + static_cast<std::ptrdiff_t>(i * m.cols));
  }
  return m;
}

Matrix joint_affinities(const Matrix& x, double perplexity, AffinityReport* report) {
  const std::size_t n = x.rows;
  Matrix cond(n, n);
  std::vector<RowResult> rows(n);
  detail::parallel_for(n, [&](std::size_t i) {
    std::vector<double> d, p(n - 1);
    d.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) d.push_back(simd::active().squared_distance(x.row(i), x.row(j), x.cols));
    }
    rows[i] = calibrate_row(d, perplexity, p);
    for (std::size_t j = 0, k = 0; j < n; ++j) {
      if (j != i) cond(i, j) = p[k++];
    }
  }, 8);
  merge_report(report, rows);
  Matrix joint(n, n);
  const double denom = 2.0 * static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) joint(i, j) = (cond(i, j) + cond(j, i)) / denom;
  }
  return joint;
}

SparseAffinities sparse_joint_affinities(const Matrix& x, double perplexity, AffinityReport* report) {
  const std::size_t n = x.rows;
  const std::size_t k = std::min(n - 1, static_cast<std::size_t>(3.0 * perplexity));
  std::vector<std::vector<std::size_t>> nbr(n);
  std::vector<std::vector<double>> cond(n);
  std::vector<RowResult> rows(n);
  detail::parallel_for(n, [&](std::size_t i) {
    std::vector<std::pair<double, std::size_t>> all;
    all.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) all.emplace_back(simd::active().squared_distance(x.row(i), x.row(j), x.cols), j);
    }
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end());
    std::vector<double> d(k);
    for (std::size_t m = 0; m < k; ++m) {
      d[m] = all[m].first;
      nbr[i].push_back(all[m].second);
    }
    cond[i].resize(k);
    rows[i] = calibrate_row(d, perplexity, cond[i]);
  }, 8);
  merge_report(report, rows);

  // Symmetrize: collect both directions, then merge duplicates per row.
  std::vector<std::vector<std::pair<std::size_t, double>>> sym(n);
  const double denom = 2.0 * static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t m = 0; m < k; ++m) {
      sym[i].emplace_back(nbr[i][m], cond[i][m] / denom);
      sym[nbr[i][m]].emplace_back(i, cond[i][m] / denom);
    }
  }
  SparseAffinities out;
  out.row_ptr.push_back(0);
  for (auto& r : sym) {
    std::sort(r.begin(), r.end());
    for (std::size_t a = 0; a < r.size();) {
      double v = 0.0;
      std::size_t b = a;
      for (; b < r.size() && r[b].first == r[a].first; ++b) v += r[b].second;
      out.col.push_back(r[a].first);
      out.val.push_back(v);
      a = b;
    }
    out.row_ptr.push_back(out.col.size());
  }
  return out;
}

Matrix tsne_gradient(const Matrix& p, const Matrix& y) { return exact_step(p, y, 1.0).grad; }

Matrix tsne_gradient_bh(const SparseAffinities& p, const Matrix& y, double theta) {
  return bh_step(p, y, theta, 1.0).grad;
}

TsneResult tsne_project(const Matrix& x, const TsneConfig& cfg) {
  const std::size_t n = x.rows;
  validate(cfg, n);
  TsneResult out;
  std::mt19937_64 rng(cfg.seed);
  out.y = Matrix(n, 2);
  for (auto& v : out.y.data) v = 1e-4 * gaussian(rng);

  bool identical = true;
  for (std::size_t i = 1; i < n && identical; ++i) {
    identical = std::equal(x.row(i), x.row(i) + x.cols, x.row(0));
  }
  if (identical) {
    out.degenerate = true;
    out.kl_trace.assign(static_cast<std::size_t>(cfg.iterations), 0.0);
    out.warnings.push_back("all input points are identical; returning a small random layout");
    return out;
  }

  const bool exact = n <= cfg.exact_limit;
  Matrix p;
  SparseAffinities sp;
  if (exact) {
    p = joint_affinities(x, cfg.perplexity, &out.affinities);
  } else {
    sp = sparse_joint_affinities(x, cfg.perplexity, &out.affinities);
  }
  if (!out.affinities.unconverged.empty()) {
    out.warnings.push_back(std::to_string(out.affinities.unconverged.size()) +
                           " points missed the perplexity tolerance");
  }

  Matrix update(n, 2);
  Matrix gains(n, 2, 1.0);
  out.kl_trace.reserve(static_cast<std::size_t>(cfg.iterations));
  for (int it = 0; it < cfg.iterations; ++it) {
    const double exaggeration = it < cfg.exaggeration_iterations ? cfg.early_exaggeration : 1.0;
    const double momentum = it < cfg.momentum_switch ? cfg.initial_momentum : cfg.final_momentum;
    const auto eval = exact ? exact_step(p, out.y, exaggeration) : bh_step(sp, out.y, cfg.theta, exaggeration);
    out.kl_trace.push_back(eval.kl);
    for (std::size_t k = 0; k < out.y.data.size(); ++k) {
      const double g = eval.grad.data[k];
      gains.data[k] = (g > 0) != (update.data[k] > 0) ? gains.data[k] + 0.2 : gains.data[k] * 0.8;
      gains.data[k] = std::max(gains.data[k], 0.01);
      update.data[k] = momentum * update.data[k] - cfg.learning_rate * gains.data[k] * g;
      out.y.data[k] += update.data[k];
    }
    for (std::size_t c = 0; c < 2; ++c) {
      double mean = 0.0;
      for (std::size_t i = 0; i < n; ++i) mean += out.y(i, c);
      mean /= static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) out.y(i, c) -= mean;
    }
  }
  return out;
}

Layout project_users(const std::vector<UserVector>& users, const TsneConfig& cfg) {
  std::vector<std::vector<double>> rows;
  rows.reserve(users.size());
  for (const auto& u : users) rows.push_back(u.vector);
  auto result = tsne_project(to_matrix(rows), cfg);
  Layout layout;
  for (std::size_t i = 0; i < users.size(); ++i) {
    layout.coords.push_back({users[i].user_id, result.y(i, 0), result.y(i, 1)});
  }
  layout.kl_trace = std::move(result.kl_trace);
  layout.warnings = std::move(result.warnings);
  return layout;
}

void write_layout_csv(std::ostream& out, const Layout& layout) {
  out << "user_id,x,y\n";
  for (const auto& p : layout.coords) out << p.user_id << ',' << format_double(p.x) << ',' << format_double(p.y) << '\n';
}

std::vector<LayoutPoint> read_layout_csv(std::istream& in) {
  std::vector<LayoutPoint> points;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    if (++line_no == 1 || line.empty()) continue;
    const auto a = line.find(',');
    const auto b = a == std::string::npos ? a : line.find(',', a + 1);
    if (b == std::string::npos) throw MalformedLine(line_no, "expected user_id,x,y");
    LayoutPoint p;
    p.user_id = line.substr(0, a);
    const char* end = line.data() + line.size();
    const auto rx = std::from_chars(line.data() + a + 1, line.data() + b, p.x);
    const auto ry = std::from_chars(line.data() + b + 1, end, p.y);
    if (rx.ec != std::errc{} || ry.ec != std::errc{} || ry.ptr != end) throw MalformedLine(line_no, "bad coordinate");
    points.push_back(std::move(p));
  }
  return points;
}

void write_kl_trace_csv(std::ostream& out, const std::vector<double>& trace) {
  out << "iteration,kl\n";
  for (std::size_t i = 0; i < trace.size(); ++i) out << (i + 1) << ',' << format_double(trace[i]) << '\n';
}

}  // namespace tweetlens
