// Copyright 2026 The declab Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "declab/problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "declab/errors.hpp"
#include "declab/text_io.hpp"

namespace declab {

std::string to_string(ProblemKind kind) {
  return kind == ProblemKind::quadratic ? "quadratic" : "nonconvex_gram";
}

ProblemKind parse_problem_kind(const std::string& text) {
  if (text == "quadratic") return ProblemKind::quadratic;
  if (text == "nonconvex_gram" || text == "gram") return ProblemKind::nonconvex_gram;
  throw DomainError("unknown problem kind '" + text + "'");
}

Problem Problem::quadratic(std::vector<Matrix> a, std::vector<Matrix> b) {
  if (a.empty() || a.size() != b.size()) {
    throw DimensionMismatch("quadratic problem needs one (A_i, B_i) pair per node, got " +
                            std::to_string(a.size()) + " A and " + std::to_string(b.size()) + " B");
  }
  Problem p;
  p.kind_ = ProblemKind::quadratic;
  p.nodes_ = a.size();
  p.data_rows_ = a.front().rows();
  p.rows_ = a.front().cols();
  p.cols_ = b.front().cols();
  if (p.data_rows_ == 0 || p.rows_ == 0 || p.cols_ == 0) throw DimensionMismatch("quadratic problem with empty data");
  for (std::size_t i = 0; i < p.nodes_; ++i) {
    if (a[i].rows() != p.data_rows_ || a[i].cols() != p.rows_) {
      throw DimensionMismatch("node " + std::to_string(i) + ": A is " + shape_string(a[i]) + ", expected " +
                              std::to_string(p.data_rows_) + "x" + std::to_string(p.rows_));
    }
    if (b[i].rows() != p.data_rows_ || b[i].cols() != p.cols_) {
      throw DimensionMismatch("node " + std::to_string(i) + ": B is " + shape_string(b[i]) + ", expected " +
                              std::to_string(p.data_rows_) + "x" + std::to_string(p.cols_));
    }
  }
  p.a_ = std::move(a);
  p.b_ = std::move(b);

  // Normal equations of the average objective: (sum A^T A) X = sum A^T B.
  Matrix h(p.rows_, p.rows_);
  Matrix r(p.rows_, p.cols_);
  double l_star = 0.0;
  for (std::size_t i = 0; i < p.nodes_; ++i) {
    const Matrix at = p.a_[i].transpose();
    const Matrix hi = at * p.a_[i];
    l_star = std::max(l_star, nuclear_norm(hi));
    h += hi;
    r += at * p.b_[i];
  }
  Matrix x_opt = solve_psd(h, r);
  p.f_low_ = std::max(0.0, p.objective(x_opt));
  p.minimizer_ = std::move(x_opt);
  p.lipschitz_star_ = l_star;
  p.certified_radius_ = std::numeric_limits<double>::infinity();
  return p;
}

Problem Problem::gram(std::vector<Matrix> c, std::size_t cols, double radius) {
  if (c.empty()) throw DimensionMismatch("gram problem needs at least one node");
  if (cols == 0) throw DimensionMismatch("gram problem needs n >= 1");
  if (!(radius > 0.0)) throw DomainError("gram certification radius must be positive");
  Problem p;
  p.kind_ = ProblemKind::nonconvex_gram;
  p.nodes_ = c.size();
  p.rows_ = c.front().rows();
  p.cols_ = cols;
  if (p.rows_ == 0) throw DimensionMismatch("gram problem with empty data");
  double l_star = 0.0;
  const double rank = static_cast<double>(std::min(p.rows_, p.cols_));
  for (std::size_t i = 0; i < p.nodes_; ++i) {
    if (c[i].rows() != p.rows_ || c[i].cols() != p.rows_) {
      throw DimensionMismatch("node " + std::to_string(i) + ": C is " + shape_string(c[i]) + ", expected " +
                              std::to_string(p.rows_) + "x" + std::to_string(p.rows_));
    }
    if (max_abs_diff(c[i], c[i].transpose()) > 1e-12 * (1.0 + frobenius_norm(c[i]))) {
      throw DomainError("node " + std::to_string(i) + ": C must be symmetric");
    }
    // ||XX^TX - YY^TY|| <= 3R^2 ||X-Y|| on the ball, nuclear <= rank * spectral,
    // and ||C D||_* <= ||C||_* ||D||.
    l_star = std::max(l_star, 3.0 * rank * radius * radius + nuclear_norm(c[i]));
  }
  p.c_ = std::move(c);
  p.f_low_ = 0.0;
  p.lipschitz_star_ = l_star;
  p.certified_radius_ = radius;
  return p;
}

std::optional<double> Problem::lipschitz_stacked() const {
  if (!lipschitz_star_) return std::nullopt;
  return static_cast<double>(nodes_) * *lipschitz_star_;
}

void Problem::check_node(std::size_t node) const {
  if (node >= nodes_) {
    throw DimensionMismatch("node index " + std::to_string(node) + " out of range for " + std::to_string(nodes_) +
                            " nodes");
  }
}

void Problem::check_point(const Matrix& x) const {
  if (x.rows() != rows_ || x.cols() != cols_) {
    throw DimensionMismatch("point is " + shape_string(x) + ", problem expects " + std::to_string(rows_) + "x" +
                            std::to_string(cols_));
  }
}

double Problem::value(std::size_t node, const Matrix& x) const {
  check_node(node);
  check_point(x);
  if (kind_ == ProblemKind::quadratic) {
    const Matrix res = a_[node] * x - b_[node];
    return 0.5 * inner(res, res);
  }
  const Matrix res = x * x.transpose() - c_[node];
  return 0.25 * inner(res, res);
}

Matrix Problem::gradient(std::size_t node, const Matrix& x) const {
  check_node(node);
  check_point(x);
  if (kind_ == ProblemKind::quadratic) {
    return a_[node].transpose() * (a_[node] * x - b_[node]);
  }
  return (x * x.transpose() - c_[node]) * x;
}

double Problem::objective(const Matrix& x) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < nodes_; ++i) sum += value(i, x);
  return sum / static_cast<double>(nodes_);
}

std::vector<Matrix> Problem::local_gradients(std::span<const Matrix> xs) const {
  if (xs.size() != nodes_) {
    throw DimensionMismatch("expected " + std::to_string(nodes_) + " iterates, got " + std::to_string(xs.size()));
  }
  std::vector<Matrix> g;
  g.reserve(nodes_);
  for (std::size_t i = 0; i < nodes_; ++i) g.push_back(gradient(i, xs[i]));
  return g;
}

Matrix Problem::average_gradient(std::span<const Matrix> xs) const { return mean(local_gradients(xs)); }

Matrix Problem::default_start() const {
  Matrix x(rows_, cols_);
  if (kind_ == ProblemKind::nonconvex_gram) {
    for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) x(i, i) = 0.1;
  }
  return x;
}

namespace {

Matrix gaussian(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(rows, cols);
  for (double& x : g.data()) x = normal(rng);
  return g;
}

// Zero-sum perturbations: draw, then subtract their mean.
std::vector<Matrix> centered_gaussians(std::mt19937_64& rng, std::size_t count, std::size_t rows, std::size_t cols) {
  std::vector<Matrix> d;
  for (std::size_t i = 0; i < count; ++i) d.push_back(gaussian(rng, rows, cols));
  const Matrix avg = mean(d);
  for (Matrix& x : d) x -= avg;
  return d;
}

}  // namespace

Problem make_quadratic(const QuadraticSpec& spec) {
  if (!(spec.heterogeneity >= 0.0)) throw DomainError("heterogeneity must be nonnegative");
  if (!(spec.condition >= 1.0)) throw DomainError("condition number must be >= 1");
  if (spec.nodes == 0 || spec.rows == 0 || spec.cols == 0 || spec.data_rows == 0) {
    throw DomainError("quadratic dimensions must be positive");
  }
  std::mt19937_64 rng(spec.seed);
  const std::size_t k = std::min(spec.data_rows, spec.rows);
  // Singular values of A_i in [1/sqrt(cond), 1], so A_i^T A_i has condition cond.
  const double s_min = 1.0 / std::sqrt(spec.condition);

  std::vector<Matrix> a;
  for (std::size_t i = 0; i < spec.nodes; ++i) {
    const Matrix left = msgn_exact(gaussian(rng, spec.data_rows, k));
    const Matrix right = msgn_exact(gaussian(rng, spec.rows, k));
    std::vector<double> s(k);
    for (std::size_t j = 0; j < k; ++j) {
      s[j] = k == 1 ? 1.0 : s_min + (1.0 - s_min) * static_cast<double>(j) / static_cast<double>(k - 1);
    }
    a.push_back(left * Matrix::diagonal(s) * right.transpose());
  }

  Matrix x_star = gaussian(rng, spec.rows, spec.cols);
  x_star *= spec.target_norm / spectral_norm(x_star);
  const auto deltas = centered_gaussians(rng, spec.nodes, spec.data_rows, spec.cols);

  std::vector<Matrix> b;
  for (std::size_t i = 0; i < spec.nodes; ++i) {
    Matrix bi = a[i] * x_star;
    if (spec.heterogeneity > 0.0) bi.add_scaled(spec.heterogeneity, deltas[i]);
    b.push_back(std::move(bi));
  }
  return Problem::quadratic(std::move(a), std::move(b));
}

Problem make_gram(const GramSpec& spec) {
  if (!(spec.heterogeneity >= 0.0)) throw DomainError("heterogeneity must be nonnegative");
  if (spec.nodes == 0 || spec.rows == 0 || spec.cols == 0) throw DomainError("gram dimensions must be positive");
  std::mt19937_64 rng(spec.seed);
  const Matrix z = gaussian(rng, spec.rows, spec.cols) * (1.0 / std::sqrt(static_cast<double>(spec.rows)));
  const Matrix target = z * z.transpose();
  auto deltas = centered_gaussians(rng, spec.nodes, spec.rows, spec.rows);
  std::vector<Matrix> c;
  for (std::size_t i = 0; i < spec.nodes; ++i) {
    Matrix ci = target;
    if (spec.heterogeneity > 0.0) {
      const Matrix sym = (deltas[i] + deltas[i].transpose()) * 0.5;
      ci.add_scaled(spec.heterogeneity, sym);
    }
    c.push_back(std::move(ci));
  }
  return Problem::gram(std::move(c), spec.cols, spec.radius);
}

namespace {

std::size_t parse_count(const std::string& token, const char* field, std::size_t line) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(token, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != token.size() || v == 0 || token.front() == '-') {
    throw ParseError("line " + std::to_string(line) + ": field '" + field + "' must be a positive integer, got '" +
                         token + "'",
                     line);
  }
  return static_cast<std::size_t>(v);
}

class BlockReader {
 public:
  BlockReader(const std::vector<NumberedLine>& lines, std::size_t start) : lines_(lines), pos_(start) {}

  Matrix read(std::size_t rows, std::size_t cols, const std::string& what) {
    std::vector<double> entries;
    entries.reserve(rows * cols);
    for (std::size_t r = 0; r < rows; ++r) {
      if (pos_ >= lines_.size()) {
        throw ParseError("unexpected end of file while reading " + what + " (row " + std::to_string(r + 1) + " of " +
                         std::to_string(rows) + ")");
      }
      const auto& line = lines_[pos_++];
      const auto row = parse_csv_row(line.text, line.number);
      if (row.size() != cols) {
        throw DimensionMismatch("line " + std::to_string(line.number) + ": " + what + " row has " +
                                std::to_string(row.size()) + " entries, expected " + std::to_string(cols));
      }
      entries.insert(entries.end(), row.begin(), row.end());
    }
    return Matrix(rows, cols, std::move(entries));
  }

  bool done() const { return pos_ >= lines_.size(); }
  const NumberedLine& current() const { return lines_[pos_]; }

 private:
  const std::vector<NumberedLine>& lines_;
  std::size_t pos_;
};

}  // namespace

Problem parse_problem(const std::string& text) {
  const auto lines = content_lines(text);
  if (lines.empty()) throw ParseError("problem file is empty");
  std::istringstream header(lines.front().text);
  std::vector<std::string> fields;
  for (std::string tok; header >> tok;) fields.push_back(tok);
  const std::size_t hl = lines.front().number;
  if (fields.empty()) throw ParseError("line " + std::to_string(hl) + ": missing header", hl);

  ProblemKind kind;
  try {
    kind = parse_problem_kind(fields[0]);
  } catch (const DomainError& e) {
    throw ParseError("line " + std::to_string(hl) + ": " + e.what(), hl);
  }
  const std::size_t expected = kind == ProblemKind::quadratic ? 5 : 4;
  if (fields.size() < expected || fields.size() > 5) {
    throw ParseError("line " + std::to_string(hl) + ": header must be '" +
                         (kind == ProblemKind::quadratic ? std::string("quadratic N m n p")
                                                         : std::string("nonconvex_gram N m n [radius]")) +
                         "'",
                     hl);
  }
  const std::size_t nodes = parse_count(fields[1], "N", hl);
  const std::size_t m = parse_count(fields[2], "m", hl);
  const std::size_t n = parse_count(fields[3], "n", hl);

  BlockReader reader(lines, 1);
  Problem problem = [&] {
    if (kind == ProblemKind::quadratic) {
      const std::size_t p = parse_count(fields[4], "p", hl);
      std::vector<Matrix> a, b;
      for (std::size_t i = 0; i < nodes; ++i) {
        a.push_back(reader.read(p, m, "node " + std::to_string(i) + " A"));
        b.push_back(reader.read(p, n, "node " + std::to_string(i) + " B"));
      }
      return Problem::quadratic(std::move(a), std::move(b));
    }
    const double radius = fields.size() == 5 ? parse_double(fields[4], hl) : GramSpec{}.radius;
    std::vector<Matrix> c;
    for (std::size_t i = 0; i < nodes; ++i) c.push_back(reader.read(m, m, "node " + std::to_string(i) + " C"));
    return Problem::gram(std::move(c), n, radius);
  }();
  if (!reader.done()) {
    const auto& extra = reader.current();
    throw ParseError("line " + std::to_string(extra.number) + ": trailing data after the last node block",
                     extra.number);
  }
  return problem;
}

Problem load_problem(const std::filesystem::path& path) {
  Problem p = parse_problem(read_file(path));
  p.set_origin(path.string());
  return p;
}

namespace {

void write_block(std::ostream& out, const Matrix& m) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) out << (c ? "," : "") << format_double(m(r, c));
    out << '\n';
  }
}

}  // namespace

void write_problem(std::ostream& out, const Problem& problem) {
  if (problem.kind() == ProblemKind::quadratic) {
    out << "quadratic " << problem.nodes() << ' ' << problem.rows() << ' ' << problem.cols() << ' '
        << problem.data_rows() << '\n';
    for (std::size_t i = 0; i < problem.nodes(); ++i) {
      out << "# node " << i << " A\n";
      write_block(out, problem.a()[i]);
      out << "# node " << i << " B\n";
      write_block(out, problem.b()[i]);
    }
    return;
  }
  out << "nonconvex_gram " << problem.nodes() << ' ' << problem.rows() << ' ' << problem.cols() << ' '
      << format_double(problem.certified_radius()) << '\n';
  for (std::size_t i = 0; i < problem.nodes(); ++i) {
    out << "# node " << i << " C\n";
    write_block(out, problem.c()[i]);
  }
}

}  // namespace declab
