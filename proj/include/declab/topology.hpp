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

// Mixing matrices for gossip averaging.
//
// A MixingSpec holds a validated N x N weight matrix W (nonnegative, doubly
// stochastic, primitive) and its mixing rate lambda = ||W - 11^T/N||_2 < 1.
// Built-in families use uniform self-inclusive circulant weights:
//
//   complete              W = 11^T / N
//   ring                  w_ii = w_{i,i+1} = w_{i,i-1} = 1/3      (N >= 3)
//   directed_exponential  node i sends to i + {0, 1, 2, ..., N/2} with
//                         weight 1/(log2 N + 1)                    (N = 2^t)

#ifndef DECLAB_TOPOLOGY_HPP_
#define DECLAB_TOPOLOGY_HPP_

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>

#include "declab/linalg.hpp"

namespace declab {

enum class TopologyFamily { complete, ring, directed_exponential, custom };

std::string to_string(TopologyFamily family);
TopologyFamily parse_topology_family(const std::string& text);

inline constexpr double kStochasticTolerance = 1e-12;

struct MixingReport {
  bool square = true;
  bool nonnegative = false;
  bool row_stochastic = false;
  bool column_stochastic = false;
  bool primitive = false;  // some W^j > 0 entrywise with j <= N
  bool contractive = false;  // lambda < 1
  double mixing_rate = 1.0;

  bool ok() const noexcept {
    return square && nonnegative && row_stochastic && column_stochastic && primitive && contractive;
  }
  // Comma-separated names of the failed checks; empty when ok().
  std::string failures() const;
};

MixingReport validate_mixing(const Matrix& w);

// ||W - 11^T/N||_2. Throws InvalidMixing unless W passes validate_mixing
// (which includes lambda < 1).
double mixing_rate(const Matrix& w);

class MixingSpec {
 public:
  // Throws InvalidMixing with the failed checks listed.
  static MixingSpec from_matrix(Matrix w, TopologyFamily family = TopologyFamily::custom);

  std::size_t nodes() const noexcept { return weights_.rows(); }
  const Matrix& weights() const noexcept { return weights_; }
  double weight(std::size_t i, std::size_t j) const { return weights_(i, j); }
  double mixing_rate() const noexcept { return mixing_rate_; }
  TopologyFamily family() const noexcept { return family_; }

  // Row i of (W kron I_m) applied to the stacked blocks: sum_j w_ij Y_j.
  // Zero weights are skipped; summation follows j = 0..N-1.
  Matrix mix_row(std::size_t i, std::span<const Matrix> blocks) const;

 private:
  MixingSpec(Matrix w, double lambda, TopologyFamily family)
      : weights_(std::move(w)), mixing_rate_(lambda), family_(family) {}

  Matrix weights_;
  double mixing_rate_;
  TopologyFamily family_;
};

MixingSpec build_complete(std::size_t n);
// Throws DomainError when n < 3.
MixingSpec build_ring(std::size_t n);
// Throws DomainError unless n is a power of two >= 2.
MixingSpec build_directed_exponential(std::size_t n);
MixingSpec build_topology(TopologyFamily family, std::size_t n);

// N lines of N comma-separated weights; '#' starts a comment line.
// Throws ParseError on malformed text and InvalidMixing on failed validation.
MixingSpec load_mixing_csv(const std::filesystem::path& path);
MixingSpec parse_mixing_csv(const std::string& text);

}  // namespace declab

#endif  // DECLAB_TOPOLOGY_HPP_
