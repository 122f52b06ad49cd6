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

#ifndef DECLAB_EXECUTOR_HPP_
#define DECLAB_EXECUTOR_HPP_

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace declab {

// Runs one barrier-separated stage of per-node work. Node i always executes
// the same code on the same inputs, so results do not depend on the worker
// count; workers only partition the index range.
class Executor {
 public:
  explicit Executor(std::size_t workers = 1) : workers_(std::max<std::size_t>(workers, 1)) {}

  std::size_t workers() const noexcept { return workers_; }

  // Calls fn(i) for i in [0, n) and returns when all calls finish. The first
  // exception (lowest chunk) is rethrown.
  void for_each_node(std::size_t n, const std::function<void(std::size_t)>& fn) const {
    const std::size_t threads = std::min(workers_, n);
    if (threads <= 1) {
      for (std::size_t i = 0; i < n; ++i) fn(i);
      return;
    }
    std::vector<std::exception_ptr> errors(threads);
    {
      std::vector<std::jthread> pool;
      pool.reserve(threads);
      for (std::size_t t = 0; t < threads; ++t) {
        const std::size_t begin = n * t / threads;
        const std::size_t end = n * (t + 1) / threads;
        pool.emplace_back([&, t, begin, end] {
          try {
            for (std::size_t i = begin; i < end; ++i) fn(i);
          } catch (...) {
            errors[t] = std::current_exception();
          }
        });
      }
    }
    for (const auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

 private:
  std::size_t workers_;
};

}  // namespace declab

#endif  // DECLAB_EXECUTOR_HPP_
