/*
 * Copyright 2026 The ItsIRL Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef ITSIRL_SRC_PARALLEL_H_
#define ITSIRL_SRC_PARALLEL_H_

#include <cstddef>
#include <exception>
#include <limits>
#include <mutex>

namespace itsirl::internal {

// Exceptions must not escape an OpenMP region. Collects the failure with the
// lowest iteration index so the rethrown error does not depend on thread
// scheduling.
class LoopErrors {
 public:
  template <typename Body>
  void run(std::size_t index, Body&& body) noexcept {
    try {
      body();
    } catch (...) {
      std::lock_guard<std::mutex> lock(mutex_);
      if (index < index_) {
        index_ = index;
        error_ = std::current_exception();
      }
    }
  }

  void rethrow() const {
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::mutex mutex_;
  std::size_t index_ = std::numeric_limits<std::size_t>::max();
  std::exception_ptr error_;
};

}  // namespace itsirl::internal

#endif  // ITSIRL_SRC_PARALLEL_H_
