// Copyright 2026 The shor-mps Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

namespace shor_mps {

/// Base of every error thrown by this library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
  public:
    using Error::Error;
};

/// Raised when an operation is requested on a state in the wrong mode.
class InvalidState : public Error {
  public:
    using Error::Error;
};

class DecompositionFailed : public Error {
  public:
    DecompositionFailed(std::size_t rows, std::size_t cols, const std::string &why)
        : Error("decomposition failed for " + std::to_string(rows) + "x" + std::to_string(cols) +
                " matrix: " + why),
          rows_(rows), cols_(cols) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

  private:
    std::size_t rows_;
    std::size_t cols_;
};

class NotCanonical : public Error {
  public:
    NotCanonical(std::size_t site, const std::string &side)
        : Error("site " + std::to_string(site) + " is not " + side + "-orthonormal"), site_(site) {}

    std::size_t site() const noexcept { return site_; }

  private:
    std::size_t site_;
};

class NotSeparable : public Error {
  public:
    using Error::Error;
};

class NormalizationError : public Error {
  public:
    explicit NormalizationError(double mass)
        : Error("probability mass " + std::to_string(mass) + " deviates from 1"), mass_(mass) {}

    double mass() const noexcept { return mass_; }

  private:
    double mass_;
};

/// A dense expansion or iteration exceeded its configured cap.
class CapExceeded : public Error {
  public:
    using Error::Error;
};

class MemoryLimit : public Error {
  public:
    MemoryLimit(std::string stage, std::uint64_t requested, std::uint64_t limit)
        : Error("element limit exceeded during " + stage + ": " + std::to_string(requested) + " > " +
                std::to_string(limit)),
          stage_(std::move(stage)), requested_(requested), limit_(limit) {}

    const std::string &stage() const noexcept { return stage_; }
    std::uint64_t requested() const noexcept { return requested_; }
    std::uint64_t limit() const noexcept { return limit_; }

  private:
    std::string stage_;
    std::uint64_t requested_;
    std::uint64_t limit_;
};

} // namespace shor_mps
