// Copyright 2026 The w2bq Authors. All Rights Reserved.
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

#pragma once

#include <stdexcept>
#include <string>

namespace w2bq {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// No token survived min-count filtering.
class EmptyVocabularyError : public Error {
public:
  using Error::Error;
};

/// A NaN or infinity showed up where a finite value is required.
class NonFiniteError : public Error {
public:
  using Error::Error;
};

/// Malformed on-disk data (text vectors, packed vectors, datasets, configs).
class FormatError : public Error {
public:
  using Error::Error;
};

/// A metric is undefined for the given input (constant ranks, zero vectors, too few pairs).
class UndefinedMetricError : public Error {
public:
  using Error::Error;
};

}  // namespace w2bq
