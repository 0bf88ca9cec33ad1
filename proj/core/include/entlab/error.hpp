// Copyright 2026 The entlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace entlab {

// Malformed caller input: wrong lengths, non-finite values, out-of-range
// indices, unparseable configuration. The CLI maps this to exit status 2.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A training run hit a non-finite parameter or metric and was stopped.
class RunAborted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace entlab
