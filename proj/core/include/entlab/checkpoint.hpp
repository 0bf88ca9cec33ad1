// Copyright 2026 The entlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>

#include "entlab/toy_env.hpp"

namespace entlab {

// NDJSON policy checkpoint. Line 1 is a header object
//   {"format":"entlab-policy","version":1,"mode":"shared"|"isolated",
//    "vocab_size":V,"step":S,"init":{"kind":..,"gap":..,"scale":..,"seed":..}}
// followed by one object per materialized state, in key order:
//   {"key":[context,position,rollout,group],"logits":[z_0,...,z_{V-1}]}
// Doubles are written with round-trip precision.

struct Checkpoint {
  TabularPolicy policy;
  int step = 0;
};

void write_checkpoint(std::ostream& out, const TabularPolicy& policy, int step);
void write_checkpoint_file(const std::string& path, const TabularPolicy& policy,
                           int step);

/// Throws InvalidInput on malformed input.
Checkpoint read_checkpoint(std::istream& in);
Checkpoint read_checkpoint_file(const std::string& path);

}  // namespace entlab
