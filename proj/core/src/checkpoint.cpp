// Copyright 2026 The entlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "entlab/checkpoint.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "entlab/error.hpp"

namespace entlab {
namespace {

using nlohmann::json;

const char* kind_name(InitPattern::Kind kind) {
  switch (kind) {
    case InitPattern::Kind::uniform: return "uniform";
    case InitPattern::Kind::peaked: return "peaked";
    case InitPattern::Kind::random: return "random";
  }
  return "uniform";
}

InitPattern::Kind parse_kind(const std::string& s) {
  if (s == "uniform") return InitPattern::Kind::uniform;
  if (s == "peaked") return InitPattern::Kind::peaked;
  if (s == "random") return InitPattern::Kind::random;
  throw InvalidInput("checkpoint: unknown init kind '" + s + "'");
}

}  // namespace

void write_checkpoint(std::ostream& out, const TabularPolicy& policy,
                      int step) {
  const auto& init = policy.init();
  json header = {
      {"format", "entlab-policy"},
      {"version", 1},
      {"mode", policy.mode() == PolicyMode::shared ? "shared" : "isolated"},
      {"vocab_size", policy.vocab_size()},
      {"step", step},
      {"init",
       {{"kind", kind_name(init.kind)},
        {"gap", init.gap},
        {"scale", init.scale},
        {"seed", init.seed}}},
  };
  out << header.dump() << '\n';
  for (const auto& [key, logits] : policy.table()) {
    json line = {
        {"key", {key.context, key.position, key.rollout, key.group}},
        {"logits", std::vector<double>(logits.values().begin(),
                                       logits.values().end())},
    };
    out << line.dump() << '\n';
  }
}

void write_checkpoint_file(const std::string& path, const TabularPolicy& policy,
                           int step) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot open checkpoint for writing: " + path);
  write_checkpoint(out, policy, step);
}

Checkpoint read_checkpoint(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput("checkpoint: empty input");
  try {
    const json header = json::parse(line);
    if (header.at("format") != "entlab-policy" || header.at("version") != 1) {
      throw InvalidInput("checkpoint: unsupported format");
    }
    const std::string mode = header.at("mode");
    if (mode != "shared" && mode != "isolated") {
      throw InvalidInput("checkpoint: unknown mode '" + mode + "'");
    }
    const auto& ji = header.at("init");
    InitPattern init;
    init.kind = parse_kind(ji.at("kind"));
    init.gap = ji.at("gap");
    init.scale = ji.at("scale");
    init.seed = ji.at("seed");
    Checkpoint ckpt{
        TabularPolicy(mode == "shared" ? PolicyMode::shared
                                       : PolicyMode::isolated,
                      header.at("vocab_size").get<std::size_t>(), init),
        header.at("step").get<int>()};
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const json entry = json::parse(line);
      const auto& k = entry.at("key");
      if (!k.is_array() || k.size() != 4) {
        throw InvalidInput("checkpoint: key must have 4 components");
      }
      StateKey key{k[0], k[1], k[2], k[3]};
      ckpt.policy.set_logits(
          key, LogitVector(entry.at("logits").get<std::vector<double>>()));
    }
    return ckpt;
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("checkpoint: ") + e.what());
  }
}

Checkpoint read_checkpoint_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open checkpoint: " + path);
  return read_checkpoint(in);
}

}  // namespace entlab
