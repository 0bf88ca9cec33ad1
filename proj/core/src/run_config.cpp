// Copyright 2026 The entlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "entlab/run_config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>

#include "entlab/error.hpp"

namespace entlab {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  if (v == "inf" || v == "+inf") return INFINITY;
  double out = 0.0;
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw InvalidInput("config: '" + key + "' expects a number, got '" + v + "'");
  }
  return out;
}

long long parse_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw InvalidInput("config: '" + key + "' expects an integer, got '" + v + "'");
  }
  return out;
}

int parse_small_int(const std::string& key, const std::string& v) {
  const long long x = parse_int(key, v);
  if (x < -1000000000LL || x > 1000000000LL) {
    throw InvalidInput("config: '" + key + "' out of range");
  }
  return static_cast<int>(x);
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  if (trim(v).empty()) return out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, trim(item)));
  return out;
}

const char* init_name(InitPattern::Kind k) {
  switch (k) {
    case InitPattern::Kind::uniform: return "uniform";
    case InitPattern::Kind::peaked: return "peaked";
    case InitPattern::Kind::random: return "random";
  }
  return "uniform";
}

}  // namespace

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto [ptr, ec] =
      std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  (void)ec;
  return std::string(buf, ptr);
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void RunConfig::validate() const {
  task.validate();
  if (task.vocab_size > 1 << 20) throw InvalidInput("config: vocab_size too large");
  if (group_size < 2) throw InvalidInput("config: group_size must be >= 2");
  if (groups_per_step < 1) throw InvalidInput("config: groups_per_step must be >= 1");
  if (steps < 0) throw InvalidInput("config: steps must be >= 0");
  if (!std::isfinite(eta) || eta < 0.0) {
    throw InvalidInput("config: eta must be finite and >= 0");
  }
  clip.validate();
  if (epochs < 1) throw InvalidInput("config: epochs must be >= 1");
  if (!(eps_low >= 0.0) || !(eps_high >= 0.0)) {
    throw InvalidInput("config: eps_low and eps_high must be >= 0");
  }
  gae.validate(static_cast<std::size_t>(task.seq_len));
  if (eval_rollouts < 1) throw InvalidInput("config: eval_rollouts must be >= 1");
  if (init.kind == InitPattern::Kind::random && !(init.scale >= 0.0)) {
    throw InvalidInput("config: init_scale must be >= 0");
  }
}

void RunConfig::set(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (key == "vocab_size") task.vocab_size = parse_small_int(key, v);
  else if (key == "seq_len") task.seq_len = parse_small_int(key, v);
  else if (key == "num_contexts") task.num_contexts = parse_small_int(key, v);
  else if (key == "init") {
    if (v == "uniform") init.kind = InitPattern::Kind::uniform;
    else if (v == "peaked") init.kind = InitPattern::Kind::peaked;
    else if (v == "random") init.kind = InitPattern::Kind::random;
    else throw InvalidInput("config: unknown init '" + v + "'");
  } else if (key == "init_gap") init.gap = parse_double(key, v);
  else if (key == "init_scale") init.scale = parse_double(key, v);
  else if (key == "init_seed") init.seed = static_cast<std::uint64_t>(parse_int(key, v));
  else if (key == "mode") {
    if (v == "shared") mode = PolicyMode::shared;
    else if (v == "isolated") mode = PolicyMode::isolated;
    else throw InvalidInput("config: unknown mode '" + v + "'");
  } else if (key == "group_size") group_size = parse_small_int(key, v);
  else if (key == "groups_per_step") groups_per_step = parse_small_int(key, v);
  else if (key == "steps") steps = parse_small_int(key, v);
  else if (key == "eta") eta = parse_double(key, v);
  else if (key == "aggregation") {
    if (v == "per_token_sum") aggregation = Aggregation::per_token_sum;
    else if (v == "length_mean") aggregation = Aggregation::length_mean;
    else throw InvalidInput("config: unknown aggregation '" + v + "'");
  } else if (key == "clip_rule") clip.rule = parse_clip_rule(v);
  else if (key == "mu_plus") clip.mu_plus = parse_double(key, v);
  else if (key == "mu_minus") clip.mu_minus = parse_double(key, v);
  else if (key == "mu") clip.mu_plus = clip.mu_minus = parse_double(key, v);
  else if (key == "applies_to") clip.applies_to = parse_scope(v);
  else if (key == "sign_rule") {
    if (v.empty() || v == "none") clip.sign_rule.reset();
    else clip.sign_rule = parse_sign_rule(v);
  } else if (key == "epochs") epochs = parse_small_int(key, v);
  else if (key == "eps_low") eps_low = parse_double(key, v);
  else if (key == "eps_high") eps_high = parse_double(key, v);
  else if (key == "advantage") {
    if (v == "group") advantage = AdvantageSource::group;
    else if (v == "gae") advantage = AdvantageSource::gae;
    else throw InvalidInput("config: unknown advantage '" + v + "'");
  } else if (key == "gae_gamma") gae.gamma = parse_double(key, v);
  else if (key == "gae_lambda") gae.lambda = parse_double(key, v);
  else if (key == "gae_values") gae.values = parse_list(key, v);
  else if (key == "context_schedule") {
    if (v == "random") schedule = ContextSchedule::random;
    else if (v == "round_robin") schedule = ContextSchedule::round_robin;
    else throw InvalidInput("config: unknown context_schedule '" + v + "'");
  } else if (key == "eval_rollouts") eval_rollouts = parse_small_int(key, v);
  else if (key == "seed") seed = static_cast<std::uint64_t>(parse_int(key, v));
  else if (key == "resume_from") resume_from = v;
  else if (key == "output_dir") output_dir = v;
  else throw InvalidInput("config: unknown key '" + key + "'");
}

std::vector<std::pair<std::string, std::string>> RunConfig::entries(
    bool include_output) const {
  std::string values;
  for (std::size_t i = 0; i < gae.values.size(); ++i) {
    if (i) values += ',';
    values += format_double(gae.values[i]);
  }
  std::vector<std::pair<std::string, std::string>> e = {
      {"vocab_size", std::to_string(task.vocab_size)},
      {"seq_len", std::to_string(task.seq_len)},
      {"num_contexts", std::to_string(task.num_contexts)},
      {"init", init_name(init.kind)},
      {"init_gap", format_double(init.gap)},
      {"init_scale", format_double(init.scale)},
      {"init_seed", std::to_string(init.seed)},
      {"mode", mode == PolicyMode::shared ? "shared" : "isolated"},
      {"group_size", std::to_string(group_size)},
      {"groups_per_step", std::to_string(groups_per_step)},
      {"steps", std::to_string(steps)},
      {"eta", format_double(eta)},
      {"aggregation",
       aggregation == Aggregation::per_token_sum ? "per_token_sum" : "length_mean"},
      {"clip_rule", to_string(clip.rule)},
      {"mu_plus", format_double(clip.mu_plus)},
      {"mu_minus", format_double(clip.mu_minus)},
      {"applies_to", to_string(clip.applies_to)},
      {"sign_rule", clip.sign_rule ? to_string(*clip.sign_rule) : "none"},
      {"epochs", std::to_string(epochs)},
      {"eps_low", format_double(eps_low)},
      {"eps_high", format_double(eps_high)},
      {"advantage", advantage == AdvantageSource::group ? "group" : "gae"},
      {"gae_gamma", format_double(gae.gamma)},
      {"gae_lambda", format_double(gae.lambda)},
      {"gae_values", values},
      {"context_schedule",
       schedule == ContextSchedule::random ? "random" : "round_robin"},
      {"eval_rollouts", std::to_string(eval_rollouts)},
      {"seed", std::to_string(seed)},
      {"resume_from", resume_from},
  };
  if (include_output) e.emplace_back("output_dir", output_dir);
  return e;
}

std::string RunConfig::to_text(bool include_output) const {
  std::string out;
  for (const auto& [k, v] : entries(include_output)) {
    out += k;
    out += '=';
    out += v;
    out += '\n';
  }
  return out;
}

RunConfig RunConfig::parse(std::istream& in) {
  RunConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidInput("config line " + std::to_string(lineno) +
                         ": expected key=value");
    }
    cfg.set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return cfg;
}

RunConfig RunConfig::parse_text(const std::string& text) {
  std::istringstream in(text);
  return parse(in);
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open config file: " + path);
  return parse(in);
}

bool operator==(const RunConfig& a, const RunConfig& b) {
  return a.to_text() == b.to_text();
}

}  // namespace entlab
