#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "rlg/density/mixture.hpp"
#include "rlg/density/reward.hpp"
#include "rlg/eval/metrics.hpp"
#include "rlg/guide/guidance.hpp"
#include "rlg/rl/config.hpp"
#include "rlg/train/flow_matching.hpp"

namespace rlg {

// Flat "section.key = value" store; '#' starts a comment.
class Config {
 public:
  static Config parse(std::istream& is, const std::string& source = "<stream>");
  static Config load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  const std::map<std::string, std::string>& values() const noexcept { return values_; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback) const;

  // Throws Parse naming the first key outside `known`.
  void reject_unknown(const std::set<std::string>& known) const;

 private:
  std::map<std::string, std::string> values_;
};

std::vector<double> parse_number_list(const std::string& text);

// Every setting of one experiment, defaulting to the two-mode toy problem.
struct LabConfig {
  std::uint64_t seed = 0;
  GaussianMixture target = GaussianMixture::two_mode_demo();
  Schedule schedule{};
  TrainConfig pretrain{};
  FinetuneConfig finetune{};
  RewardFn reward = RewardFn::linear(Point::scalar(0.1));
  SamplerConfig sampler{};
  std::vector<double> sweep_w = {0.5, 1.0, 2.0};
  KlOptions kl{};
  std::string out_dir = "out";

  // Validates every field before returning; the error message names the key.
  static LabConfig from(const Config& cfg);
  void set_seed(std::uint64_t s);
  TiltTarget tilt_target() const { return {target, reward, finetune.beta}; }
};

const std::set<std::string>& known_config_keys();

}  // namespace rlg
