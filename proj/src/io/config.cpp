#include "rlg/io/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>

#include "rlg/core/random.hpp"
#include "rlg/error.hpp"
#include "rlg/net/checkpoint.hpp"

namespace rlg {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad(const std::string& key, const std::string& why) {
  throw Error(ErrorCode::InvalidArgument, "config " + key + ": " + why);
}

}  // namespace

Config Config::parse(std::istream& is, const std::string& source) {
  Config cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::Parse, source + ":" + std::to_string(lineno) + ": expected 'section.key = value'");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (key.empty() || value.empty())
      throw Error(ErrorCode::Parse, source + ":" + std::to_string(lineno) + ": empty key or value");
    if (cfg.has(key)) throw Error(ErrorCode::Parse, source + ":" + std::to_string(lineno) + ": duplicate key " + key);
    cfg.set(key, value);
  }
  return cfg;
}

Config Config::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::Io, "config file not found: " + path);
  return parse(f, path);
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    return parse_double(it->second);
  } catch (const Error&) {
    throw Error(ErrorCode::Parse, "config " + key + ": not a number: '" + it->second + "'");
  }
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::uint64_t v = 0;
  const auto& s = it->second;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw Error(ErrorCode::Parse, "config " + key + ": not a non-negative integer: '" + s + "'");
  return v;
}

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  std::string token;
  auto flush = [&] {
    if (!token.empty()) out.push_back(parse_double(token));
    token.clear();
  };
  for (char c : text) {
    if (c == ',' || c == ' ' || c == '\t')
      flush();
    else
      token.push_back(c);
  }
  flush();
  return out;
}

std::vector<double> Config::get_list(const std::string& key, const std::vector<double>& fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    auto v = parse_number_list(it->second);
    if (v.empty()) throw Error(ErrorCode::Parse, "empty list");
    return v;
  } catch (const Error&) {
    throw Error(ErrorCode::Parse, "config " + key + ": expected a list of numbers: '" + it->second + "'");
  }
}

void Config::reject_unknown(const std::set<std::string>& known) const {
  for (const auto& [k, v] : values_)
    if (!known.count(k)) throw Error(ErrorCode::Parse, "config: unknown key '" + k + "'");
}

const std::set<std::string>& known_config_keys() {
  static const std::set<std::string> keys = {
      "seed",
      "target.weights",
      "target.means",
      "target.variances",
      "schedule.kind",
      "schedule.eps",
      "network.hidden",
      "pretrain.batch_size",
      "pretrain.steps",
      "pretrain.learning_rate",
      "pretrain.log_interval",
      "finetune.method",
      "finetune.beta",
      "finetune.pg.batch_size",
      "finetune.pg.learning_rate",
      "finetune.pg.steps",
      "finetune.rwr.batch_size",
      "finetune.rwr.learning_rate",
      "finetune.rwr.steps",
      "finetune.dpo.batch_size",
      "finetune.dpo.learning_rate",
      "finetune.dpo.steps",
      "finetune.sigma_schedule",
      "finetune.sigma",
      "finetune.sigma_t_max",
      "finetune.rollout_steps",
      "finetune.log_interval",
      "finetune.rwr_pool",
      "finetune.dpo_pairs",
      "finetune.density_steps",
      "reward.kind",
      "reward.coef",
      "reward.curvature",
      "sample.steps",
      "sample.integrator",
      "sample.sigma",
      "sample.batch_size",
      "sweep.w",
      "eval.bins",
      "eval.lo",
      "eval.hi",
      "eval.min_samples",
      "output.dir",
  };
  return keys;
}

void LabConfig::set_seed(std::uint64_t s) {
  seed = s;
  pretrain.seed = s;
  finetune.seed = s;
  sampler.seed = derive_seed(s, "sample");
}

LabConfig LabConfig::from(const Config& c) {
  c.reject_unknown(known_config_keys());
  LabConfig lab;

  auto positive = [&](const std::string& key, double fallback) {
    const double v = c.get_double(key, fallback);
    if (!(v > 0.0) || !std::isfinite(v)) bad(key, "must be a finite number > 0");
    return v;
  };
  auto count = [&](const std::string& key, std::uint64_t fallback, std::uint64_t min) {
    const std::uint64_t v = c.get_u64(key, fallback);
    if (v < min) bad(key, "must be >= " + std::to_string(min));
    return static_cast<std::size_t>(v);
  };
  auto parse_enum = [&](const std::string& key, auto parser, auto fallback) {
    if (!c.has(key)) return fallback;
    try {
      return parser(c.get_string(key, ""));
    } catch (const Error& e) {
      bad(key, e.what());
    }
  };

  // target
  if (c.has("target.weights") || c.has("target.means") || c.has("target.variances")) {
    const auto w = c.get_list("target.weights", {});
    const auto m = c.get_list("target.means", {});
    const auto v = c.get_list("target.variances", {});
    if (w.empty() || w.size() != m.size() || w.size() != v.size())
      bad("target.weights", "target.weights, target.means and target.variances must have equal lengths");
    std::vector<GaussianComponent> comps;
    for (std::size_t i = 0; i < w.size(); ++i) comps.push_back({w[i], Point::scalar(m[i]), Point::scalar(v[i])});
    try {
      lab.target = GaussianMixture(std::move(comps));
    } catch (const Error& e) {
      bad("target", e.what());
    }
  }

  // schedule
  const ScheduleKind kind = parse_enum("schedule.kind", parse_schedule_kind, ScheduleKind::RectifiedLinear);
  const double eps = c.get_double("schedule.eps", Schedule::kDefaultEpsClamp);
  if (!(eps > 0.0 && eps < 0.1)) bad("schedule.eps", "must lie in (0, 0.1)");
  lab.schedule = Schedule(kind, eps);

  // network
  if (c.has("network.hidden")) {
    lab.pretrain.hidden.clear();
    for (double h : c.get_list("network.hidden", {})) {
      if (!(h >= 1.0) || h != std::floor(h) || h > 4096.0) bad("network.hidden", "widths must be integers in [1, 4096]");
      lab.pretrain.hidden.push_back(static_cast<std::size_t>(h));
    }
  }

  lab.pretrain.batch_size = count("pretrain.batch_size", lab.pretrain.batch_size, 1);
  lab.pretrain.steps = count("pretrain.steps", lab.pretrain.steps, 1);
  lab.pretrain.learning_rate = positive("pretrain.learning_rate", lab.pretrain.learning_rate);
  lab.pretrain.log_interval = count("pretrain.log_interval", lab.pretrain.log_interval, 1);
  lab.pretrain.schedule = kind;

  auto& ft = lab.finetune;
  ft.method = parse_enum("finetune.method", parse_finetune_method, ft.method);
  ft.beta = positive("finetune.beta", ft.beta);
  for (auto [name, o] : {std::pair{"pg", &ft.pg}, std::pair{"rwr", &ft.rwr}, std::pair{"dpo", &ft.dpo}}) {
    const std::string prefix = std::string("finetune.") + name + ".";
    o->batch_size = count(prefix + "batch_size", o->batch_size, 2);
    o->learning_rate = positive(prefix + "learning_rate", o->learning_rate);
    o->steps = count(prefix + "steps", o->steps, 1);
  }
  ft.sigma_schedule = parse_enum("finetune.sigma_schedule", parse_sigma_schedule, ft.sigma_schedule);
  ft.sigma = c.get_double("finetune.sigma", ft.sigma);
  if (!(ft.sigma > 0.0) || !std::isfinite(ft.sigma)) bad("finetune.sigma", "must be a finite number > 0");
  ft.sigma_t_max = c.get_double("finetune.sigma_t_max", ft.sigma_t_max);
  if (!(ft.sigma_t_max > 0.0 && ft.sigma_t_max < 1.0)) bad("finetune.sigma_t_max", "must lie in (0, 1)");
  ft.rollout_steps = count("finetune.rollout_steps", ft.rollout_steps, 1);
  ft.log_interval = count("finetune.log_interval", ft.log_interval, 1);
  ft.rwr_pool = count("finetune.rwr_pool", ft.rwr_pool, 2);
  ft.dpo_pairs = count("finetune.dpo_pairs", ft.dpo_pairs, 1);
  ft.density_steps = count("finetune.density_steps", ft.density_steps, 100);
  ft.schedule = lab.schedule;

  const std::string rk = c.get_string("reward.kind", "linear");
  const double coef = c.get_double("reward.coef", 0.1);
  if (!std::isfinite(coef)) bad("reward.coef", "must be finite");
  if (rk == "linear") {
    if (c.has("reward.curvature")) bad("reward.curvature", "only applies to reward.kind = quadratic");
    lab.reward = RewardFn::linear(Point::scalar(coef));
  } else if (rk == "quadratic") {
    const double q = c.get_double("reward.curvature", 0.0);
    if (!std::isfinite(q)) bad("reward.curvature", "must be finite");
    lab.reward = RewardFn::quadratic(Point::scalar(coef), Point::scalar(q));
  } else {
    bad("reward.kind", "expected linear or quadratic, got '" + rk + "'");
  }

  auto& sc = lab.sampler;
  sc.steps = count("sample.steps", sc.steps, 1);
  sc.integrator = parse_enum("sample.integrator", parse_integrator, sc.integrator);
  sc.sigma = c.get_double("sample.sigma", sc.sigma);
  if (!(sc.sigma >= 0.0) || !std::isfinite(sc.sigma)) bad("sample.sigma", "must be a finite number >= 0");
  sc.batch_size = count("sample.batch_size", sc.batch_size, 1);
  sc.schedule = lab.schedule;

  lab.sweep_w = c.get_list("sweep.w", lab.sweep_w);
  for (double w : lab.sweep_w)
    if (!std::isfinite(w) || w < 0.0 || std::signbit(w)) bad("sweep.w", "entries must be finite and >= 0");

  lab.kl.bins = count("eval.bins", lab.kl.bins, 1);
  lab.kl.lo = c.get_double("eval.lo", lab.kl.lo);
  lab.kl.hi = c.get_double("eval.hi", lab.kl.hi);
  if (!std::isfinite(lab.kl.lo) || !std::isfinite(lab.kl.hi) || !(lab.kl.hi > lab.kl.lo))
    bad("eval.hi", "must be finite and greater than eval.lo");
  lab.kl.min_samples = count("eval.min_samples", lab.kl.min_samples, 1);

  lab.out_dir = c.get_string("output.dir", lab.out_dir);
  lab.set_seed(c.get_u64("seed", 0));
  return lab;
}

}  // namespace rlg
