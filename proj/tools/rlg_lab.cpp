#include <fcntl.h>
#include <unistd.h>

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "rlg/core/random.hpp"
#include "rlg/error.hpp"
#include "rlg/eval/metrics.hpp"
#include "rlg/guide/guidance.hpp"
#include "rlg/io/config.hpp"
#include "rlg/io/csv.hpp"
#include "rlg/io/svg.hpp"
#include "rlg/net/checkpoint.hpp"
#include "rlg/rl/dpo.hpp"
#include "rlg/rl/policy_gradient.hpp"
#include "rlg/rl/rwr.hpp"
#include "rlg/train/flow_matching.hpp"
#include "rlg/version.hpp"

namespace fs = std::filesystem;
using namespace rlg;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

// Thrown for problems the user fixes by changing the invocation or config.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
};

// Exclusive ownership of an output directory for the lifetime of a command.
class DirLock {
 public:
  explicit DirLock(const fs::path& dir) : path_(dir / ".rlg-lab.lock") {
    fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd_ < 0)
      throw Error(ErrorCode::Io, "output directory is locked by another run (" + path_.string() +
                                     "); remove the file if no run is active");
    const std::string pid = std::to_string(::getpid()) + "\n";
    if (::write(fd_, pid.data(), pid.size()) < 0) {
      // best effort: the lock is the file's existence, not its content
    }
  }
  ~DirLock() {
    ::close(fd_);
    std::error_code ec;
    fs::remove(path_, ec);
  }
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;

 private:
  fs::path path_;
  int fd_ = -1;
};

LabConfig load_config(const CommonOptions& opts) {
  Config raw;
  if (!opts.config_path.empty()) {
    if (!fs::is_regular_file(opts.config_path)) throw UsageError("config file not found: " + opts.config_path);
    raw = Config::load(opts.config_path);
  }
  LabConfig lab = LabConfig::from(raw);
  if (opts.seed) lab.set_seed(*opts.seed);
  if (!opts.out_dir.empty()) lab.out_dir = opts.out_dir;
  return lab;
}

fs::path prepare_out(const LabConfig& lab) {
  fs::path out(lab.out_dir);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create output directory '" + out.string() + "': " + ec.message());
  return out;
}

VelocityModel require_checkpoint(const fs::path& path, const char* what) {
  if (!fs::is_regular_file(path))
    throw Error(ErrorCode::Io, std::string(what) + " checkpoint not found: " + path.string());
  return load_checkpoint(path);
}

std::string w_tag(double w) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", w);
  return buf;
}

SvgCurve density_curve(const GaussianMixture& m, const std::string& label, double lo, double hi) {
  SvgCurve c;
  c.label = label;
  constexpr int kPoints = 400;
  for (int i = 0; i <= kPoints; ++i) {
    const double x = lo + (hi - lo) * i / kPoints;
    c.xs.push_back(x);
    c.ys.push_back(m.pdf(Point::scalar(x)));
  }
  return c;
}

SvgPlot overlay(const SampleBatch& samples, const GaussianMixture& predicted, const LabConfig& lab,
                const std::string& title) {
  SvgPlot plot;
  plot.title = title;
  plot.histogram = make_histogram(samples.values, uniform_edges(lab.kl.lo, lab.kl.hi, lab.kl.bins));
  plot.curves.push_back(density_curve(predicted, "predicted density", lab.kl.lo, lab.kl.hi));
  return plot;
}

int cmd_pretrain(const CommonOptions& opts) {
  const LabConfig lab = load_config(opts);
  const fs::path out = prepare_out(lab);
  DirLock lock(out);
  std::cerr << "pretrain: " << lab.pretrain.steps << " steps, batch " << lab.pretrain.batch_size << "\n";
  const auto res = pretrain(lab.target, lab.pretrain, [](const LossRecord& r) {
    if (r.step % 1000 == 0) std::cerr << "  step " << r.step << " loss " << r.loss << "\n";
  });
  save_checkpoint(res.model, out / "ref.ckpt");
  write_csv_file((out / "pretrain_loss.csv").string(), loss_table(res.log), lab.seed);
  std::cout << "wrote " << (out / "ref.ckpt").string() << "\n";
  return kExitOk;
}

int cmd_finetune(const CommonOptions& opts, const std::string& method_name, const std::string& ref_path) {
  LabConfig lab = load_config(opts);
  if (!method_name.empty()) {
    try {
      lab.finetune.method = parse_finetune_method(method_name);
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
  }
  const fs::path out = prepare_out(lab);
  const VelocityModel ref = require_checkpoint(ref_path.empty() ? out / "ref.ckpt" : fs::path(ref_path), "reference");
  DirLock lock(out);
  const std::string tag(to_string(lab.finetune.method));
  auto progress = [&](const FinetuneRecord& r) {
    if (r.step % lab.finetune.log_interval == 0)
      std::cerr << "  step " << r.step << " loss " << r.loss << " reward " << r.mean_reward << "\n";
  };
  FinetuneResult res;
  switch (lab.finetune.method) {
    case FinetuneMethod::PolicyGradient:
      res = policy_gradient_finetune(ref, lab.reward, lab.finetune, progress);
      break;
    case FinetuneMethod::Rwr:
      res = rwr_finetune(ref, lab.reward, lab.finetune.beta, lab.finetune, progress);
      break;
    case FinetuneMethod::Dpo: {
      const auto pairs = bradley_terry_pairs(ref, lab.reward, lab.finetune.dpo_pairs, derive_seed(lab.seed, "dpo.pairs"),
                                             lab.sampler.steps);
      res = dpo_finetune(ref, pairs, lab.finetune, progress);
      break;
    }
  }
  for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";
  save_checkpoint(res.model, out / ("theta_" + tag + ".ckpt"));
  write_csv_file((out / ("finetune_" + tag + ".csv")).string(), diagnostics_table(res.log), lab.seed);
  std::cout << "wrote " << (out / ("theta_" + tag + ".ckpt")).string() << "\n";
  return kExitOk;
}

int cmd_sweep(const CommonOptions& opts, std::vector<double> ws, const std::string& ref_path,
              const std::string& theta_path) {
  const LabConfig lab = load_config(opts);
  if (ws.empty()) ws = lab.sweep_w;
  for (double w : ws)
    if (!std::isfinite(w) || std::signbit(w))
      throw UsageError("--w entries must be finite and non-negative (got " + w_tag(w) + ")");
  const fs::path out = prepare_out(lab);
  const VelocityModel ref = require_checkpoint(ref_path.empty() ? out / "ref.ckpt" : fs::path(ref_path), "reference");
  const fs::path default_theta = out / ("theta_" + std::string(to_string(lab.finetune.method)) + ".ckpt");
  const VelocityModel theta =
      require_checkpoint(theta_path.empty() ? default_theta : fs::path(theta_path), "fine-tuned");
  DirLock lock(out);

  const TiltTarget target = lab.tilt_target();
  std::vector<SweepRow> rows;
  for (double w : ws) {
    SamplerConfig sc = lab.sampler;
    sc.seed = seed_for_value(lab.sampler.seed, w);
    GuidanceSpec spec;
    spec.rlg_w = w;
    const SampleBatch batch = sample({&ref, &theta, nullptr, nullptr}, spec, sc);
    if (batch.rejected > 0) std::cerr << "warning: w=" << w_tag(w) << ": " << batch.rejected << " samples rejected\n";
    const GaussianMixture predicted = predicted_mixture(target, w);
    const SweepRow row{w, effective_beta(target.beta, w), histogram_kl(batch, predicted, lab.kl),
                       wasserstein1(batch, predicted)};
    rows.push_back(row);
    write_csv_file((out / ("samples_w" + w_tag(w) + ".csv")).string(), samples_table(batch), sc.seed);
    write_svg_file((out / ("sweep_w" + w_tag(w) + ".svg")).string(),
                   overlay(batch, predicted, lab, "RLG samples, w = " + w_tag(w)), sc.seed);
    std::cout << "w=" << w_tag(w) << " beta_eff=" << row.beta_eff << " kl=" << row.kl << " w1=" << row.w1 << "\n";
  }
  write_csv_file((out / "sweep_metrics.csv").string(), sweep_table(rows), lab.seed);
  return kExitOk;
}

SampleBatch read_samples(const std::string& path) {
  if (!fs::is_regular_file(path)) throw UsageError("samples file not found: " + path);
  try {
    return samples_from_table(read_csv_file(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Parse || e.code() == ErrorCode::EmptyInput) throw UsageError(e.what());
    throw;
  }
}

int cmd_eval(const CommonOptions& opts, const std::string& samples_path, double w) {
  const LabConfig lab = load_config(opts);
  const SampleBatch batch = read_samples(samples_path);
  const GaussianMixture oracle = predicted_mixture(lab.tilt_target(), w);
  const Histogram hist = make_histogram(batch.values, uniform_edges(lab.kl.lo, lab.kl.hi, lab.kl.bins));
  const double kl = histogram_kl(batch, oracle, lab.kl);
  const double w1 = wasserstein1(batch, oracle);
  std::cout << "kl=" << kl << " w1=" << w1 << " n=" << batch.size() << " overflow=" << hist.overflow << "\n";
  const fs::path out = prepare_out(lab);
  DirLock lock(out);
  std::ofstream f(out / "eval_metrics.csv", std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot write " + (out / "eval_metrics.csv").string());
  write_metrics_csv(f,
                    {{"kl", kl},
                     {"w1", w1},
                     {"n", static_cast<double>(batch.size())},
                     {"overflow", static_cast<double>(hist.overflow)}},
                    lab.seed);
  return kExitOk;
}

int cmd_plot(const CommonOptions& opts, const std::string& samples_path, double w, const std::string& svg_path) {
  const LabConfig lab = load_config(opts);
  const SampleBatch batch = read_samples(samples_path);
  const fs::path out = prepare_out(lab);
  DirLock lock(out);
  const fs::path target = svg_path.empty() ? out / "plot.svg" : fs::path(svg_path);
  write_svg_file(target.string(), overlay(batch, predicted_mixture(lab.tilt_target(), w), lab, "samples, w = " + w_tag(w)),
                 lab.seed);
  std::cout << "wrote " << target.string() << "\n";
  return kExitOk;
}

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_path, "experiment config (section.key = value)");
  cmd->add_option("--seed", opts.seed, "global seed, overrides the config");
  cmd->add_option("--out", opts.out_dir, "output directory, overrides output.dir");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string(kToolName) + " " + std::string(kToolVersion) + ": guided flow-matching toy lab"};
  app.require_subcommand(1);
  CommonOptions common;

  auto* pre = app.add_subcommand("pretrain", "flow-matching pretraining of the reference model");
  add_common(pre, common);

  auto* ft = app.add_subcommand("finetune", "KL-regularized fine-tuning of the reference model");
  add_common(ft, common);
  std::string method, ref_path, theta_path;
  ft->add_option("--method", method, "pg, rwr or dpo (default: finetune.method)");
  ft->add_option("--ref", ref_path, "reference checkpoint (default: <out>/ref.ckpt)");

  auto* sw = app.add_subcommand("sweep", "guided sampling over a list of w");
  add_common(sw, common);
  std::vector<double> ws;
  sw->add_option("--w", ws, "guidance scales (default: sweep.w)")->delimiter(',');
  sw->add_option("--ref", ref_path, "reference checkpoint (default: <out>/ref.ckpt)");
  sw->add_option("--theta", theta_path, "fine-tuned checkpoint (default: <out>/theta_<method>.ckpt)");

  auto* ev = app.add_subcommand("eval", "score a sample CSV against the predicted density");
  add_common(ev, common);
  std::string samples_path;
  double w = 0.0;
  ev->add_option("--samples", samples_path, "sample CSV")->required();
  ev->add_option("--w", w, "guidance scale whose predicted density is the oracle (0: untilted target)");

  auto* pl = app.add_subcommand("plot", "histogram overlay SVG of a sample CSV");
  add_common(pl, common);
  std::string svg_path;
  pl->add_option("--samples", samples_path, "sample CSV")->required();
  pl->add_option("--w", w, "guidance scale of the overlaid predicted density");
  pl->add_option("--svg", svg_path, "output path (default: <out>/plot.svg)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (pre->parsed()) return cmd_pretrain(common);
    if (ft->parsed()) return cmd_finetune(common, method, ref_path);
    if (sw->parsed()) return cmd_sweep(common, ws, ref_path, theta_path);
    if (ev->parsed()) {
      if (!std::isfinite(w) || std::signbit(w)) throw UsageError("--w must be finite and non-negative");
      return cmd_eval(common, samples_path, w);
    }
    if (pl->parsed()) {
      if (!std::isfinite(w) || std::signbit(w)) throw UsageError("--w must be finite and non-negative");
      return cmd_plot(common, samples_path, w, svg_path);
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    const bool config_problem = e.code() == ErrorCode::Parse || e.code() == ErrorCode::InvalidArgument;
    return config_problem ? kExitUsage : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
