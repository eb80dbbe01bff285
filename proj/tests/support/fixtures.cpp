#include "fixtures.hpp"

#include "rlg/io/csv.hpp"
#include "rlg/net/checkpoint.hpp"

namespace rlg::testing {

GaussianMixture two_mode_mixture() { return GaussianMixture::two_mode_demo(); }

RewardFn linear_reward() { return RewardFn::linear(Point::scalar(0.1)); }

std::filesystem::path cache_dir() {
  std::filesystem::path dir = RLG_TEST_CACHE_DIR;
  std::filesystem::create_directories(dir);
  return dir;
}

TrainConfig reference_train_config() { return TrainConfig{}; }

namespace {

const PretrainResult& reference_run() {
  static const PretrainResult run = [] {
    const auto ckpt = cache_dir() / "reference.ckpt";
    const auto log = cache_dir() / "reference_loss.csv";
    if (std::filesystem::exists(ckpt) && std::filesystem::exists(log)) {
      PretrainResult r{load_checkpoint(ckpt), {}};
      for (const auto& row : read_csv_file(log.string()).rows)
        r.log.push_back({static_cast<std::size_t>(row.at(0)), row.at(1)});
      return r;
    }
    PretrainResult r = pretrain(two_mode_mixture(), reference_train_config());
    write_csv_file(log.string(), loss_table(r.log), reference_train_config().seed);
    save_checkpoint(r.model, ckpt.string() + ".tmp");
    std::filesystem::rename(ckpt.string() + ".tmp", ckpt);
    return r;
  }();
  return run;
}

}  // namespace

const VelocityModel& reference_model() { return reference_run().model; }

const std::vector<LossRecord>& reference_loss_log() { return reference_run().log; }

}  // namespace rlg::testing
