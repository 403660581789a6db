#ifndef EBGAN_TRAIN_HPP
#define EBGAN_TRAIN_HPP

#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "ebgan/bundle.hpp"
#include "ebgan/config.hpp"
#include "ebgan/data.hpp"
#include "ebgan/losses.hpp"

namespace ebgan {

struct TrainStepReport {
  long step = 0;  // 1-based index of the completed step
  std::string region;
  LossReport losses;
};

// Orchestrates one run: deterministic batch stream, the three optimizer
// updates per step (discriminator, classifier where the variant has one,
// then generator+encoder), JSONL metrics, and periodic checkpoints.
class Trainer {
 public:
  explicit Trainer(RunConfig config);
  // Resume: refuses checkpoints whose architecture fingerprint differs from
  // `config`, otherwise restores weights, optimizers, and the step counter.
  Trainer(RunConfig config, const std::filesystem::path& checkpoint);

  // One full iteration on `batch`; advances the step counter. Throws
  // TrainingAbort when any loss term turns non-finite.
  TrainStepReport train_step(const Batch& batch);

  // Individual updates, exposed so tests can drive them in isolation. None
  // of them advances the step counter.
  LossReport discriminator_step(const Batch& batch);
  LossReport classifier_step(const Batch& batch);
  LossReport generator_step(const Batch& batch);

  // Trains to config.optim.total_steps, logging one record per step and
  // checkpointing on the cadence plus a final checkpoint.
  void run();

  Batch batch_for_step(long step) const { return stream_->batch_for_step(step); }
  ModelBundle& bundle() { return bundle_; }
  const RunConfig& config() const { return config_; }
  long step() const { return step_; }
  const Dataset& dataset() const { return *dataset_; }
  const std::vector<long>& train_indices() const { return train_indices_; }
  const std::vector<long>& val_indices() const { return val_indices_; }
  const std::vector<long>& test_indices() const { return test_indices_; }

  std::filesystem::path metrics_path() const;
  std::filesystem::path checkpoint_path(long step) const;
  std::filesystem::path final_checkpoint_path() const;

 private:
  void setup();
  void save_checkpoint_at(const std::filesystem::path& path);
  void log_record(const TrainStepReport& report);
  torch::Tensor encode_context(const torch::Tensor& corrupted, const torch::Tensor& mask);
  torch::Tensor fake_batch(const Batch& batch);
  void check_finite(const LossReport& report, long step) const;

  RunConfig config_;
  ModelBundle bundle_;
  std::unique_ptr<torch::optim::Adam> opt_g_, opt_d_, opt_c_;
  std::unique_ptr<Dataset> dataset_;
  std::vector<long> train_indices_, val_indices_, test_indices_;
  std::unique_ptr<BatchStream> stream_;
  std::ofstream metrics_;
  long step_ = 0;
};

}  // namespace ebgan

#endif
