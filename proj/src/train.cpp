#include "ebgan/train.hpp"

#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "ebgan/checkpoint.hpp"
#include "ebgan/errors.hpp"
#include "ebgan/latent.hpp"
#include "ebgan/masking.hpp"

namespace ebgan {
namespace {

std::vector<torch::Tensor> generator_parameters(ModelBundle& bundle) {
  std::vector<torch::Tensor> params;
  for (auto* net : {static_cast<torch::nn::Module*>(bundle.encoder.get()),
                    static_cast<torch::nn::Module*>(bundle.g_encoder.get()),
                    static_cast<torch::nn::Module*>(bundle.g_decoder.get())}) {
    for (auto& p : net->parameters()) params.push_back(p);
  }
  return params;
}

}  // namespace

Trainer::Trainer(RunConfig config) : config_(std::move(config)) {
  config_.validate();
  bundle_ = build_bundle(config_);
  setup();
}

Trainer::Trainer(RunConfig config, const std::filesystem::path& checkpoint)
    : config_(std::move(config)) {
  config_.validate();
  const CheckpointData data = read_checkpoint(checkpoint);
  require_matching_architecture(config_, data);
  bundle_ = restore_bundle(data);
  bundle_.config = config_;  // run parameters (steps, output dir) follow the caller
  setup();
  load_optimizer(data, "opt_g", *opt_g_);
  load_optimizer(data, "opt_d", *opt_d_);
  if (bundle_.has_classifier()) load_optimizer(data, "opt_c", *opt_c_);
  step_ = data.step;
  stream_->seek(step_);
}

void Trainer::setup() {
  if (config_.deterministic) torch::set_num_threads(1);

  const auto& ds = config_.dataset;
  if (ds.source == "synthetic") {
    dataset_ = std::make_unique<SyntheticFaceDataset>(
        ds.synthetic.seed, ds.synthetic.count, ds.attributes, ds.resolution);
  } else {
    dataset_ = std::make_unique<CelebaDataset>(ds.celeba.image_dir, ds.celeba.attr_file,
                                               ds.attributes, ds.resolution,
                                               ds.celeba.horizontal_flip);
  }

  SplitSpec split;
  if (ds.source == "celeba" && !ds.celeba.partition_file.empty()) {
    split = split_from_partition_file(ds.celeba.partition_file);
  } else {
    split = make_split(dataset_->ids(), ds.split);
  }
  std::map<std::string, long> index_of;
  const auto& all_ids = dataset_->ids();
  for (long i = 0; i < static_cast<long>(all_ids.size()); ++i) index_of[all_ids[i]] = i;
  const auto to_indices = [&](const std::vector<std::string>& ids) {
    std::vector<long> out;
    out.reserve(ids.size());
    for (const auto& id : ids) {
      const auto it = index_of.find(id);
      if (it == index_of.end()) throw ConfigError("split id not in dataset: " + id);
      out.push_back(it->second);
    }
    return out;
  };
  train_indices_ = to_indices(split.train_ids);
  val_indices_ = to_indices(split.val_ids);
  test_indices_ = to_indices(split.test_ids);

  std::vector<long> stream_indices = train_indices_;
  if (ds.include_val_in_train) {
    stream_indices.insert(stream_indices.end(), val_indices_.begin(), val_indices_.end());
  }

  const auto presets = default_region_presets(ds.resolution);
  std::vector<std::pair<std::string, RegionSpec>> rotation;
  for (const auto& name : ds.region_rotation) {
    rotation.emplace_back(name, presets.at(name));
  }
  stream_ = std::make_unique<BatchStream>(*dataset_, std::move(stream_indices),
                                          config_.optim.batch_size, config_.seed,
                                          std::move(rotation), ds.prefetch);

  const auto opts = torch::optim::AdamOptions(config_.optim.learning_rate)
                        .betas({config_.optim.beta1, config_.optim.beta2});
  opt_g_ = std::make_unique<torch::optim::Adam>(generator_parameters(bundle_), opts);
  opt_d_ = std::make_unique<torch::optim::Adam>(bundle_.discriminator->parameters(), opts);
  if (bundle_.has_classifier()) {
    opt_c_ = std::make_unique<torch::optim::Adam>(bundle_.classifier->parameters(), opts);
  }

  std::filesystem::create_directories(config_.output_dir);
  metrics_.open(metrics_path(), std::ios::app);
  if (!metrics_) throw IoError("cannot open metrics log: " + metrics_path().string());
}

std::filesystem::path Trainer::metrics_path() const {
  return std::filesystem::path(config_.output_dir) / "metrics.jsonl";
}

std::filesystem::path Trainer::checkpoint_path(long step) const {
  char name[32];
  std::snprintf(name, sizeof name, "step_%06ld.ckpt", step);
  return std::filesystem::path(config_.output_dir) / name;
}

std::filesystem::path Trainer::final_checkpoint_path() const {
  return std::filesystem::path(config_.output_dir) / "final.ckpt";
}

torch::Tensor Trainer::encode_context(const torch::Tensor& corrupted,
                                      const torch::Tensor& mask) {
  if (config_.model.generator_mask_plane) {
    return bundle_.g_encoder->forward(corrupted, mask);
  }
  return bundle_.g_encoder->forward(corrupted);
}

torch::Tensor Trainer::fake_batch(const Batch& batch) {
  torch::NoGradGuard no_grad;
  const auto corrupted = corrupt(batch.sources, batch.mask);
  const auto z_a = encode_context(corrupted, batch.mask);
  auto z_b = encode(bundle_.encoder, batch.exemplars, batch.mask);
  if (config_.variant == Variant::kAttEbgan) {
    z_b = filter_by_labels(z_b, batch.exemplar_labels, config_.model.block_channels);
  }
  const auto a_b = g_decode(bundle_.g_decoder, z_a, z_b);
  return compose(a_b, corrupted, batch.mask);
}

LossReport Trainer::discriminator_step(const Batch& batch) {
  // The fake is built without a graph, so no gradient can reach the
  // generator or the encoders from this update.
  const auto fake = fake_batch(batch);
  const auto d_real = discriminate(bundle_.discriminator, batch.sources);
  const auto d_fake = discriminate(bundle_.discriminator, fake);
  const auto loss = adv_d_loss(d_real, d_fake);
  opt_d_->zero_grad();
  loss.backward();
  opt_d_->step();

  LossReport report;
  report.adv_d = loss.item<double>();
  check_finite(report, step_ + 1);
  report.total_d = total_d_loss(report);
  return report;
}

LossReport Trainer::classifier_step(const Batch& batch) {
  if (!bundle_.has_classifier()) {
    throw VariantViolation("classifier updates are undefined for the unconditional variant");
  }
  const auto preds = classify(bundle_.classifier, batch.sources);
  const auto loss = cls_real_loss(preds, batch.source_labels);
  opt_c_->zero_grad();
  loss.backward();
  opt_c_->step();

  LossReport report;
  report.cls_c = loss.item<double>();
  check_finite(report, step_ + 1);
  report.total_c = total_c_loss(report, config_.variant);
  return report;
}

LossReport Trainer::generator_step(const Batch& batch) {
  const bool att = config_.variant == Variant::kAttEbgan;
  const long cb = config_.model.block_channels;

  const auto corrupted = corrupt(batch.sources, batch.mask);
  const auto z_a = encode_context(corrupted, batch.mask);

  // Reconstruction branch: the exemplar is the source itself, so the decoder
  // must reproduce the source image.
  auto z_self = encode(bundle_.encoder, batch.sources, batch.mask);
  if (att) z_self = filter_by_labels(z_self, batch.source_labels, cb);
  const auto a_a = g_decode(bundle_.g_decoder, z_a, z_self);
  const auto rec = rec_loss(batch.sources, a_a);

  // Transfer branch: a deranged exemplar conditions the completion.
  const auto z_b = encode(bundle_.encoder, batch.exemplars, batch.mask);
  const auto z_cond = att ? filter_by_labels(z_b, batch.exemplar_labels, cb) : z_b;
  const auto a_b = g_decode(bundle_.g_decoder, z_a, z_cond);
  const auto y = compose(a_b, corrupted, batch.mask);

  const auto d_fake = discriminate(bundle_.discriminator, y);
  const auto adv =
      config_.literal_adv_g ? adv_g_loss_literal(d_fake) : adv_g_loss(d_fake);
  const auto z_cycle = encode(bundle_.encoder, a_b, batch.mask);
  const auto cyc = cyc_loss(z_b, z_cycle);

  auto total = adv + config_.weights.lambda_rec * rec + config_.weights.lambda_cyc * cyc;
  LossReport report;
  if (att) {
    const auto preds = classify(bundle_.classifier, a_b);
    const auto cls = cls_gen_loss(preds, batch.exemplar_labels);
    total = total + config_.weights.lambda_g * cls;
    report.cls_g = cls.item<double>();
  }
  opt_g_->zero_grad();
  total.backward();
  opt_g_->step();

  report.rec = rec.item<double>();
  report.cyc = cyc.item<double>();
  report.adv_g = adv.item<double>();
  check_finite(report, step_ + 1);
  report.total_g = total_g_loss(report, config_.weights, config_.variant);
  return report;
}

void Trainer::check_finite(const LossReport& report, long step) const {
  const std::pair<const char*, const std::optional<double>*> terms[] = {
      {"rec", &report.rec},         {"cls_g", &report.cls_g},
      {"cls_c", &report.cls_c},     {"cyc", &report.cyc},
      {"adv_g", &report.adv_g},     {"adv_d", &report.adv_d},
      {"total_g", &report.total_g}, {"total_d", &report.total_d},
      {"total_c", &report.total_c},
  };
  for (const auto& [name, value] : terms) {
    if (value->has_value() && !std::isfinite(**value)) {
      throw TrainingAbort("non-finite loss term '" + std::string(name) +
                          "' at step " + std::to_string(step));
    }
  }
}

TrainStepReport Trainer::train_step(const Batch& batch) {
  const long this_step = step_ + 1;
  TrainStepReport out;
  out.region = stream_->region_name_for_step(this_step - 1);

  const LossReport d = discriminator_step(batch);
  out.losses.adv_d = d.adv_d;
  out.losses.total_d = d.total_d;
  if (config_.variant == Variant::kAttEbgan) {
    const LossReport c = classifier_step(batch);
    out.losses.cls_c = c.cls_c;
    out.losses.total_c = c.total_c;
  }
  const LossReport g = generator_step(batch);
  out.losses.rec = g.rec;
  out.losses.cyc = g.cyc;
  out.losses.adv_g = g.adv_g;
  out.losses.cls_g = g.cls_g;
  out.losses.total_g = g.total_g;

  check_finite(out.losses, this_step);
  step_ = this_step;
  out.step = this_step;
  return out;
}

void Trainer::log_record(const TrainStepReport& report) {
  nlohmann::json j{{"step", report.step}, {"region", report.region}};
  const std::pair<const char*, const std::optional<double>*> terms[] = {
      {"rec", &report.losses.rec},         {"cls_g", &report.losses.cls_g},
      {"cls_c", &report.losses.cls_c},     {"cyc", &report.losses.cyc},
      {"adv_g", &report.losses.adv_g},     {"adv_d", &report.losses.adv_d},
      {"total_g", &report.losses.total_g}, {"total_d", &report.losses.total_d},
      {"total_c", &report.losses.total_c},
  };
  for (const auto& [name, value] : terms) {
    if (value->has_value()) j[name] = **value;
  }
  metrics_ << j.dump() << "\n";
}

void Trainer::save_checkpoint_at(const std::filesystem::path& path) {
  std::map<std::string, std::string> extra;
  extra["opt_g"] = serialize_optimizer(*opt_g_);
  extra["opt_d"] = serialize_optimizer(*opt_d_);
  if (bundle_.has_classifier()) extra["opt_c"] = serialize_optimizer(*opt_c_);
  write_checkpoint(path, bundle_, step_, extra);
}

void Trainer::run() {
  bundle_.train();
  try {
    while (step_ < config_.optim.total_steps) {
      const Batch batch = stream_->next();
      const TrainStepReport report = train_step(batch);
      log_record(report);
      if (report.step % config_.optim.checkpoint_every == 0) {
        metrics_.flush();
        save_checkpoint_at(checkpoint_path(report.step));
      }
    }
  } catch (const TrainingAbort&) {
    metrics_.flush();
    throw;
  }
  metrics_.flush();
  save_checkpoint_at(final_checkpoint_path());
}

}  // namespace ebgan
