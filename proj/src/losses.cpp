#include "ebgan/losses.hpp"

#include <atomic>
#include <string>

#include "ebgan/errors.hpp"

namespace ebgan {

namespace {

std::atomic<long> g_cls_evaluations{0};

torch::Tensor clamp_probs(const torch::Tensor& probs) {
  return probs.clamp(kProbEps, 1.0 - kProbEps);
}

void check_same_shape(const torch::Tensor& a, const torch::Tensor& b, const char* what) {
  if (a.sizes() != b.sizes()) {
    throw ValidationError(std::string(what) + ": shapes differ");
  }
}

torch::Tensor bce_sum_over_attributes(const torch::Tensor& preds,
                                      const torch::Tensor& targets) {
  check_same_shape(preds, targets, "classification loss");
  if (preds.dim() != 1 && preds.dim() != 2) {
    throw ValidationError("classification loss expects (n,) or (B,n) inputs");
  }
  g_cls_evaluations.fetch_add(1, std::memory_order_relaxed);
  auto p = clamp_probs(preds);
  auto t = targets.to(p.dtype());
  auto per_entry = -(t * p.log() + (1 - t) * (1 - p).log());
  auto per_sample = per_entry.sum(-1);
  return per_sample.dim() == 0 ? per_sample : per_sample.mean();
}

double require(const std::optional<double>& part, const char* name) {
  if (!part.has_value()) {
    throw ValidationError(std::string("loss part missing: ") + name);
  }
  if (!std::isfinite(*part)) {
    throw ValidationError(std::string("loss part not finite: ") + name);
  }
  return *part;
}

}  // namespace

void LossWeights::validate() const {
  if (lambda_rec < 0 || lambda_cyc < 0 || lambda_g < 0) {
    throw ConfigError("loss weights must be nonnegative");
  }
}

torch::Tensor rec_loss(const torch::Tensor& images, const torch::Tensor& reconstructed) {
  check_same_shape(images, reconstructed, "reconstruction loss");
  return (images - reconstructed).abs().mean();
}

torch::Tensor cls_gen_loss(const torch::Tensor& preds, const torch::Tensor& targets) {
  return bce_sum_over_attributes(preds, targets);
}

torch::Tensor cls_real_loss(const torch::Tensor& preds, const torch::Tensor& targets) {
  return bce_sum_over_attributes(preds, targets);
}

torch::Tensor cyc_loss(const torch::Tensor& code, const torch::Tensor& recoded) {
  check_same_shape(code, recoded, "cycle loss");
  return (code - recoded).abs().mean();
}

torch::Tensor adv_d_loss(const torch::Tensor& d_real, const torch::Tensor& d_fake) {
  if (d_real.numel() != d_fake.numel()) {
    throw ValidationError("adversarial loss: real and fake batch sizes differ");
  }
  auto real = clamp_probs(d_real);
  auto fake = clamp_probs(d_fake);
  return -(real.log() + (1 - fake).log()).mean();
}

torch::Tensor adv_g_loss(const torch::Tensor& d_fake) {
  return -clamp_probs(d_fake).log().mean();
}

torch::Tensor adv_g_loss_literal(const torch::Tensor& d_fake) {
  return clamp_probs(d_fake).log().mean();
}

double total_g_loss(const LossReport& parts, const LossWeights& weights, Variant variant) {
  weights.validate();
  const double adv_g = require(parts.adv_g, "adv_g");
  const double rec = require(parts.rec, "rec");
  const double cyc = require(parts.cyc, "cyc");
  double total = adv_g + weights.lambda_rec * rec + weights.lambda_cyc * cyc;
  if (variant == Variant::kAttEbgan) {
    total += weights.lambda_g * require(parts.cls_g, "cls_g");
  } else if (parts.cls_g.has_value() && *parts.cls_g != 0.0) {
    throw VariantViolation("unconditional generator total cannot include cls_g");
  }
  return total;
}

double total_d_loss(const LossReport& parts) { return require(parts.adv_d, "adv_d"); }

double total_c_loss(const LossReport& parts, Variant variant) {
  if (variant == Variant::kEbgan) {
    throw VariantViolation("classifier objective does not exist in unconditional mode");
  }
  return require(parts.cls_c, "cls_c");
}

long cls_loss_evaluations() { return g_cls_evaluations.load(std::memory_order_relaxed); }

void reset_cls_loss_evaluations() { g_cls_evaluations.store(0, std::memory_order_relaxed); }

}  // namespace ebgan
