#ifndef EBGAN_LOSSES_HPP
#define EBGAN_LOSSES_HPP

#include <optional>

#include <torch/torch.h>

#include "ebgan/types.hpp"

namespace ebgan {

// Probabilities are clamped to [kProbEps, 1-kProbEps] before any logarithm.
inline constexpr double kProbEps = 1e-7;

struct LossWeights {
  double lambda_rec = 100.0;
  double lambda_cyc = 10.0;
  double lambda_g = 10.0;

  void validate() const;
};

// Per-step scalar telemetry. Entries absent in a variant stay unset; totals
// are filled by the total_* ops.
struct LossReport {
  std::optional<double> rec, cls_g, cls_c, cyc, adv_g, adv_d;
  std::optional<double> total_g, total_d, total_c;
};

// Mean absolute error over all pixels and channels (resolution-independent
// L1 convention, so the loss weights transfer across resolutions).
torch::Tensor rec_loss(const torch::Tensor& images, const torch::Tensor& reconstructed);

// Binary cross-entropy against target labels, natural log, summed over
// attributes and averaged over the batch. preds/targets are (n,) or (B,n).
torch::Tensor cls_gen_loss(const torch::Tensor& preds, const torch::Tensor& targets);
torch::Tensor cls_real_loss(const torch::Tensor& preds, const torch::Tensor& targets);

// Mean absolute error between exemplar codes.
torch::Tensor cyc_loss(const torch::Tensor& code, const torch::Tensor& recoded);

// Discriminator objective: mean of -(log d_real + log(1 - d_fake)).
torch::Tensor adv_d_loss(const torch::Tensor& d_real, const torch::Tensor& d_fake);

// Generator adversarial objective, non-saturating form: mean of -log d_fake.
torch::Tensor adv_g_loss(const torch::Tensor& d_fake);

// The sign-literal form, mean of log d_fake, as a minimization target;
// selectable by config for comparisons, never the default.
torch::Tensor adv_g_loss_literal(const torch::Tensor& d_fake);

// Weighted generator total. The attribute-conditioned variant sums
// adv_g + lambda_rec*rec + lambda_cyc*cyc + lambda_g*cls_g; the
// unconditional variant omits the cls_g term and rejects a nonzero one.
double total_g_loss(const LossReport& parts, const LossWeights& weights, Variant variant);

// Pass-through totals for the discriminator and classifier objectives; the
// classifier total is a variant violation in unconditional mode.
double total_d_loss(const LossReport& parts);
double total_c_loss(const LossReport& parts, Variant variant);

// Number of classification-loss evaluations since the last reset; lets tests
// assert that unconditional training never touches the classifier losses.
long cls_loss_evaluations();
void reset_cls_loss_evaluations();

}  // namespace ebgan

#endif
