#include "ebgan/masking.hpp"

#include "ebgan/errors.hpp"

namespace ebgan {

namespace {

torch::Tensor checked_mask(const torch::Tensor& image, const torch::Tensor& mask) {
  if (mask.dim() != 2) {
    throw ValidationError("mask must be (H,W)");
  }
  if (image.dim() != 3 && image.dim() != 4) {
    throw ValidationError("image must be (3,H,W) or (B,3,H,W)");
  }
  if (image.size(image.dim() - 2) != mask.size(0) ||
      image.size(image.dim() - 1) != mask.size(1)) {
    throw ValidationError("image and mask spatial shapes differ");
  }
  auto binary = (mask == 0) | (mask == 1);
  if (!binary.all().item<bool>()) {
    throw ValidationError("mask must be binary 0/1");
  }
  auto m = mask.to(image.dtype()).unsqueeze(0);
  return image.dim() == 4 ? m.unsqueeze(0) : m;
}

}  // namespace

torch::Tensor corrupt(const torch::Tensor& image, const torch::Tensor& mask) {
  auto m = checked_mask(image, mask);
  return image * (1 - m);
}

torch::Tensor compose(const torch::Tensor& generated, const torch::Tensor& corrupted,
                      const torch::Tensor& mask) {
  if (generated.sizes() != corrupted.sizes()) {
    throw ValidationError("generated and corrupted shapes differ");
  }
  auto m = checked_mask(generated, mask);
  return generated * m + corrupted;
}

}  // namespace ebgan
