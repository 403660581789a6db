#ifndef EBGAN_MASKING_HPP
#define EBGAN_MASKING_HPP

#include <torch/torch.h>

namespace ebgan {

// A ⊙ (1 − M): zeroes the editing region, keeps everything else bit-exact.
// Image is (3,H,W) or (B,3,H,W); mask is (H,W) and broadcasts over channels.
torch::Tensor corrupt(const torch::Tensor& image, const torch::Tensor& mask);

// A_b ⊙ M + Ã: pastes generated content into the hole of the corruption.
// Out-of-hole pixels equal the original source exactly.
torch::Tensor compose(const torch::Tensor& generated, const torch::Tensor& corrupted,
                      const torch::Tensor& mask);

}  // namespace ebgan

#endif
