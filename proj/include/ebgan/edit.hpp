#ifndef EBGAN_EDIT_HPP
#define EBGAN_EDIT_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "ebgan/bundle.hpp"
#include "ebgan/types.hpp"

namespace ebgan {

// Region argument grammar: "full", a preset name (mouth, eyes, components,
// face), or semicolon-separated pixel rectangles "r0,r1,c0,c1". Bad syntax
// is a usage error; out-of-bounds rectangles fail validation downstream.
RegionSpec parse_region_arg(const std::string& text, long resolution);

// Thresholds classifier probabilities at 0.5; a tie counts as present.
AttributeVector infer_labels(AttributeClassifier& classifier, const torch::Tensor& image,
                             const std::vector<std::string>& names);

// Sidecar label file: n whitespace-separated 0/1 tokens.
AttributeVector read_label_file(const std::filesystem::path& path,
                                const std::vector<std::string>& names);

// Exemplar-conditioned inpainting of the masked region of `source`. For the
// attribute-conditioned variant the exemplar code is gated by
// `exemplar_labels` (inferred by the classifier when null) ANDed with
// `filter`; the unconditional variant rejects labels and filters.
torch::Tensor edit_image(ModelBundle& bundle, const torch::Tensor& source,
                         const torch::Tensor& exemplar, const RegionSpec& region,
                         const AttributeVector* exemplar_labels = nullptr,
                         const std::vector<int>* filter = nullptr);

struct EditRequest {
  std::filesystem::path checkpoint;
  std::filesystem::path source;
  std::filesystem::path exemplar;
  std::string region = "full";
  std::optional<std::vector<int>> filter_labels;
  std::optional<std::filesystem::path> labels;
  std::filesystem::path output;
};

struct EditResult {
  torch::Tensor image;              // (3,H,W) edited output
  AttributeVector exemplar_labels;  // conditioning labels (empty when unconditional)
};

// File-level pipeline: loads the checkpoint and both images at its training
// resolution, resolves exemplar labels (explicit file, then the
// "<exemplar>.labels" sidecar, then classifier inference), edits, and writes
// the result.
EditResult run_edit(const EditRequest& request);

struct GridRow {
  torch::Tensor source, exemplar, result;  // (3,H,W), uniform sizes
};

// Side-by-side sheet: one row per triple under a labeled header band, fixed
// 2-pixel gutters. Empty input is a usage error.
torch::Tensor make_grid(const std::vector<GridRow>& rows);

// Manifest file: one "source exemplar result" path triple per line.
void grid_from_manifest(const std::filesystem::path& manifest,
                        const std::filesystem::path& output);

}  // namespace ebgan

#endif
