#ifndef EBGAN_TYPES_HPP
#define EBGAN_TYPES_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <torch/torch.h>

namespace ebgan {

// Image tensors are (3,H,W) or batched (B,3,H,W), values in [-1,1].
// Masks are (H,W) float tensors with entries in {0,1}, 1 = editing region.
// Latent codes are (C,h,w) or batched (B,C,h,w).

enum class Variant { kEbgan, kAttEbgan };

std::string to_string(Variant variant);
Variant variant_from_string(const std::string& name);

// Binary attribute labels plus the attribute names they correspond to.
struct AttributeVector {
  std::vector<int> values;
  std::vector<std::string> names;

  long size() const { return static_cast<long>(values.size()); }
  void validate() const;  // throws ValidationError on non-binary entries
  torch::Tensor to_tensor() const;  // (n,) float32
};

// Half-open pixel rectangle [row0,row1) x [col0,col1).
struct Rect {
  long row0 = 0;
  long row1 = 0;
  long col0 = 0;
  long col1 = 0;

  bool contains(long row, long col) const {
    return row >= row0 && row < row1 && col >= col0 && col < col1;
  }
  bool operator==(const Rect&) const = default;
};

struct RegionSpec {
  enum class Kind { kRectangle, kUnionOfRectangles, kFull };

  Kind kind = Kind::kRectangle;
  std::vector<Rect> rectangles;

  static RegionSpec full();
  static RegionSpec rectangle(Rect rect);
  static RegionSpec union_of(std::vector<Rect> rects);

  bool covers(long row, long col) const;
};

struct SplitSpec {
  std::vector<std::string> train_ids;
  std::vector<std::string> val_ids;
  std::vector<std::string> test_ids;
};

struct Sample {
  torch::Tensor image;  // (3,H,W) float in [-1,1]
  AttributeVector attributes;
  std::string id;
};

// One assembled training batch. Exemplars are the sources reindexed by a
// derangement so that every exemplar differs from its source; exemplar
// labels always travel with their exemplar images.
struct Batch {
  torch::Tensor sources;          // (B,3,H,W)
  torch::Tensor source_labels;    // (B,n) float {0,1}
  torch::Tensor exemplars;        // (B,3,H,W)
  torch::Tensor exemplar_labels;  // (B,n)
  torch::Tensor mask;             // (H,W) float {0,1}
  std::vector<long> exemplar_perm;
};

}  // namespace ebgan

#endif
