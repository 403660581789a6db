#include "ebgan/types.hpp"

#include "ebgan/errors.hpp"

namespace ebgan {

std::string to_string(Variant variant) {
  return variant == Variant::kEbgan ? "ebgan" : "att_ebgan";
}

Variant variant_from_string(const std::string& name) {
  if (name == "ebgan") return Variant::kEbgan;
  if (name == "att_ebgan") return Variant::kAttEbgan;
  throw ConfigError("unknown variant '" + name + "' (expected 'ebgan' or 'att_ebgan')");
}

void AttributeVector::validate() const {
  if (!names.empty() && names.size() != values.size()) {
    throw ValidationError("attribute vector has " + std::to_string(values.size()) +
                          " values but " + std::to_string(names.size()) + " names");
  }
  for (size_t i = 0; i < values.size(); ++i) {
    if (values[i] != 0 && values[i] != 1) {
      throw ValidationError("attribute entry " + std::to_string(i) + " is " +
                            std::to_string(values[i]) + ", expected 0 or 1");
    }
  }
}

torch::Tensor AttributeVector::to_tensor() const {
  validate();
  auto out = torch::empty({size()}, torch::kFloat32);
  auto acc = out.accessor<float, 1>();
  for (long i = 0; i < size(); ++i) acc[i] = static_cast<float>(values[i]);
  return out;
}

RegionSpec RegionSpec::full() {
  RegionSpec spec;
  spec.kind = Kind::kFull;
  return spec;
}

RegionSpec RegionSpec::rectangle(Rect rect) {
  RegionSpec spec;
  spec.kind = Kind::kRectangle;
  spec.rectangles = {rect};
  return spec;
}

RegionSpec RegionSpec::union_of(std::vector<Rect> rects) {
  RegionSpec spec;
  spec.kind = Kind::kUnionOfRectangles;
  spec.rectangles = std::move(rects);
  return spec;
}

bool RegionSpec::covers(long row, long col) const {
  if (kind == Kind::kFull) return true;
  for (const auto& rect : rectangles) {
    if (rect.contains(row, col)) return true;
  }
  return false;
}

}  // namespace ebgan
