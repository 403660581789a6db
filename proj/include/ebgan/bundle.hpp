#ifndef EBGAN_BUNDLE_HPP
#define EBGAN_BUNDLE_HPP

#include <string>
#include <vector>

#include "ebgan/config.hpp"
#include "ebgan/nets.hpp"

namespace ebgan {

// All networks for one run. The classifier is only constructed for the
// attribute-conditioned variant; the unconditional variant leaves it null.
struct ModelBundle {
  RunConfig config;
  ExemplarEncoder encoder{nullptr};
  GeneratorEncoder g_encoder{nullptr};
  GeneratorDecoder g_decoder{nullptr};
  Discriminator discriminator{nullptr};
  AttributeClassifier classifier{nullptr};

  bool has_classifier() const { return !classifier.is_empty(); }
  void train(bool on = true);
  void eval() { train(false); }
};

// Seeds torch's RNG with config.seed and builds every network the variant
// needs, so two bundles from the same config start bit-identical.
ModelBundle build_bundle(const RunConfig& config);

// "<net>.<param>" name plus shape for every parameter, nets in fixed order.
struct ParameterInfo {
  std::string name;
  std::vector<long> shape;
};
std::vector<ParameterInfo> parameter_inventory(const ModelBundle& bundle);

}  // namespace ebgan

#endif
