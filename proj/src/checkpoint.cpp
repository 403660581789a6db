#include "ebgan/checkpoint.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "ebgan/errors.hpp"

namespace ebgan {
namespace {

using nlohmann::json;

constexpr char kMagic[8] = {'E', 'B', 'G', 'A', 'N', 'C', 'K', '1'};

std::string archive_to_string(torch::serialize::OutputArchive& archive) {
  std::string out;
  archive.save_to([&out](const void* data, std::size_t size) {
    out.append(static_cast<const char*>(data), size);
    return size;
  });
  return out;
}

void write_u64(std::ostream& out, std::uint64_t value) {
  char bytes[8];
  std::memcpy(bytes, &value, 8);
  out.write(bytes, 8);
}

std::uint64_t read_u64(std::istream& in) {
  char bytes[8];
  in.read(bytes, 8);
  if (!in) throw ParseError("checkpoint truncated");
  std::uint64_t value = 0;
  std::memcpy(&value, bytes, 8);
  return value;
}

std::map<std::string, std::string> bundle_sections(const ModelBundle& bundle) {
  std::map<std::string, std::string> sections;
  sections["encoder"] = serialize_module(*bundle.encoder);
  sections["g_encoder"] = serialize_module(*bundle.g_encoder);
  sections["g_decoder"] = serialize_module(*bundle.g_decoder);
  sections["discriminator"] = serialize_module(*bundle.discriminator);
  if (bundle.has_classifier()) {
    sections["classifier"] = serialize_module(*bundle.classifier);
  }
  return sections;
}

}  // namespace

std::string serialize_module(const torch::nn::Module& module) {
  torch::serialize::OutputArchive archive;
  module.save(archive);
  return archive_to_string(archive);
}

std::string serialize_optimizer(const torch::optim::Optimizer& optimizer) {
  torch::serialize::OutputArchive archive;
  optimizer.save(archive);
  return archive_to_string(archive);
}

void write_checkpoint(const std::filesystem::path& path, const ModelBundle& bundle,
                      long step,
                      const std::map<std::string, std::string>& extra_sections) {
  auto sections = bundle_sections(bundle);
  for (const auto& [name, blob] : extra_sections) {
    if (!sections.emplace(name, blob).second) {
      throw ConfigError("checkpoint section name collides: " + name);
    }
  }

  json section_table = json::array();
  for (const auto& [name, blob] : sections) {
    section_table.push_back({{"name", name}, {"size", blob.size()}});
  }
  char fingerprint_hex[19];
  std::snprintf(fingerprint_hex, sizeof fingerprint_hex, "0x%016llx",
                static_cast<unsigned long long>(architecture_fingerprint(bundle.config)));
  const json header{{"format_version", 1},
                    {"step", step},
                    {"fingerprint", fingerprint_hex},
                    {"config", run_config_to_json(bundle.config)},
                    {"sections", section_table}};
  const std::string header_bytes = header.dump();

  const auto tmp = path.parent_path() /
                   (path.filename().string() + ".tmp-" +
                    std::to_string(static_cast<unsigned long long>(
                        std::hash<std::string>{}(path.string()))));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create checkpoint file: " + tmp.string());
    out.write(kMagic, sizeof kMagic);
    write_u64(out, header_bytes.size());
    out.write(header_bytes.data(), static_cast<std::streamsize>(header_bytes.size()));
    for (const auto& [name, blob] : sections) {
      out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    }
    out.flush();
    if (!out) throw IoError("failed writing checkpoint: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("failed to move checkpoint into place: " + ec.message());
}

CheckpointData read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint file: " + path.string());
  char magic[sizeof kMagic];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw ParseError("not a checkpoint file: " + path.string());
  }
  const std::uint64_t header_size = read_u64(in);
  std::string header_bytes(header_size, '\0');
  in.read(header_bytes.data(), static_cast<std::streamsize>(header_size));
  if (!in) throw ParseError("checkpoint truncated");

  json header;
  try {
    header = json::parse(header_bytes);
  } catch (const json::exception& e) {
    throw ParseError("checkpoint header is not valid JSON: " + std::string(e.what()));
  }

  CheckpointData data;
  try {
    data.step = header.at("step").get<long>();
    data.fingerprint =
        std::stoull(header.at("fingerprint").get<std::string>(), nullptr, 16);
    data.config = run_config_from_json(header.at("config"));
    for (const auto& entry : header.at("sections")) {
      const auto name = entry.at("name").get<std::string>();
      const auto size = entry.at("size").get<std::uint64_t>();
      std::string blob(size, '\0');
      in.read(blob.data(), static_cast<std::streamsize>(size));
      if (!in) throw ParseError("checkpoint truncated in section " + name);
      data.sections.emplace(name, std::move(blob));
    }
  } catch (const json::exception& e) {
    throw ParseError("malformed checkpoint header: " + std::string(e.what()));
  }
  if (data.fingerprint != architecture_fingerprint(data.config)) {
    throw ParseError("checkpoint fingerprint does not match its stored config");
  }
  return data;
}

void load_module(const CheckpointData& data, const std::string& name,
                 torch::nn::Module& module) {
  const auto it = data.sections.find(name);
  if (it == data.sections.end()) {
    throw ParseError("checkpoint has no section '" + name + "'");
  }
  torch::serialize::InputArchive archive;
  archive.load_from(it->second.data(), it->second.size());
  module.load(archive);
}

void load_optimizer(const CheckpointData& data, const std::string& name,
                    torch::optim::Optimizer& optimizer) {
  const auto it = data.sections.find(name);
  if (it == data.sections.end()) {
    throw ParseError("checkpoint has no section '" + name + "'");
  }
  torch::serialize::InputArchive archive;
  archive.load_from(it->second.data(), it->second.size());
  optimizer.load(archive);
}

ModelBundle restore_bundle(const CheckpointData& data) {
  ModelBundle bundle = build_bundle(data.config);
  load_module(data, "encoder", *bundle.encoder);
  load_module(data, "g_encoder", *bundle.g_encoder);
  load_module(data, "g_decoder", *bundle.g_decoder);
  load_module(data, "discriminator", *bundle.discriminator);
  if (bundle.has_classifier()) load_module(data, "classifier", *bundle.classifier);
  return bundle;
}

ModelBundle load_bundle(const std::filesystem::path& path) {
  return restore_bundle(read_checkpoint(path));
}

void require_matching_architecture(const RunConfig& ours, const CheckpointData& data) {
  if (architecture_fingerprint(ours) == data.fingerprint) return;
  std::ostringstream msg;
  msg << "checkpoint architecture does not match the run config; differing fields:\n"
      << architecture_diff(ours, data.config)
      << "refusing to load";
  throw ConfigError(msg.str());
}

}  // namespace ebgan
