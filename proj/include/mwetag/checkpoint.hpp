#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "mwetag/model.hpp"
#include "mwetag/train.hpp"

namespace mwetag {

/// File layout: the 8-byte magic "MWETAG1\n", a little-endian u64 header
/// length, a JSON header (version, model kind, config, vocabulary, parameter
/// names and shapes), then each parameter as row-major little-endian
/// binary64 values in header order.
inline constexpr std::string_view kCheckpointMagic = "MWETAG1\n";
inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  Model model;
  TrainConfig config;
};

std::string serialize_checkpoint(const Model& model, const TrainConfig& config);
void save_checkpoint(const Model& model, const TrainConfig& config, const std::filesystem::path& path);

/// Validates magic, version, kind and every blob size before building the
/// model. Throws FormatError naming the failure; nothing is returned on error.
Checkpoint parse_checkpoint(const std::string& bytes, std::optional<ModelKind> expected_kind = std::nullopt);
Checkpoint load_checkpoint(const std::filesystem::path& path, std::optional<ModelKind> expected_kind = std::nullopt);

}  // namespace mwetag
