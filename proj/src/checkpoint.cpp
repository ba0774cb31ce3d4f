#include "mwetag/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "mwetag/errors.hpp"

namespace mwetag {
namespace {

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(const std::string& in, std::size_t offset) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[offset + static_cast<std::size_t>(i)])) << (8 * i);
  }
  return v;
}

}  // namespace

std::string serialize_checkpoint(const Model& model, const TrainConfig& config) {
  const auto named = named_parameters(model);
  const Vocabulary& vocab = vocabulary(model);

  nlohmann::json header;
  header["version"] = kCheckpointVersion;
  header["model_kind"] = std::string(to_string(kind_of(model)));
  header["config"] = to_json(config);
  header["vocabulary"] = {{"lowercase", vocab.lowercase()}, {"words", vocab.entries()}};
  nlohmann::json params = nlohmann::json::array();
  for (const auto& [name, t] : named) params.push_back({{"name", name}, {"rows", t.rows()}, {"cols", t.cols()}});
  header["parameters"] = params;
  const std::string text = header.dump();

  std::string out(kCheckpointMagic);
  put_u64(out, text.size());
  out += text;
  for (const auto& [name, t] : named) {
    const Matrix& m = t.value();
    for (Eigen::Index i = 0; i < m.size(); ++i) put_u64(out, std::bit_cast<std::uint64_t>(m.data()[i]));
  }
  return out;
}

void save_checkpoint(const Model& model, const TrainConfig& config, const std::filesystem::path& path) {
  const std::string bytes = serialize_checkpoint(model, config);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed for checkpoint " + path.string());
}

Checkpoint parse_checkpoint(const std::string& bytes, std::optional<ModelKind> expected_kind) {
  const std::size_t magic_len = kCheckpointMagic.size();
  if (bytes.size() < magic_len || bytes.compare(0, magic_len, kCheckpointMagic) != 0) {
    throw FormatError("checkpoint: bad magic (not an MWETAG1 file)");
  }
  if (bytes.size() < magic_len + 8) throw FormatError("checkpoint: truncated before header length");
  const std::uint64_t header_len = get_u64(bytes, magic_len);
  const std::size_t header_start = magic_len + 8;
  if (header_len > bytes.size() - header_start) throw FormatError("checkpoint: truncated header");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(header_start, header_len));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint: unreadable header: ") + e.what());
  }

  try {
    const int version = header.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw FormatError("checkpoint: unsupported version " + std::to_string(version));
    }
    const ModelKind kind = parse_model_kind(header.at("model_kind").get<std::string>());
    if (expected_kind && *expected_kind != kind) {
      throw FormatError("checkpoint: holds a " + std::string(to_string(kind)) + " model, expected " +
                        std::string(to_string(*expected_kind)));
    }
    TrainConfig config = apply_json(TrainConfig::defaults(kind), header.at("config"));
    if (config.model_kind != kind) throw FormatError("checkpoint: config model_kind disagrees with header");
    const auto& vj = header.at("vocabulary");
    Vocabulary vocab(vj.at("lowercase").get<bool>(), vj.at("words").get<std::vector<std::string>>());

    const auto& pj = header.at("parameters");
    std::size_t blob_bytes = 0;
    for (const auto& p : pj) {
      blob_bytes += static_cast<std::size_t>(p.at("rows").get<std::int64_t>() * p.at("cols").get<std::int64_t>()) * 8;
    }
    const std::size_t data_start = header_start + header_len;
    if (bytes.size() - data_start != blob_bytes) {
      throw FormatError("checkpoint: expected " + std::to_string(blob_bytes) + " bytes of parameters, found " +
                        std::to_string(bytes.size() - data_start));
    }

    Rng rng(0);
    Model model = init_model(std::move(vocab), config, rng);
    auto named = named_parameters(model);
    if (named.size() != pj.size()) {
      throw FormatError("checkpoint: " + std::to_string(pj.size()) + " parameter blobs for a model with " +
                        std::to_string(named.size()));
    }
    std::size_t offset = data_start;
    for (std::size_t i = 0; i < named.size(); ++i) {
      auto& [name, t] = named[i];
      const auto& entry = pj[i];
      if (entry.at("name").get<std::string>() != name || entry.at("rows").get<Eigen::Index>() != t.rows() ||
          entry.at("cols").get<Eigen::Index>() != t.cols()) {
        throw FormatError("checkpoint: parameter " + std::to_string(i) + " ('" +
                          entry.at("name").get<std::string>() + "') does not match model parameter '" + name +
                          "' " + t.shape_string());
      }
      Matrix& m = t.value_mut();
      for (Eigen::Index k = 0; k < m.size(); ++k, offset += 8) {
        m.data()[k] = std::bit_cast<double>(get_u64(bytes, offset));
      }
      if (!m.allFinite()) throw FormatError("checkpoint: parameter '" + name + "' holds non-finite values");
    }
    return {std::move(model), std::move(config)};
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint: malformed header: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("checkpoint: invalid header: ") + e.what());
  }
}

Checkpoint load_checkpoint(const std::filesystem::path& path, std::optional<ModelKind> expected_kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_checkpoint(buf.str(), expected_kind);
}

}  // namespace mwetag
