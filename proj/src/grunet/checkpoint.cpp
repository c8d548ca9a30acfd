#include "spoofdet/grunet/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "spoofdet/binio.hpp"
#include "spoofdet/errors.hpp"

namespace spoofdet::grunet {

using nlohmann::json;

void save_checkpoint(const std::filesystem::path& path, const GruModel& model, const json& extra) {
  json header = extra;
  header["format"] = "spoofdet-gru";
  header["format_version"] = kCheckpointVersion;
  const GruShape& s = model.shape();
  header["shape"] = {{"input", s.input}, {"hidden", s.hidden}, {"layers", s.layers}, {"head", s.head}};
  header["dropout"] = model.dropout;
  header["normalization"] = norm_stats_to_json(model.norm);
  json blocks = json::array();
  for (const ParamBlock& b : model.blocks()) {
    blocks.push_back({{"name", b.name}, {"rows", b.rows}, {"cols", b.cols}});
  }
  blocks.push_back({{"name", "norm.mean"}, {"rows", 1}, {"cols", kFeatureCount}});
  blocks.push_back({{"name", "norm.std"}, {"rows", 1}, {"cols", kFeatureCount}});
  header["blocks"] = std::move(blocks);
  header["dtype"] = "float64-le";

  const std::string text = header.dump();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint " + path.string());
  out.write(kCheckpointMagic, sizeof kCheckpointMagic);
  binio::put_u64(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  binio::put_f64s(out, model.params());
  binio::put_f64s(out, model.norm.mean);
  binio::put_f64s(out, model.norm.stddev);
  if (!out) throw DataError("failed writing checkpoint " + path.string());
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kCheckpointMagic, 8) != 0) {
    throw DataError(path.string() + " is not a spoofdet checkpoint");
  }
  const std::uint64_t len = binio::get_u64(in);
  if (len > (1u << 26)) throw DataError("checkpoint header too large");
  std::string text(len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(len))) throw DataError("truncated checkpoint header");

  LoadedCheckpoint out;
  try {
    out.header = json::parse(text);
    if (out.header.at("format_version").get<int>() != kCheckpointVersion) {
      throw DataError("unsupported checkpoint version");
    }
    const auto& sh = out.header.at("shape");
    GruShape shape{sh.at("input").get<std::size_t>(), sh.at("hidden").get<std::size_t>(),
                   sh.at("layers").get<std::size_t>(), sh.at("head").get<std::size_t>()};
    out.model = GruModel(shape);
    out.model.dropout = out.header.at("dropout").get<double>();
    // Block table must match the layout implied by the shape.
    const auto& blocks = out.header.at("blocks");
    if (blocks.size() != out.model.blocks().size() + 2) throw DataError("checkpoint block table mismatch");
    for (std::size_t i = 0; i < out.model.blocks().size(); ++i) {
      const ParamBlock& b = out.model.blocks()[i];
      if (blocks[i].at("name") != b.name || blocks[i].at("rows").get<std::size_t>() != b.rows ||
          blocks[i].at("cols").get<std::size_t>() != b.cols) {
        throw DataError("checkpoint block " + b.name + " does not match its shape");
      }
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("bad checkpoint header: ") + e.what());
  }
  binio::get_f64s(in, out.model.params());
  binio::get_f64s(in, out.model.norm.mean);
  binio::get_f64s(in, out.model.norm.stddev);
  return out;
}

}  // namespace spoofdet::grunet
