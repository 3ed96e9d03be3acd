#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "aesam/adcore/tensor.hpp"
#include "aesam/errors.hpp"

namespace aesam {

// <stem>.bin holds every parameter value as little-endian f64, tensors back to
// back; <stem>.json lists the shapes in the same order.

namespace ckpt_detail {

inline std::uint64_t to_le(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r = (r << 8) | ((v >> (8 * i)) & 0xffu);
    return r;
  }
  return v;
}

inline std::filesystem::path with_ext(std::filesystem::path p, const char* ext) { return p.replace_extension(ext); }

} // namespace ckpt_detail

inline void save_checkpoint(const ParamSet& w, const std::filesystem::path& stem) {
  nlohmann::ordered_json manifest;
  manifest["format"] = "f64-le";
  manifest["shapes"] = nlohmann::ordered_json::array();
  std::size_t total = 0;
  for (const auto& t : w) {
    manifest["shapes"].push_back(t.shape());
    total += t.size();
  }
  manifest["count"] = total;

  std::ofstream bin(ckpt_detail::with_ext(stem, ".bin"), std::ios::binary | std::ios::trunc);
  for (const auto& t : w)
    for (double v : t.values()) {
      const auto bits = ckpt_detail::to_le(std::bit_cast<std::uint64_t>(v));
      bin.write(reinterpret_cast<const char*>(&bits), sizeof bits);
    }
  bin.close();
  if (!bin) throw std::runtime_error("checkpoint: cannot write " + ckpt_detail::with_ext(stem, ".bin").string());

  std::ofstream js(ckpt_detail::with_ext(stem, ".json"), std::ios::trunc);
  js << manifest.dump(2) << '\n';
  js.close();
  if (!js) throw std::runtime_error("checkpoint: cannot write " + ckpt_detail::with_ext(stem, ".json").string());
}

/// `stem` may name the .bin, the .json or neither.
inline ParamSet load_checkpoint(const std::filesystem::path& stem) {
  const auto json_path = ckpt_detail::with_ext(stem, ".json");
  const auto bin_path = ckpt_detail::with_ext(stem, ".bin");
  std::ifstream js(json_path);
  if (!js) throw ConfigError("checkpoint: cannot open " + json_path.string());
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(js);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("checkpoint: bad manifest " + json_path.string() + ": " + e.what());
  }
  if (manifest.value("format", "") != "f64-le") throw ConfigError("checkpoint: unsupported format");

  std::ifstream bin(bin_path, std::ios::binary);
  if (!bin) throw ConfigError("checkpoint: cannot open " + bin_path.string());
  ParamSet w;
  for (const auto& s : manifest.at("shapes")) {
    Tensor t(s.get<std::vector<std::size_t>>());
    for (double& v : t.data()) {
      std::uint64_t bits = 0;
      if (!bin.read(reinterpret_cast<char*>(&bits), sizeof bits))
        throw ConfigError("checkpoint: " + bin_path.string() + " shorter than manifest");
      v = std::bit_cast<double>(ckpt_detail::to_le(bits));
    }
    w.push_back(std::move(t));
  }
  if (bin.peek() != std::char_traits<char>::eof())
    throw ConfigError("checkpoint: " + bin_path.string() + " longer than manifest");
  return w;
}

} // namespace aesam
