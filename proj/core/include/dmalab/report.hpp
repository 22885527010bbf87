#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "dmalab/geometry.hpp"

namespace dmalab {

nlohmann::json vec_to_json(const Vec& v);
Vec vec_from_json(const nlohmann::json& j);
nlohmann::json frame_to_json(const LocalFrame& frame);
nlohmann::json to_json(const AEtaCertificate& cert);
nlohmann::json to_json(const SphereCertificate& cert);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);
/// Sixteen lower-case hex digits.
std::string hex64(std::uint64_t value);

/// Writes to a temporary sibling and renames it over `path`. Throws IoError.
void write_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

/// Space-separated table with a header line; values printed with 17 digits.
std::string format_table(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows);
/// Parses the format written by format_table.
std::vector<std::vector<double>> parse_table(const std::string& text, std::vector<std::string>* header = nullptr);

}  // namespace dmalab
