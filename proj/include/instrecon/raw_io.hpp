#pragma once

// Raw little-endian arrays with JSON sidecar headers.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace instrecon::raw {

template <class T>
void write_array(const std::filesystem::path& path, const std::vector<T>& values);

template <class T>
std::vector<T> read_array(const std::filesystem::path& path, std::size_t expected_count);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

/// Appends `suffix` to the full filename (not replacing the extension).
std::filesystem::path with_suffix(const std::filesystem::path& stem, const std::string& suffix);

}  // namespace instrecon::raw
