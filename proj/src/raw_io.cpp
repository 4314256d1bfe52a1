#include "instrecon/raw_io.hpp"

#include <bit>
#include <fstream>

#include "instrecon/common.hpp"

namespace instrecon::raw {

static_assert(std::endian::native == std::endian::little, "raw arrays are little-endian on disk");

template <class T>
void write_array(const std::filesystem::path& path, const std::vector<T>& values)
{
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(T)));
    if (!out) {
        throw Error(ErrorCode::Io, "io", path.string() + ": write failed");
    }
}

template <class T>
std::vector<T> read_array(const std::filesystem::path& path, std::size_t expected_count)
{
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) {
        throw Error(ErrorCode::Io, "io", path.string() + ": cannot open");
    }
    const auto bytes = static_cast<std::size_t>(in.tellg());
    if (bytes != expected_count * sizeof(T)) {
        throw Error(ErrorCode::ShapeMismatch, "io",
                    path.string() + ": expected " + std::to_string(expected_count * sizeof(T)) + " bytes, found " +
                        std::to_string(bytes));
    }
    std::vector<T> values(expected_count);
    in.seekg(0);
    in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(bytes));
    return values;
}

template void write_array<double>(const std::filesystem::path&, const std::vector<double>&);
template void write_array<float>(const std::filesystem::path&, const std::vector<float>&);
template void write_array<std::int32_t>(const std::filesystem::path&, const std::vector<std::int32_t>&);
template void write_array<std::uint8_t>(const std::filesystem::path&, const std::vector<std::uint8_t>&);
template std::vector<double> read_array<double>(const std::filesystem::path&, std::size_t);
template std::vector<float> read_array<float>(const std::filesystem::path&, std::size_t);
template std::vector<std::int32_t> read_array<std::int32_t>(const std::filesystem::path&, std::size_t);
template std::vector<std::uint8_t> read_array<std::uint8_t>(const std::filesystem::path&, std::size_t);

void write_json(const std::filesystem::path& path, const nlohmann::json& j)
{
    std::ofstream out(path);
    out << j.dump(2) << '\n';
    if (!out) {
        throw Error(ErrorCode::Io, "io", path.string() + ": write failed");
    }
}

nlohmann::json read_json(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::Io, "io", path.string() + ": cannot open");
    }
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Io, "io", path.string() + ": " + e.what());
    }
}

std::filesystem::path with_suffix(const std::filesystem::path& stem, const std::string& suffix)
{
    return std::filesystem::path(stem.string() + suffix);
}

}  // namespace instrecon::raw
