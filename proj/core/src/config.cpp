#include "eyas/config.hpp"

#include <cstdlib>

#include "eyas/codec.hpp"
#include "eyas/error.hpp"
#include "eyas/json_io.hpp"

namespace eyas {

Config load_config(const std::filesystem::path& path) {
    const Bytes raw = read_file(path);
    const Json j = parse_json(std::string_view(reinterpret_cast<const char*>(raw.data()), raw.size()));
    Config config;
    merge_config(j, config);
    return config;
}

Config resolve_config(const std::optional<std::filesystem::path>& explicit_path) {
    if (explicit_path) return load_config(*explicit_path);
    if (const char* env = std::getenv("EYAS_CONFIG"); env != nullptr && *env != '\0') return load_config(env);
    return {};
}

}  // namespace eyas
