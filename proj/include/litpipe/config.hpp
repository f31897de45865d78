#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "litpipe/chat_backend.hpp"

namespace litpipe {

// Seed used by every randomized subcommand when neither the config file nor
// a flag sets one.
inline constexpr std::uint64_t kDefaultSeed = 20230601;

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
std::optional<std::string> process_env(const std::string& name);

// key=value settings. Keys carry section prefixes ("backend.base_url");
// a "[section]" line prefixes the keys below it. '#' starts a comment line.
// Lookups consult the environment first: key backend.base_url is
// overridden by LITPIPE_BACKEND_BASE_URL.
class RunConfig {
public:
    RunConfig() = default;
    static RunConfig parse(std::string_view text);
    static RunConfig load(const std::string& path);
    // Explicit path, else $LITPIPE_CONFIG, else empty.
    static RunConfig resolve(const std::optional<std::string>& path, EnvLookup env = process_env);

    void set_env(EnvLookup env) { env_ = std::move(env); }
    void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

    std::optional<std::string> get(const std::string& key) const;
    std::string get_or(const std::string& key, const std::string& fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    double get_double(const std::string& key, double fallback) const;

    const std::map<std::string, std::string>& file_values() const { return values_; }

    // Settings under section (base_url, model_name, api_key_env,
    // timeout_seconds, max_retries, parallelism, retry_base_delay_ms),
    // falling back to the "backend" section, then built-in defaults.
    ChatBackendConfig backend(const std::string& section = "backend") const;

private:
    std::map<std::string, std::string> values_;
    EnvLookup env_ = process_env;
};

// LITPIPE_ + key upper-cased with every non-alphanumeric byte as '_'.
std::string env_name_for_key(const std::string& key);

}  // namespace litpipe
