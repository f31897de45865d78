#include "litpipe/config.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>

#include "litpipe/text.hpp"

namespace litpipe {

std::optional<std::string> process_env(const std::string& name) {
    const char* v = std::getenv(name.c_str());
    if (!v) return std::nullopt;
    return std::string(v);
}

std::string env_name_for_key(const std::string& key) {
    std::string out = "LITPIPE_";
    for (unsigned char c : key) out.push_back(std::isalnum(c) ? static_cast<char>(std::toupper(c)) : '_');
    return out;
}

RunConfig RunConfig::parse(std::string_view text) {
    RunConfig cfg;
    std::string section;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        auto line = trim(text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) throw LineError(line_no, "malformed section header");
            section = std::string(trim(line.substr(1, line.size() - 2)));
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string_view::npos) throw LineError(line_no, "expected key=value");
        auto key = std::string(trim(line.substr(0, eq)));
        if (key.empty()) throw LineError(line_no, "empty key");
        if (!section.empty()) key = section + "." + key;
        cfg.values_[key] = std::string(trim(line.substr(eq + 1)));
    }
    return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
    try {
        return parse(read_file(path));
    } catch (const LineError& e) {
        throw IoError(path, e.what());
    }
}

RunConfig RunConfig::resolve(const std::optional<std::string>& path, EnvLookup env) {
    RunConfig cfg;
    if (path) {
        cfg = load(*path);
    } else if (auto p = env("LITPIPE_CONFIG"); p && !p->empty()) {
        cfg = load(*p);
    }
    cfg.env_ = std::move(env);
    return cfg;
}

std::optional<std::string> RunConfig::get(const std::string& key) const {
    if (env_) {
        if (auto v = env_(env_name_for_key(key))) return v;
    }
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

std::string RunConfig::get_or(const std::string& key, const std::string& fallback) const {
    return get(key).value_or(fallback);
}

std::uint64_t RunConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    std::uint64_t out = 0;
    auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc{} || p != v->data() + v->size()) {
        throw InvalidArgument("config " + key + " is not a non-negative integer: '" + *v + "'");
    }
    return out;
}

double RunConfig::get_double(const std::string& key, double fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    try {
        std::size_t used = 0;
        double d = std::stod(*v, &used);
        if (used == v->size()) return d;
    } catch (const std::exception&) {
    }
    throw InvalidArgument("config " + key + " is not a number: '" + *v + "'");
}

ChatBackendConfig RunConfig::backend(const std::string& section) const {
    auto lookup = [&](const std::string& name) -> std::optional<std::string> {
        if (auto v = get(section + "." + name)) return v;
        if (section != "backend") return get("backend." + name);
        return std::nullopt;
    };
    auto number = [&](const std::string& name, double fallback) {
        auto v = lookup(name);
        if (!v) return fallback;
        RunConfig tmp;
        tmp.env_ = nullptr;
        tmp.values_["v"] = *v;
        return tmp.get_double("v", fallback);
    };
    ChatBackendConfig c;
    if (auto v = lookup("base_url")) c.base_url = *v;
    if (auto v = lookup("model_name")) c.model_name = *v;
    if (auto v = lookup("api_key_env")) c.api_key_env = *v;
    c.timeout_seconds = number("timeout_seconds", c.timeout_seconds);
    c.max_retries = static_cast<int>(number("max_retries", c.max_retries));
    c.parallelism = static_cast<std::size_t>(number("parallelism", static_cast<double>(c.parallelism)));
    c.retry_base_delay = std::chrono::milliseconds(
        static_cast<long long>(number("retry_base_delay_ms", static_cast<double>(c.retry_base_delay.count()))));
    return c;
}

}  // namespace litpipe
