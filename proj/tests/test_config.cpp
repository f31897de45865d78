#include <doctest.h>

#include "litpipe/config.hpp"
#include "litpipe/error.hpp"
#include "litpipe/text.hpp"
#include "test_util.hpp"

using namespace litpipe;

namespace {

EnvLookup fake_env(std::map<std::string, std::string> vars) {
    return [vars](const std::string& name) -> std::optional<std::string> {
        auto it = vars.find(name);
        if (it == vars.end()) return std::nullopt;
        return it->second;
    };
}

}  // namespace

TEST_CASE("sections prefix keys and comments are skipped") {
    auto c = RunConfig::parse("# top\nseed = 7\n[backend]\nbase_url = mock://x\n\n[judge]\nmodel_name=gpt\n");
    c.set_env(fake_env({}));
    CHECK(c.get("seed") == "7");
    CHECK(c.get("backend.base_url") == "mock://x");
    CHECK(c.get("judge.model_name") == "gpt");
    CHECK_FALSE(c.get("missing"));
    CHECK(c.get_u64("seed", 0) == 7);
    CHECK(c.get_u64("nope", kDefaultSeed) == kDefaultSeed);
    try {
        RunConfig::parse("a=1\nnot a pair\n");
        FAIL("expected LineError");
    } catch (const LineError& e) {
        CHECK(e.line() == 2);
    }
}

TEST_CASE("environment overrides the file") {
    CHECK(env_name_for_key("backend.base_url") == "LITPIPE_BACKEND_BASE_URL");
    auto c = RunConfig::parse("[backend]\nbase_url = mock://file\n");
    c.set_env(fake_env({{"LITPIPE_BACKEND_BASE_URL", "mock://env"}}));
    CHECK(c.get("backend.base_url") == "mock://env");
}

TEST_CASE("LITPIPE_CONFIG names the default file") {
    testutil::TempDir tmp;
    write_file(tmp.file("a.conf"), "seed=11\n");
    write_file(tmp.file("b.conf"), "seed=12\n");
    auto env = fake_env({{"LITPIPE_CONFIG", tmp.file("a.conf")}});
    auto from_env = RunConfig::resolve(std::nullopt, env);
    from_env.set_env(fake_env({}));
    CHECK(from_env.get("seed") == "11");
    auto explicit_path = RunConfig::resolve(tmp.file("b.conf"), env);
    explicit_path.set_env(fake_env({}));
    CHECK(explicit_path.get("seed") == "12");
    CHECK(RunConfig::resolve(std::nullopt, fake_env({})).file_values().empty());
    CHECK_THROWS_AS(RunConfig::load(tmp.file("missing.conf")), IoError);
}

TEST_CASE("backend sections fall back to [backend]") {
    auto c = RunConfig::parse("[backend]\nbase_url = mock://shared\nmax_retries = 5\n[judge]\nmodel_name = j\n");
    c.set_env(fake_env({}));
    auto judge = c.backend("judge");
    CHECK(judge.base_url == "mock://shared");
    CHECK(judge.model_name == "j");
    CHECK(judge.max_retries == 5);
    CHECK(c.backend().model_name != "j");
}
