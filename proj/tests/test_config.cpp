#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <driftless/config.hpp>
#include <driftless/presets.hpp>

using namespace driftless;
using Catch::Matchers::ContainsSubstring;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

nlohmann::json preset_json(const std::string& name) {
    return nlohmann::json::parse(config::dump(presets::by_name(name)));
}

} // namespace

TEST_CASE("dump and parse round-trip every preset") {
    for (const auto& name : presets::names()) {
        const auto cfg = presets::by_name(name);
        const auto text = config::dump(cfg);
        const auto reparsed = config::parse(text);
        REQUIRE(config::dump(reparsed) == text);
    }
}

TEST_CASE("shipped preset files match the embedded presets") {
    for (const auto& name : presets::names())
        REQUIRE(read_file("configs/" + name + ".json") == config::dump(presets::by_name(name)));
}

TEST_CASE("weights that do not sum to one are rejected by name") {
    auto j = preset_json("dap-compare");
    j["weights"] = {0.9};
    REQUIRE_THROWS_WITH(config::from_json(j), ContainsSubstring("weights"));
}

TEST_CASE("unknown keys are rejected by full path") {
    auto j = preset_json("dap-compare");
    j["penalty"]["buffre"] = 16;
    REQUIRE_THROWS_WITH(config::from_json(j), ContainsSubstring("penalty.buffre"));

    j = preset_json("dap-compare");
    j["frobnicate"] = true;
    REQUIRE_THROWS_WITH(config::from_json(j), ContainsSubstring("frobnicate"));
}

TEST_CASE("missing keys are reported by full path") {
    auto j = preset_json("dap-compare");
    j["penalty"].erase("max_len");
    REQUIRE_THROWS_WITH(config::from_json(j), ContainsSubstring("penalty.max_len"));

    j = preset_json("dap-compare");
    j["envs"][0]["service"].erase("mean");
    REQUIRE_THROWS_WITH(config::from_json(j), ContainsSubstring("envs[0].service.mean"));
}

TEST_CASE("type errors are reported by full path") {
    auto j = preset_json("dap-compare");
    j["penalty"]["max_len"] = "long";
    REQUIRE_THROWS_WITH(config::from_json(j), ContainsSubstring("penalty.max_len"));

    j = preset_json("dap-compare");
    j["pipeline"]["adaptive"] = 1;
    REQUIRE_THROWS_WITH(config::from_json(j), ContainsSubstring("pipeline.adaptive"));

    j = preset_json("dap-compare");
    j["pipeline"]["actor_slots"] = -2;
    REQUIRE_THROWS_WITH(config::from_json(j), ContainsSubstring("pipeline.actor_slots"));
}

TEST_CASE("enum fields list their accepted values") {
    auto j = preset_json("dap-compare");
    j["penalty"]["mode"] = "off";
    REQUIRE_THROWS_WITH(config::from_json(j),
                        ContainsSubstring("penalty.mode") && ContainsSubstring("lp"));

    j = preset_json("dap-compare");
    j["pipeline"]["advantage_norm"] = "zscore";
    REQUIRE_THROWS_WITH(config::from_json(j), ContainsSubstring("pipeline.advantage_norm"));

    j = preset_json("dap-compare");
    j["envs"][0]["reward_kind"] = "exactish";
    REQUIRE_THROWS_WITH(config::from_json(j), ContainsSubstring("envs[0].reward_kind"));

    j = preset_json("dap-compare");
    j["envs"][0]["prompt_classes"][0]["difficulty"] = "medium";
    REQUIRE_THROWS_WITH(config::from_json(j),
                        ContainsSubstring("envs[0].prompt_classes.difficulty"));
}

TEST_CASE("malformed JSON is reported as such") {
    REQUIRE_THROWS_WITH(config::parse("{ not json"), ContainsSubstring("not valid JSON"));
    REQUIRE_THROWS_WITH(config::load_file("configs/does-not-exist.json"),
                        ContainsSubstring("cannot open"));
}

TEST_CASE("the env domain id is its array position") {
    const auto cfg = presets::paper_launch();
    for (std::size_t d = 0; d < cfg.pipeline.envs.size(); ++d)
        REQUIRE(cfg.pipeline.envs[d].domain == d);
}

TEST_CASE("every preset validates and names five or fewer domains") {
    for (const auto& name : presets::names()) {
        const auto cfg = presets::by_name(name);
        REQUIRE_NOTHROW(cfg.validate());
        REQUIRE_FALSE(cfg.seeds.empty());
    }
    REQUIRE_THROWS_WITH(presets::by_name("nope"), ContainsSubstring("paper-launch"));
}

TEST_CASE("save_file then load_file preserves the config") {
    const auto cfg = presets::mixture_demo();
    const auto path =
        (std::filesystem::temp_directory_path() / "driftless_config_roundtrip.json").string();
    config::save_file(cfg, path);
    const auto loaded = config::load_file(path);
    REQUIRE(config::dump(loaded) == config::dump(cfg));
}
