#include <cstdlib>

#include "doctest.h"
#include "social/prompt.hpp"
#include "test_support.hpp"

using namespace social;
using namespace social::dialogue;

TEST_SUITE("prompt") {

TEST_CASE("golden prompts") {
    const bool update = std::getenv("UPDATE_GOLDEN") != nullptr;
    for (const auto& [name, ctx] : testing::golden_prompt_contexts()) {
        const auto text = build_prompt(ctx, PersonaConfig::defaults()).render();
        const auto path = testing::golden_prompt_path(name);
        if (update) testing::write_file(path, text);
        CAPTURE(name);
        REQUIRE(std::filesystem::exists(path));
        CHECK(testing::slurp(path) == text);
        // the shipped persona files are the defaults
        CHECK(build_prompt(ctx, testing::scripted_config().persona).render() == text);
    }
}

TEST_CASE("empty sections render (none)") {
    TurnContext ctx;
    ctx.user_text = "hi";
    const auto b = build_prompt(ctx, PersonaConfig::defaults());
    REQUIRE(b.messages.size() == 3);
    const auto& instr = b.messages[1].content;
    for (const char* section : {"## Knowledge\n(none)", "## Long-term memories with this user\n(none)",
                                "## Tools\n(none)"}) {
        CHECK(instr.find(section) != std::string::npos);
    }
    CHECK(instr.find("User ID: unknown\nDetected user emotion: unknown") != std::string::npos);
    CHECK(b.messages[0].content.rfind("You are Nadine, ", 0) == 0);
    CHECK(b.messages.back().role == llm::Role::user);
    CHECK(b.messages.back().content == "hi");
}

TEST_CASE("history window") {
    TurnContext ctx;
    ctx.user_text = "now";
    for (int i = 0; i < 25; ++i)
        ctx.chat_history.push_back(llm::make_message(i % 2 ? llm::Role::assistant : llm::Role::user, "m" + std::to_string(i),
                                                     from_epoch_seconds(i + 1)));
    auto persona = PersonaConfig::defaults();
    const auto b = build_prompt(ctx, persona);
    REQUIRE(b.messages.size() == 2 + 20 + 1);
    CHECK(b.messages[2].content == "m5");
    CHECK(b.messages[21].content == "m24");
    CHECK(b.messages[2].timestamp == Timestamp{});
    persona.history_window = 3;
    CHECK(build_prompt(ctx, persona).messages.size() == 6);
}

TEST_CASE("template filling") {
    CHECK(fill_template("{{a}}-{{b}}-{{c}}", {{"a", "1"}, {"b", "{{a}}"}}) == "1-{{a}}-{{c}}");
    CHECK(fill_template("{{", {}) == "{{");
    perception::Point3 p{1, 2.345, -3};
    UserData d;
    d.user_id = "u";
    d.location = p;
    d.detected_emotion = perception::DetectedEmotion{affect::EmotionCategory::fear, 0.333, {}};
    CHECK(render_user_data(d) ==
          "User ID: u\nDetected user emotion: fear (confidence 0.33)\nUser location: (1.00, 2.35, -3.00) m");
}

TEST_CASE("determinism") {
    for (const auto& [name, ctx] : testing::golden_prompt_contexts()) {
        CHECK(build_prompt(ctx, PersonaConfig::defaults()).render() == build_prompt(ctx, PersonaConfig::defaults()).render());
    }
}

}
