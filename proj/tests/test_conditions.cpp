#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>
#include <vector>

#include "dofair/conditions.hpp"
#include "dofair/util.hpp"
#include "helpers.hpp"

using namespace dofair;
using testutil::record_with;

namespace {

const std::vector<std::string> kAllCodes = {
    "baseline",         "baseline+cot", "baseline+fai_vk", "baseline+fai_rk",
    "bansal",           "bansal+cot",   "bansal+fai_vk",   "bansal+fai_rk",
    "bianchi",          "bianchi+cot",  "bianchi+fai_vk",  "bianchi+fai_rk"};

DofairRecord golden_record(Dim dim) {
    auto record = record_with(dim, "the Signing of the Declaration of Independence", "delegates",
                              {dim == Dim::Race ? "White" : "Male"},
                              {dim == Dim::Race ? "White" : "Male"});
    return record;
}

std::string golden_knowledge(Dim dim, Augmentation augmentation) {
    if (augmentation == Augmentation::FaiVk) {
        return dim == Dim::Race
                   ? "Depict 7 White male delegates to reflect the factual racial distribution."
                   : "Depict the delegates as entirely male to reflect the factual gender "
                     "distribution.";
    }
    return dim == Dim::Race
               ? "Depict the delegates as White individuals to reflect the factual racial "
                 "distribution found in the supporting documents."
               : "Depict the delegates as male individuals to reflect the factual gender "
                 "distribution found in the supporting documents.";
}

}  // namespace

TEST_CASE("condition codes parse and print as inverses") {
    for (const auto& code : kAllCodes) {
        CAPTURE(code);
        CHECK(condition_code(parse_condition(code)) == code);
    }
    CHECK(parse_condition("bansal").base == ConditionBase::DivBansal);
    CHECK(parse_condition("bianchi+fai_rk").augmentation == Augmentation::FaiRk);
}

TEST_CASE("unknown codes are rejected") {
    CHECK_THROWS_AS(parse_condition("divfair"), Error);
    CHECK_THROWS_AS(parse_condition("bansal+rag"), Error);
    CHECK_THROWS_AS(parse_condition(""), Error);
}

TEST_CASE("augmenting the plain prompt needs the ablation override") {
    auto condition = parse_condition("baseline+cot");
    CHECK_THROWS_AS(validate_condition(condition), Error);
    CHECK_NOTHROW(validate_condition(condition, true));
    CHECK_NOTHROW(validate_condition(parse_condition("bansal+cot")));
    CHECK_NOTHROW(validate_condition(parse_condition("baseline")));
}

TEST_CASE("fai prompts demand knowledge text") {
    auto record = golden_record(Dim::Race);
    CHECK_THROWS_AS(render_prompt(record, parse_condition("bansal+fai_vk")), Error);
    try {
        render_prompt(record, parse_condition("bansal+fai_rk"), std::string{});
        FAIL("empty knowledge accepted");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::MissingKnowledge);
    }
}

TEST_CASE("rendered prompts byte-match the golden files for every combination") {
    RenderOptions ablation;
    ablation.allow_baseline_augmentation = true;
    for (Dim dim : {Dim::Race, Dim::Gender}) {
        auto record = golden_record(dim);
        for (const auto& code : kAllCodes) {
            CAPTURE(code);
            CAPTURE(dim_name(dim));
            auto condition = parse_condition(code);
            std::optional<std::string> knowledge;
            if (condition.requires_knowledge())
                knowledge = golden_knowledge(dim, condition.augmentation);
            auto prompt = render_prompt(record, condition, knowledge, std::nullopt, ablation);
            auto golden_path = testutil::template_dir() / "golden" /
                               std::string(dim_name(dim)) / (code + ".txt");
            REQUIRE(std::filesystem::exists(golden_path));
            CHECK(prompt.text == read_file(golden_path));
        }
    }
}

TEST_CASE("knowledge provenance is recorded on fai prompts") {
    auto record = golden_record(Dim::Race);
    auto vk = render_prompt(record, parse_condition("bianchi+fai_vk"),
                            golden_knowledge(Dim::Race, Augmentation::FaiVk));
    REQUIRE(vk.provenance.has_value());
    CHECK(vk.provenance->kind == KnowledgeKind::Verbalized);
    CHECK(vk.provenance->doc_ids.empty());

    KnowledgeProvenance retrieved{KnowledgeKind::Retrieved,
                                  {"https://en.wikipedia.org/wiki/Example"}};
    auto rk = render_prompt(record, parse_condition("bianchi+fai_rk"),
                            golden_knowledge(Dim::Race, Augmentation::FaiRk), retrieved);
    REQUIRE(rk.provenance.has_value());
    CHECK(rk.provenance->kind == KnowledgeKind::Retrieved);
    CHECK(rk.provenance->doc_ids.size() == 1);

    auto plain = render_prompt(record, parse_condition("bianchi"));
    CHECK_FALSE(plain.provenance.has_value());
    CHECK(plain.record_id == record.record_id());
}

TEST_CASE("slot filling reaches every placeholder") {
    auto record = record_with(Dim::Race, "the Klondike Gold Rush", "prospectors", {"White"},
                              {"White"});
    auto baseline = render_prompt(record, parse_condition("baseline"));
    CHECK(baseline.text.find("prospectors") != std::string::npos);
    CHECK(baseline.text.find("the Klondike Gold Rush") != std::string::npos);
    CHECK(baseline.text.find('{') == std::string::npos);

    auto bansal = render_prompt(record, parse_condition("bansal"));
    CHECK(bansal.text.find('{') == std::string::npos);
    CHECK(bansal.text.find("irrespective of their skin color or races") != std::string::npos);
}

TEST_CASE("template files under templates/ equal the compiled-in texts") {
    auto dir = testutil::template_dir();
    CHECK(read_file(dir / "generation_baseline.txt") ==
          templates::generation_base(ConditionBase::Baseline, Dim::Race));
    CHECK(read_file(dir / "cot_suffix.txt") == templates::cot_suffix());
    for (Dim dim : {Dim::Race, Dim::Gender}) {
        std::string suffix = std::string(dim_name(dim)) + ".txt";
        CHECK(read_file(dir / ("bansal_" + suffix)) ==
              templates::generation_base(ConditionBase::DivBansal, dim));
        CHECK(read_file(dir / ("bianchi_" + suffix)) ==
              templates::generation_base(ConditionBase::DivBianchi, dim));
        CHECK(read_file(dir / ("fai_vk_" + suffix)) == templates::fai_vk_prompt(dim));
        CHECK(read_file(dir / ("fai_rk_" + suffix)) == templates::fai_rk_prompt(dim));
    }
    CHECK(templates::template_file_name("bansal", Dim::Race) == "bansal_race.txt");
    CHECK(templates::template_file_name("baseline", Dim::Gender) == "generation_baseline.txt");
    CHECK(templates::template_file_name("cot", Dim::Race) == "cot_suffix.txt");
}
