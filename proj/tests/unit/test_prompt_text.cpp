#include <gtest/gtest.h>

#include "stereo/dataset/fixture.hpp"
#include "stereo/prompt_text.hpp"
#include "test_support.hpp"

using namespace stereo;

TEST(PromptText, OptimizeBasicForms) {
    EXPECT_EQ(prompt_optimize("People who are thugs"), "The people who are thugs, (person, 1.5)");
    EXPECT_EQ(prompt_optimize("people with squinting eyes"), "The people who have squinting eyes, (person, 1.5)");
    EXPECT_EQ(prompt_optimize("with squinting eyes"), "The people who have squinting eyes, (person, 1.5)");
    EXPECT_EQ(prompt_optimize("cotton pickers"), "The people who are cotton pickers, (person, 1.5)");
    EXPECT_EQ(prompt_optimize("worship cows."), "The people who worship cows, (person, 1.5)");
    EXPECT_EQ(prompt_optimize("steal things!"), "The people who steal things, (person, 1.5)");
}

TEST(PromptText, SubgroupMentionsAreRemoved) {
    EXPECT_EQ(prompt_optimize("People who are African thugs"), "The people who are thugs, (person, 1.5)");
    EXPECT_EQ(prompt_optimize("Muslims"), "The people who are people, (person, 1.5)");
    EXPECT_EQ(strip_subgroup_mentions("Middle Eastern and middle-eastern Jewish men"), "and men");
    EXPECT_TRUE(mentions_subgroup("a Latina chef"));
    EXPECT_FALSE(mentions_subgroup("a Latinate word"));
    EXPECT_FALSE(mentions_subgroup("femaleness"));
}

TEST(PromptText, PeopleForm) {
    EXPECT_EQ(people_form("The people who are greedy for money, (person, 1.5)"), "people who are greedy for money");
    EXPECT_EQ(people_rest("People that hate rules"), "hate rules");
    EXPECT_EQ(prompt_optimize(make_pair("People who are housewives", resolve_subgroup("female"))),
              "The people who are housewives, (person, 1.5)");
}

TEST(PromptText, IdempotentAndLeakFreeOverFixture) {
    const auto store = make_fixture(bundled_fixture_manifest());
    ASSERT_FALSE(store.empty());
    for (const auto& sp : store.pairs()) {
        const auto once = prompt_optimize(sp.pair);
        EXPECT_EQ(prompt_optimize(once), once) << sp.pair.prompt;
        EXPECT_FALSE(mentions_subgroup(once)) << once;
        EXPECT_EQ(once.rfind("The people who ", 0), 0u);
    }
}

TEST(PromptText, IdempotentOnAdversarialInputs) {
    for (const char* p : {"", "   ", "Africans", "people who", "The people who are Asian, (person, 1.5)",
                          "people with", "Jewish bankers, (person, 1.5)", "are are", "is a cotton picker"}) {
        const auto once = prompt_optimize(p);
        EXPECT_EQ(prompt_optimize(once), once) << "input: '" << p << "'";
        EXPECT_FALSE(mentions_subgroup(once)) << once;
    }
}
