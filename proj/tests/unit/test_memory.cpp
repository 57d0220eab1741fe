#include <pwab/memory.hpp>

#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "support.hpp"

using namespace pwab;
using namespace pwab::memory;

namespace {

struct BankFixture {
    corpus::DatasetBundle bundle = corpus::generate_fixture(7, 10, 50);
    retrieval::HashedTfEmbedder embedder;
    MemoryBank bank(std::size_t user = 0) const {
        return build_memory_bank(bundle.users[user], bundle.catalog, embedder);
    }
};

std::set<std::string> field_names(const FeatureRecord& r) {
    std::set<std::string> out;
    for (const auto& f : r.fields) out.insert(f.first);
    return out;
}

}  // namespace

TEST(MemoryBank, OneEntryPerHistoryBehavior) {
    BankFixture f;
    for (std::size_t u = 0; u < f.bundle.users.size(); ++u) {
        const auto bank = f.bank(u);
        EXPECT_EQ(bank.entries.size(), f.bundle.users[u].history.size());
        EXPECT_EQ(bank.embeddings.size(), bank.entries.size());
    }
}

TEST(MemoryBank, EightBehaviorsGiveEightEntries) {
    BankFixture f;
    auto user = f.bundle.users[0];
    user.history.resize(8);
    EXPECT_EQ(build_memory_bank(user, f.bundle.catalog, f.embedder).entries.size(), 8u);
}

TEST(MemoryBank, EmptyHistoryIsLegal) {
    BankFixture f;
    auto user = f.bundle.users[0];
    user.history.clear();
    const auto bank = build_memory_bank(user, f.bundle.catalog, f.embedder);
    EXPECT_TRUE(bank.entries.empty());
    const auto tm = retrieve_task_memory(bank, "anything", corpus::TaskKind::search, {}, f.embedder);
    EXPECT_TRUE(tm.entries.empty());
    EXPECT_EQ(tm.serialize(), "");
}

TEST(MemoryBank, RebuildIsIdentical) {
    BankFixture f;
    EXPECT_EQ(f.bank(2), f.bank(2));
}

TEST(MemoryBank, DanglingProductThrows) {
    BankFixture f;
    auto user = f.bundle.users[0];
    user.history[0].product_id = "B0MISSING";
    EXPECT_THROW(build_memory_bank(user, f.bundle.catalog, f.embedder), ValidationError);
}

TEST(ExtractFeatures, PerKindFieldSets) {
    BankFixture f;
    const auto bank = f.bank();
    const auto& e = bank.entries.front();
    EXPECT_EQ(field_names(extract_features(e, corpus::TaskKind::recommendation)),
              (std::set<std::string>{"title", "category", "parent_asin"}));
    EXPECT_EQ(field_names(extract_features(e, corpus::TaskKind::review)),
              (std::set<std::string>{"rating", "review_text"}));
    const auto search = extract_features(e, corpus::TaskKind::search);
    EXPECT_EQ(field_names(search), (std::set<std::string>{"title", "category", "price", "store"}));
    EXPECT_TRUE(search.has("price"));
    EXPECT_FALSE(search.has("rating"));
}

TEST(ExtractFeatures, IsIdempotent) {
    BankFixture f;
    const auto bank = f.bank();
    for (const auto& e : bank.entries) {
        for (auto kind : corpus::kAllTaskKinds) {
            const auto once = extract_features(e, kind);
            EXPECT_EQ(extract_features(once, kind), once);
        }
    }
}

TEST(RetrieveTaskMemory, LargeKReturnsAllSortedBySimilarity) {
    BankFixture f;
    const auto bank = f.bank();
    const auto tm = retrieve_task_memory(bank, f.bundle.instructions[0].text, corpus::TaskKind::search,
                                         {1000, 100000}, f.embedder);
    ASSERT_EQ(tm.entries.size(), bank.entries.size());
    for (std::size_t i = 1; i < tm.entries.size(); ++i) {
        EXPECT_GE(tm.entries[i - 1].similarity, tm.entries[i].similarity);
    }
}

TEST(RetrieveTaskMemory, SerializedEntryTextRanksFirst) {
    BankFixture f;
    const auto bank = f.bank(3);
    for (std::size_t i = 0; i < bank.entries.size(); ++i) {
        const auto text = serialize_entry(bank.entries[i]);
        const auto tm = retrieve_task_memory(bank, text, corpus::TaskKind::recommendation, {1, 768}, f.embedder);
        ASSERT_EQ(tm.entries.size(), 1u);
        EXPECT_NEAR(tm.entries[0].similarity, 1.0, 1e-12);
        // Identical entries may share the maximum; the chosen one must be a maximum.
        EXPECT_EQ(serialize_entry(bank.entries[tm.entries[0].bank_index]), text);
    }
}

TEST(RetrieveTaskMemory, TiesPreferNewerEntries) {
    BankFixture f;
    auto user = f.bundle.users[0];
    // Same product bought twice: identical text apart from the timestamp.
    user.history = {user.history[0], user.history[0]};
    user.history[1].timestamp += 10;
    const auto bank = build_memory_bank(user, f.bundle.catalog, f.embedder);
    const auto tm = retrieve_task_memory(bank, "anything at all", corpus::TaskKind::search, {2, 768}, f.embedder);
    ASSERT_EQ(tm.entries.size(), 2u);
    EXPECT_EQ(tm.entries[0].bank_index, 1u);
}

TEST(RetrieveTaskMemory, BudgetKeepsWholeEntriesOnly) {
    BankFixture f;
    const auto bank = f.bank();
    for (std::size_t budget : {1u, 5u, 17u, 40u, 256u}) {
        const auto tm = retrieve_task_memory(bank, "kitchen", corpus::TaskKind::search, {50, budget}, f.embedder);
        EXPECT_LE(tm.token_count(), budget);
        const auto full = retrieve_task_memory(bank, "kitchen", corpus::TaskKind::search, {50, 100000}, f.embedder);
        // A prefix of the unbudgeted selection, whole records only.
        ASSERT_LE(tm.entries.size(), full.entries.size());
        for (std::size_t i = 0; i < tm.entries.size(); ++i) {
            EXPECT_EQ(tm.entries[i].features, full.entries[i].features);
        }
        if (tm.entries.size() < full.entries.size()) {
            const auto next = count_tokens(serialize_features(full.entries[tm.entries.size()].features));
            EXPECT_GT(tm.token_count() + next, budget);
        }
    }
}

TEST(RetrieveTaskMemory, InvalidConfigThrows) {
    BankFixture f;
    EXPECT_THROW(retrieve_task_memory(f.bank(), "x", corpus::TaskKind::search, {0, 768}, f.embedder), InvalidArgument);
    EXPECT_THROW(retrieve_task_memory(f.bank(), "x", corpus::TaskKind::search, {5, 0}, f.embedder), InvalidArgument);
}

TEST(RetrieveTaskMemory, SerializesOneLabeledLinePerEntry) {
    BankFixture f;
    const auto tm = retrieve_task_memory(f.bank(), "gift", corpus::TaskKind::recommendation, {3, 768}, f.embedder);
    const auto text = tm.serialize();
    EXPECT_EQ(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')) + 1, tm.entries.size());
    EXPECT_NE(text.find("parent_asin: "), std::string::npos);
}

TEST(CountTokens, WhitespacePieces) {
    EXPECT_EQ(count_tokens(""), 0u);
    EXPECT_EQ(count_tokens("  a  b\tc\nd "), 4u);
    EXPECT_EQ(count_tokens("title: x | price: $1.00"), 5u);
}

TEST(BaselineMemory, NoneIsEmpty) {
    BankFixture f;
    EXPECT_TRUE(select_baseline_memory(f.bank(), Strategy::none, 5, 1).empty());
}

TEST(BaselineMemory, LastIsNewestFirst) {
    BankFixture f;
    auto user = f.bundle.users[0];
    user.history.resize(5);
    const auto bank = build_memory_bank(user, f.bundle.catalog, f.embedder);
    EXPECT_EQ(select_baseline_memory(bank, Strategy::last, 2, 0), (std::vector<std::size_t>{4, 3}));
    EXPECT_EQ(select_baseline_memory(bank, Strategy::last, 99, 0).size(), 5u);
}

TEST(BaselineMemory, RandomIsSeededWithoutReplacement) {
    BankFixture f;
    const auto bank = f.bank();
    const auto a = select_baseline_memory(bank, Strategy::random, 4, 42);
    EXPECT_EQ(a, select_baseline_memory(bank, Strategy::random, 4, 42));
    EXPECT_EQ(std::set<std::size_t>(a.begin(), a.end()).size(), 4u);
    const auto all = select_baseline_memory(bank, Strategy::random, 100, 42);
    EXPECT_EQ(std::set<std::size_t>(all.begin(), all.end()).size(), bank.entries.size());
}

TEST(BaselineMemory, RelevantMatchesSimilarityOrder) {
    BankFixture f;
    const auto bank = f.bank();
    const auto q = f.embedder.embed(f.bundle.instructions[1].text);
    const auto picked = select_baseline_memory(bank, Strategy::relevant, 3, 0, q);
    const auto order = rank_by_similarity(bank, q);
    EXPECT_EQ(picked, std::vector<std::size_t>(order.begin(), order.begin() + 3));
    EXPECT_THROW(select_baseline_memory(bank, Strategy::relevant, 3, 0), InvalidArgument);
}

TEST(Strategy, ParseRoundTrip) {
    for (auto s : {Strategy::none, Strategy::random, Strategy::last, Strategy::relevant, Strategy::puma}) {
        EXPECT_EQ(parse_strategy(to_string(s)), s);
    }
    EXPECT_THROW(parse_strategy("everything"), InvalidArgument);
}
