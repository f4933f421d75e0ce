#include <gtest/gtest.h>

#include <random>

#include "ermodes/clausespace.hpp"
#include "support/clause_oracle.hpp"
#include "support/fixtures.hpp"
#include "support/random_diagram.hpp"

using namespace ermodes;
using namespace ermodes::testing;

namespace {

WalkConfig config(Strategy s, int depth = 4) {
    WalkConfig cfg;
    cfg.strategy = s;
    cfg.max_depth = depth;
    return cfg;
}

ModeSet worked_example() { return gmc(load_fixture("university"), config(Strategy::shortest)); }

Term var(int id, const char* type) { return Term::variable(id, type); }

// Tenure(p) ∧ Advises(p,s) ∧ Takes(s,c,#grade); head variable 0 is p.
ClauseBody clause_one() {
    return {{"advises", {var(0, "professor"), var(1, "student")}},
            {"takes", {var(1, "student"), var(2, "course"), Term::constant("grade")}}};
}

}  // namespace

TEST(EnumerateClauses, NoBodyModes) {
    ModeSet m;
    m.target_mode = {"tenure", {{Direction::input, "professor"}}};
    auto r = enumerate_clauses(m, 2, default_clause_cap);
    EXPECT_EQ(r.counts_by_length, (std::vector<std::uint64_t>{1, 0, 0}));
    EXPECT_EQ(r.total, 1u);
    EXPECT_FALSE(r.truncated);
}

TEST(EnumerateClauses, WorkedClauseIsEnumerated) {
    auto m = worked_example();
    auto bodies = collect_clauses(m, 2);
    auto key = canonical_key(clause_one(), 1);
    bool found = std::any_of(bodies.begin(), bodies.end(), [&](const ClauseBody& b) { return canonical_key(b, 1) == key; });
    EXPECT_TRUE(found);
}

TEST(EnumerateClauses, WorkedExampleCountsFrozenFromOracle) {
    auto m = worked_example();
    auto report = enumerate_clauses(m, 3, default_clause_cap);
    auto classes = ClauseOracle(m, 3).run();
    for (std::size_t len = 0; len < classes.size(); ++len) EXPECT_EQ(report.counts_by_length[len], classes[len].size());
    // Length 1: advises(P,_). Length 2: two advises, or advises then takes.
    // Length 3: three advises; two advises and a takes; advises and two takes.
    EXPECT_EQ(report.counts_by_length, (std::vector<std::uint64_t>{1, 1, 2, 3}));
}

TEST(EnumerateClauses, CapTruncates) {
    auto m = exhaustive_modes(load_fixture("university"));
    auto full = enumerate_clauses(m, 2, default_clause_cap);
    ASSERT_GT(full.total, 10u);
    auto r = enumerate_clauses(m, 2, 10);
    EXPECT_TRUE(r.truncated);
    EXPECT_EQ(r.total, 10u);
    auto exact = enumerate_clauses(m, 2, full.total);
    EXPECT_FALSE(exact.truncated);
    EXPECT_EQ(exact, full);
}

TEST(EnumerateClauses, Deterministic) {
    auto m = exhaustive_modes(load_fixture("university"));
    EXPECT_EQ(collect_clauses(m, 2), collect_clauses(m, 2));
}

TEST(EnumerateClauses, GmcConstrainsSearchSpace) {
    auto d = load_fixture("university");
    auto gmc_count = enumerate_clauses(gmc(d, config(Strategy::shortest)), 3, default_clause_cap).total;
    auto naive = enumerate_clauses(exhaustive_modes(d), 3, default_clause_cap).total;
    EXPECT_LT(gmc_count, naive);
}

TEST(ContainsClause, Examples) {
    auto m = worked_example();
    EXPECT_TRUE(contains_clause(m, clause_one()));
    EXPECT_FALSE(contains_clause(m, {{"takes", {var(1, "student"), var(2, "course"), Term::constant("grade")}}}));
    EXPECT_TRUE(contains_clause(m, {{"advises", {var(0, "professor"), var(1, "student")}}}));
    // Order of the given literals does not matter.
    auto reversed = clause_one();
    std::reverse(reversed.begin(), reversed.end());
    EXPECT_TRUE(contains_clause(m, reversed));
    EXPECT_THROW(contains_clause(m, {{"teaches", {var(0, "professor"), var(1, "course")}}}), UnknownPredicate);
}

TEST(ContainsClause, BindingViolations) {
    auto m = worked_example();
    // Output slot reusing the head variable.
    EXPECT_FALSE(contains_clause(m, {{"advises", {var(0, "professor"), var(0, "professor")}}}));
    // Two literals introducing the same variable.
    EXPECT_FALSE(contains_clause(m, {{"advises", {var(0, "professor"), var(1, "student")}},
                                     {"advises", {var(0, "professor"), var(1, "student")}},
                                     {"takes", {var(1, "student"), var(1, "course"), Term::constant("grade")}}}));
    // Constant where a variable belongs.
    EXPECT_FALSE(contains_clause(m, {{"advises", {var(0, "professor"), Term::constant("student")}}}));
    // Exact duplicates collapse (set semantics).
    auto doubled = clause_one();
    doubled.push_back(doubled.front());
    EXPECT_TRUE(contains_clause(m, doubled));
}

TEST(ExhaustiveModes, SingleBinaryRelationship) {
    ERDiagram d({{"A", {{"x", AttributeKind::binary}}}, {"B", {}}}, {{"r", {"A", "B"}, {}}},
                Annotation{FeatureRef::attribute("A", "x"), {}});
    auto m = exhaustive_modes(d);
    std::vector<std::string> got;
    for (const auto& b : m.body_modes) got.push_back(render(b));
    EXPECT_EQ(got, (std::vector<std::string>{"r(+a, -b)", "r(-a, +b)", "r(-a, -b)", "x(+a)"}));
}

TEST(ExhaustiveModes, IgnoresImportantListAndBeatsGmc) {
    auto d = load_fixture("university");
    ERDiagram bare(d.entities(), d.relationships(), Annotation{d.annotation()->target, {}});
    EXPECT_EQ(exhaustive_modes(bare), exhaustive_modes(d));
    EXPECT_GT(exhaustive_modes(d).body_modes.size(), gmc(d, config(Strategy::shortest)).body_modes.size());
    EXPECT_THROW(exhaustive_modes(ERDiagram(d.entities(), d.relationships())), MissingAnnotation);
}

TEST(Report, JsonAndTable) {
    ClauseSpaceReport r{{1, 2, 5}, 8, false};
    EXPECT_EQ(serialize_report(r),
              "{\n"
              "  \"counts_by_length\": {\n"
              "    \"0\": 1,\n"
              "    \"1\": 2,\n"
              "    \"2\": 5\n"
              "  },\n"
              "  \"metric\": \"distinct clause bodies up to variable renaming (search-space proxy)\",\n"
              "  \"total\": 8,\n"
              "  \"truncated\": false\n"
              "}\n");
    EXPECT_NE(render_table(r).find("total   8"), std::string::npos);
}

TEST(ClauseSpaceProperty, OracleEquivalence) {
    std::mt19937 rng(31);
    for (int i = 0; i < 40; ++i) {
        auto d = random_diagram(rng, {4, 4, 3, 2});
        auto pool = i % 2 == 0 ? exhaustive_modes(d) : gmc(d, config(Strategy::all, 2));
        auto m = random_mode_subset(pool, rng, 4);
        int max_len = 1 + i % 3;
        SCOPED_TRACE(emit_modes(m, Dialect::generic));
        auto classes = ClauseOracle(m, max_len).run();
        auto bodies = collect_clauses(m, max_len);
        std::vector<std::vector<bool>> matched(classes.size());
        for (std::size_t len = 0; len < classes.size(); ++len) matched[len].assign(classes[len].size(), false);
        std::size_t expected_total = 0;
        for (const auto& c : classes) expected_total += c.size();
        ASSERT_EQ(bodies.size(), expected_total);
        for (const auto& b : bodies) {
            auto& reps = classes[b.size()];
            auto it = std::find_if(reps.begin(), reps.end(),
                                   [&](const ClauseBody& rep) { return alpha_equivalent(rep, b, static_cast<int>(m.target_mode.args.size())); });
            ASSERT_NE(it, reps.end());
            auto idx = static_cast<std::size_t>(it - reps.begin());
            EXPECT_FALSE(matched[b.size()][idx]) << "two enumerated bodies in one class";
            matched[b.size()][idx] = true;
            EXPECT_TRUE(contains_clause(m, b));
        }
    }
}

TEST(ClauseSpaceProperty, MonotoneInModes) {
    std::mt19937 rng(8);
    for (int i = 0; i < 20; ++i) {
        auto d = random_diagram(rng, {4, 4, 3, 2});
        auto full = exhaustive_modes(d);
        auto sub = random_mode_subset(full, rng, 5);
        auto small = enumerate_clauses(sub, 2, default_clause_cap);
        auto big = enumerate_clauses(full, 2, default_clause_cap);
        for (std::size_t len = 0; len < small.counts_by_length.size(); ++len)
            EXPECT_LE(small.counts_by_length[len], big.counts_by_length[len]);
        for (const auto& b : collect_clauses(sub, 2)) EXPECT_TRUE(contains_clause(full, b));
    }
}

TEST(ClauseSpaceProperty, ContainsMatchesEnumerationOnCandidates) {
    // Every well-typed candidate over a small variable pool: contains_clause
    // must agree with membership in the enumerated set.
    auto m = gmc(load_fixture("university"), config(Strategy::shortest_all));
    auto bodies = collect_clauses(m, 2);
    std::set<std::string> keys;
    for (const auto& b : bodies) keys.insert(canonical_key(b, 1));

    std::vector<ClauseLiteral> pool;
    const std::vector<std::pair<int, std::string>> vars{{0, "professor"}, {1, "professor"}, {2, "student"},
                                                        {3, "student"}, {4, "course"}, {5, "course"}};
    for (const auto& mode : m.body_modes) {
        std::vector<std::vector<Term>> options;
        for (const auto& a : mode.args) {
            std::vector<Term> o;
            if (a.direction == Direction::constant) o.push_back(Term::constant(a.type_name));
            else
                for (const auto& [id, type] : vars)
                    if (type == a.type_name) o.push_back(Term::variable(id, type));
            options.push_back(o);
        }
        std::vector<std::size_t> pick(options.size(), 0);
        for (;;) {
            ClauseLiteral lit{mode.predicate, {}};
            for (std::size_t k = 0; k < options.size(); ++k) lit.args.push_back(options[k][pick[k]]);
            if (std::find(pool.begin(), pool.end(), lit) == pool.end()) pool.push_back(lit);
            std::size_t k = 0;
            for (; k < pick.size(); ++k) {
                if (++pick[k] < options[k].size()) break;
                pick[k] = 0;
            }
            if (k == pick.size()) break;
        }
    }
    int positives = 0;
    for (std::size_t i = 0; i < pool.size(); ++i)
        for (std::size_t j = i; j < pool.size(); ++j) {
            ClauseBody body{pool[i]};
            if (j != i) body.push_back(pool[j]);
            bool in = keys.count(canonical_key(body, 1)) != 0;
            EXPECT_EQ(contains_clause(m, body), in) << render(pool[i], 1) << " " << render(pool[j], 1);
            positives += in;
        }
    EXPECT_GT(positives, 0);
}
