#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "memsys/catalog.hpp"

using namespace memsys;
using testutil::toy_catalog;
using testutil::toy_system;

namespace {

// One compiler with three 4-code parameters and adjustable rules.
CompilerSpec rule_compiler() {
    CompilerSpec c;
    c.name = "rc";
    c.kind = MemoryKind::kSram;
    c.ports = 1;
    c.words_range = {16, 1024};
    c.bits_range = {4, 64};
    for (int p = 0; p < 3; ++p) {
        ParameterSpec ps;
        ps.name = "p" + std::to_string(p);
        ps.labels = {"a", "b", "c", "d"};
        c.params.push_back(ps);
    }
    for (int m = 0; m < 2; ++m) {
        SurrogateObjective so;
        so.base = {1.0, 0.0, 0.0, 0.0};
        for (const auto& p : c.params) so.multipliers[p.name] = {1.0, 1.1, 1.2, 1.3};
        c.surrogate.push_back(so);
    }
    return c;
}

Catalog rule_catalog(CompilerSpec c) {
    Catalog cat;
    cat.objectives = {"area", "power"};
    cat.compilers = {std::move(c)};
    return cat;
}

}  // namespace

TEST_CASE("toy catalog validates and matches its JSON file") {
    const Catalog cat = toy_catalog();
    const Catalog from_file = load_catalog(std::string(MEMSYS_DATA_DIR) + "/toy_catalog.json");
    CHECK(catalog_to_json(cat).dump(2) == catalog_to_json(from_file).dump(2));

    const SystemSpec sys = toy_system();
    const SystemSpec sys_file = load_system(std::string(MEMSYS_DATA_DIR) + "/toy_system.json");
    CHECK(system_to_json(sys).dump(2) == system_to_json(sys_file).dump(2));
}

TEST_CASE("catalog JSON round trip is stable") {
    const Catalog cat = toy_catalog();
    const auto j1 = catalog_to_json(cat);
    const Catalog back = catalog_from_json(j1);
    CHECK(catalog_to_json(back).dump() == j1.dump());
}

TEST_CASE("eligibility filters kind, ports and size ranges") {
    const Catalog cat = toy_catalog();
    CHECK(eligible_compilers(cat, {"m", 64, 8, 1, MemoryKind::kSram}) ==
          std::vector<std::size_t>{0});
    CHECK(eligible_compilers(cat, {"m", 128, 8, 1, MemoryKind::kSram}) ==
          std::vector<std::size_t>{1});
    CHECK_THROWS_AS(eligible_compilers(cat, {"m", 64, 8, 2, MemoryKind::kSram}),
                    NoEligibleCompilerError);
    CHECK_THROWS_AS(eligible_compilers(cat, {"m", 64, 8, 1, MemoryKind::kRom}),
                    NoEligibleCompilerError);
    CHECK_THROWS_AS(eligible_compilers(cat, {"m", 65, 8, 1, MemoryKind::kSram}),
                    NoEligibleCompilerError);
}

TEST_CASE("feasible codes honor choice rules inside their region") {
    CompilerSpec c = rule_compiler();
    c.choice_rules.push_back({{{16, 100}, {4, 64}}, "p1", {2, 0}});
    const Catalog cat = rule_catalog(c);
    validate_catalog(cat);
    const CompilerSpec& comp = cat.compilers[0];

    const MemoryRequirement inside{"m", 50, 8, 1, MemoryKind::kSram};
    const MemoryRequirement outside{"m", 200, 8, 1, MemoryKind::kSram};
    CHECK(feasible_codes(comp, inside, "p1") == std::vector<int>{0, 2});
    CHECK(feasible_codes(comp, outside, "p1") == std::vector<int>{0, 1, 2, 3});
    CHECK(feasible_codes(comp, inside, "p0") == std::vector<int>{0, 1, 2, 3});
    CHECK_THROWS_AS(feasible_codes(comp, inside, "nope"), std::logic_error);
}

TEST_CASE("combo-governed parameters reject the scalar query") {
    CompilerSpec c = rule_compiler();
    c.combo_rules.push_back({{{16, 1024}, {4, 64}}, {"p0", "p1"}, {{3, 1}, {0, 0}, {1, 2}}});
    const Catalog cat = rule_catalog(c);
    validate_catalog(cat);
    const CompilerSpec& comp = cat.compilers[0];
    const MemoryRequirement mem{"m", 50, 8, 1, MemoryKind::kSram};

    CHECK_THROWS_AS(feasible_codes(comp, mem, "p0"), std::logic_error);
    CHECK(feasible_codes(comp, mem, "p2") == std::vector<int>{0, 1, 2, 3});
    const auto tuples = feasible_combinations(comp, mem, comp.combo_rules[0]);
    CHECK(tuples == std::vector<std::vector<int>>{{0, 0}, {1, 2}, {3, 1}});

    const MemoryRequirement outside{"m", 50, 8, 1, MemoryKind::kSram};
    ComboRule far_rule = comp.combo_rules[0];
    far_rule.when.words = {2000, 3000};
    CHECK_THROWS_AS(feasible_combinations(comp, outside, far_rule), std::logic_error);
}

TEST_CASE("validation rejects malformed catalogs") {
    SECTION("empty objectives") {
        Catalog cat = rule_catalog(rule_compiler());
        cat.objectives.clear();
        CHECK_THROWS_AS(validate_catalog(cat), ValidationError);
    }
    SECTION("duplicate compiler names") {
        Catalog cat = rule_catalog(rule_compiler());
        cat.compilers.push_back(cat.compilers[0]);
        CHECK_THROWS_AS(validate_catalog(cat), ValidationError);
    }
    SECTION("duplicate parameter names") {
        CompilerSpec c = rule_compiler();
        c.params[1].name = "p0";
        CHECK_THROWS_AS(validate_catalog(rule_catalog(c)), ValidationError);
    }
    SECTION("choice rule with out-of-range code") {
        CompilerSpec c = rule_compiler();
        c.choice_rules.push_back({{{16, 100}, {4, 64}}, "p0", {0, 9}});
        CHECK_THROWS_AS(validate_catalog(rule_catalog(c)), ValidationError);
    }
    SECTION("combo tuple arity mismatch") {
        CompilerSpec c = rule_compiler();
        c.combo_rules.push_back({{{16, 100}, {4, 64}}, {"p0", "p1"}, {{1, 2, 3}}});
        CHECK_THROWS_AS(validate_catalog(rule_catalog(c)), ValidationError);
    }
    SECTION("overlapping choice rules for one parameter") {
        CompilerSpec c = rule_compiler();
        c.choice_rules.push_back({{{16, 200}, {4, 64}}, "p0", {0, 1}});
        c.choice_rules.push_back({{{150, 400}, {4, 64}}, "p0", {2, 3}});
        CHECK_THROWS_AS(validate_catalog(rule_catalog(c)), ValidationError);
    }
    SECTION("disjoint choice rules for one parameter are fine") {
        CompilerSpec c = rule_compiler();
        c.choice_rules.push_back({{{16, 149}, {4, 64}}, "p0", {0, 1}});
        c.choice_rules.push_back({{{150, 400}, {4, 64}}, "p0", {2, 3}});
        CHECK_NOTHROW(validate_catalog(rule_catalog(c)));
    }
    SECTION("overlapping combo rules sharing a parameter") {
        CompilerSpec c = rule_compiler();
        c.combo_rules.push_back({{{16, 200}, {4, 64}}, {"p0", "p1"}, {{0, 0}}});
        c.combo_rules.push_back({{{100, 300}, {4, 64}}, {"p1", "p2"}, {{0, 0}}});
        CHECK_THROWS_AS(validate_catalog(rule_catalog(c)), ValidationError);
    }
    SECTION("non-positive multiplier") {
        CompilerSpec c = rule_compiler();
        c.surrogate[0].multipliers["p1"][2] = 0.0;
        CHECK_THROWS_AS(validate_catalog(rule_catalog(c)), ValidationError);
    }
    SECTION("base not positive at a corner") {
        CompilerSpec c = rule_compiler();
        c.surrogate[1].base = {10.0, 0.0, -0.02, 0.0};  // negative at words=1024
        CHECK_THROWS_AS(validate_catalog(rule_catalog(c)), ValidationError);
    }
    SECTION("surrogate objective count mismatch") {
        CompilerSpec c = rule_compiler();
        c.surrogate.pop_back();
        CHECK_THROWS_AS(validate_catalog(rule_catalog(c)), ValidationError);
    }
    SECTION("surrogate multiplier length mismatch") {
        CompilerSpec c = rule_compiler();
        c.surrogate[0].multipliers["p2"] = {1.0, 1.0};
        CHECK_THROWS_AS(validate_catalog(rule_catalog(c)), ValidationError);
    }
}

TEST_CASE("system validation") {
    SystemSpec sys = toy_system();
    CHECK_NOTHROW(validate_system(sys));
    sys.memories[1].id = "mem1";
    CHECK_THROWS_AS(validate_system(sys), ValidationError);
    sys.memories.clear();
    CHECK_THROWS_AS(validate_system(sys), ValidationError);
    sys = toy_system();
    sys.memories[0].words = 0;
    CHECK_THROWS_AS(validate_system(sys), ValidationError);
}

TEST_CASE("JSON shape errors are reported as validation failures") {
    using nlohmann::ordered_json;
    CHECK_THROWS_AS(catalog_from_json(ordered_json::array()), ValidationError);
    CHECK_THROWS_AS(catalog_from_json(ordered_json{{"objectives", {"a"}}}), ValidationError);
    ordered_json bad = catalog_to_json(toy_catalog());
    bad["compilers"][0].erase("words_range");
    CHECK_THROWS_AS(catalog_from_json(bad), ValidationError);
    bad = catalog_to_json(toy_catalog());
    bad["compilers"][0]["surrogate"].erase("area");
    CHECK_THROWS_AS(catalog_from_json(bad), ValidationError);
    CHECK_THROWS_AS(load_catalog("/nonexistent/catalog.json"), ParseError);
}

TEST_CASE("candidate counting multiplies axis options") {
    SECTION("two free parameters") {
        CompilerSpec c = rule_compiler();
        c.params.resize(2);
        c.params[0].labels = {"a", "b", "c"};
        c.params[1].labels = {"a", "b"};
        for (auto& so : c.surrogate) {
            so.multipliers.clear();
            so.multipliers["p0"] = {1.0, 1.1, 1.2};
            so.multipliers["p1"] = {1.0, 1.1};
        }
        const Catalog cat = rule_catalog(c);
        validate_catalog(cat);
        CHECK(count_compiler_candidates(cat.compilers[0], {"m", 50, 8, 1, MemoryKind::kSram}) == 6);
    }
    SECTION("combo group times one free parameter") {
        CompilerSpec c = rule_compiler();
        c.params.resize(3);
        c.params[2].labels = {"a", "b", "c"};
        for (auto& so : c.surrogate) so.multipliers["p2"] = {1.0, 1.1, 1.2};
        c.combo_rules.push_back({{{16, 1024}, {4, 64}}, {"p0", "p1"}, {{0, 0}, {3, 3}}});
        const Catalog cat = rule_catalog(c);
        validate_catalog(cat);
        CHECK(count_compiler_candidates(cat.compilers[0], {"m", 50, 8, 1, MemoryKind::kSram}) == 6);
    }
    SECTION("toy memories have three candidates each") {
        const Catalog cat = toy_catalog();
        for (const auto& mem : toy_system().memories)
            CHECK(count_memory_candidates(cat, mem) == 3);
    }
}

TEST_CASE("synthetic generation is deterministic and hits its target band") {
    const auto [cat1, sys1] = generate_synthetic_system(7, 4, 3, 200);
    const auto [cat2, sys2] = generate_synthetic_system(7, 4, 3, 200);
    CHECK(catalog_to_json(cat1).dump() == catalog_to_json(cat2).dump());
    CHECK(system_to_json(sys1).dump() == system_to_json(sys2).dump());

    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 11ULL}) {
        for (std::size_t mems : {1ULL, 2ULL, 4ULL}) {
            const std::uint64_t target = 150;
            const auto [cat, sys] = generate_synthetic_system(seed, mems, 3, target);
            CHECK_NOTHROW(validate_catalog(cat));
            REQUIRE(sys.memories.size() == mems);
            for (const auto& mem : sys.memories) {
                const double n = static_cast<double>(count_memory_candidates(cat, mem));
                CHECK(n >= 0.25 * static_cast<double>(target));
                CHECK(n <= 4.0 * static_cast<double>(target));
            }
        }
    }
}

TEST_CASE("synthetic generation degenerate and invalid inputs") {
    const auto [cat, sys] = generate_synthetic_system(5, 1, 1, 50);
    CHECK(sys.memories.size() == 1);
    CHECK(cat.compilers.size() == 1);
    CHECK_THROWS_AS(generate_synthetic_system(1, 0, 1, 10), std::invalid_argument);
    CHECK_THROWS_AS(generate_synthetic_system(1, 1, 0, 10), std::invalid_argument);
    CHECK_THROWS_AS(generate_synthetic_system(1, 1, 1, 0), std::invalid_argument);
}
