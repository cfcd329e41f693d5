#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <sstream>

#include "helpers.hpp"
#include "memsys/metrics.hpp"

using namespace memsys;

namespace {

std::vector<ObjectiveVector> column(const std::vector<double>& v) {
    std::vector<ObjectiveVector> out;
    for (double x : v) out.push_back({x});
    return out;
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

}  // namespace

TEST_CASE("front statistics: quartiles interpolate between order statistics") {
    const auto fs = front_stats(column({4.0, 2.0, 1.0, 3.0}));
    CHECK(fs.count == 4);
    CHECK(fs.unique_count == 4);
    REQUIRE(fs.per_objective.size() == 1);
    const auto& s = fs.per_objective[0];
    CHECK(s.min == 1.0);
    CHECK(s.q1 == 1.75);
    CHECK(s.q2 == 2.5);
    CHECK(s.q3 == 3.25);
    CHECK(s.max == 4.0);
    CHECK(s.mean == 2.5);
    // Sample SD of 1..4 with divisor n-1.
    CHECK(s.sd == Catch::Approx(std::sqrt((2.25 + 0.25 + 0.25 + 2.25) / 3.0)));
}

TEST_CASE("front statistics: degenerate shapes") {
    const auto one = front_stats(column({5.0}));
    CHECK(one.per_objective[0].q1 == 5.0);
    CHECK(one.per_objective[0].q2 == 5.0);
    CHECK(one.per_objective[0].sd == 0.0);

    const auto flat = front_stats(column({5.0, 5.0, 5.0}));
    CHECK(flat.count == 3);
    CHECK(flat.unique_count == 1);
    CHECK(flat.per_objective[0].sd == 0.0);
    CHECK(flat.per_objective[0].q1 == 5.0);

    CHECK_THROWS_AS(front_stats({}), std::invalid_argument);
    CHECK_THROWS_AS(front_stats({{1.0, 2.0}, {1.0}}), std::invalid_argument);
}

TEST_CASE("front statistics ignore input order") {
    auto pts = column({9.0, 1.0, 4.0, 7.0, 2.0});
    const auto a = front_stats(pts);
    std::reverse(pts.begin(), pts.end());
    const auto b = front_stats(pts);
    CHECK(a.per_objective[0].q1 == b.per_objective[0].q1);
    CHECK(a.per_objective[0].mean == b.per_objective[0].mean);
    CHECK(a.per_objective[0].sd == b.per_objective[0].sd);
}

TEST_CASE("unique count distinguishes full vectors, not coordinates") {
    const std::vector<ObjectiveVector> pts{{1.0, 2.0}, {1.0, 3.0}, {1.0, 2.0}};
    const auto fs = front_stats(pts);
    CHECK(fs.count == 3);
    CHECK(fs.unique_count == 2);
}

TEST_CASE("deviation cells are (found - base)/base aggregated over repetitions") {
    const auto base = column({10.0, 20.0});
    SECTION("+10% on the mean") {
        const auto rep = deviation_report({column({11.0, 22.0})}, base, {"area"});
        // mean: base 15, found 16.5.
        CHECK(rep.cells[1][0].defined);
        CHECK(rep.cells[1][0].mean == Catch::Approx(0.10));
        CHECK(rep.cells[1][0].sd == 0.0);
        CHECK(rep.repetitions == 1);
        CHECK(rep.base_count == 2);
    }
    SECTION("min found 49 against base 99") {
        const auto rep = deviation_report({column({49.0, 200.0})}, column({99.0, 200.0}),
                                          {"power"});
        CHECK(rep.cells[3][0].mean == (49.0 - 99.0) / 99.0);
        CHECK(detail::format_pct(rep.cells[3][0].mean) == "-50.51%");
    }
    SECTION("positive deviations format with an explicit plus") {
        CHECK(detail::format_pct(0.10) == "+10.00%");
        CHECK(detail::format_pct(0.0) == "+0.00%");
    }
    SECTION("two repetitions aggregate mean and SD") {
        const auto rep =
            deviation_report({column({11.0, 22.0}), column({9.0, 18.0})}, base, {"area"});
        // Deviations on the mean: +10% and -10%.
        CHECK(rep.cells[1][0].mean == Catch::Approx(0.0).margin(1e-15));
        CHECK(rep.cells[1][0].sd == Catch::Approx(std::sqrt(2.0 * 0.01)));
        CHECK(rep.repetitions == 2);
    }
    SECTION("identical fronts give all-zero deviations") {
        const auto rep = deviation_report({base, base}, base, {"area"});
        for (std::size_t s = 0; s < rep.cells.size(); ++s) {
            if (!rep.cells[s][0].defined) continue;
            CHECK(rep.cells[s][0].mean == 0.0);
            CHECK(rep.cells[s][0].sd == 0.0);
        }
    }
}

TEST_CASE("deviations are scale-free") {
    const auto base = column({10.0, 30.0, 20.0});
    const auto found = column({12.0, 33.0, 24.0});
    const auto r1 = deviation_report({found}, base, {"x"});
    auto scale = [](std::vector<ObjectiveVector> pts) {
        for (auto& p : pts) p[0] *= 7.0;
        return pts;
    };
    const auto r2 = deviation_report({scale(found)}, scale(base), {"x"});
    for (std::size_t s = 1; s < r1.cells.size(); ++s) {
        REQUIRE(r1.cells[s][0].defined == r2.cells[s][0].defined);
        if (r1.cells[s][0].defined)
            CHECK(r1.cells[s][0].mean == Catch::Approx(r2.cells[s][0].mean).margin(1e-12));
    }
}

TEST_CASE("a zero base statistic yields an undefined cell") {
    // Base SD is 0 (all equal); min/q/mean/max are 0 too for a zero column.
    const auto rep = deviation_report({column({1.0, 2.0})}, column({0.0, 0.0}), {"x"});
    for (std::size_t s = 1; s < rep.cells.size(); ++s) CHECK_FALSE(rep.cells[s][0].defined);
    CHECK(rep.cells[0][0].defined);  // count is 2, not 0

    const std::string csv = deviation_report_csv(rep);
    CHECK(csv.find("n/a") != std::string::npos);
    const std::string md = deviation_report_markdown(rep);
    CHECK(md.find("n/a") != std::string::npos);
}

TEST_CASE("deviation report rejects malformed input") {
    const auto base = column({1.0, 2.0});
    CHECK_THROWS_AS(deviation_report({}, base, {"x"}), std::invalid_argument);
    CHECK_THROWS_AS(deviation_report({base}, base, {"x", "y"}), std::invalid_argument);
    CHECK_THROWS_AS(deviation_report({{{1.0, 2.0}}}, base, {"x"}), std::invalid_argument);
}

TEST_CASE("CSV rendering: 8 statistic rows, two columns per objective") {
    const std::vector<ObjectiveVector> base{{1.0, 10.0}, {2.0, 8.0}, {3.0, 6.0}};
    const std::vector<ObjectiveVector> found{{1.1, 10.0}, {2.2, 8.0}};
    const auto rep = deviation_report({found}, base, {"area", "power"});
    const auto lines = split_lines(deviation_report_csv(rep));
    REQUIRE(lines.size() == 9);
    CHECK(lines[0] ==
          "statistic,area_dev_mean_pct,area_dev_sd_pct,power_dev_mean_pct,power_dev_sd_pct");
    const auto& names = deviation_statistics();
    for (std::size_t s = 0; s < names.size(); ++s) {
        CHECK(lines[s + 1].rfind(names[s] + ",", 0) == 0);
        CHECK(std::count(lines[s + 1].begin(), lines[s + 1].end(), ',') == 4);
    }
    // count row: found 2 vs base 3.
    CHECK(lines[1].find(detail::format_full((2.0 - 3.0) / 3.0 * 100.0)) != std::string::npos);
}

TEST_CASE("markdown rendering: caption, alignment and all statistics") {
    const std::vector<ObjectiveVector> base{{1.0, 10.0}, {2.0, 8.0}};
    const auto rep = deviation_report({base, base, base}, base, {"area", "power"});
    const std::string md = deviation_report_markdown(rep);
    CHECK(md.find("over 3 repetition(s)") != std::string::npos);
    CHECK(md.find("base front count 2 (2 unique)") != std::string::npos);

    const auto lines = split_lines(md);
    // Caption, blank, header, separator, 8 statistic rows.
    REQUIRE(lines.size() == 12);
    const std::size_t width = lines[2].size();
    for (std::size_t i = 2; i < lines.size(); ++i) {
        CHECK(lines[i].size() == width);
        CHECK(lines[i].front() == '|');
        CHECK(lines[i].back() == '|');
    }
    for (const auto& name : deviation_statistics())
        CHECK(md.find("| " + name) != std::string::npos);
}
