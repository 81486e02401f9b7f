#include <catch2/catch_amalgamated.hpp>

#include "adds/model.hpp"

#include "helpers.hpp"

using namespace adds;

TEST_CASE("default layout exposes 286 storage bins") {
    MachineLayout layout;
    validate_layout(layout);
    CHECK(layout.storage_bins() == 286);
    auto locs = layout.storage_locations();
    CHECK(locs.size() == 286);
    for (const auto& l : locs) {
        CHECK(layout.in_bounds(l));
        CHECK_FALSE(layout.is_io(l));
    }
    CHECK(layout.is_io(Location{1, 8, 6}));
    CHECK(layout.is_io(Location{1, 9, 6}));
    CHECK_FALSE(layout.is_io(Location{2, 8, 6}));  // I/O cells live on side 1 only
}

TEST_CASE("layout validation rejects degenerate geometry") {
    MachineLayout layout;
    layout.speed = 0.0;
    CHECK_THROWS_AS(validate_layout(layout), ValidationError);
    layout = MachineLayout{};
    layout.io_points[1] = layout.io_points[0];
    CHECK_THROWS_AS(validate_layout(layout), ValidationError);
    layout = MachineLayout{};
    layout.io_points[0] = {1, 99, 1};
    CHECK_THROWS_AS(validate_layout(layout), ValidationError);
}

TEST_CASE("catalog validation enforces dense ids and positive bins") {
    auto ok = helpers::make_catalog({1, 2, 3});
    CHECK_NOTHROW(validate_catalog(ok));

    auto gap = ok;
    gap.records[1].id = 5;
    CHECK_THROWS_AS(validate_catalog(gap), ValidationError);

    auto zero_bins = ok;
    zero_bins.records[0].bin_count = 0;
    CHECK_THROWS_AS(validate_catalog(zero_bins), ValidationError);
}

TEST_CASE("per-bin frequency is demand over bins") {
    DrugRecord r{1, 2, 10};
    CHECK(r.per_bin_frequency() == 5.0);
    DrugRecord never{2, 4, 0};
    CHECK(never.per_bin_frequency() == 0.0);
}

TEST_CASE("history validation names the offending order") {
    auto catalog = helpers::make_catalog({1, 1});
    auto history = helpers::make_history({{1, 2}, {1}});
    CHECK_NOTHROW(validate_history(history, catalog));

    history.orders[1].lines.push_back({7, 1});
    CHECK_THROWS_WITH(validate_history(history, catalog),
                      Catch::Matchers::ContainsSubstring("order 2") &&
                          Catch::Matchers::ContainsSubstring("7"));
}

TEST_CASE("stock state tracks units and refuses underflow") {
    Assignment assignment;
    assignment.machines = {{{Location{1, 1, 1}, 1}, {Location{1, 1, 2}, 2}}};
    auto stock = StockState::uniform(assignment, 5);
    CHECK(stock.total() == 10);
    stock.take(1, 0, 3);
    CHECK(stock.at(1, 0) == 2);
    CHECK_THROWS_AS(stock.take(1, 0, 3), StockoutError);
    CHECK(stock.at(1, 0) == 2);
}

TEST_CASE("assignment projects back onto its grouping") {
    Assignment assignment;
    assignment.machines = {
        {{Location{1, 1, 1}, 1}, {Location{1, 1, 2}, 1}, {Location{1, 2, 1}, 2}},
        {{Location{1, 1, 1}, 2}},
    };
    const Grouping g = assignment.to_grouping();
    CHECK(g.machine_count() == 2);
    CHECK(g.bins_of(1, 1) == 2);
    CHECK(g.bins_of(1, 2) == 1);
    CHECK(g.bins_of(2, 2) == 1);
    CHECK(g.bins_of(2, 1) == 0);
    CHECK(g.present(1, 2));
    CHECK_FALSE(g.present(2, 1));
}
