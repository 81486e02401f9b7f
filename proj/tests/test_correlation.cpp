#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "adds/correlation.hpp"

#include "helpers.hpp"

using namespace adds;

TEST_CASE("demand frequency counts order presence, not dosage") {
    // {A,B}, {A}, {B,C}
    auto history = helpers::make_history({{1, 2}, {1}, {2, 3}});
    history.orders[0].lines[0].dosage = 9;  // extra units of A must not inflate f_A
    auto catalog = compute_frequencies(history, helpers::make_catalog({1, 1, 1}));
    CHECK(catalog.record(1).demand_frequency == 2);
    CHECK(catalog.record(2).demand_frequency == 2);
    CHECK(catalog.record(3).demand_frequency == 1);
    CHECK(catalog.record(1).per_bin_frequency() == 2.0);
}

TEST_CASE("a drug never ordered keeps zero frequency") {
    auto catalog = compute_frequencies(helpers::make_history({{1}}), helpers::make_catalog({1, 3}));
    CHECK(catalog.record(2).demand_frequency == 0);
    CHECK(catalog.record(2).per_bin_frequency() == 0.0);
}

TEST_CASE("unknown drug in the history is an ingestion error naming the order") {
    auto history = helpers::make_history({{1}, {4}});
    CHECK_THROWS_WITH(compute_frequencies(history, helpers::make_catalog({1, 1})),
                      Catch::Matchers::ContainsSubstring("order 2"));
}

TEST_CASE("jaccard matrix matches hand-counted examples") {
    auto history = helpers::make_history({{1, 2}, {1}, {2, 3}});
    auto sim = jaccard_matrix(history, 3);
    CHECK(sim.at(1, 2) == Catch::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(sim.at(1, 3) == 0.0);  // never together
    CHECK(sim.at(2, 3) == Catch::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("always co-occurring drugs score 1, never co-occurring score 0") {
    auto always = jaccard_matrix(helpers::make_history({{1, 2}, {1, 2, 3}}), 3);
    CHECK(always.at(1, 2) == 1.0);
    auto never = jaccard_matrix(helpers::make_history({{1}, {2}}), 3);
    CHECK(never.at(1, 2) == 0.0);
}

TEST_CASE("pairs absent from the whole history default to zero") {
    auto sim = jaccard_matrix(helpers::make_history({{1}}), 4);
    CHECK(sim.at(3, 4) == 0.0);
}

TEST_CASE("similarity is symmetric, bounded and zero on the diagonal") {
    std::mt19937_64 rng(7);
    auto history = helpers::random_history(rng, 12, 300, 5);
    auto sim = jaccard_matrix(history, 12);
    for (int a = 1; a <= 12; ++a) {
        CHECK(sim.at(a, a) == 0.0);
        for (int b = 1; b <= 12; ++b) {
            CHECK(sim.at(a, b) == sim.at(b, a));
            CHECK(sim.at(a, b) >= 0.0);
            CHECK(sim.at(a, b) <= 1.0);
        }
    }
}

TEST_CASE("ingestion order does not matter") {
    std::mt19937_64 rng(11);
    auto history = helpers::random_history(rng, 10, 200, 4);
    auto shuffled = history;
    std::shuffle(shuffled.orders.begin(), shuffled.orders.end(), rng);
    CHECK(jaccard_matrix(history, 10).values == jaccard_matrix(shuffled, 10).values);
}

TEST_CASE("duplicating every order leaves similarities unchanged") {
    std::mt19937_64 rng(13);
    auto history = helpers::random_history(rng, 8, 150, 4);
    auto doubled = history;
    for (const auto& order : history.orders) {
        auto copy = order;
        copy.id += 10'000;
        doubled.orders.push_back(copy);
    }
    auto a = jaccard_matrix(history, 8);
    auto b = jaccard_matrix(doubled, 8);
    for (std::size_t i = 0; i < a.values.size(); ++i)
        CHECK(a.values[i] == Catch::Approx(b.values[i]).margin(1e-15));
}

TEST_CASE("similarity 1 implies co-occurrence in every order containing either drug") {
    std::mt19937_64 rng(17);
    auto history = helpers::random_history(rng, 6, 60, 3);
    auto sim = jaccard_matrix(history, 6);
    for (int a = 1; a <= 6; ++a)
        for (int b = a + 1; b <= 6; ++b) {
            if (sim.at(a, b) != 1.0) continue;
            for (const auto& order : history.orders)
                if (order.contains(a) || order.contains(b)) {
                    CHECK(order.contains(a));
                    CHECK(order.contains(b));
                }
        }
}

TEST_CASE("similarity CSV dump uses a K-column header and six decimals") {
    auto sim = jaccard_matrix(helpers::make_history({{1, 2}, {1}, {2}}), 2);
    std::ostringstream out;
    write_similarity_csv(sim, out);
    CHECK(out.str() == "1,2\n0.000000,0.333333\n0.333333,0.000000\n");
}
