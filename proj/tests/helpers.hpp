#pragma once

// Small builders shared by the test suites.

#include <cstdint>
#include <random>
#include <vector>

#include "adds/correlation.hpp"
#include "adds/model.hpp"

namespace helpers {

inline adds::OrderHistory make_history(const std::vector<std::vector<int>>& orders) {
    adds::OrderHistory h;
    std::int64_t id = 0;
    for (const auto& drugs : orders) {
        adds::PrescriptionOrder order;
        order.id = ++id;
        for (int d : drugs) order.lines.push_back({d, 1});
        h.orders.push_back(std::move(order));
    }
    return h;
}

inline adds::DrugCatalog make_catalog(const std::vector<int>& bin_counts,
                                      const std::vector<std::int64_t>& freqs = {}) {
    adds::DrugCatalog c;
    for (std::size_t i = 0; i < bin_counts.size(); ++i)
        c.records.push_back({static_cast<int>(i + 1), bin_counts[i],
                             i < freqs.size() ? freqs[i] : 0});
    return c;
}

inline adds::OrderHistory random_history(std::mt19937_64& rng, int drugs, int orders,
                                         int max_size) {
    adds::OrderHistory h;
    std::uniform_int_distribution<int> size_dist(1, max_size);
    std::uniform_int_distribution<int> drug_dist(1, drugs);
    for (int q = 1; q <= orders; ++q) {
        adds::PrescriptionOrder order;
        order.id = q;
        const int want = std::min(size_dist(rng), drugs);
        std::vector<bool> used(static_cast<std::size_t>(drugs) + 1, false);
        while (order.size() < want) {
            const int d = drug_dist(rng);
            if (used[static_cast<std::size_t>(d)]) continue;
            used[static_cast<std::size_t>(d)] = true;
            order.lines.push_back({d, 1 + static_cast<int>(rng() % 3)});
        }
        h.orders.push_back(std::move(order));
    }
    return h;
}

// Symmetric similarity values on a 0.001 grid so distinct objective sums stay
// far apart relative to floating-point noise.
inline adds::SimilarityMatrix random_similarity(std::mt19937_64& rng, int drugs) {
    adds::SimilarityMatrix sim(drugs);
    std::uniform_int_distribution<int> grid(0, 1000);
    for (int a = 1; a <= drugs; ++a)
        for (int b = a + 1; b <= drugs; ++b) sim.set(a, b, grid(rng) / 1000.0);
    return sim;
}

}  // namespace helpers
