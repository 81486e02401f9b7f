#pragma once

// Demand statistics derived from an order history: per-drug order counts and
// the pairwise Jaccard similarity matrix used by the slotting stages.

#include <cstdio>
#include <string>
#include <vector>

#include "adds/csv.hpp"
#include "adds/model.hpp"

namespace adds {

// Dense symmetric K x K matrix of co-occurrence similarities in [0,1].
// The diagonal is fixed at 0 so a drug never pairs with itself.
struct SimilarityMatrix {
    int size = 0;
    std::vector<double> values;  // row-major, size*size

    SimilarityMatrix() = default;
    explicit SimilarityMatrix(int k) : size(k), values(static_cast<std::size_t>(k) * k, 0.0) {}

    double at(DrugId a, DrugId b) const {
        return values[static_cast<std::size_t>(a - 1) * size + (b - 1)];
    }

    void set(DrugId a, DrugId b, double v) {
        values[static_cast<std::size_t>(a - 1) * size + (b - 1)] = v;
        values[static_cast<std::size_t>(b - 1) * size + (a - 1)] = v;
    }
};

// Counts the number of orders containing each drug (presence, not dosage) and
// fills demand_frequency on a copy of the catalog.
inline DrugCatalog compute_frequencies(const OrderHistory& history, const DrugCatalog& catalog) {
    DrugCatalog out = catalog;
    for (auto& r : out.records) r.demand_frequency = 0;
    for (const auto& order : history.orders) {
        for (const auto& line : order.lines) {
            if (line.drug < 1 || line.drug > out.drug_count())
                throw ValidationError("order " + std::to_string(order.id) +
                                      " references unknown drug id " + std::to_string(line.drug));
            out.record(line.drug).demand_frequency += 1;
        }
    }
    return out;
}

// Jaccard similarity per drug pair: orders with both over orders with either.
// Pairs never ordered at all get 0.
inline SimilarityMatrix jaccard_matrix(const OrderHistory& history, int drug_count) {
    SimilarityMatrix sim(drug_count);
    std::vector<std::int64_t> freq(static_cast<std::size_t>(drug_count) + 1, 0);
    std::vector<std::int64_t> both(static_cast<std::size_t>(drug_count) * drug_count, 0);

    std::vector<DrugId> present;
    for (const auto& order : history.orders) {
        present.clear();
        for (const auto& line : order.lines) {
            if (line.drug < 1 || line.drug > drug_count)
                throw ValidationError("order " + std::to_string(order.id) +
                                      " references unknown drug id " + std::to_string(line.drug));
            present.push_back(line.drug);
        }
        std::sort(present.begin(), present.end());
        present.erase(std::unique(present.begin(), present.end()), present.end());
        for (std::size_t i = 0; i < present.size(); ++i) {
            freq[static_cast<std::size_t>(present[i])] += 1;
            for (std::size_t j = i + 1; j < present.size(); ++j)
                both[static_cast<std::size_t>(present[i] - 1) * drug_count + (present[j] - 1)] += 1;
        }
    }

    for (DrugId a = 1; a <= drug_count; ++a) {
        for (DrugId b = a + 1; b <= drug_count; ++b) {
            const std::int64_t g = both[static_cast<std::size_t>(a - 1) * drug_count + (b - 1)];
            const std::int64_t either = freq[static_cast<std::size_t>(a)] +
                                        freq[static_cast<std::size_t>(b)] - g;
            sim.set(a, b, either == 0 ? 0.0 : static_cast<double>(g) / static_cast<double>(either));
        }
    }
    return sim;
}

// K-column header of drug ids, then K rows of 6-decimal values.
inline void write_similarity_csv(const SimilarityMatrix& sim, std::ostream& out) {
    for (int k = 1; k <= sim.size; ++k) out << (k > 1 ? "," : "") << k;
    out << "\n";
    char buf[32];
    for (DrugId a = 1; a <= sim.size; ++a) {
        for (DrugId b = 1; b <= sim.size; ++b) {
            std::snprintf(buf, sizeof buf, "%.6f", sim.at(a, b));
            out << (b > 1 ? "," : "") << buf;
        }
        out << "\n";
    }
}

inline void write_similarity_csv(const SimilarityMatrix& sim, const std::string& path) {
    auto out = csv::open_output(path);
    write_similarity_csv(sim, out);
}

}  // namespace adds
