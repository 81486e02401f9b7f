#pragma once

// Order-history and catalog file formats, plus a synthetic generator for
// experiments when no real history is available. Orders draw a popular seed
// drug and then stay inside that drug's correlation clique with a configured
// probability, which yields tunable co-occurrence structure.

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "adds/csv.hpp"
#include "adds/model.hpp"

namespace adds {

struct GenConfig {
    int drugs = 100;
    int orders = 10000;
    // Order-size distribution; the default puts 90% of orders in sizes 1..5.
    std::vector<std::pair<int, double>> size_dist = {
        {1, 0.25}, {2, 0.22}, {3, 0.20}, {4, 0.13}, {5, 0.10}, {6, 0.06}, {7, 0.04}};
    double popularity_skew = 1.0;  // weight of drug rank k is k^-skew
    int cliques = 20;
    double co_draw = 0.8;  // probability a follow-up drug stays in the seed's clique
    int max_dosage = 3;
    int bin_budget = 858;  // fleet bins the catalog is scaled to
    std::uint64_t seed = 1;
};

inline void validate_gen_config(const GenConfig& cfg) {
    if (cfg.drugs < 1 || cfg.orders < 1) throw ValidationError("drugs and orders must be >= 1");
    if (cfg.size_dist.empty()) throw ValidationError("size distribution is empty");
    double sum = 0.0;
    for (const auto& [size, p] : cfg.size_dist) {
        if (size < 1) throw ValidationError("order sizes must be >= 1");
        if (p < 0.0) throw ValidationError("size probabilities must be non-negative");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw ValidationError("size probabilities must sum to 1 (got " + std::to_string(sum) + ")");
    if (cfg.co_draw < 0.0 || cfg.co_draw > 1.0) throw ValidationError("co_draw must lie in [0,1]");
    if (cfg.cliques < 1) throw ValidationError("cliques must be >= 1");
    if (cfg.max_dosage < 1) throw ValidationError("max_dosage must be >= 1");
    if (cfg.bin_budget < 1) throw ValidationError("bin_budget must be >= 1");
}

// Key-value config file, one `key = value` per line, '#' comments.
// size_dist uses `size:prob` pairs joined by commas.
inline GenConfig parse_gen_config(std::istream& in, const std::string& path = "<stream>") {
    GenConfig cfg;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = csv::trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ParseError(path + ": line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = csv::trim(t.substr(0, eq));
        const std::string value = csv::trim(t.substr(eq + 1));
        if (key == "drugs") cfg.drugs = static_cast<int>(csv::parse_int(value, key, line_no));
        else if (key == "orders") cfg.orders = static_cast<int>(csv::parse_int(value, key, line_no));
        else if (key == "popularity_skew") cfg.popularity_skew = csv::parse_double(value, key, line_no);
        else if (key == "cliques") cfg.cliques = static_cast<int>(csv::parse_int(value, key, line_no));
        else if (key == "co_draw") cfg.co_draw = csv::parse_double(value, key, line_no);
        else if (key == "max_dosage") cfg.max_dosage = static_cast<int>(csv::parse_int(value, key, line_no));
        else if (key == "bin_budget") cfg.bin_budget = static_cast<int>(csv::parse_int(value, key, line_no));
        else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(csv::parse_int(value, key, line_no));
        else if (key == "size_dist") {
            cfg.size_dist.clear();
            for (const auto& item : csv::split(value)) {
                const auto colon = item.find(':');
                if (colon == std::string::npos)
                    throw ParseError(path + ": line " + std::to_string(line_no) +
                                     ": size_dist entries must be size:prob");
                cfg.size_dist.emplace_back(
                    static_cast<int>(csv::parse_int(item.substr(0, colon), "size", line_no)),
                    csv::parse_double(item.substr(colon + 1), "probability", line_no));
            }
        } else {
            throw ParseError(path + ": line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
    }
    validate_gen_config(cfg);
    return cfg;
}

inline GenConfig parse_gen_config_file(const std::string& path) {
    auto in = csv::open_input(path);
    return parse_gen_config(in, path);
}

namespace detail {

// Portable uniform in [0,1); avoids distribution objects so output bytes are
// stable across standard libraries.
inline double next_double(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline int draw_cumulative(const std::vector<double>& cumulative, std::mt19937_64& rng) {
    const double u = next_double(rng) * cumulative.back();
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    if (it == cumulative.end()) --it;
    return static_cast<int>(it - cumulative.begin());
}

}  // namespace detail

inline std::pair<DrugCatalog, OrderHistory> generate_history(const GenConfig& cfg) {
    validate_gen_config(cfg);
    if (cfg.drugs > cfg.bin_budget)
        throw CapacityError("bin budget " + std::to_string(cfg.bin_budget) +
                            " cannot give every one of " + std::to_string(cfg.drugs) +
                            " drugs a bin");

    std::mt19937_64 rng(cfg.seed);
    const int K = cfg.drugs;

    std::vector<double> pop_cumulative(static_cast<std::size_t>(K));
    double acc = 0.0;
    for (int k = 1; k <= K; ++k) {
        acc += std::pow(static_cast<double>(k), -cfg.popularity_skew);
        pop_cumulative[static_cast<std::size_t>(k - 1)] = acc;
    }

    std::vector<double> size_cumulative;
    for (const auto& [size, p] : cfg.size_dist)
        size_cumulative.push_back((size_cumulative.empty() ? 0.0 : size_cumulative.back()) + p);

    // Cliques are spread round-robin over the popularity ranks so each mixes
    // popular and rare drugs.
    std::vector<std::vector<DrugId>> clique_members(static_cast<std::size_t>(cfg.cliques));
    for (DrugId k = 1; k <= K; ++k)
        clique_members[static_cast<std::size_t>((k - 1) % cfg.cliques)].push_back(k);

    OrderHistory history;
    history.orders.reserve(static_cast<std::size_t>(cfg.orders));
    std::vector<char> drawn(static_cast<std::size_t>(K) + 1, 0);

    for (int q = 1; q <= cfg.orders; ++q) {
        PrescriptionOrder order;
        order.id = q;
        int want = cfg.size_dist[static_cast<std::size_t>(
                                     detail::draw_cumulative(size_cumulative, rng))]
                       .first;
        want = std::min(want, K);

        std::fill(drawn.begin(), drawn.end(), 0);
        auto draw_popular = [&]() {
            while (true) {
                const DrugId k = detail::draw_cumulative(pop_cumulative, rng) + 1;
                if (!drawn[static_cast<std::size_t>(k)]) return k;
            }
        };

        const DrugId seed_drug = draw_popular();
        drawn[static_cast<std::size_t>(seed_drug)] = 1;
        order.lines.push_back({seed_drug, 1 + static_cast<int>(detail::next_double(rng) * cfg.max_dosage)});
        const auto& clique = clique_members[static_cast<std::size_t>((seed_drug - 1) % cfg.cliques)];

        for (int i = 1; i < want; ++i) {
            DrugId k = 0;
            if (detail::next_double(rng) < cfg.co_draw) {
                std::vector<DrugId> fresh;
                for (DrugId c : clique)
                    if (!drawn[static_cast<std::size_t>(c)]) fresh.push_back(c);
                if (!fresh.empty())
                    k = fresh[static_cast<std::size_t>(detail::next_double(rng) * fresh.size())];
            }
            if (k == 0) k = draw_popular();
            drawn[static_cast<std::size_t>(k)] = 1;
            order.lines.push_back({k, 1 + static_cast<int>(detail::next_double(rng) * cfg.max_dosage)});
        }
        history.orders.push_back(std::move(order));
    }

    // Catalog: bins proportional to realized demand, floor one bin per drug,
    // trimmed from the largest holdings until the budget fits.
    std::vector<std::int64_t> freq(static_cast<std::size_t>(K) + 1, 0);
    for (const auto& order : history.orders)
        for (const auto& line : order.lines) freq[static_cast<std::size_t>(line.drug)] += 1;
    std::int64_t freq_total = 0;
    for (DrugId k = 1; k <= K; ++k) freq_total += freq[static_cast<std::size_t>(k)];

    DrugCatalog catalog;
    std::int64_t bins_total = 0;
    for (DrugId k = 1; k <= K; ++k) {
        const double share = freq_total == 0
                                 ? 0.0
                                 : static_cast<double>(freq[static_cast<std::size_t>(k)]) /
                                       static_cast<double>(freq_total) * cfg.bin_budget;
        const int b = std::max(1, static_cast<int>(std::llround(share)));
        catalog.records.push_back({k, b, freq[static_cast<std::size_t>(k)]});
        bins_total += b;
    }
    while (bins_total > cfg.bin_budget) {
        int widest = -1;
        for (int i = 0; i < K; ++i)
            if (catalog.records[static_cast<std::size_t>(i)].bin_count > 1 &&
                (widest < 0 || catalog.records[static_cast<std::size_t>(i)].bin_count >
                                   catalog.records[static_cast<std::size_t>(widest)].bin_count))
                widest = i;
        if (widest < 0)
            throw CapacityError("cannot trim catalog to the bin budget");
        catalog.records[static_cast<std::size_t>(widest)].bin_count -= 1;
        bins_total -= 1;
    }
    return {std::move(catalog), std::move(history)};
}

inline void write_history(const OrderHistory& history, std::ostream& out) {
    out << "order_id,drug_id,dosage\n";
    for (const auto& order : history.orders)
        for (const auto& line : order.lines)
            out << order.id << "," << line.drug << "," << line.dosage << "\n";
}

inline void write_history(const OrderHistory& history, const std::string& path) {
    auto out = csv::open_output(path);
    write_history(history, out);
}

inline OrderHistory read_history(std::istream& in, const std::string& path = "<stream>") {
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ": empty file");
    auto idx = csv::header_indices(csv::split(line), {"order_id", "drug_id", "dosage"}, path);

    OrderHistory history;
    std::map<std::int64_t, std::size_t> order_index;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (csv::trim(line).empty()) continue;
        auto fields = csv::split(line);
        if (fields.size() < 3)
            throw ParseError(path + ": line " + std::to_string(line_no) + ": expected 3 fields");
        const std::int64_t order_id = csv::parse_int(fields[idx[0]], "order_id", line_no);
        const DrugId drug = static_cast<DrugId>(csv::parse_int(fields[idx[1]], "drug_id", line_no));
        const int dosage = static_cast<int>(csv::parse_int(fields[idx[2]], "dosage", line_no));
        if (drug < 1)
            throw ParseError(path + ": line " + std::to_string(line_no) + ": drug_id must be >= 1");
        if (dosage < 1)
            throw ParseError(path + ": line " + std::to_string(line_no) + ": dosage must be >= 1");

        auto [it, fresh] = order_index.try_emplace(order_id, history.orders.size());
        if (fresh) {
            PrescriptionOrder order;
            order.id = order_id;
            history.orders.push_back(std::move(order));
        }
        auto& order = history.orders[it->second];
        if (order.contains(drug))
            throw ParseError(path + ": line " + std::to_string(line_no) + ": duplicate drug " +
                             std::to_string(drug) + " in order " + std::to_string(order_id));
        order.lines.push_back({drug, dosage});
    }
    return history;
}

inline OrderHistory read_history(const std::string& path) {
    auto in = csv::open_input(path);
    return read_history(in, path);
}

inline void write_catalog(const DrugCatalog& catalog, std::ostream& out) {
    out << "drug_id,bin_count,demand_frequency\n";
    for (const auto& r : catalog.records)
        out << r.id << "," << r.bin_count << "," << r.demand_frequency << "\n";
}

inline void write_catalog(const DrugCatalog& catalog, const std::string& path) {
    auto out = csv::open_output(path);
    write_catalog(catalog, out);
}

inline DrugCatalog read_catalog(std::istream& in, const std::string& path = "<stream>") {
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ": empty file");
    auto idx = csv::header_indices(csv::split(line),
                                   {"drug_id", "bin_count", "demand_frequency"}, path);
    DrugCatalog catalog;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (csv::trim(line).empty()) continue;
        auto fields = csv::split(line);
        if (fields.size() < 3)
            throw ParseError(path + ": line " + std::to_string(line_no) + ": expected 3 fields");
        DrugRecord r;
        r.id = static_cast<DrugId>(csv::parse_int(fields[idx[0]], "drug_id", line_no));
        r.bin_count = static_cast<int>(csv::parse_int(fields[idx[1]], "bin_count", line_no));
        r.demand_frequency = csv::parse_int(fields[idx[2]], "demand_frequency", line_no);
        catalog.records.push_back(r);
    }
    validate_catalog(catalog);
    return catalog;
}

inline DrugCatalog read_catalog(const std::string& path) {
    auto in = csv::open_input(path);
    return read_catalog(in, path);
}

}  // namespace adds
