#pragma once

// Two-stage slotting. Stage I groups drugs onto machines maximizing the
// summed pairwise similarity of co-resident drugs, either allowing a drug's
// bins to scatter over several machines or pinning each drug to one machine.
// Stage II places each machine's drugs into bins, either by plain per-bin
// demand or by the sequential alternating cluster heuristic. The four named
// strategies are the compositions of those choices:
//
//             dedicated Stage I   scattered Stage I
//   frequency        FA                 SSFA
//   clustered        ICA                SSCA

#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "adds/correlation.hpp"
#include "adds/csv.hpp"
#include "adds/model.hpp"
#include "adds/picking.hpp"

namespace adds {

enum class StrategyId { FA, ICA, SSFA, SSCA };

inline bool uses_scattered_grouping(StrategyId s) {
    return s == StrategyId::SSFA || s == StrategyId::SSCA;
}

inline bool uses_clustered_allocation(StrategyId s) {
    return s == StrategyId::ICA || s == StrategyId::SSCA;
}

inline std::string to_string(StrategyId s) {
    switch (s) {
        case StrategyId::FA: return "FA";
        case StrategyId::ICA: return "ICA";
        case StrategyId::SSFA: return "SSFA";
        case StrategyId::SSCA: return "SSCA";
    }
    return "?";
}

inline StrategyId parse_strategy(const std::string& name) {
    if (name == "FA") return StrategyId::FA;
    if (name == "ICA") return StrategyId::ICA;
    if (name == "SSFA") return StrategyId::SSFA;
    if (name == "SSCA") return StrategyId::SSCA;
    throw ValidationError("unknown strategy '" + name + "' (expected FA, ICA, SSFA or SSCA)");
}

struct SAParams {
    int cluster_capacity = 3;  // drug types per cluster
    double threshold = 0.01;   // minimum similarity to chain into a cluster
};

inline void validate_sa_params(const SAParams& p) {
    if (p.cluster_capacity < 1) throw ValidationError("cluster capacity must be >= 1");
    if (p.threshold < 0.0 || p.threshold > 1.0)
        throw ValidationError("similarity threshold must lie in [0,1]");
}

// Checks a Stage-I result against its defining constraints: every drug's bins
// are fully placed, no machine exceeds capacity, and per-machine bin counts
// are positive exactly where the drug is present.
inline void validate_grouping(const Grouping& g, const DrugCatalog& catalog, int bins_per_machine) {
    std::vector<int> placed(static_cast<std::size_t>(catalog.drug_count()) + 1, 0);
    for (int r = 1; r <= g.machine_count(); ++r) {
        std::int64_t load = 0;
        for (const auto& [k, b] : g.machine_bins[static_cast<std::size_t>(r - 1)]) {
            if (k < 1 || k > catalog.drug_count())
                throw ValidationError("grouping references unknown drug " + std::to_string(k));
            if (b < 1)
                throw ValidationError("drug " + std::to_string(k) + " has non-positive bins on machine " +
                                      std::to_string(r));
            if (b > bins_per_machine)
                throw ValidationError("drug " + std::to_string(k) + " exceeds machine capacity on machine " +
                                      std::to_string(r));
            placed[static_cast<std::size_t>(k)] += b;
            load += b;
        }
        if (load > bins_per_machine)
            throw ValidationError("machine " + std::to_string(r) + " over capacity: " +
                                  std::to_string(load) + " > " + std::to_string(bins_per_machine));
    }
    for (DrugId k = 1; k <= catalog.drug_count(); ++k)
        if (placed[static_cast<std::size_t>(k)] != catalog.record(k).bin_count)
            throw ValidationError("drug " + std::to_string(k) + " has " +
                                  std::to_string(placed[static_cast<std::size_t>(k)]) +
                                  " bins placed, expected " +
                                  std::to_string(catalog.record(k).bin_count));
}

// Summed similarity over co-resident pairs, counted once per shared machine.
inline double grouping_objective(const Grouping& g, const SimilarityMatrix& sim) {
    double total = 0.0;
    for (const auto& machine : g.machine_bins) {
        std::vector<DrugId> drugs;
        for (const auto& [k, b] : machine)
            if (b > 0) drugs.push_back(k);
        for (std::size_t i = 0; i < drugs.size(); ++i)
            for (std::size_t j = i + 1; j < drugs.size(); ++j) total += sim.at(drugs[i], drugs[j]);
    }
    return total;
}

namespace detail {

// Feasibility of topping the one-bin-per-presence minimum up to the full bin
// counts: a tiny max-flow from drugs (slack supply) to machines (residual
// capacity). Returns per-(drug,machine) extra bins, or nullopt if infeasible.
class SlackFlow {
public:
    SlackFlow(int drugs, int machines) : k_(drugs), r_(machines) {
        const int nodes = 2 + k_ + r_;
        cap_.assign(static_cast<std::size_t>(nodes) * nodes, 0);
    }

    void set_supply(int drug, std::int64_t slack) { at(0, 1 + drug) = slack; }
    void set_edge(int drug, int machine, std::int64_t cap) { at(1 + drug, 1 + k_ + machine) = cap; }
    void set_capacity(int machine, std::int64_t residual) {
        at(1 + k_ + machine, 1 + k_ + r_) = residual;
    }

    std::optional<std::vector<std::vector<std::int64_t>>> solve(std::int64_t need) {
        const int n = 2 + k_ + r_;
        const int src = 0, dst = 1 + k_ + r_;
        std::int64_t flow = 0;
        std::vector<int> prev(static_cast<std::size_t>(n));
        while (flow < need) {
            std::fill(prev.begin(), prev.end(), -1);
            prev[static_cast<std::size_t>(src)] = src;
            std::vector<int> queue{src};
            for (std::size_t qi = 0; qi < queue.size() && prev[static_cast<std::size_t>(dst)] < 0; ++qi) {
                const int v = queue[qi];
                for (int w = 0; w < n; ++w)
                    if (prev[static_cast<std::size_t>(w)] < 0 && at(v, w) > 0) {
                        prev[static_cast<std::size_t>(w)] = v;
                        queue.push_back(w);
                    }
            }
            if (prev[static_cast<std::size_t>(dst)] < 0) break;
            std::int64_t aug = need - flow;
            for (int v = dst; v != src; v = prev[static_cast<std::size_t>(v)])
                aug = std::min(aug, at(prev[static_cast<std::size_t>(v)], v));
            for (int v = dst; v != src; v = prev[static_cast<std::size_t>(v)]) {
                at(prev[static_cast<std::size_t>(v)], v) -= aug;
                at(v, prev[static_cast<std::size_t>(v)]) += aug;
            }
            flow += aug;
        }
        if (flow != need) return std::nullopt;
        std::vector<std::vector<std::int64_t>> extra(
            static_cast<std::size_t>(k_), std::vector<std::int64_t>(static_cast<std::size_t>(r_), 0));
        for (int d = 0; d < k_; ++d)
            for (int m = 0; m < r_; ++m)
                extra[static_cast<std::size_t>(d)][static_cast<std::size_t>(m)] =
                    at(1 + k_ + m, 1 + d);  // residual on the reverse edge equals the flow
        return extra;
    }

private:
    std::int64_t& at(int a, int b) {
        return cap_[static_cast<std::size_t>(a) * (2 + k_ + r_) + static_cast<std::size_t>(b)];
    }

    int k_, r_;
    std::vector<std::int64_t> cap_;
};

// Distributes each drug's bins over its chosen machine set: one bin per
// presence, slack via max-flow. sets[d] holds 0-based machine indices.
inline std::optional<std::vector<std::vector<std::int64_t>>> distribute_bins(
    const std::vector<std::vector<int>>& sets, const DrugCatalog& catalog, int machines,
    int bins_per_machine, int placed_drugs) {
    SlackFlow flow(placed_drugs, machines);
    std::int64_t total_slack = 0;
    std::vector<std::int64_t> min_load(static_cast<std::size_t>(machines), 0);
    for (int d = 0; d < placed_drugs; ++d) {
        const auto& set = sets[static_cast<std::size_t>(d)];
        const std::int64_t slack = catalog.records[static_cast<std::size_t>(d)].bin_count -
                                   static_cast<std::int64_t>(set.size());
        if (slack < 0) return std::nullopt;
        flow.set_supply(d, slack);
        total_slack += slack;
        for (int m : set) {
            flow.set_edge(d, m, slack);
            min_load[static_cast<std::size_t>(m)] += 1;
        }
    }
    for (int m = 0; m < machines; ++m) {
        if (min_load[static_cast<std::size_t>(m)] > bins_per_machine) return std::nullopt;
        flow.set_capacity(m, bins_per_machine - min_load[static_cast<std::size_t>(m)]);
    }
    auto extra = flow.solve(total_slack);
    if (!extra) return std::nullopt;
    for (int d = 0; d < placed_drugs; ++d)
        for (int m : sets[static_cast<std::size_t>(d)])
            (*extra)[static_cast<std::size_t>(d)][static_cast<std::size_t>(m)] += 1;
    return extra;
}

inline Grouping grouping_from_sets(const std::vector<std::vector<int>>& sets,
                                   const DrugCatalog& catalog, int machines,
                                   int bins_per_machine) {
    auto bins = distribute_bins(sets, catalog, machines, bins_per_machine, catalog.drug_count());
    if (!bins) throw CapacityError("bin distribution infeasible for the chosen grouping");
    Grouping g;
    g.machine_bins.resize(static_cast<std::size_t>(machines));
    for (int d = 0; d < catalog.drug_count(); ++d)
        for (int m = 0; m < machines; ++m)
            if ((*bins)[static_cast<std::size_t>(d)][static_cast<std::size_t>(m)] > 0)
                g.machine_bins[static_cast<std::size_t>(m)][d + 1] =
                    static_cast<int>((*bins)[static_cast<std::size_t>(d)][static_cast<std::size_t>(m)]);
    return g;
}

}  // namespace detail

// Certified-optimal Stage-I grouping for small instances. Depth-first search
// over per-drug machine sets in lexicographic order of the presence row
// (treating (x_{k,1},..,x_{k,R}) as a binary string), so the first optimum
// found is the lexicographically smallest presence matrix; a pairwise upper
// bound prunes the rest.
inline Grouping group_scattered_exact(const DrugCatalog& catalog, const SimilarityMatrix& sim,
                                      int machines, int bins_per_machine) {
    const int K = catalog.drug_count();
    if (K > 12 || machines > 3)
        throw ScaleGuardError("exact grouping guard is K <= 12, R <= 3; use heuristic");
    if (machines < 1) throw ValidationError("need at least one machine");
    if (catalog.total_bins() > static_cast<std::int64_t>(machines) * bins_per_machine)
        throw CapacityError("total bins exceed fleet capacity");

    // Per-drug options: nonempty machine subsets, at most b_k machines (one
    // bin per presence) and at least ceil(b_k / Q) machines, in presence-row
    // lexicographic order.
    std::vector<std::vector<std::vector<int>>> options(static_cast<std::size_t>(K));
    for (DrugId k = 1; k <= K; ++k) {
        const int b = catalog.record(k).bin_count;
        std::vector<std::pair<std::string, std::vector<int>>> rows;
        for (int mask = 1; mask < (1 << machines); ++mask) {
            std::vector<int> set;
            std::string row(static_cast<std::size_t>(machines), '0');
            for (int m = 0; m < machines; ++m)
                if (mask & (1 << m)) {
                    set.push_back(m);
                    row[static_cast<std::size_t>(m)] = '1';
                }
            const int sz = static_cast<int>(set.size());
            if (sz <= b && static_cast<std::int64_t>(b) <= static_cast<std::int64_t>(sz) * bins_per_machine)
                rows.emplace_back(row, set);
        }
        std::sort(rows.begin(), rows.end());
        for (auto& [row, set] : rows) options[static_cast<std::size_t>(k - 1)].push_back(set);
        if (options[static_cast<std::size_t>(k - 1)].empty())
            throw CapacityError("drug " + std::to_string(k) + " cannot fit any machine set");
    }

    // Upper bound on similarity still reachable once the first d drugs are
    // fixed: each open pair can co-reside at most min(b_i, b_j, R) times.
    std::vector<double> bound(static_cast<std::size_t>(K) + 1, 0.0);
    for (int d = K - 1; d >= 0; --d) {
        double extra = 0.0;
        const DrugId j = d + 1;  // pairs whose larger index is j stay open at depth < j
        for (DrugId i = 1; i < j; ++i)
            extra += sim.at(i, j) * std::min({catalog.record(i).bin_count,
                                              catalog.record(j).bin_count, machines});
        bound[static_cast<std::size_t>(d)] = bound[static_cast<std::size_t>(d + 1)] + extra;
    }

    constexpr double kTie = 1e-9;
    std::vector<std::vector<int>> chosen(static_cast<std::size_t>(K));
    std::vector<std::vector<int>> best_sets;
    double best_obj = -1.0;

    auto dfs = [&](auto&& self, int depth, double obj) -> void {
        if (best_obj >= 0.0 && obj + bound[static_cast<std::size_t>(depth)] <= best_obj + kTie)
            return;
        if (depth == K) {
            if (!detail::distribute_bins(chosen, catalog, machines, bins_per_machine, K)) return;
            if (obj > best_obj + kTie) {
                best_obj = obj;
                best_sets = chosen;
            }
            return;
        }
        for (const auto& set : options[static_cast<std::size_t>(depth)]) {
            chosen[static_cast<std::size_t>(depth)] = set;
            // Quick reject: one bin per presence already over capacity, or the
            // committed drugs' slack no longer distributable.
            if (!detail::distribute_bins(chosen, catalog, machines, bins_per_machine, depth + 1))
                continue;
            double gain = 0.0;
            for (int d = 0; d < depth; ++d) {
                int shared = 0;
                for (int m : chosen[static_cast<std::size_t>(d)])
                    if (std::find(set.begin(), set.end(), m) != set.end()) ++shared;
                gain += sim.at(d + 1, depth + 1) * shared;
            }
            self(self, depth + 1, obj + gain);
        }
        chosen[static_cast<std::size_t>(depth)].clear();
    };
    dfs(dfs, 0, 0.0);

    if (best_obj < 0.0) throw CapacityError("no feasible grouping exists");
    Grouping g = detail::grouping_from_sets(best_sets, catalog, machines, bins_per_machine);
    g.objective_value = grouping_objective(g, sim);
    return g;
}

namespace detail {

struct GroupingState {
    int machines;
    int capacity;
    std::vector<std::map<DrugId, int>> bins;  // per machine
    std::vector<std::int64_t> load;

    explicit GroupingState(int r, int q)
        : machines(r), capacity(q), bins(static_cast<std::size_t>(r)),
          load(static_cast<std::size_t>(r), 0) {}

    bool present(int m, DrugId k) const {
        auto it = bins[static_cast<std::size_t>(m)].find(k);
        return it != bins[static_cast<std::size_t>(m)].end() && it->second > 0;
    }

    double neighbour_sim(DrugId k, int m, const SimilarityMatrix& sim, DrugId skip = 0) const {
        double s = 0.0;
        for (const auto& [other, b] : bins[static_cast<std::size_t>(m)])
            if (other != k && other != skip && b > 0) s += sim.at(k, other);
        return s;
    }
};

// Greedy seeding: drugs in the given order, each preferring the machine whose
// residents it resembles most; bins split onward only when that machine runs
// out of space. allow_split = false demands one machine per drug.
inline bool greedy_seed(GroupingState& st, const std::vector<DrugId>& order,
                        const DrugCatalog& catalog, const SimilarityMatrix& sim,
                        bool allow_split) {
    for (DrugId k : order) {
        int remaining = catalog.record(k).bin_count;
        while (remaining > 0) {
            int best = -1;
            double best_score = -1.0;
            std::int64_t best_free = -1;
            for (int m = 0; m < st.machines; ++m) {
                const std::int64_t free = st.capacity - st.load[static_cast<std::size_t>(m)];
                if (free <= 0) continue;
                if (!allow_split && free < remaining) continue;
                const double score = st.neighbour_sim(k, m, sim);
                if (score > best_score || (score == best_score && free > best_free)) {
                    best = m;
                    best_score = score;
                    best_free = free;
                }
            }
            if (best < 0) return false;
            const int amount = static_cast<int>(std::min<std::int64_t>(
                remaining, st.capacity - st.load[static_cast<std::size_t>(best)]));
            st.bins[static_cast<std::size_t>(best)][k] += amount;
            st.load[static_cast<std::size_t>(best)] += amount;
            remaining -= amount;
        }
    }
    return true;
}

// First-improvement local search over single-block relocations and pairwise
// block swaps; stops after a clean sweep or 10,000 accepted moves.
inline void improve(GroupingState& st, const SimilarityMatrix& sim) {
    constexpr double kEps = 1e-12;
    constexpr int kMoveCap = 10'000;
    int moves = 0;
    bool improved = true;
    while (improved && moves < kMoveCap) {
        improved = false;
        std::vector<std::pair<int, DrugId>> blocks;
        for (int m = 0; m < st.machines; ++m)
            for (const auto& [k, b] : st.bins[static_cast<std::size_t>(m)])
                if (b > 0) blocks.emplace_back(m, k);

        // Relocations.
        for (const auto& [m, k] : blocks) {
            auto it = st.bins[static_cast<std::size_t>(m)].find(k);
            if (it == st.bins[static_cast<std::size_t>(m)].end() || it->second == 0) continue;
            const int b = it->second;
            for (int m2 = 0; m2 < st.machines && moves < kMoveCap; ++m2) {
                if (m2 == m) continue;
                if (st.load[static_cast<std::size_t>(m2)] + b > st.capacity) continue;
                const double delta = (st.present(m2, k) ? 0.0 : st.neighbour_sim(k, m2, sim)) -
                                     st.neighbour_sim(k, m, sim);
                if (delta > kEps) {
                    st.bins[static_cast<std::size_t>(m)].erase(k);
                    st.load[static_cast<std::size_t>(m)] -= b;
                    st.bins[static_cast<std::size_t>(m2)][k] += b;
                    st.load[static_cast<std::size_t>(m2)] += b;
                    ++moves;
                    improved = true;
                    break;
                }
            }
        }

        // Swaps.
        for (std::size_t i = 0; i < blocks.size() && moves < kMoveCap; ++i) {
            for (std::size_t j = i + 1; j < blocks.size() && moves < kMoveCap; ++j) {
                const auto [m1, k1] = blocks[i];
                const auto [m2, k2] = blocks[j];
                if (m1 == m2 || k1 == k2) continue;
                auto it1 = st.bins[static_cast<std::size_t>(m1)].find(k1);
                auto it2 = st.bins[static_cast<std::size_t>(m2)].find(k2);
                if (it1 == st.bins[static_cast<std::size_t>(m1)].end() || it1->second == 0) continue;
                if (it2 == st.bins[static_cast<std::size_t>(m2)].end() || it2->second == 0) continue;
                const int b1 = it1->second;
                const int b2 = it2->second;
                if (st.load[static_cast<std::size_t>(m1)] - b1 + b2 > st.capacity) continue;
                if (st.load[static_cast<std::size_t>(m2)] - b2 + b1 > st.capacity) continue;
                double delta = -st.neighbour_sim(k1, m1, sim) - st.neighbour_sim(k2, m2, sim);
                if (!st.present(m1, k2)) delta += st.neighbour_sim(k2, m1, sim, k1);
                if (!st.present(m2, k1)) delta += st.neighbour_sim(k1, m2, sim, k2);
                if (delta > kEps) {
                    st.bins[static_cast<std::size_t>(m1)].erase(k1);
                    st.load[static_cast<std::size_t>(m1)] -= b1;
                    st.bins[static_cast<std::size_t>(m2)].erase(k2);
                    st.load[static_cast<std::size_t>(m2)] -= b2;
                    st.bins[static_cast<std::size_t>(m1)][k2] += b2;
                    st.load[static_cast<std::size_t>(m1)] += b2;
                    st.bins[static_cast<std::size_t>(m2)][k1] += b1;
                    st.load[static_cast<std::size_t>(m2)] += b1;
                    ++moves;
                    improved = true;
                }
            }
        }
    }
}

inline Grouping run_grouping_heuristic(const DrugCatalog& catalog, const SimilarityMatrix& sim,
                                       int machines, int bins_per_machine, std::uint64_t seed,
                                       bool allow_split) {
    const int K = catalog.drug_count();
    std::vector<DrugId> base_order(static_cast<std::size_t>(K));
    std::iota(base_order.begin(), base_order.end(), 1);
    std::sort(base_order.begin(), base_order.end(), [&](DrugId a, DrugId b) {
        const auto fa = catalog.record(a).demand_frequency;
        const auto fb = catalog.record(b).demand_frequency;
        return fa != fb ? fa > fb : a < b;
    });

    std::mt19937_64 rng(seed);
    std::optional<Grouping> best;
    constexpr int kAttempts = 3;
    for (int attempt = 0; attempt < kAttempts; ++attempt) {
        std::vector<DrugId> order = base_order;
        if (attempt > 0) std::shuffle(order.begin(), order.end(), rng);
        GroupingState st(machines, bins_per_machine);
        if (!greedy_seed(st, order, catalog, sim, allow_split)) {
            if (allow_split) continue;
            // Capacity-first fallback: biggest drugs first, tightest fit.
            GroupingState bfd(machines, bins_per_machine);
            std::vector<DrugId> by_size = base_order;
            std::sort(by_size.begin(), by_size.end(), [&](DrugId a, DrugId b) {
                const int ba = catalog.record(a).bin_count;
                const int bb = catalog.record(b).bin_count;
                return ba != bb ? ba > bb : a < b;
            });
            bool ok = true;
            for (DrugId k : by_size) {
                const int b = catalog.record(k).bin_count;
                int pick = -1;
                std::int64_t tightest = -1;
                for (int m = 0; m < machines; ++m) {
                    const std::int64_t free = bfd.capacity - bfd.load[static_cast<std::size_t>(m)];
                    if (free < b) continue;
                    if (pick < 0 || free - b < tightest) {
                        pick = m;
                        tightest = free - b;
                    }
                }
                if (pick < 0) {
                    ok = false;
                    break;
                }
                bfd.bins[static_cast<std::size_t>(pick)][k] = b;
                bfd.load[static_cast<std::size_t>(pick)] += b;
            }
            if (!ok) continue;
            st = std::move(bfd);
        }
        improve(st, sim);
        Grouping g;
        g.machine_bins = st.bins;
        g.objective_value = grouping_objective(g, sim);
        if (!best || g.objective_value > best->objective_value + 1e-12) best = std::move(g);
    }
    if (!best) throw CapacityError("cannot pack drugs into machines");
    return *best;
}

}  // namespace detail

// Large-scale Stage-I grouping with scattered storage. Feasible whenever the
// fleet has room for every bin; deterministic for a fixed seed.
inline Grouping group_scattered_heuristic(const DrugCatalog& catalog, const SimilarityMatrix& sim,
                                          int machines, int bins_per_machine, std::uint64_t seed) {
    if (machines < 1) throw ValidationError("need at least one machine");
    if (catalog.total_bins() > static_cast<std::int64_t>(machines) * bins_per_machine)
        throw CapacityError("total bins exceed fleet capacity");
    return detail::run_grouping_heuristic(catalog, sim, machines, bins_per_machine, seed, true);
}

// Stage-I grouping without scattered storage: each drug's bins stay on one
// machine.
inline Grouping group_dedicated(const DrugCatalog& catalog, const SimilarityMatrix& sim,
                                int machines, int bins_per_machine, std::uint64_t seed) {
    if (machines < 1) throw ValidationError("need at least one machine");
    for (DrugId k = 1; k <= catalog.drug_count(); ++k)
        if (catalog.record(k).bin_count > bins_per_machine)
            throw CapacityError("drug " + std::to_string(k) +
                                " needs more bins than one machine holds");
    if (catalog.total_bins() > static_cast<std::int64_t>(machines) * bins_per_machine)
        throw CapacityError("total bins exceed fleet capacity");
    return detail::run_grouping_heuristic(catalog, sim, machines, bins_per_machine, seed, false);
}

namespace detail {

inline std::vector<Location> locations_by_io_time(const MachineLayout& layout) {
    auto locs = layout.storage_locations();
    std::sort(locs.begin(), locs.end(), [&](const Location& a, const Location& b) {
        const double ta = min_io_time(a, layout);
        const double tb = min_io_time(b, layout);
        return ta != tb ? ta < tb : a < b;
    });
    return locs;
}

inline std::vector<DrugId> drugs_by_per_bin_frequency(const std::map<DrugId, int>& machine_bins,
                                                      const DrugCatalog& catalog) {
    std::vector<DrugId> drugs;
    for (const auto& [k, b] : machine_bins)
        if (b > 0) drugs.push_back(k);
    std::sort(drugs.begin(), drugs.end(), [&](DrugId a, DrugId b) {
        const double ea = catalog.record(a).per_bin_frequency();
        const double eb = catalog.record(b).per_bin_frequency();
        return ea != eb ? ea > eb : a < b;
    });
    return drugs;
}

}  // namespace detail

// Stage-II clustered allocation for one machine. Locations are consumed in
// ascending time to the nearer I/O point. The highest per-bin-demand drug
// seeds a cluster; while the cluster has room, the unplaced drug most similar
// to the seed joins (ties: higher per-bin demand, then lower id) provided the
// similarity clears the threshold, otherwise the highest-demand drug is taken
// instead. Returned slots are in placement order.
inline std::vector<Assignment::Slot> locate_sa(const std::map<DrugId, int>& machine_bins,
                                               const SimilarityMatrix& sim,
                                               const DrugCatalog& catalog,
                                               const MachineLayout& layout, const SAParams& params) {
    validate_sa_params(params);
    auto locations = detail::locations_by_io_time(layout);
    std::int64_t needed = 0;
    for (const auto& [k, b] : machine_bins) needed += b;
    if (needed > static_cast<std::int64_t>(locations.size()))
        throw CapacityError("machine needs " + std::to_string(needed) + " bins but has " +
                            std::to_string(locations.size()) + " storage locations");

    std::vector<DrugId> queue = detail::drugs_by_per_bin_frequency(machine_bins, catalog);
    std::vector<Assignment::Slot> out;
    std::size_t next_loc = 0;
    auto place = [&](DrugId k) {
        const int b = machine_bins.at(k);
        for (int i = 0; i < b; ++i) out.push_back({locations[next_loc++], k});
    };

    while (!queue.empty()) {
        const DrugId seed = queue.front();
        queue.erase(queue.begin());
        place(seed);
        int room = params.cluster_capacity - 1;
        while (room > 0 && !queue.empty() && next_loc < locations.size()) {
            double best_sim = -1.0;
            for (DrugId k : queue) best_sim = std::max(best_sim, sim.at(seed, k));
            std::size_t pick = 0;
            if (best_sim >= params.threshold) {
                // Most similar to the seed; ties by per-bin demand then id.
                bool found = false;
                for (std::size_t i = 0; i < queue.size(); ++i) {
                    if (sim.at(seed, queue[i]) != best_sim) continue;
                    if (!found) {
                        pick = i;
                        found = true;
                        continue;
                    }
                    const double ei = catalog.record(queue[i]).per_bin_frequency();
                    const double ep = catalog.record(queue[pick]).per_bin_frequency();
                    if (ei > ep || (ei == ep && queue[i] < queue[pick])) pick = i;
                }
            }
            const DrugId chosen = queue[pick];
            queue.erase(queue.begin() + static_cast<std::ptrdiff_t>(pick));
            place(chosen);
            --room;
        }
    }
    return out;
}

// Stage-II frequency allocation for one machine: drugs by descending per-bin
// demand (ties: lower id) into the cheapest remaining locations.
inline std::vector<Assignment::Slot> locate_frequency(const std::map<DrugId, int>& machine_bins,
                                                      const DrugCatalog& catalog,
                                                      const MachineLayout& layout) {
    auto locations = detail::locations_by_io_time(layout);
    std::int64_t needed = 0;
    for (const auto& [k, b] : machine_bins) needed += b;
    if (needed > static_cast<std::int64_t>(locations.size()))
        throw CapacityError("machine needs " + std::to_string(needed) + " bins but has " +
                            std::to_string(locations.size()) + " storage locations");

    std::vector<Assignment::Slot> out;
    std::size_t next_loc = 0;
    for (DrugId k : detail::drugs_by_per_bin_frequency(machine_bins, catalog))
        for (int i = 0; i < machine_bins.at(k); ++i) out.push_back({locations[next_loc++], k});
    return out;
}

// Full pipeline for one strategy: Stage I then per-machine Stage II. Slots in
// the result are sorted by location, so equal inputs yield identical bytes.
inline Assignment slot(StrategyId strategy, const DrugCatalog& catalog, const SimilarityMatrix& sim,
                       int machines, const MachineLayout& layout, const SAParams& params,
                       std::uint64_t seed) {
    validate_catalog(catalog);
    const int q = layout.storage_bins();
    Grouping grouping = uses_scattered_grouping(strategy)
                            ? group_scattered_heuristic(catalog, sim, machines, q, seed)
                            : group_dedicated(catalog, sim, machines, q, seed);
    validate_grouping(grouping, catalog, q);

    Assignment assignment;
    assignment.machines.resize(static_cast<std::size_t>(machines));
    for (int r = 1; r <= machines; ++r) {
        const auto& bins = grouping.machine_bins[static_cast<std::size_t>(r - 1)];
        auto slots = uses_clustered_allocation(strategy)
                         ? locate_sa(bins, sim, catalog, layout, params)
                         : locate_frequency(bins, catalog, layout);
        std::sort(slots.begin(), slots.end());
        assignment.machines[static_cast<std::size_t>(r - 1)] = std::move(slots);
    }
    return assignment;
}

inline void validate_assignment(const Assignment& assignment, const MachineLayout& layout,
                                const DrugCatalog& catalog) {
    for (int r = 1; r <= assignment.machine_count(); ++r) {
        std::vector<Location> seen;
        for (const auto& s : assignment.machine(r)) {
            if (!layout.in_bounds(s.loc))
                throw ValidationError("machine " + std::to_string(r) + " has a slot out of bounds");
            if (layout.is_io(s.loc))
                throw ValidationError("machine " + std::to_string(r) + " assigns a drug to an I/O point");
            if (s.drug < 1 || s.drug > catalog.drug_count())
                throw ValidationError("machine " + std::to_string(r) + " references unknown drug " +
                                      std::to_string(s.drug));
            seen.push_back(s.loc);
        }
        std::sort(seen.begin(), seen.end());
        if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
            throw ValidationError("machine " + std::to_string(r) + " assigns one location twice");
    }
}

inline void write_assignment_csv(const Assignment& assignment, std::ostream& out) {
    out << "machine,side,row,col,drug_id\n";
    for (int r = 1; r <= assignment.machine_count(); ++r) {
        auto slots = assignment.machine(r);
        std::sort(slots.begin(), slots.end());
        for (const auto& s : slots)
            out << r << "," << s.loc.side << "," << s.loc.row << "," << s.loc.col << "," << s.drug
                << "\n";
    }
}

inline void write_assignment_csv(const Assignment& assignment, const std::string& path) {
    auto out = csv::open_output(path);
    write_assignment_csv(assignment, out);
}

inline Assignment read_assignment_csv(std::istream& in, const std::string& path = "<stream>") {
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ": empty file");
    auto idx = csv::header_indices(csv::split(line), {"machine", "side", "row", "col", "drug_id"},
                                   path);
    Assignment assignment;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (csv::trim(line).empty()) continue;
        auto fields = csv::split(line);
        if (fields.size() < 5)
            throw ParseError(path + ": line " + std::to_string(line_no) + ": expected 5 fields");
        const int machine = static_cast<int>(csv::parse_int(fields[idx[0]], "machine", line_no));
        Assignment::Slot slot;
        slot.loc.side = static_cast<int>(csv::parse_int(fields[idx[1]], "side", line_no));
        slot.loc.row = static_cast<int>(csv::parse_int(fields[idx[2]], "row", line_no));
        slot.loc.col = static_cast<int>(csv::parse_int(fields[idx[3]], "col", line_no));
        slot.drug = static_cast<DrugId>(csv::parse_int(fields[idx[4]], "drug_id", line_no));
        if (machine < 1) throw ParseError(path + ": line " + std::to_string(line_no) +
                                          ": machine must be >= 1");
        if (assignment.machine_count() < machine)
            assignment.machines.resize(static_cast<std::size_t>(machine));
        assignment.machines[static_cast<std::size_t>(machine - 1)].push_back(slot);
    }
    for (auto& m : assignment.machines) std::sort(m.begin(), m.end());
    return assignment;
}

inline Assignment read_assignment_csv(const std::string& path) {
    auto in = csv::open_input(path);
    return read_assignment_csv(in, path);
}

}  // namespace adds
