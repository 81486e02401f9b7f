#pragma once

// Picking model: crane travel kernels, expected pharmacist-overlap timing,
// order splitting across machines, per-machine routing, and the order-stream
// simulator producing evaluation metrics.
//
// Per-machine timeline for a sub-order of n drugs, alternating I/O points
// (odd positions at I/O 1, even at I/O 2; I/O 1 takes the extra drug when n
// is odd):
//   n = 1:  round trip to the single drug.
//   n = 2:  first round trip, then the second round trip overlapping the
//           first sort.
//   n >= 3: two opening round trips, n-2 dual-command legs (return bin k-2,
//           fetch bin k at the same I/O point), then the two closing return
//           trips; every sort except none overlaps a robot leg, and the very
//           last return runs after all sorting is done.
// All overlaps are valued as E[max(X, t)] for X ~ N(mu, sigma^2).

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "adds/csv.hpp"
#include "adds/model.hpp"

#include "json.hpp"

namespace adds {

// Chebyshev travel: both axes move simultaneously at the same speed, so the
// trip takes the slower axis. Sides share the one crane and cost nothing.
inline double one_way_time(const Location& a, const Location& b, const MachineLayout& layout) {
    const double dr = std::abs(a.row - b.row) * layout.row_pitch;
    const double dc = std::abs(a.col - b.col) * layout.col_pitch;
    return std::max(dr, dc) / layout.speed;
}

// Dual command circuit io -> i -> j -> io; i == j degenerates to a round trip.
inline double dual_command_time(const Location& i, const Location& j, const Location& io,
                                const MachineLayout& layout) {
    return one_way_time(io, i, layout) + one_way_time(i, j, layout) +
           one_way_time(j, io, layout);
}

// Single-command one-way time to the nearer of the two I/O points; the key
// used to rank locations during slotting.
inline double min_io_time(const Location& l, const MachineLayout& layout) {
    return std::min(one_way_time(layout.io_points[0], l, layout),
                    one_way_time(layout.io_points[1], l, layout));
}

namespace detail {
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
inline double normal_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::acos(-1.0));
}
}  // namespace detail

// E[max(X, t)] for X ~ N(mu, sigma^2) over the full support:
//   t * Phi(z) + mu * (1 - Phi(z)) + sigma * phi(z),  z = (t - mu) / sigma.
// sigma = 0 collapses to max(mu, t).
inline double expected_max_sort(double t, const PickerModel& picker) {
    if (picker.std_dev < 0) throw ValidationError("picker std_dev must be non-negative");
    if (t < 0) throw ValidationError("expected_max_sort requires t >= 0");
    if (picker.std_dev == 0.0) return std::max(picker.mean, t);
    const double z = (t - picker.mean) / picker.std_dev;
    const double cdf = detail::normal_cdf(z);
    return t * cdf + picker.mean * (1.0 - cdf) + picker.std_dev * detail::normal_pdf(z);
}

struct RouteStop {
    DrugId drug = 0;
    Location loc;
    std::size_t slot = 0;  // index into Assignment::machine(r)
    int dosage = 0;
};

struct MachineRoute {
    int machine = 0;
    std::vector<RouteStop> sequence;  // delivery order; position p served at I/O (p % 2)
    std::vector<double> legs;         // robot leg times in timeline order
    double expected_time = 0.0;
};

struct RouteTiming {
    std::vector<double> legs;
    double expected_time = 0.0;
};

inline RouteTiming compute_route_timing(const std::vector<Location>& seq,
                                        const MachineLayout& layout, const PickerModel& picker) {
    RouteTiming t;
    const std::size_t n = seq.size();
    if (n == 0) return t;
    auto io = [&](std::size_t pos) { return layout.io_points[pos % 2]; };
    auto round_trip = [&](std::size_t pos) { return 2.0 * one_way_time(io(pos), seq[pos], layout); };

    t.legs.push_back(round_trip(0));
    if (n == 1) {
        t.expected_time = t.legs[0];
        return t;
    }
    t.legs.push_back(round_trip(1));
    if (n == 2) {
        t.expected_time = t.legs[0] + expected_max_sort(t.legs[1], picker);
        return t;
    }
    for (std::size_t k = 2; k < n; ++k)
        t.legs.push_back(dual_command_time(seq[k - 2], seq[k], io(k), layout));
    t.legs.push_back(round_trip(n - 2));  // return the second-to-last bin
    t.legs.push_back(round_trip(n - 1));  // return the last bin, no sort left

    double total = t.legs[0] + expected_max_sort(t.legs[1], picker);
    for (std::size_t i = 2; i <= n; ++i) total += expected_max_sort(t.legs[i], picker);
    total += t.legs[n + 1];
    t.expected_time = total;
    return t;
}

// Realized duration of an already-chosen route with sorting times sampled per
// sort. Validation aid for the analytic expectations.
template <class Rng>
double realized_route_time(const MachineRoute& route, const PickerModel& picker, Rng& rng) {
    std::normal_distribution<double> sort(picker.mean, picker.std_dev);
    auto draw = [&] { return picker.std_dev == 0.0 ? picker.mean : sort(rng); };
    const std::size_t n = route.sequence.size();
    if (n == 0) return 0.0;
    if (n == 1) return route.legs[0];
    if (n == 2) return route.legs[0] + std::max(draw(), route.legs[1]);
    double total = route.legs[0] + std::max(draw(), route.legs[1]);
    for (std::size_t i = 2; i <= n; ++i) total += std::max(draw(), route.legs[i]);
    total += route.legs[n + 1];
    return total;
}

struct RoutingOptions {
    // Hard size guard on the exact search plus a cap on enumerated timelines;
    // above either, route_machine_exact refuses and the caller falls back.
    int exact_max_drugs = 7;
    std::uint64_t exact_budget = 2'000'000;
    // Tighter cap used on the simulation path where throughput matters.
    std::uint64_t auto_budget = 30'000;
    // Adds E[X] for the sort the timeline leaves uncovered (n <= 2 only).
    bool tail_sort = false;
};

namespace detail {

struct Candidate {
    Location loc;
    std::size_t slot = 0;
};

// Feasible bins per sub-order line: the machine's bins holding the drug with
// enough remaining stock for the full dosage.
inline std::vector<std::vector<Candidate>> feasible_candidates(
    const std::vector<OrderLine>& sub, const Assignment& assignment, int machine,
    const StockState& stock) {
    const auto& slots = assignment.machine(machine);
    std::vector<std::vector<Candidate>> cands(sub.size());
    for (std::size_t d = 0; d < sub.size(); ++d) {
        for (std::size_t s = 0; s < slots.size(); ++s) {
            if (slots[s].drug == sub[d].drug && stock.at(machine, s) >= sub[d].dosage)
                cands[d].push_back({slots[s].loc, s});
        }
        if (cands[d].empty())
            throw StockoutError("drug " + std::to_string(sub[d].drug) +
                                " has no stocked bin on machine " + std::to_string(machine) +
                                " covering dosage " + std::to_string(sub[d].dosage));
    }
    return cands;
}

inline MachineRoute make_route(int machine, const std::vector<OrderLine>& sub,
                               const std::vector<std::size_t>& drug_order,
                               const std::vector<Candidate>& picks,
                               const MachineLayout& layout, const PickerModel& picker) {
    MachineRoute route;
    route.machine = machine;
    std::vector<Location> seq;
    seq.reserve(drug_order.size());
    for (std::size_t pos = 0; pos < drug_order.size(); ++pos) {
        const std::size_t d = drug_order[pos];
        route.sequence.push_back({sub[d].drug, picks[d].loc, picks[d].slot, sub[d].dosage});
        seq.push_back(picks[d].loc);
    }
    auto timing = compute_route_timing(seq, layout, picker);
    route.legs = std::move(timing.legs);
    route.expected_time = timing.expected_time;
    return route;
}

}  // namespace detail

// Exact routing: enumerates one feasible bin per drug, the balanced split of
// drugs between the two I/O points (I/O 1 takes the extra one when n is odd)
// and the visit order on each side; keeps the first timeline attaining the
// minimum expected time. Throws ScaleGuardError above the size/budget guard.
inline MachineRoute route_machine_exact(const std::vector<OrderLine>& sub,
                                        const Assignment& assignment, int machine,
                                        const StockState& stock, const PickerModel& picker,
                                        const MachineLayout& layout,
                                        const RoutingOptions& opts = {}) {
    const std::size_t n = sub.size();
    if (n == 0) throw ValidationError("empty sub-order");
    if (static_cast<int>(n) > opts.exact_max_drugs)
        throw ScaleGuardError("sub-order of " + std::to_string(n) +
                              " drugs exceeds the exact guard; use greedy routing");

    auto cands = detail::feasible_candidates(sub, assignment, machine, stock);

    std::uint64_t combos = 1;
    for (const auto& c : cands) combos *= c.size();
    std::uint64_t perms = 1;
    for (std::size_t i = 2; i <= n; ++i) perms *= i;
    if (combos > opts.exact_budget / std::max<std::uint64_t>(perms, 1))
        throw ScaleGuardError("exact routing enumeration exceeds budget; use greedy routing");

    const std::size_t n1 = (n + 1) / 2;  // drugs served from I/O point 1

    std::optional<MachineRoute> best;
    std::vector<detail::Candidate> picks(n);
    std::vector<std::size_t> choice(n, 0);

    // Lexicographic combination of indices {0..n-1} taken n1 at a time.
    std::vector<std::size_t> side1(n1);
    for (std::size_t i = 0; i < n1; ++i) side1[i] = i;

    auto next_combination = [&]() -> bool {
        if (n1 == 0 || n1 == n) return false;
        std::size_t i = n1;
        while (i > 0) {
            --i;
            if (side1[i] != i + n - n1) {
                ++side1[i];
                for (std::size_t j = i + 1; j < n1; ++j) side1[j] = side1[j - 1] + 1;
                return true;
            }
        }
        return false;
    };

    while (true) {  // bin choice per drug
        for (std::size_t d = 0; d < n; ++d) picks[d] = cands[d][choice[d]];

        bool more_split = true;
        while (more_split) {
            std::vector<std::size_t> side2;
            {
                std::vector<bool> in1(n, false);
                for (auto i : side1) in1[i] = true;
                for (std::size_t i = 0; i < n; ++i)
                    if (!in1[i]) side2.push_back(i);
            }
            std::vector<std::size_t> p1 = side1;
            do {
                std::vector<std::size_t> p2 = side2;
                do {
                    std::vector<std::size_t> order(n);
                    for (std::size_t pos = 0; pos < n; ++pos)
                        order[pos] = (pos % 2 == 0) ? p1[pos / 2] : p2[pos / 2];
                    auto route = detail::make_route(machine, sub, order, picks, layout, picker);
                    if (!best || route.expected_time < best->expected_time) best = std::move(route);
                } while (std::next_permutation(p2.begin(), p2.end()));
            } while (std::next_permutation(p1.begin(), p1.end()));
            more_split = next_combination();
        }
        for (std::size_t i = 0; i < n1; ++i) side1[i] = i;  // reset for next bin choice

        std::size_t d = 0;
        while (d < n && ++choice[d] == cands[d].size()) {
            choice[d] = 0;
            ++d;
        }
        if (d == n) break;
    }
    return *best;
}

// Greedy fallback: fill delivery positions in order, alternating I/O points,
// always appending the (drug, bin) pair with the cheapest next robot leg.
inline MachineRoute route_machine_greedy(const std::vector<OrderLine>& sub,
                                         const Assignment& assignment, int machine,
                                         const StockState& stock, const PickerModel& picker,
                                         const MachineLayout& layout) {
    const std::size_t n = sub.size();
    if (n == 0) throw ValidationError("empty sub-order");
    auto cands = detail::feasible_candidates(sub, assignment, machine, stock);

    std::vector<bool> placed(n, false);
    std::vector<std::size_t> order;
    std::vector<detail::Candidate> picks(n);
    std::vector<Location> seq;
    for (std::size_t pos = 0; pos < n; ++pos) {
        const Location io = layout.io_points[pos % 2];
        double best_cost = std::numeric_limits<double>::infinity();
        std::size_t best_d = n;
        detail::Candidate best_c{};
        for (std::size_t d = 0; d < n; ++d) {
            if (placed[d]) continue;
            for (const auto& c : cands[d]) {
                const double cost =
                    pos < 2 ? 2.0 * one_way_time(io, c.loc, layout)
                            : dual_command_time(seq[pos - 2], c.loc, io, layout);
                const bool better =
                    cost < best_cost ||
                    (cost == best_cost &&
                     (best_d == n || sub[d].drug < sub[best_d].drug ||
                      (sub[d].drug == sub[best_d].drug && c.loc < best_c.loc)));
                if (better) {
                    best_cost = cost;
                    best_d = d;
                    best_c = c;
                }
            }
        }
        placed[best_d] = true;
        picks[best_d] = best_c;
        order.push_back(best_d);
        seq.push_back(best_c.loc);
    }
    return detail::make_route(machine, sub, order, picks, layout, picker);
}

// Exact within the guard and budget, greedy beyond.
inline MachineRoute route_machine_auto(const std::vector<OrderLine>& sub,
                                       const Assignment& assignment, int machine,
                                       const StockState& stock, const PickerModel& picker,
                                       const MachineLayout& layout, const RoutingOptions& opts = {}) {
    RoutingOptions capped = opts;
    capped.exact_budget = opts.auto_budget;
    try {
        return route_machine_exact(sub, assignment, machine, stock, picker, layout, capped);
    } catch (const ScaleGuardError&) {
        return route_machine_greedy(sub, assignment, machine, stock, picker, layout);
    }
}

struct SplitPlan {
    std::int64_t order_id = 0;
    int machine_count = 0;
    std::vector<std::pair<int, std::vector<OrderLine>>> sub_orders;  // sorted by machine id
};

// Splits an order across machines: first minimize the number of machines
// visited, then the summed expected route time, ties to the smallest
// machine-id set. Candidate splits are scored with the same router the
// simulator uses.
inline SplitPlan split_order(const PrescriptionOrder& order, const Assignment& assignment,
                             const StockState& stock, const PickerModel& picker,
                             const MachineLayout& layout, const RoutingOptions& opts = {}) {
    const std::size_t n = order.lines.size();
    if (n == 0) throw ValidationError("order " + std::to_string(order.id) + " has no lines");

    // Machines holding each drug with enough stock in some single bin.
    std::vector<std::vector<int>> stockers(n);
    std::vector<int> union_machines;
    for (std::size_t d = 0; d < n; ++d) {
        for (int r = 1; r <= assignment.machine_count(); ++r) {
            const auto& slots = assignment.machine(r);
            for (std::size_t s = 0; s < slots.size(); ++s) {
                if (slots[s].drug == order.lines[d].drug &&
                    stock.at(r, s) >= order.lines[d].dosage) {
                    stockers[d].push_back(r);
                    break;
                }
            }
        }
        if (stockers[d].empty())
            throw StockoutError("order " + std::to_string(order.id) + ": drug " +
                                std::to_string(order.lines[d].drug) +
                                " is not stocked anywhere with dosage " +
                                std::to_string(order.lines[d].dosage));
        for (int r : stockers[d])
            if (std::find(union_machines.begin(), union_machines.end(), r) == union_machines.end())
                union_machines.push_back(r);
    }
    std::sort(union_machines.begin(), union_machines.end());
    const std::size_t u = union_machines.size();

    auto covers = [&](const std::vector<int>& subset) {
        for (std::size_t d = 0; d < n; ++d) {
            bool ok = false;
            for (int r : stockers[d])
                if (std::find(subset.begin(), subset.end(), r) != subset.end()) ok = true;
            if (!ok) return false;
        }
        return true;
    };

    auto score_assignment = [&](const std::vector<int>& machine_of) -> double {
        double total = 0.0;
        std::vector<int> subset_used;
        for (int r : machine_of)
            if (std::find(subset_used.begin(), subset_used.end(), r) == subset_used.end())
                subset_used.push_back(r);
        for (int r : subset_used) {
            std::vector<OrderLine> sub;
            for (std::size_t d = 0; d < n; ++d)
                if (machine_of[d] == r) sub.push_back(order.lines[d]);
            total += route_machine_auto(sub, assignment, r, stock, picker, layout, opts)
                         .expected_time;
        }
        return total;
    };

    double best_time = std::numeric_limits<double>::infinity();
    std::vector<int> best_machine_of;

    for (std::size_t size = 1; size <= u && best_machine_of.empty(); ++size) {
        // All size-subsets of the machine union in lexicographic order.
        std::vector<std::size_t> idx(size);
        for (std::size_t i = 0; i < size; ++i) idx[i] = i;
        bool more = true;
        bool found_any = false;
        double size_best_time = std::numeric_limits<double>::infinity();
        std::vector<int> size_best_assignment;
        while (more) {
            std::vector<int> subset;
            for (auto i : idx) subset.push_back(union_machines[i]);
            if (covers(subset)) {
                found_any = true;
                // Per-drug machine choices restricted to the subset.
                std::vector<std::vector<int>> choices(n);
                std::uint64_t product = 1;
                for (std::size_t d = 0; d < n; ++d) {
                    for (int r : stockers[d])
                        if (std::find(subset.begin(), subset.end(), r) != subset.end())
                            choices[d].push_back(r);
                    product *= choices[d].size();
                }
                std::vector<int> machine_of(n);
                if (product <= 4096) {
                    std::vector<std::size_t> pick(n, 0);
                    while (true) {
                        for (std::size_t d = 0; d < n; ++d) machine_of[d] = choices[d][pick[d]];
                        const double t = score_assignment(machine_of);
                        if (t < size_best_time) {
                            size_best_time = t;
                            size_best_assignment = machine_of;
                        }
                        std::size_t d = 0;
                        while (d < n && ++pick[d] == choices[d].size()) {
                            pick[d] = 0;
                            ++d;
                        }
                        if (d == n) break;
                    }
                } else {
                    // Large orders: nearest-machine choice per drug.
                    for (std::size_t d = 0; d < n; ++d) {
                        double best_cost = std::numeric_limits<double>::infinity();
                        for (int r : choices[d]) {
                            const auto& slots = assignment.machine(r);
                            for (std::size_t s = 0; s < slots.size(); ++s) {
                                if (slots[s].drug != order.lines[d].drug ||
                                    stock.at(r, s) < order.lines[d].dosage)
                                    continue;
                                const double c = 2.0 * min_io_time(slots[s].loc, layout);
                                if (c < best_cost) {
                                    best_cost = c;
                                    machine_of[d] = r;
                                }
                            }
                        }
                    }
                    const double t = score_assignment(machine_of);
                    if (t < size_best_time) {
                        size_best_time = t;
                        size_best_assignment = machine_of;
                    }
                }
            }
            // advance combination
            more = false;
            std::size_t i = size;
            while (i > 0) {
                --i;
                if (idx[i] != i + u - size) {
                    ++idx[i];
                    for (std::size_t j = i + 1; j < size; ++j) idx[j] = idx[j - 1] + 1;
                    more = true;
                    break;
                }
            }
        }
        if (found_any) {
            best_time = size_best_time;
            best_machine_of = size_best_assignment;
        }
    }

    SplitPlan plan;
    plan.order_id = order.id;
    std::vector<int> used;
    for (int r : best_machine_of)
        if (std::find(used.begin(), used.end(), r) == used.end()) used.push_back(r);
    std::sort(used.begin(), used.end());
    plan.machine_count = static_cast<int>(used.size());
    for (int r : used) {
        std::vector<OrderLine> sub;
        for (std::size_t d = 0; d < n; ++d)
            if (best_machine_of[d] == r) sub.push_back(order.lines[d]);
        plan.sub_orders.emplace_back(r, std::move(sub));
    }
    (void)best_time;
    return plan;
}

struct OrderRecord {
    std::int64_t order_id = 0;
    int order_size = 0;
    int machine_count = 0;
    double expected_time = 0.0;   // summed route expectations
    double penalized_time = 0.0;  // plus the cross-machine penalty
    bool stockout = false;
    std::vector<MachineRoute> routes;
};

// Splits, routes and prices one order, then consumes stock at the visited
// bins. The cross-machine penalty applies once per split order.
inline OrderRecord evaluate_order(const PrescriptionOrder& order, const Assignment& assignment,
                                  StockState& stock, const PickerModel& picker,
                                  const MachineLayout& layout, double cross_penalty,
                                  const RoutingOptions& opts = {}) {
    OrderRecord rec;
    rec.order_id = order.id;
    rec.order_size = order.size();
    SplitPlan plan = split_order(order, assignment, stock, picker, layout, opts);
    rec.machine_count = plan.machine_count;
    for (const auto& [machine, sub] : plan.sub_orders) {
        auto route = route_machine_auto(sub, assignment, machine, stock, picker, layout, opts);
        rec.expected_time += route.expected_time;
        if (opts.tail_sort && sub.size() <= 2) rec.expected_time += picker.mean;
        rec.routes.push_back(std::move(route));
    }
    rec.penalized_time = rec.expected_time + (rec.machine_count >= 2 ? cross_penalty : 0.0);
    for (const auto& route : rec.routes)
        for (const auto& stop : route.sequence) stock.take(route.machine, stop.slot, stop.dosage);
    return rec;
}

struct EvalMetrics {
    std::int64_t order_count = 0;
    std::int64_t fulfilled = 0;
    std::int64_t stockouts = 0;
    std::int64_t cross_machine_orders = 0;
    double avg_pick_time = 0.0;            // mean penalized time over fulfilled orders
    double cross_machine_probability = 0.0;
    std::vector<OrderRecord> records;
};

// Processes orders one by one in arrival sequence against a shared stock
// state. Stockouts are recorded and skipped, never fatal.
inline EvalMetrics simulate(const OrderHistory& history, const Assignment& assignment,
                            const MachineLayout& layout, const PickerModel& picker,
                            double cross_penalty, StockState stock,
                            const RoutingOptions& opts = {}) {
    EvalMetrics m;
    m.order_count = history.size();
    double total = 0.0;
    for (const auto& order : history.orders) {
        OrderRecord rec;
        try {
            rec = evaluate_order(order, assignment, stock, picker, layout, cross_penalty, opts);
        } catch (const StockoutError&) {
            rec.order_id = order.id;
            rec.order_size = order.size();
            rec.stockout = true;
            ++m.stockouts;
            m.records.push_back(std::move(rec));
            continue;
        }
        ++m.fulfilled;
        if (rec.machine_count >= 2) ++m.cross_machine_orders;
        total += rec.penalized_time;
        m.records.push_back(std::move(rec));
    }
    if (m.fulfilled > 0) {
        m.avg_pick_time = total / static_cast<double>(m.fulfilled);
        m.cross_machine_probability =
            static_cast<double>(m.cross_machine_orders) / static_cast<double>(m.fulfilled);
    }
    return m;
}

inline EvalMetrics simulate(const OrderHistory& history, const Assignment& assignment,
                            const MachineLayout& layout, const PickerModel& picker,
                            double cross_penalty, std::int64_t initial_fill,
                            const RoutingOptions& opts = {}) {
    return simulate(history, assignment, layout, picker, cross_penalty,
                    StockState::uniform(assignment, initial_fill), opts);
}

inline void write_order_records_csv(const std::vector<OrderRecord>& records, std::ostream& out) {
    out << "order_id,machine_count,expected_time_s,penalized_time_s,stockout_flag\n";
    char buf[64];
    for (const auto& r : records) {
        std::snprintf(buf, sizeof buf, "%lld,%d,%.6f,%.6f,%d",
                      static_cast<long long>(r.order_id), r.machine_count, r.expected_time,
                      r.penalized_time, r.stockout ? 1 : 0);
        out << buf << "\n";
    }
}

inline void write_order_records_csv(const std::vector<OrderRecord>& records,
                                    const std::string& path) {
    auto out = csv::open_output(path);
    write_order_records_csv(records, out);
}

inline void write_summary_json(const std::string& strategy,
                               const nlohmann::json& parameters, const EvalMetrics& metrics,
                               const std::string& path) {
    nlohmann::json j;
    j["strategy"] = strategy;
    j["parameters"] = parameters;
    j["avg_pick_time"] = metrics.avg_pick_time;
    j["cross_machine_probability"] = metrics.cross_machine_probability;
    j["order_count"] = metrics.order_count;
    j["fulfilled"] = metrics.fulfilled;
    j["stockouts"] = metrics.stockouts;
    auto out = csv::open_output(path);
    out << j.dump(2) << "\n";
}

}  // namespace adds
