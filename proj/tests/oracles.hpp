#pragma once

// Independent reference implementations used only by the test suites. These
// deliberately re-derive travel times, expectations, enumeration orders and
// feasibility conditions with different code than the library so agreement is
// meaningful.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "adds/model.hpp"
#include "adds/picking.hpp"

namespace oracle {

// ---------------------------------------------------------------------------
// Normal expectation helpers.

inline double phi(double z) { return std::exp(-0.5 * z * z) / std::sqrt(8.0 * std::atan(1.0)); }
inline double Phi(double z) { return 0.5 * (1.0 + std::erf(z / std::sqrt(2.0))); }

// Alternative closed form via the expected shortfall identity
// E[max(X,t)] = t + E[(X - t)^+].
inline double expected_max_closed(double t, double mu, double sigma) {
    if (sigma == 0.0) return std::max(mu, t);
    const double z = (mu - t) / sigma;
    return t + (mu - t) * Phi(z) + sigma * phi(z);
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double fa, double fm, double fb, double whole, double eps,
                               int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * eps)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1) +
           adaptive_simpson(f, m, b, fm, fb, frm, right, eps / 2.0, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b, double eps) {
    if (b <= a) return 0.0;
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(f, a, b, fa, fm, fb, whole, eps, 48);
}

// E[max(X,t)] by quadrature of  t * P(X <= t) + Integral_t^inf x f(x) dx
// over the full normal support (truncated at 12 sigma where the density is
// numerically zero).
inline double expected_max_quadrature(double t, double mu, double sigma) {
    if (sigma == 0.0) return std::max(mu, t);
    auto density = [&](double x) { return phi((x - mu) / sigma) / sigma; };
    auto x_density = [&](double x) { return x * density(x); };
    const double lo = mu - 12.0 * sigma;
    const double hi = mu + 12.0 * sigma;
    double below = 0.0;
    double above = 0.0;
    if (t <= lo) {
        above = integrate(x_density, lo, hi, 1e-12);
    } else if (t >= hi) {
        below = 1.0;
    } else {
        below = integrate(density, lo, t, 1e-12);
        above = integrate(x_density, t, hi, 1e-12);
    }
    return t * below + above;
}

// ---------------------------------------------------------------------------
// Independent travel timing.

inline double travel(const adds::Location& a, const adds::Location& b,
                     const adds::MachineLayout& layout) {
    const double vertical = std::abs(a.row - b.row) * layout.row_pitch / layout.speed;
    const double horizontal = std::abs(a.col - b.col) * layout.col_pitch / layout.speed;
    return vertical > horizontal ? vertical : horizontal;
}

// Timeline value of a delivery sequence, summed leg by leg in timeline order.
inline double sequence_time(const std::vector<adds::Location>& seq,
                            const adds::MachineLayout& layout, double mu, double sigma) {
    const std::size_t n = seq.size();
    auto io = [&](std::size_t pos) { return layout.io_points[pos % 2]; };
    auto emax = [&](double t) { return expected_max_closed(t, mu, sigma); };
    if (n == 0) return 0.0;
    const double first = 2.0 * travel(io(0), seq[0], layout);
    if (n == 1) return first;
    const double second = 2.0 * travel(io(1), seq[1], layout);
    if (n == 2) return first + emax(second);
    double total = first + emax(second);
    for (std::size_t k = 2; k < n; ++k) {
        const adds::Location point = io(k);
        total += emax(travel(point, seq[k - 2], layout) + travel(seq[k - 2], seq[k], layout) +
                      travel(seq[k], point, layout));
    }
    total += emax(2.0 * travel(io(n - 2), seq[n - 2], layout));
    total += 2.0 * travel(io(n - 1), seq[n - 1], layout);
    return total;
}

// Same leg set with all sorting collapsed: the pure robot travel of a chosen
// route, recomputed from scratch.
inline double pure_travel_time(const adds::MachineRoute& route, const adds::MachineLayout& layout) {
    std::vector<adds::Location> seq;
    for (const auto& stop : route.sequence) seq.push_back(stop.loc);
    return sequence_time(seq, layout, 0.0, 0.0);
}

// Brute-force optimal routing: every bin choice, every global delivery
// permutation.
inline double brute_force_route_time(const std::vector<adds::OrderLine>& sub,
                                     const adds::Assignment& assignment, int machine,
                                     const adds::StockState& stock,
                                     const adds::PickerModel& picker,
                                     const adds::MachineLayout& layout) {
    const std::size_t n = sub.size();
    std::vector<std::vector<adds::Location>> bins(n);
    const auto& slots = assignment.machine(machine);
    for (std::size_t d = 0; d < n; ++d) {
        for (std::size_t s = 0; s < slots.size(); ++s)
            if (slots[s].drug == sub[d].drug && stock.at(machine, s) >= sub[d].dosage)
                bins[d].push_back(slots[s].loc);
        if (bins[d].empty()) throw std::runtime_error("oracle: drug unstocked");
    }

    double best = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    std::vector<std::size_t> choice(n, 0);
    while (true) {
        std::sort(perm.begin(), perm.end());
        do {
            std::vector<adds::Location> seq(n);
            for (std::size_t pos = 0; pos < n; ++pos) seq[pos] = bins[perm[pos]][choice[perm[pos]]];
            best = std::min(best, sequence_time(seq, layout, picker.mean, picker.std_dev));
        } while (std::next_permutation(perm.begin(), perm.end()));
        std::size_t d = 0;
        while (d < n && ++choice[d] == bins[d].size()) {
            choice[d] = 0;
            ++d;
        }
        if (d == n) break;
    }
    return best;
}

// ---------------------------------------------------------------------------
// Exhaustive Stage-I grouping.

struct GroupingOracleResult {
    bool feasible = false;
    double objective = 0.0;
    std::vector<std::vector<int>> sets;  // 0-based machine indices per drug
};

// Bin-distribution feasibility by the cut condition: for every machine subset
// M, the slack of drugs confined to M must fit in M's residual capacity.
inline bool distribution_feasible(const std::vector<std::vector<int>>& sets,
                                  const adds::DrugCatalog& catalog, int machines, int capacity) {
    std::vector<std::int64_t> min_load(static_cast<std::size_t>(machines), 0);
    std::vector<int> masks(sets.size(), 0);
    std::vector<std::int64_t> slack(sets.size(), 0);
    for (std::size_t d = 0; d < sets.size(); ++d) {
        slack[d] = catalog.records[d].bin_count - static_cast<std::int64_t>(sets[d].size());
        if (slack[d] < 0) return false;
        for (int m : sets[d]) {
            min_load[static_cast<std::size_t>(m)] += 1;
            masks[d] |= 1 << m;
        }
    }
    for (int m = 0; m < machines; ++m)
        if (min_load[static_cast<std::size_t>(m)] > capacity) return false;
    for (int mask = 1; mask < (1 << machines); ++mask) {
        std::int64_t confined = 0;
        for (std::size_t d = 0; d < sets.size(); ++d)
            if ((masks[d] & mask) == masks[d]) confined += slack[d];
        std::int64_t room = 0;
        for (int m = 0; m < machines; ++m)
            if (mask & (1 << m)) room += capacity - min_load[static_cast<std::size_t>(m)];
        if (confined > room) return false;
    }
    return true;
}

inline GroupingOracleResult exhaustive_grouping(const adds::DrugCatalog& catalog,
                                                const adds::SimilarityMatrix& sim, int machines,
                                                int capacity) {
    const int K = catalog.drug_count();
    // Per-drug machine sets in presence-row lexicographic order.
    std::vector<std::vector<std::vector<int>>> options(static_cast<std::size_t>(K));
    for (int d = 0; d < K; ++d) {
        const int b = catalog.records[static_cast<std::size_t>(d)].bin_count;
        std::vector<std::pair<std::vector<int>, std::vector<int>>> rows;
        for (int mask = 1; mask < (1 << machines); ++mask) {
            std::vector<int> row(static_cast<std::size_t>(machines), 0);
            std::vector<int> set;
            for (int m = 0; m < machines; ++m)
                if (mask & (1 << m)) {
                    row[static_cast<std::size_t>(m)] = 1;
                    set.push_back(m);
                }
            if (static_cast<int>(set.size()) <= b &&
                static_cast<std::int64_t>(b) <=
                    static_cast<std::int64_t>(set.size()) * capacity)
                rows.emplace_back(row, set);
        }
        std::sort(rows.begin(), rows.end());
        for (auto& [row, set] : rows) options[static_cast<std::size_t>(d)].push_back(set);
        if (options[static_cast<std::size_t>(d)].empty()) return {};
    }

    GroupingOracleResult best;
    std::vector<std::size_t> pick(static_cast<std::size_t>(K), 0);
    std::vector<std::vector<int>> sets(static_cast<std::size_t>(K));
    while (true) {
        for (int d = 0; d < K; ++d) sets[static_cast<std::size_t>(d)] = options[static_cast<std::size_t>(d)][pick[static_cast<std::size_t>(d)]];
        if (distribution_feasible(sets, catalog, machines, capacity)) {
            double obj = 0.0;
            for (int a = 0; a < K; ++a)
                for (int b2 = a + 1; b2 < K; ++b2) {
                    int shared = 0;
                    for (int m : sets[static_cast<std::size_t>(a)])
                        if (std::find(sets[static_cast<std::size_t>(b2)].begin(),
                                      sets[static_cast<std::size_t>(b2)].end(),
                                      m) != sets[static_cast<std::size_t>(b2)].end())
                            ++shared;
                    obj += sim.at(a + 1, b2 + 1) * shared;
                }
            if (!best.feasible || obj > best.objective + 1e-9) {
                best.feasible = true;
                best.objective = obj;
                best.sets = sets;
            }
        }
        // Odometer with the most significant digit first so full configurations
        // advance in presence-matrix lexicographic order.
        int d = K - 1;
        while (d >= 0 && ++pick[static_cast<std::size_t>(d)] == options[static_cast<std::size_t>(d)].size()) {
            pick[static_cast<std::size_t>(d)] = 0;
            --d;
        }
        if (d < 0) break;
    }
    return best;
}

// ---------------------------------------------------------------------------
// Minimal machine count for an order, by direct subset enumeration.

inline int min_machines_to_cover(const adds::PrescriptionOrder& order,
                                 const adds::Assignment& assignment,
                                 const adds::StockState& stock) {
    const int R = assignment.machine_count();
    std::vector<int> drug_mask;
    for (const auto& line : order.lines) {
        int mask = 0;
        for (int r = 1; r <= R; ++r) {
            const auto& slots = assignment.machine(r);
            for (std::size_t s = 0; s < slots.size(); ++s)
                if (slots[s].drug == line.drug && stock.at(r, s) >= line.dosage) {
                    mask |= 1 << (r - 1);
                    break;
                }
        }
        if (mask == 0) return -1;
        drug_mask.push_back(mask);
    }
    int best = R + 1;
    for (int subset = 1; subset < (1 << R); ++subset) {
        bool ok = true;
        for (int m : drug_mask)
            if ((m & subset) == 0) ok = false;
        if (ok) best = std::min(best, __builtin_popcount(static_cast<unsigned>(subset)));
    }
    return best <= R ? best : -1;
}

}  // namespace oracle
