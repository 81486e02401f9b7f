#pragma once

// Core domain types for the dispenser slotting and picking toolkit.
// Pure data; algorithms live in the sibling headers.

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace adds {

using DrugId = int;  // dense ids 1..K

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StockoutError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised when an exact solver is asked for an instance above its scale guard.
struct ScaleGuardError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DrugRecord {
    DrugId id = 0;
    int bin_count = 1;                   // bins reserved for this drug, >= 1
    std::int64_t demand_frequency = 0;   // orders containing the drug

    // Demand per bin; bin_count >= 1 keeps this well defined.
    double per_bin_frequency() const {
        return static_cast<double>(demand_frequency) / static_cast<double>(bin_count);
    }
};

struct DrugCatalog {
    std::vector<DrugRecord> records;  // records[i].id == i + 1

    int drug_count() const { return static_cast<int>(records.size()); }

    const DrugRecord& record(DrugId id) const {
        if (id < 1 || id > drug_count())
            throw ValidationError("unknown drug id " + std::to_string(id));
        return records[static_cast<std::size_t>(id - 1)];
    }

    DrugRecord& record(DrugId id) {
        return const_cast<DrugRecord&>(static_cast<const DrugCatalog&>(*this).record(id));
    }

    std::int64_t total_bins() const {
        std::int64_t sum = 0;
        for (const auto& r : records) sum += r.bin_count;
        return sum;
    }
};

inline void validate_catalog(const DrugCatalog& catalog) {
    for (std::size_t i = 0; i < catalog.records.size(); ++i) {
        const auto& r = catalog.records[i];
        if (r.id != static_cast<DrugId>(i + 1))
            throw ValidationError("drug ids must be contiguous 1..K; slot " +
                                  std::to_string(i + 1) + " holds id " + std::to_string(r.id));
        if (r.bin_count < 1)
            throw ValidationError("drug " + std::to_string(r.id) + " has bin_count < 1");
        if (r.demand_frequency < 0)
            throw ValidationError("drug " + std::to_string(r.id) + " has negative demand frequency");
    }
}

struct OrderLine {
    DrugId drug = 0;
    int dosage = 1;  // units requested, >= 1

    bool operator==(const OrderLine&) const = default;
};

struct PrescriptionOrder {
    std::int64_t id = 0;
    std::vector<OrderLine> lines;  // distinct drugs

    int size() const { return static_cast<int>(lines.size()); }

    bool contains(DrugId k) const {
        return std::any_of(lines.begin(), lines.end(),
                           [k](const OrderLine& l) { return l.drug == k; });
    }

    bool operator==(const PrescriptionOrder&) const = default;
};

struct OrderHistory {
    std::vector<PrescriptionOrder> orders;

    std::int64_t size() const { return static_cast<std::int64_t>(orders.size()); }

    bool operator==(const OrderHistory&) const = default;
};

// Checks every referenced drug id against the catalog; errors name the order.
inline void validate_history(const OrderHistory& history, const DrugCatalog& catalog) {
    for (const auto& order : history.orders) {
        if (order.lines.empty())
            throw ValidationError("order " + std::to_string(order.id) + " has no lines");
        for (const auto& line : order.lines) {
            if (line.drug < 1 || line.drug > catalog.drug_count())
                throw ValidationError("order " + std::to_string(order.id) +
                                      " references unknown drug id " + std::to_string(line.drug));
            if (line.dosage < 1)
                throw ValidationError("order " + std::to_string(order.id) +
                                      " has non-positive dosage for drug " + std::to_string(line.drug));
        }
    }
}

struct Location {
    int side = 1;  // 1 or 2
    int row = 1;
    int col = 1;

    auto operator<=>(const Location&) const = default;
};

struct MachineLayout {
    int rows = 9;
    int cols = 16;
    int sides = 2;
    double row_pitch = 0.275;  // metres per row step
    double col_pitch = 0.168;  // metres per column step
    double speed = 0.1486;     // m/s, both axes
    std::array<Location, 2> io_points{Location{1, 8, 6}, Location{1, 9, 6}};

    // Usable storage bins: every grid cell except the two I/O cells.
    int storage_bins() const { return sides * rows * cols - static_cast<int>(io_points.size()); }

    bool in_bounds(const Location& l) const {
        return l.side >= 1 && l.side <= sides && l.row >= 1 && l.row <= rows &&
               l.col >= 1 && l.col <= cols;
    }

    bool is_io(const Location& l) const {
        return l == io_points[0] || l == io_points[1];
    }

    std::vector<Location> storage_locations() const {
        std::vector<Location> out;
        out.reserve(static_cast<std::size_t>(storage_bins()));
        for (int e = 1; e <= sides; ++e)
            for (int x = 1; x <= rows; ++x)
                for (int y = 1; y <= cols; ++y) {
                    Location l{e, x, y};
                    if (!is_io(l)) out.push_back(l);
                }
        return out;
    }
};

inline void validate_layout(const MachineLayout& layout) {
    if (layout.rows < 1 || layout.cols < 1 || layout.sides < 1)
        throw ValidationError("layout dimensions must be positive");
    if (layout.row_pitch <= 0 || layout.col_pitch <= 0 || layout.speed <= 0)
        throw ValidationError("layout pitches and speed must be positive");
    for (const auto& io : layout.io_points)
        if (!layout.in_bounds(io)) throw ValidationError("I/O point out of bounds");
    if (layout.io_points[0] == layout.io_points[1])
        throw ValidationError("I/O points must be distinct");
}

// Stage-I result: how many bins each drug occupies on each machine.
struct Grouping {
    std::vector<std::map<DrugId, int>> machine_bins;  // index r-1
    double objective_value = 0.0;

    int machine_count() const { return static_cast<int>(machine_bins.size()); }

    int bins_of(int machine, DrugId k) const {
        const auto& m = machine_bins[static_cast<std::size_t>(machine - 1)];
        auto it = m.find(k);
        return it == m.end() ? 0 : it->second;
    }

    bool present(int machine, DrugId k) const { return bins_of(machine, k) > 0; }
};

// Stage-II result: which drug sits in which bin, per machine.
struct Assignment {
    struct Slot {
        Location loc;
        DrugId drug = 0;

        auto operator<=>(const Slot&) const = default;
    };

    std::vector<std::vector<Slot>> machines;  // index r-1, slots sorted by location

    int machine_count() const { return static_cast<int>(machines.size()); }

    const std::vector<Slot>& machine(int r) const {
        return machines[static_cast<std::size_t>(r - 1)];
    }

    std::vector<Location> locations_of(int r, DrugId k) const {
        std::vector<Location> out;
        for (const auto& s : machine(r))
            if (s.drug == k) out.push_back(s.loc);
        return out;
    }

    // Projection back onto the Stage-I shape: count bins per (machine, drug).
    Grouping to_grouping() const {
        Grouping g;
        g.machine_bins.resize(machines.size());
        for (std::size_t r = 0; r < machines.size(); ++r)
            for (const auto& s : machines[r]) g.machine_bins[r][s.drug] += 1;
        return g;
    }

    bool operator==(const Assignment&) const = default;
};

// Remaining units per occupied bin, aligned with Assignment::machines.
struct StockState {
    std::vector<std::vector<std::int64_t>> units;

    static StockState uniform(const Assignment& assignment, std::int64_t fill) {
        if (fill < 0) throw ValidationError("stock fill must be non-negative");
        StockState s;
        s.units.resize(assignment.machines.size());
        for (std::size_t r = 0; r < assignment.machines.size(); ++r)
            s.units[r].assign(assignment.machines[r].size(), fill);
        return s;
    }

    std::int64_t at(int machine, std::size_t slot) const {
        return units[static_cast<std::size_t>(machine - 1)][slot];
    }

    void take(int machine, std::size_t slot, std::int64_t amount) {
        auto& u = units[static_cast<std::size_t>(machine - 1)][slot];
        if (amount > u)
            throw StockoutError("stock underflow at machine " + std::to_string(machine));
        u -= amount;
    }

    std::int64_t total() const {
        std::int64_t sum = 0;
        for (const auto& m : units)
            for (auto v : m) sum += v;
        return sum;
    }
};

// Pharmacist sorting time X ~ N(mean, std_dev^2); std_dev = 0 means fixed time.
struct PickerModel {
    double mean = 0.0;
    double std_dev = 0.0;
};

}  // namespace adds
