#pragma once

// Comparison harness: runs every (strategy x SA-parameter x picker x seed)
// cell of an experiment grid and emits a long-format CSV plus a pivot summary
// with one row per picker setting. Cells run concurrently up to a worker
// limit; output order never depends on scheduling.

#include <atomic>
#include <cstdint>
#include <cstdio>
#include <string>
#include <thread>
#include <vector>

#include "adds/correlation.hpp"
#include "adds/csv.hpp"
#include "adds/datagen.hpp"
#include "adds/model.hpp"
#include "adds/picking.hpp"
#include "adds/slotting.hpp"

namespace adds {

// The ten picker settings reported by the reference comparison table.
inline std::vector<std::pair<double, double>> default_picker_grid() {
    return {{0, 0}, {5, 0}, {5, 2}, {5, 5}, {10, 0}, {10, 2}, {10, 5}, {15, 0}, {15, 2}, {15, 5}};
}

struct ExperimentSpec {
    std::vector<StrategyId> strategies = {StrategyId::FA, StrategyId::ICA, StrategyId::SSFA,
                                          StrategyId::SSCA};
    std::vector<int> cluster_sizes = {3};
    std::vector<double> thresholds = {0.01};
    std::vector<std::pair<double, double>> picker_grid = default_picker_grid();
    double cross_penalty = 60.0;
    int machines = 3;
    std::vector<std::uint64_t> seeds = {1};
    std::int64_t stock_fill = 50;
    int workers = 1;
    RoutingOptions routing;
};

inline void validate_spec(const ExperimentSpec& spec) {
    if (spec.strategies.empty() || spec.cluster_sizes.empty() || spec.thresholds.empty() ||
        spec.picker_grid.empty() || spec.seeds.empty())
        throw ValidationError("experiment grids must be non-empty");
    if (spec.machines < 1) throw ValidationError("need at least one machine");
    if (spec.workers < 1) throw ValidationError("need at least one worker");
}

// Order-size report buckets.
inline constexpr const char* kBucketNames[3] = {"1-5", "6+", "all"};

struct BucketStats {
    double avg_time = 0.0;
    double cross_prob = 0.0;
    std::int64_t fulfilled = 0;
};

struct CellResult {
    StrategyId strategy{};
    int cluster_size = 0;
    double threshold = 0.0;
    double mu = 0.0;
    double sigma = 0.0;
    std::uint64_t seed = 0;
    BucketStats buckets[3];
    bool ok = false;
    std::string error;
};

namespace detail {

inline void fill_buckets(const EvalMetrics& metrics, BucketStats out[3]) {
    double time_sum[3] = {0, 0, 0};
    std::int64_t cross[3] = {0, 0, 0};
    std::int64_t count[3] = {0, 0, 0};
    for (const auto& rec : metrics.records) {
        if (rec.stockout) continue;
        const int b = rec.order_size <= 5 ? 0 : 1;
        for (int i : {b, 2}) {
            time_sum[i] += rec.penalized_time;
            cross[i] += rec.machine_count >= 2 ? 1 : 0;
            count[i] += 1;
        }
    }
    for (int i = 0; i < 3; ++i) {
        out[i].fulfilled = count[i];
        if (count[i] > 0) {
            out[i].avg_time = time_sum[i] / static_cast<double>(count[i]);
            out[i].cross_prob = static_cast<double>(cross[i]) / static_cast<double>(count[i]);
        }
    }
}

}  // namespace detail

// Runs the full grid. Results come back in canonical order: strategies,
// cluster sizes, thresholds, seeds, picker settings, as listed in the spec.
inline std::vector<CellResult> run_compare(const ExperimentSpec& spec, const DrugCatalog& catalog,
                                           const OrderHistory& history,
                                           const MachineLayout& layout) {
    validate_spec(spec);
    validate_catalog(catalog);

    const DrugCatalog counted = compute_frequencies(history, catalog);
    const SimilarityMatrix sim = jaccard_matrix(history, counted.drug_count());

    struct Task {
        StrategyId strategy;
        int cluster_size;
        double threshold;
        std::uint64_t seed;
    };
    std::vector<Task> tasks;
    for (auto strategy : spec.strategies)
        for (int c : spec.cluster_sizes)
            for (double s : spec.thresholds)
                for (auto seed : spec.seeds) tasks.push_back({strategy, c, s, seed});

    const std::size_t per_task = spec.picker_grid.size();
    std::vector<CellResult> results(tasks.size() * per_task);

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        while (true) {
            const std::size_t t = next.fetch_add(1);
            if (t >= tasks.size()) return;
            const Task& task = tasks[t];
            std::string task_error;
            Assignment assignment;
            try {
                assignment = slot(task.strategy, counted, sim, spec.machines, layout,
                                  {task.cluster_size, task.threshold}, task.seed);
            } catch (const std::exception& e) {
                task_error = e.what();
            }
            for (std::size_t p = 0; p < per_task; ++p) {
                CellResult& cell = results[t * per_task + p];
                cell.strategy = task.strategy;
                cell.cluster_size = task.cluster_size;
                cell.threshold = task.threshold;
                cell.mu = spec.picker_grid[p].first;
                cell.sigma = spec.picker_grid[p].second;
                cell.seed = task.seed;
                if (!task_error.empty()) {
                    cell.error = task_error;
                    continue;
                }
                try {
                    PickerModel picker{cell.mu, cell.sigma};
                    EvalMetrics metrics = simulate(history, assignment, layout, picker,
                                                   spec.cross_penalty, spec.stock_fill,
                                                   spec.routing);
                    detail::fill_buckets(metrics, cell.buckets);
                    cell.ok = true;
                } catch (const std::exception& e) {
                    cell.error = e.what();
                }
            }
        }
    };

    std::vector<std::thread> pool;
    const int n_workers = std::min<int>(spec.workers, static_cast<int>(tasks.size()));
    for (int i = 1; i < n_workers; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    return results;
}

// Long format: one row per (cell, bucket).
inline void write_compare_csv(const std::vector<CellResult>& results, std::ostream& out) {
    out << "strategy,C,s,mu,sigma,seed,bucket,avg_time,cross_prob\n";
    char buf[160];
    for (const auto& cell : results) {
        for (int b = 0; b < 3; ++b) {
            if (cell.ok)
                std::snprintf(buf, sizeof buf, "%s,%d,%g,%g,%g,%llu,%s,%.6f,%.6f",
                              to_string(cell.strategy).c_str(), cell.cluster_size, cell.threshold,
                              cell.mu, cell.sigma, static_cast<unsigned long long>(cell.seed),
                              kBucketNames[b], cell.buckets[b].avg_time, cell.buckets[b].cross_prob);
            else
                std::snprintf(buf, sizeof buf, "%s,%d,%g,%g,%g,%llu,%s,nan,nan",
                              to_string(cell.strategy).c_str(), cell.cluster_size, cell.threshold,
                              cell.mu, cell.sigma, static_cast<unsigned long long>(cell.seed),
                              kBucketNames[b]);
            out << buf << "\n";
        }
    }
}

inline void write_compare_csv(const std::vector<CellResult>& results, const std::string& path) {
    auto out = csv::open_output(path);
    write_compare_csv(results, out);
}

// Pivot summary: one row per picker setting, one column per strategy, cells
// averaging the all-orders bucket over cluster sizes, thresholds and seeds.
inline void write_compare_summary(const ExperimentSpec& spec,
                                  const std::vector<CellResult>& results, std::ostream& out) {
    out << "mu,sigma";
    for (auto s : spec.strategies) out << "," << to_string(s);
    out << "\n";
    char buf[64];
    for (const auto& [mu, sigma] : spec.picker_grid) {
        std::snprintf(buf, sizeof buf, "%g,%g", mu, sigma);
        out << buf;
        for (auto strategy : spec.strategies) {
            double sum = 0.0;
            int n = 0;
            for (const auto& cell : results)
                if (cell.ok && cell.strategy == strategy && cell.mu == mu && cell.sigma == sigma) {
                    sum += cell.buckets[2].avg_time;
                    ++n;
                }
            if (n > 0) {
                std::snprintf(buf, sizeof buf, ",%.4f", sum / n);
                out << buf;
            } else {
                out << ",nan";
            }
        }
        out << "\n";
    }
}

inline void write_compare_summary(const ExperimentSpec& spec,
                                  const std::vector<CellResult>& results,
                                  const std::string& path) {
    auto out = csv::open_output(path);
    write_compare_summary(spec, results, out);
}

}  // namespace adds
