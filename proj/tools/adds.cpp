// Command-line harness for the dispenser slotting toolkit.
//
//   adds gen        synthesize an order history and catalog from a config
//   adds similarity dump the Jaccard similarity matrix for a history
//   adds slot       build a storage assignment with one of FA/ICA/SSFA/SSCA
//   adds simulate   replay an order stream against an assignment
//   adds compare    sweep strategies over a parameter grid and report CSVs

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "adds/correlation.hpp"
#include "adds/datagen.hpp"
#include "adds/experiment.hpp"
#include "adds/model.hpp"
#include "adds/picking.hpp"
#include "adds/slotting.hpp"

namespace {

struct LayoutFlags {
    adds::MachineLayout layout;

    void attach(CLI::App* cmd) {
        cmd->add_option("--rows", layout.rows, "grid rows per side");
        cmd->add_option("--cols", layout.cols, "grid columns per side");
        cmd->add_option("--row-pitch", layout.row_pitch, "metres per row step");
        cmd->add_option("--col-pitch", layout.col_pitch, "metres per column step");
        cmd->add_option("--speed", layout.speed, "crane speed in m/s");
        cmd->add_option("--io1", io1_, "first I/O point as row col (side 1)")->expected(2);
        cmd->add_option("--io2", io2_, "second I/O point as row col (side 1)")->expected(2);
    }

    adds::MachineLayout resolve() {
        if (io1_.size() == 2) layout.io_points[0] = {1, io1_[0], io1_[1]};
        if (io2_.size() == 2) layout.io_points[1] = {1, io2_[0], io2_[1]};
        adds::validate_layout(layout);
        return layout;
    }

private:
    std::vector<int> io1_, io2_;
};

adds::OrderHistory load_history(const std::string& path, const adds::DrugCatalog& catalog) {
    auto history = adds::read_history(path);
    adds::validate_history(history, catalog);
    return history;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"slotting and order-picking toolkit for automated drug dispensers"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "generate a synthetic order history and catalog");
    std::string gen_config, gen_orders, gen_catalog;
    std::uint64_t gen_seed = 0;
    bool gen_seed_set = false;
    gen->add_option("--config", gen_config, "generator config file")->required();
    gen->add_option("--orders", gen_orders, "output orders CSV")->required();
    gen->add_option("--catalog", gen_catalog, "output catalog CSV")->required();
    gen->add_option("--seed", gen_seed, "override the config seed")->each([&](const std::string&) {
        gen_seed_set = true;
    });

    // similarity
    auto* similarity = app.add_subcommand("similarity", "write the Jaccard similarity matrix");
    std::string sim_orders, sim_catalog, sim_out, sim_catalog_out;
    similarity->add_option("--orders", sim_orders, "orders CSV")->required();
    similarity->add_option("--catalog", sim_catalog, "catalog CSV")->required();
    similarity->add_option("--out", sim_out, "output similarity CSV")->required();
    similarity->add_option("--catalog-out", sim_catalog_out,
                           "also write the catalog with refreshed demand frequencies");

    // slot
    auto* slot_cmd = app.add_subcommand("slot", "build a storage assignment");
    std::string slot_orders, slot_catalog, slot_strategy = "SSCA", slot_out;
    int slot_machines = 3, slot_cluster = 3;
    double slot_threshold = 0.01;
    std::uint64_t slot_seed = 1;
    LayoutFlags slot_layout;
    slot_cmd->add_option("--orders", slot_orders, "orders CSV")->required();
    slot_cmd->add_option("--catalog", slot_catalog, "catalog CSV")->required();
    slot_cmd->add_option("--strategy", slot_strategy, "FA, ICA, SSFA or SSCA");
    slot_cmd->add_option("--machines", slot_machines, "fleet size");
    slot_cmd->add_option("--cluster-size", slot_cluster, "drug types per cluster");
    slot_cmd->add_option("--threshold", slot_threshold, "similarity threshold");
    slot_cmd->add_option("--seed", slot_seed, "grouping seed");
    slot_cmd->add_option("--out", slot_out, "output assignment CSV")->required();
    slot_layout.attach(slot_cmd);

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "replay an order stream against an assignment");
    std::string run_orders, run_catalog, run_assignment, run_out, run_summary, run_label = "custom";
    double run_mu = 0.0, run_sigma = 0.0, run_penalty = 60.0;
    std::int64_t run_fill = 50;
    bool run_tail_sort = false;
    LayoutFlags run_layout;
    sim_cmd->add_option("--orders", run_orders, "orders CSV")->required();
    sim_cmd->add_option("--catalog", run_catalog, "catalog CSV")->required();
    sim_cmd->add_option("--assignment", run_assignment, "assignment CSV")->required();
    sim_cmd->add_option("--mu", run_mu, "mean pharmacist sorting time (s)");
    sim_cmd->add_option("--sigma", run_sigma, "sorting time standard deviation (s)");
    sim_cmd->add_option("--penalty", run_penalty, "cross-machine penalty (s)");
    sim_cmd->add_option("--fill", run_fill, "initial units per bin");
    sim_cmd->add_option("--strategy", run_label, "strategy label for the summary");
    sim_cmd->add_flag("--tail-sort", run_tail_sort, "also charge the sort the timeline leaves uncovered");
    sim_cmd->add_option("--out", run_out, "output per-order CSV")->required();
    sim_cmd->add_option("--summary", run_summary, "output summary JSON");
    run_layout.attach(sim_cmd);

    // compare
    auto* cmp = app.add_subcommand("compare", "sweep strategies over a parameter grid");
    std::string cmp_orders, cmp_catalog, cmp_out, cmp_summary;
    std::vector<std::string> cmp_strategies = {"FA", "ICA", "SSFA", "SSCA"};
    std::vector<int> cmp_clusters = {3};
    std::vector<double> cmp_thresholds = {0.01};
    std::vector<double> cmp_mu, cmp_sigma;
    std::vector<std::uint64_t> cmp_seeds = {1};
    double cmp_penalty = 60.0;
    int cmp_machines = 3, cmp_workers = 1;
    std::int64_t cmp_fill = 50;
    bool cmp_tail_sort = false;
    LayoutFlags cmp_layout;
    cmp->add_option("--orders", cmp_orders, "orders CSV")->required();
    cmp->add_option("--catalog", cmp_catalog, "catalog CSV")->required();
    cmp->add_option("--strategy", cmp_strategies, "strategies to compare")->delimiter(',');
    cmp->add_option("--cluster-size", cmp_clusters, "cluster sizes")->delimiter(',');
    cmp->add_option("--threshold", cmp_thresholds, "similarity thresholds")->delimiter(',');
    cmp->add_option("--mu", cmp_mu, "mean sorting times; with --sigma forms the picker grid")
        ->delimiter(',');
    cmp->add_option("--sigma", cmp_sigma, "sorting time deviations")->delimiter(',');
    cmp->add_option("--penalty", cmp_penalty, "cross-machine penalty (s)");
    cmp->add_option("--machines", cmp_machines, "fleet size");
    cmp->add_option("--seed", cmp_seeds, "grouping seeds")->delimiter(',');
    cmp->add_option("--fill", cmp_fill, "initial units per bin");
    cmp->add_option("--workers", cmp_workers, "concurrent grid cells");
    cmp->add_flag("--tail-sort", cmp_tail_sort, "also charge the sort the timeline leaves uncovered");
    cmp->add_option("--out", cmp_out, "output long-format CSV")->required();
    cmp->add_option("--summary", cmp_summary, "output pivot summary CSV");
    cmp_layout.attach(cmp);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            auto cfg = adds::parse_gen_config_file(gen_config);
            if (gen_seed_set) cfg.seed = gen_seed;
            auto [catalog, history] = adds::generate_history(cfg);
            adds::write_history(history, gen_orders);
            adds::write_catalog(catalog, gen_catalog);
            std::cout << "wrote " << history.size() << " orders over " << catalog.drug_count()
                      << " drugs (" << catalog.total_bins() << " bins)\n";
        } else if (*similarity) {
            auto catalog = adds::read_catalog(sim_catalog);
            auto history = load_history(sim_orders, catalog);
            auto counted = adds::compute_frequencies(history, catalog);
            auto sim = adds::jaccard_matrix(history, counted.drug_count());
            adds::write_similarity_csv(sim, sim_out);
            if (!sim_catalog_out.empty()) adds::write_catalog(counted, sim_catalog_out);
            std::cout << "wrote " << sim.size << "x" << sim.size << " similarity matrix\n";
        } else if (*slot_cmd) {
            auto layout = slot_layout.resolve();
            auto catalog = adds::read_catalog(slot_catalog);
            auto history = load_history(slot_orders, catalog);
            auto counted = adds::compute_frequencies(history, catalog);
            auto sim = adds::jaccard_matrix(history, counted.drug_count());
            auto assignment =
                adds::slot(adds::parse_strategy(slot_strategy), counted, sim, slot_machines, layout,
                           {slot_cluster, slot_threshold}, slot_seed);
            adds::write_assignment_csv(assignment, slot_out);
            std::int64_t bins = 0;
            for (int r = 1; r <= assignment.machine_count(); ++r)
                bins += static_cast<std::int64_t>(assignment.machine(r).size());
            std::cout << "assigned " << bins << " bins across " << assignment.machine_count()
                      << " machines\n";
        } else if (*sim_cmd) {
            auto layout = run_layout.resolve();
            auto catalog = adds::read_catalog(run_catalog);
            auto history = load_history(run_orders, catalog);
            auto assignment = adds::read_assignment_csv(run_assignment);
            adds::validate_assignment(assignment, layout, catalog);
            adds::PickerModel picker{run_mu, run_sigma};
            adds::RoutingOptions opts;
            opts.tail_sort = run_tail_sort;
            auto metrics =
                adds::simulate(history, assignment, layout, picker, run_penalty, run_fill, opts);
            adds::write_order_records_csv(metrics.records, run_out);
            if (!run_summary.empty()) {
                nlohmann::json params{{"mu", run_mu},
                                      {"sigma", run_sigma},
                                      {"penalty", run_penalty},
                                      {"fill", run_fill}};
                adds::write_summary_json(run_label, params, metrics, run_summary);
            }
            std::cout << "orders " << metrics.order_count << ", fulfilled " << metrics.fulfilled
                      << ", stockouts " << metrics.stockouts << "\n"
                      << "avg_pick_time " << metrics.avg_pick_time << " s, cross_machine_probability "
                      << metrics.cross_machine_probability << "\n";
        } else if (*cmp) {
            auto layout = cmp_layout.resolve();
            auto catalog = adds::read_catalog(cmp_catalog);
            auto history = load_history(cmp_orders, catalog);
            adds::ExperimentSpec spec;
            spec.strategies.clear();
            for (const auto& name : cmp_strategies) spec.strategies.push_back(adds::parse_strategy(name));
            spec.cluster_sizes = cmp_clusters;
            spec.thresholds = cmp_thresholds;
            if (!cmp_mu.empty() || !cmp_sigma.empty()) {
                if (cmp_mu.empty()) cmp_mu = {0.0};
                if (cmp_sigma.empty()) cmp_sigma = {0.0};
                spec.picker_grid.clear();
                for (double mu : cmp_mu)
                    for (double sigma : cmp_sigma) spec.picker_grid.emplace_back(mu, sigma);
            }
            spec.cross_penalty = cmp_penalty;
            spec.machines = cmp_machines;
            spec.seeds = cmp_seeds;
            spec.stock_fill = cmp_fill;
            spec.workers = cmp_workers;
            spec.routing.tail_sort = cmp_tail_sort;

            auto results = adds::run_compare(spec, catalog, history, layout);
            adds::write_compare_csv(results, cmp_out);
            if (!cmp_summary.empty()) adds::write_compare_summary(spec, results, cmp_summary);

            int failed = 0;
            for (const auto& cell : results)
                if (!cell.ok) {
                    ++failed;
                    std::cerr << "cell " << adds::to_string(cell.strategy) << " C=" << cell.cluster_size
                              << " s=" << cell.threshold << " mu=" << cell.mu << " sigma=" << cell.sigma
                              << " seed=" << cell.seed << " failed: " << cell.error << "\n";
                }
            std::cout << "wrote " << results.size() << " grid cells (" << failed << " failed)\n";
            return failed == 0 ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
