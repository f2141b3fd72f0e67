// area2vec command-line tool.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "area2vec/pipeline.hpp"
#include "area2vec/synth.hpp"

namespace fs = std::filesystem;
using namespace area2vec;

namespace {

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> k;
    std::optional<double> cell_m;
    std::optional<std::size_t> min_stays;
    std::optional<std::string> input;
    std::optional<std::string> output;

    void add_to(CLI::App* cmd, bool io_flags) {
        cmd->add_option("--seed", seed, "Seed for both training and clustering");
        cmd->add_option("--k", k, "Number of clusters");
        cmd->add_option("--cell-m", cell_m, "Grid cell size in meters");
        cmd->add_option("--min-stays", min_stays, "Minimum stays for a cell to become an area");
        if (io_flags) {
            cmd->add_option("--input", input, "Trajectory CSV (.csv or .csv.gz)");
            cmd->add_option("--output", output, "Artifact directory");
        }
    }

    void apply(RunConfig& c) const {
        if (seed) c.model_seed = c.cluster_seed = *seed;
        if (k) c.k = *k;
        if (cell_m) c.cell_m = *cell_m;
        if (min_stays) c.min_stays = *min_stays;
        if (input) c.input = *input;
        if (output) c.output_dir = *output;
    }
};

void cmd_synth(const std::string& scenario, std::optional<std::uint64_t> seed, std::optional<int> agents,
               const fs::path& out) {
    synth::ScenarioConfig sc;
    if (scenario == "default")
        sc = synth::default_scenario();
    else if (scenario == "pandemic")
        sc = synth::pandemic_scenario();
    else
        throw StageError("synth", "unknown scenario '" + scenario + "' (expected default or pandemic)");
    if (seed) sc.seed = *seed;
    if (agents) sc.n_agents = *agents;
    const auto result = run_stage("synth", [&] { return synth::generate(sc); });
    run_stage("synth", [&] {
        io::write_file(out / "trajectories.csv", serialize_trajectories(result.trajectories));
        io::write_file(out / "ground_truth.csv", synth::serialize_ground_truth(result.grid, result.ground_truth));
        // a ready-to-use run config for the generated city
        RunConfig rc;
        rc.label = scenario;
        rc.input = (out / "trajectories.csv").string();
        rc.output_dir = (out / "run").string();
        rc.bbox = sc.bbox;
        rc.cell_m = sc.cell_m;
        rc.tz_offset_min = sc.tz_offset_min;
        rc.period = sc.period;
        io::write_file(out / "config.json", to_json(rc).dump(2) + "\n");
    });
    std::size_t points = 0;
    for (const auto& [u, t] : result.trajectories) points += t.points.size();
    std::printf("synth: %zu agents, %zu points -> %s\n", result.trajectories.size(), points, out.string().c_str());
}

void cmd_ingest(const std::string& input, int tz, const std::string& output) {
    const auto parsed = run_stage("ingest", [&] { return load_trajectories(input, tz); });
    const auto& s = parsed.stats;
    std::printf("ingest: %zu rows, %zu accepted, %zu rejected, %zu duplicates, %zu users\n", s.rows, s.accepted,
                s.rejects, s.duplicates, parsed.trajectories.size());
    if (!output.empty())
        run_stage("ingest", [&] { io::write_file(output, serialize_trajectories(parsed.trajectories)); });
}

void cmd_stays(const std::string& input, int tz, const StayParams& params, const std::string& output) {
    const auto parsed = run_stage("ingest", [&] { return load_trajectories(input, tz); });
    const auto stays = run_stage("stays", [&] {
        params.validate();
        return extract_all_stays(parsed.trajectories, params);
    });
    std::size_t n = 0;
    for (const auto& [u, seq] : stays) n += seq.size();
    std::printf("stays: %zu stays from %zu users\n", n, stays.size());
    const std::string text = serialize_stays(stays);
    if (output.empty())
        std::cout << text;
    else
        run_stage("stays", [&] { io::write_file(output, text); });
}

RunConfig config_or_default(const std::string& path) {
    return path.empty() ? RunConfig{} : run_stage("config", [&] { return load_run_config(path); });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Area embeddings from GPS stays: train, cluster, profile, compare."};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic city's trajectories and ground truth");
    std::string scenario = "default";
    std::optional<std::uint64_t> synth_seed;
    std::optional<int> synth_agents;
    std::string synth_out = "synth";
    synth_cmd->add_option("--scenario", scenario, "default or pandemic")->capture_default_str();
    synth_cmd->add_option("--seed", synth_seed, "Generator seed");
    synth_cmd->add_option("--agents", synth_agents, "Number of agents");
    synth_cmd->add_option("--output", synth_out, "Output directory")->capture_default_str();

    auto* ingest_cmd = app.add_subcommand("ingest", "Validate and normalize a trajectory CSV");
    std::string ingest_in, ingest_out;
    int tz = 540;
    ingest_cmd->add_option("--input", ingest_in, "Trajectory CSV")->required();
    ingest_cmd->add_option("--output", ingest_out, "Write the cleaned, sorted CSV here");
    ingest_cmd->add_option("--tz-offset-min", tz, "Local offset for timestamps without one")->capture_default_str();

    auto* stays_cmd = app.add_subcommand("stays", "Extract stays from a trajectory CSV");
    std::string stays_in, stays_out;
    StayParams sp;
    stays_cmd->add_option("--input", stays_in, "Trajectory CSV")->required();
    stays_cmd->add_option("--output", stays_out, "Stay CSV (stdout if omitted)");
    stays_cmd->add_option("--tz-offset-min", tz, "Local offset for timestamps without one")->capture_default_str();
    stays_cmd->add_option("--dist-m", sp.dist_threshold_m, "Roam radius in meters")->capture_default_str();
    stays_cmd->add_option("--time-min", sp.time_threshold_min, "Minimum stay in minutes")->capture_default_str();
    stays_cmd->add_option("--max-gap-min", sp.max_gap_min, "Largest gap inside a stay")->capture_default_str();

    auto* run_cmd = app.add_subcommand("run", "Full pipeline for one period");
    std::string run_config;
    Overrides run_ovr;
    run_cmd->add_option("--config", run_config, "Run config JSON");
    run_ovr.add_to(run_cmd, true);

    auto* cmp_cmd = app.add_subcommand("compare", "Run two periods and report cluster transitions");
    std::string cfg_a, cfg_b, cmp_out = "compare";
    Overrides cmp_ovr;
    cmp_cmd->add_option("--config", cfg_a, "Run config for the first period")->required();
    cmp_cmd->add_option("--config-b", cfg_b, "Run config for the second period")->required();
    cmp_cmd->add_option("--output", cmp_out, "Comparison directory")->capture_default_str();
    cmp_ovr.add_to(cmp_cmd, false);

    auto* dump_cmd = app.add_subcommand("dump-categories", "Print the stay category table");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*synth_cmd) {
            cmd_synth(scenario, synth_seed, synth_agents, synth_out);
        } else if (*ingest_cmd) {
            cmd_ingest(ingest_in, tz, ingest_out);
        } else if (*stays_cmd) {
            cmd_stays(stays_in, tz, sp, stays_out);
        } else if (*run_cmd) {
            RunConfig c = config_or_default(run_config);
            run_ovr.apply(c);
            const RunResult r = cmd_run(c);
            std::printf("run: %zu stays, %zu areas, k=%zu, inertia %s -> %s\n", r.n_stays,
                        r.period_result.vocabulary.size(), r.period_result.clustering.k,
                        io::fmt_fixed(r.period_result.clustering.inertia, 6).c_str(), c.output_dir.c_str());
        } else if (*cmp_cmd) {
            RunConfig a = config_or_default(cfg_a), b = config_or_default(cfg_b);
            cmp_ovr.apply(a);
            cmp_ovr.apply(b);
            const auto c = cmd_compare(a, b, cmp_ovr.k, cmp_out);
            std::printf("compare: %zu common, %zu dropped, %zu appearing areas -> %s\n", c.report.common_cells.size(),
                        c.report.dropped_cells.size(), c.report.appearing_cells.size(), cmp_out.c_str());
        } else if (*dump_cmd) {
            std::cout << dump_categories();
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "area2vec: %s\n", e.what());
        return 1;
    }
    return 0;
}
