#pragma once

#include <filesystem>
#include <future>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "area2vec/cluster.hpp"
#include "area2vec/compare.hpp"
#include "area2vec/embed.hpp"
#include "area2vec/encoding.hpp"
#include "area2vec/geodata.hpp"
#include "area2vec/io.hpp"
#include "area2vec/mesh.hpp"
#include "area2vec/profile.hpp"
#include "area2vec/staydetect.hpp"

namespace area2vec {

inline constexpr const char* kVersion = "1.0.0";

/// An error tagged with the pipeline stage that raised it.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& cause)
        : Error(stage + ": " + cause), stage_(std::move(stage)) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

template <class F>
auto run_stage(const char* stage, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(stage, e.what());
    }
}

/// Everything a `run` needs. Serialized as JSON; see README for the keys.
struct RunConfig {
    std::string label = "run";
    std::string input;
    std::string output_dir;
    BoundingBox bbox;
    double cell_m = 50.0;
    std::size_t min_stays = 100;
    StayParams stay;
    int tz_offset_min = 540;
    std::string holidays;  // file path; empty = built-in Japanese calendar
    std::optional<DateRange> period;
    int dim = 0;  // 0 = fourth root of the category count, rounded up
    double learning_rate = 0.025;
    int epochs = 20;
    bool lr_decay = true;
    std::uint64_t model_seed = 1;
    std::size_t k = 4;
    std::uint64_t cluster_seed = 1;
    int restarts = 10;

    void validate() const {
        if (!(cell_m > 0)) throw Error("config: cell_m must be > 0");
        if (min_stays < 1) throw Error("config: min_stays must be >= 1");
        stay.validate();
        if (dim < 0) throw Error("config: dim must be >= 0");
        if (!(learning_rate > 0)) throw Error("config: learning_rate must be > 0");
        if (epochs < 1) throw Error("config: epochs must be >= 1");
        if (k < 1) throw Error("config: k must be >= 1");
        if (restarts < 1) throw Error("config: restarts must be >= 1");
        if (!(bbox.north > bbox.south && bbox.east > bbox.west)) throw Error("config: bbox is degenerate or missing");
        if (period && period->last < period->first) throw Error("config: period end precedes start");
        if (!holidays.empty() && !std::filesystem::exists(holidays))
            throw Error("config: holiday file not found: " + holidays);
    }

    HolidayCalendar calendar() const {
        return holidays.empty() ? HolidayCalendar::japan() : HolidayCalendar::load(holidays);
    }
};

inline nlohmann::json to_json(const RunConfig& c) {
    nlohmann::json j{{"label", c.label},
                     {"input", c.input},
                     {"output_dir", c.output_dir},
                     {"bbox", {{"south", c.bbox.south}, {"west", c.bbox.west}, {"north", c.bbox.north}, {"east", c.bbox.east}}},
                     {"cell_m", c.cell_m},
                     {"min_stays", c.min_stays},
                     {"stay",
                      {{"dist_threshold_m", c.stay.dist_threshold_m},
                       {"time_threshold_min", c.stay.time_threshold_min},
                       {"max_gap_min", c.stay.max_gap_min}}},
                     {"tz_offset_min", c.tz_offset_min},
                     {"holidays", c.holidays},
                     {"model",
                      {{"dim", c.dim},
                       {"learning_rate", c.learning_rate},
                       {"epochs", c.epochs},
                       {"lr_decay", c.lr_decay},
                       {"seed", c.model_seed}}},
                     {"cluster", {{"k", c.k}, {"seed", c.cluster_seed}, {"restarts", c.restarts}}}};
    if (c.period)
        j["period"] = {{"start", format_date(c.period->first)}, {"end", format_date(c.period->last)}};
    else
        j["period"] = nullptr;
    return j;
}

/// Missing keys keep their defaults; unknown keys are rejected.
inline RunConfig run_config_from_json(const nlohmann::json& j) {
    static const std::vector<std::string> known = {"label", "input", "output_dir", "bbox", "cell_m", "min_stays", "stay",
                                                   "tz_offset_min", "holidays", "period", "model", "cluster"};
    for (const auto& [key, _] : j.items())
        if (std::find(known.begin(), known.end(), key) == known.end()) throw Error("config: unknown key '" + key + "'");
    RunConfig c;
    c.label = j.value("label", c.label);
    c.input = j.value("input", c.input);
    c.output_dir = j.value("output_dir", c.output_dir);
    if (j.contains("bbox")) {
        const auto& b = j.at("bbox");
        c.bbox = {b.at("south").get<double>(), b.at("west").get<double>(), b.at("north").get<double>(),
                  b.at("east").get<double>()};
    }
    c.cell_m = j.value("cell_m", c.cell_m);
    c.min_stays = j.value("min_stays", c.min_stays);
    if (j.contains("stay")) {
        const auto& s = j.at("stay");
        c.stay.dist_threshold_m = s.value("dist_threshold_m", c.stay.dist_threshold_m);
        c.stay.time_threshold_min = s.value("time_threshold_min", c.stay.time_threshold_min);
        c.stay.max_gap_min = s.value("max_gap_min", c.stay.max_gap_min);
    }
    c.tz_offset_min = j.value("tz_offset_min", c.tz_offset_min);
    c.holidays = j.value("holidays", c.holidays);
    if (j.contains("period") && !j.at("period").is_null()) {
        const auto& p = j.at("period");
        const auto a = parse_date(p.at("start").get<std::string>());
        const auto b = parse_date(p.at("end").get<std::string>());
        if (!a || !b) throw Error("config: period dates must be YYYY-MM-DD");
        c.period = DateRange{*a, *b};
    }
    if (j.contains("model")) {
        const auto& m = j.at("model");
        c.dim = m.value("dim", c.dim);
        c.learning_rate = m.value("learning_rate", c.learning_rate);
        c.epochs = m.value("epochs", c.epochs);
        c.lr_decay = m.value("lr_decay", c.lr_decay);
        c.model_seed = m.value("seed", c.model_seed);
    }
    if (j.contains("cluster")) {
        const auto& k = j.at("cluster");
        c.k = k.value("k", c.k);
        c.cluster_seed = k.value("seed", c.cluster_seed);
        c.restarts = k.value("restarts", c.restarts);
    }
    return c;
}

inline RunConfig load_run_config(const std::string& path) {
    try {
        return run_config_from_json(nlohmann::json::parse(io::read_file(path)));
    } catch (const nlohmann::json::exception& e) {
        throw Error("config " + path + ": " + e.what());
    }
}

struct RunResult {
    RunConfig config;
    DateRange period;
    StaySet stays;  // annotated with area ids
    std::size_t n_stays = 0;
    std::size_t n_pairs = 0;
    std::size_t skipped_stays = 0;
    AreaModel model;
    PeriodResult period_result;
};

inline DateRange infer_period(const StaySet& stays, int tz_offset_min) {
    std::optional<DayNumber> lo, hi;
    for (const auto& [user, seq] : stays)
        for (const auto& s : seq) {
            const DayNumber d = to_local(s.arrival, tz_offset_min).day;
            lo = lo ? std::min(*lo, d) : d;
            hi = hi ? std::max(*hi, d) : d;
        }
    if (!lo) throw Error("no stays detected");
    return {*lo, *hi};
}

/// stays -> mesh -> encode -> train -> normalize -> cluster -> profile.
inline RunResult run_pipeline(const RunConfig& cfg, const TrajectorySet& trajectories) {
    run_stage("config", [&] { cfg.validate(); });
    const HolidayCalendar cal = run_stage("config", [&] { return cfg.calendar(); });
    RunResult r;
    r.config = cfg;

    r.stays = run_stage("stays", [&] { return extract_all_stays(trajectories, cfg.stay); });
    r.period = run_stage("stays", [&] {
        if (!cfg.period) return infer_period(r.stays, cfg.tz_offset_min);
        // keep only stays that start inside the analysis period
        for (auto it = r.stays.begin(); it != r.stays.end();) {
            auto& seq = it->second;
            std::erase_if(seq, [&](const Stay& s) { return !cfg.period->contains(to_local(s.arrival, cfg.tz_offset_min).day); });
            it = seq.empty() ? r.stays.erase(it) : std::next(it);
        }
        return *cfg.period;
    });
    for (const auto& [u, seq] : r.stays) r.n_stays += seq.size();

    auto& pr = r.period_result;
    pr.label = cfg.label;
    run_stage("mesh", [&] {
        pr.grid = build_grid(cfg.bbox, cfg.cell_m);
        pr.vocabulary = build_vocabulary(pr.grid, r.stays, cfg.min_stays);
    });

    const TrainingSet ts = run_stage("encode", [&] { return build_training_pairs(r.stays, cfg.tz_offset_min, cal); });
    r.n_pairs = ts.pairs.size();
    r.skipped_stays = ts.skipped;

    r.model = run_stage("train", [&] {
        ModelConfig mc;
        mc.n_areas = pr.vocabulary.size();
        mc.n_categories = kNumCategories;
        mc.dim = cfg.dim > 0 ? cfg.dim : default_dim(kNumCategories);
        mc.learning_rate = cfg.learning_rate;
        mc.epochs = cfg.epochs;
        mc.lr_decay = cfg.lr_decay;
        mc.seed = cfg.model_seed;
        return train(ts.pairs, mc);
    });
    pr.uas = run_stage("normalize", [&] { return normalize_embeddings(r.model); });
    pr.clustering = run_stage("cluster", [&] { return kmeans_best_of(pr.uas, cfg.k, cfg.cluster_seed, cfg.restarts); });
    pr.profiles = run_stage("profile",
                            [&] { return build_profiles(r.stays, pr.clustering, cfg.tz_offset_min, cal, r.period); });
    return r;
}

/// Writes every artifact of a run into `dir`; returns relative path -> sha256.
inline std::map<std::string, std::string> write_artifacts(const RunResult& r, const std::filesystem::path& dir) {
    return run_stage("render", [&] {
        namespace fs = std::filesystem;
        fs::create_directories(dir);
        std::map<std::string, std::string> files;
        auto put = [&](const std::string& rel, const std::string& content) {
            io::write_file(dir / rel, content);
            files[rel] = io::sha256_hex(content);
        };
        const auto& pr = r.period_result;
        put("stays.csv", serialize_stays(r.stays));
        put("vocabulary.csv", serialize_vocabulary(pr.grid, pr.vocabulary));
        put("model.json", model_to_json(r.model).dump() + "\n");
        put("uas.csv", [&] {
            std::string s = "area_id";
            for (std::size_t d = 0; d < pr.uas.cols(); ++d) s += ",v" + std::to_string(d);
            s += '\n';
            for (std::size_t a = 0; a < pr.uas.rows(); ++a) {
                s += std::to_string(a);
                for (std::size_t d = 0; d < pr.uas.cols(); ++d) s += ',' + io::fmt_double(pr.uas(a, d));
                s += '\n';
            }
            return s;
        }());
        put("clustering.csv", serialize_assignments(pr.clustering));
        put("clustering.json", clustering_sidecar(pr.clustering).dump(2) + "\n");
        put("profiles.json", profiles_to_json(pr.profiles).dump() + "\n");
        put("areas.geojson", render_geojson(pr.grid, pr.vocabulary, pr.clustering).dump() + "\n");
        const double ymax = shared_y_max(pr.profiles);
        for (const auto& p : pr.profiles)
            for (DayType t : {DayType::Weekday, DayType::Weekend})
                put("svg/cluster_" + std::to_string(p.cluster_id) + "_" + to_string(t) + ".svg",
                    render_profile_panel_svg(p, t, ymax));
        return files;
    });
}

inline nlohmann::json make_manifest(const RunResult& r, const std::string& input_sha256,
                                    const std::map<std::string, std::string>& artifacts) {
    return {{"tool", "area2vec"},
            {"version", kVersion},
            {"config", to_json(r.config)},
            {"seeds", {{"model", r.config.model_seed}, {"cluster", r.config.cluster_seed}}},
            {"input", {{"path", r.config.input}, {"sha256", input_sha256}}},
            {"period", {{"start", format_date(r.period.first)}, {"end", format_date(r.period.last)}}},
            {"stats",
             {{"stays", r.n_stays},
              {"training_pairs", r.n_pairs},
              {"skipped_stays", r.skipped_stays},
              {"areas", r.period_result.vocabulary.size()},
              {"grid_cells", r.period_result.grid.n_cells()},
              {"inertia", r.period_result.clustering.inertia}}},
            {"artifacts", artifacts}};
}

/// Full `run`: ingest the configured input, execute the pipeline, write
/// artifacts plus manifest.json into the output directory.
inline RunResult cmd_run(const RunConfig& cfg) {
    if (cfg.output_dir.empty()) throw StageError("config", "output_dir is required");
    const std::string raw = run_stage("ingest", [&] { return io::read_file_raw(cfg.input); });
    const std::string input_sha = io::sha256_hex(raw);
    const auto parsed = run_stage("ingest", [&] {
        return parse_trajectories(io::ends_with(cfg.input, ".gz") ? io::read_file(cfg.input) : raw, cfg.tz_offset_min);
    });
    RunResult r = run_pipeline(cfg, parsed.trajectories);
    const auto artifacts = write_artifacts(r, cfg.output_dir);
    io::write_file(std::filesystem::path(cfg.output_dir) / "manifest.json",
                   make_manifest(r, input_sha, artifacts).dump(2) + "\n");
    return r;
}

struct CompareResult {
    RunResult a;
    RunResult b;
    Alignment alignment;
    TransitionReport report;
};

inline CompareResult compare_runs(RunResult a, RunResult b) {
    CompareResult out;
    out.alignment = run_stage("compare", [&] { return align_clusters(a.period_result, b.period_result); });
    out.report = run_stage("compare", [&] { return transition_report(a.period_result, b.period_result, out.alignment); });
    out.a = std::move(a);
    out.b = std::move(b);
    return out;
}

inline void write_comparison(const CompareResult& c, const std::filesystem::path& dir) {
    run_stage("render", [&] {
        nlohmann::json align{{"b_to_a", c.alignment.b_to_a},
                             {"cost", c.alignment.cost},
                             {"period_a", c.a.config.label},
                             {"period_b", c.b.config.label},
                             {"common_areas", c.report.common_cells.size()},
                             {"dropped_areas", c.report.dropped_cells.size()},
                             {"appearing_areas", c.report.appearing_cells.size()}};
        io::write_file(dir / "alignment.json", align.dump(2) + "\n");
        io::write_file(dir / "transitions.csv", serialize_transitions(c.report));
        io::write_file(dir / "transitions.geojson",
                       transition_geojson(c.a.period_result.grid, c.report).dump() + "\n");
    });
}

/// `compare`: two independent runs, then label alignment and transitions.
/// Outputs go to <out>/a, <out>/b and <out>/comparison.
inline CompareResult cmd_compare(RunConfig a, RunConfig b, std::optional<std::size_t> k,
                                 const std::filesystem::path& out) {
    if (k) a.k = b.k = *k;
    if (a.k != b.k)
        throw StageError("config", "k differs between periods (" + std::to_string(a.k) + " vs " + std::to_string(b.k) + ")");
    a.output_dir = (out / "a").string();
    b.output_dir = (out / "b").string();
    // the two periods share nothing until alignment
    auto run_b = std::async(std::launch::async, [&b] { return cmd_run(b); });
    RunResult ra = cmd_run(a);
    CompareResult c = compare_runs(std::move(ra), run_b.get());
    write_comparison(c, out / "comparison");
    return c;
}

}  // namespace area2vec
