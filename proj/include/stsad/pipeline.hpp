#pragma once

// Stage-file pipeline. Every stage reads its inputs from and writes its
// artifacts to `output_dir`, so stages can be rerun or swapped individually:
//
//   synth     -> Y.tensor omega.mask labels.mask manifest.json
//   ingest    -> Y.tensor omega.mask ingest.json
//   graphs    -> graph<n>_{weights,laplacian,eigvals,eigvecs}.tensor
//                graphs.json stationarity.json
//   decompose -> L.tensor S.tensor diagnostics.jsonl decompose.json
//   score     -> scores.tensor scores.csv
//   evaluate  -> auc.json roc.csv [detection.json]
//   bench     -> bench.json
//
// Wall-clock times go to the log stream only (bench.json excepted), so
// rerunning a stage with the same config rewrites identical bytes.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stsad/admm.hpp"
#include "stsad/baselines.hpp"
#include "stsad/config.hpp"
#include "stsad/evaluation.hpp"
#include "stsad/graph.hpp"
#include "stsad/ingest.hpp"
#include "stsad/io.hpp"
#include "stsad/logss.hpp"
#include "stsad/scoring.hpp"
#include "stsad/synthetic.hpp"

namespace stsad {

enum class Stage { synth, ingest, graphs, decompose, score, evaluate, bench };

inline const std::vector<std::pair<std::string, Stage>> &stage_names() {
    static const std::vector<std::pair<std::string, Stage>> names{
        {"synth", Stage::synth},         {"ingest", Stage::ingest}, {"graphs", Stage::graphs},
        {"decompose", Stage::decompose}, {"score", Stage::score},   {"evaluate", Stage::evaluate},
        {"bench", Stage::bench}};
    return names;
}

inline Stage parse_stage(const std::string &name) {
    for (const auto &[n, s] : stage_names())
        if (n == name)
            return s;
    throw ConfigError("unknown stage '" + name + "'");
}

inline std::string stage_name(Stage stage) {
    for (const auto &[n, s] : stage_names())
        if (s == stage)
            return n;
    return "?";
}

/// An upstream artifact the requested stage needs is absent.
class MissingArtifact : public std::runtime_error {
  public:
    MissingArtifact(const std::filesystem::path &path, const std::string &note)
        : std::runtime_error("missing file '" + path.string() + "' (" + note + ")"), path_(path) {}
    const std::filesystem::path &path() const { return path_; }

  private:
    std::filesystem::path path_;
};

enum class Method { logss, loss, horpca, raw_ee };

inline Method parse_method(const std::string &name) {
    if (name == "logss")
        return Method::logss;
    if (name == "loss")
        return Method::loss;
    if (name == "horpca")
        return Method::horpca;
    if (name == "raw-ee")
        return Method::raw_ee;
    throw ConfigError("unknown solver '" + name + "' (expected logss, loss, horpca or raw-ee)");
}

namespace artifact {
inline constexpr const char *data = "Y.tensor";
inline constexpr const char *observed = "omega.mask";
inline constexpr const char *labels = "labels.mask";
inline constexpr const char *manifest = "manifest.json";
inline constexpr const char *ingest_summary = "ingest.json";
inline constexpr const char *graphs = "graphs.json";
inline constexpr const char *stationarity = "stationarity.json";
inline constexpr const char *low_rank = "L.tensor";
inline constexpr const char *sparse = "S.tensor";
inline constexpr const char *diagnostics = "diagnostics.jsonl";
inline constexpr const char *decompose_summary = "decompose.json";
inline constexpr const char *scores = "scores.tensor";
inline constexpr const char *scores_csv = "scores.csv";
inline constexpr const char *auc = "auc.json";
inline constexpr const char *roc = "roc.csv";
inline constexpr const char *detection = "detection.json";
inline constexpr const char *bench = "bench.json";

inline std::string graph_file(std::size_t mode, const char *what) {
    return "graph" + std::to_string(mode) + "_" + what + ".tensor";
}
} // namespace artifact

/// Solver settings as written in the config; unset values fall back to
/// AdmmParams::defaults_for on the data actually being decomposed.
struct SolverSettings {
    Method method = Method::logss;
    std::optional<double> theta, lambda, gamma, beta1, beta2, beta3, beta4;
    std::size_t max_iter = 300;
    double tol = 1e-5;
    bool circular_diff = true;
    std::size_t threads = 1;
    std::size_t knn_k = 0;
    double rank_ratio = 0.9;

    static SolverSettings from_config(const PipelineConfig &cfg) {
        SolverSettings s;
        s.method = parse_method(cfg.get_string("solver", "logss"));
        s.theta = cfg.get_optional_double("theta");
        s.lambda = cfg.get_optional_double("lambda");
        s.gamma = cfg.get_optional_double("gamma");
        s.beta1 = cfg.get_optional_double("beta1");
        s.beta2 = cfg.get_optional_double("beta2");
        s.beta3 = cfg.get_optional_double("beta3");
        s.beta4 = cfg.get_optional_double("beta4");
        s.max_iter = cfg.get_uint("max_iter", 300);
        s.tol = cfg.get_double("tol", 1e-5);
        s.circular_diff = cfg.get_bool("circular_diff", true);
        s.threads = std::max<std::size_t>(1, cfg.get_uint("threads", 1));
        s.knn_k = cfg.get_uint("knn_k", 0);
        s.rank_ratio = cfg.get_double("rank_ratio", 0.9);
        if (!(s.rank_ratio > 0.0 && s.rank_ratio <= 1.0))
            throw ConfigError("rank_ratio must be in (0, 1]");
        // Catch bad explicit values before any work.
        AdmmParams probe;
        probe.theta = s.theta.value_or(1.0);
        probe.lambda = s.lambda.value_or(0.0);
        probe.gamma = s.gamma.value_or(0.0);
        probe.beta1 = s.beta1.value_or(1.0);
        probe.beta2 = s.beta2.value_or(1.0);
        probe.beta3 = s.beta3.value_or(1.0);
        probe.beta4 = s.beta4.value_or(1.0);
        probe.max_iter = s.max_iter;
        probe.tol = s.tol;
        try {
            probe.validate();
        } catch (const std::invalid_argument &e) {
            throw ConfigError(e.what());
        }
        return s;
    }

    AdmmParams params_for(const DenseTensor &y, const SupportMask &omega) const {
        AdmmParams p = AdmmParams::defaults_for(y, omega);
        p.theta = theta.value_or(p.theta);
        p.lambda = lambda.value_or(p.lambda);
        p.gamma = gamma.value_or(p.gamma);
        p.beta1 = beta1.value_or(p.beta1);
        p.beta2 = beta2.value_or(p.beta2);
        p.beta3 = beta3.value_or(p.beta3);
        p.beta4 = beta4.value_or(p.beta4);
        p.max_iter = max_iter;
        p.tol = tol;
        p.circular_diff = circular_diff;
        p.threads = threads;
        return p;
    }
};

/// Decomposes `y` with the chosen method. raw-ee returns L = 0 and
/// S = P_Omega(Y), i.e. the data are scored directly. `graphs` is only used
/// by logss and is built from `y` when empty.
inline DecompositionResult decompose(const DenseTensor &y, const SupportMask &omega,
                                     const SolverSettings &settings,
                                     std::vector<ModeGraph> graphs = {},
                                     const IterationObserver &observer = {}) {
    const AdmmParams params = settings.params_for(y, omega);
    switch (settings.method) {
    case Method::logss:
        if (graphs.empty())
            graphs = build_all_graphs(y, settings.knn_k, settings.rank_ratio);
        return solve_logss(y, omega, graphs, params, observer);
    case Method::loss:
        return solve_loss(y, omega, params, observer);
    case Method::horpca:
        return solve_horpca(y, omega, params, observer);
    case Method::raw_ee: {
        DecompositionResult r;
        r.low_rank = DenseTensor(y.dims());
        r.sparse = project_support(y, omega);
        r.converged = true;
        return r;
    }
    }
    throw std::logic_error("decompose: unhandled method");
}

namespace detail {

using json = nlohmann::ordered_json;

inline void write_text(const std::filesystem::path &path, const std::string &text) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    out << text;
    if (!out)
        throw std::runtime_error("failed writing '" + path.string() + "'");
}

inline void write_json(const std::filesystem::path &path, const json &j) {
    write_text(path, j.dump(2) + "\n");
}

inline json read_json(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open '" + path.string() + "' for reading");
    try {
        return json::parse(in);
    } catch (const json::exception &e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

inline std::string fmt(double v) { return format_double(v); }

inline void require_artifact(const std::filesystem::path &path, const std::string &producer) {
    if (!std::filesystem::is_regular_file(path))
        throw MissingArtifact(path, "written by stage '" + producer + "'");
}

inline void require_input(const std::filesystem::path &path, const std::string &key) {
    if (!std::filesystem::is_regular_file(path))
        throw MissingArtifact(path, "named by config key '" + key + "'");
}

inline SynthConfig synth_config(const PipelineConfig &cfg) {
    SynthConfig sc;
    sc.dims = cfg.get_uint_list("synth_dims", sc.dims);
    if (sc.dims.size() != 4 ||
        std::any_of(sc.dims.begin(), sc.dims.end(), [](std::size_t d) { return d == 0; }))
        throw ConfigError("synth_dims must list 4 positive extents");
    sc.c = cfg.get_double("synth_c", sc.c);
    sc.l = cfg.get_uint("synth_l", sc.l);
    sc.m = cfg.get_double("synth_m", sc.m);
    sc.P = cfg.get_double("synth_P", sc.P);
    sc.seed = cfg.get_uint("seed", sc.seed);
    sc.noise_mean = cfg.get_double("noise_mean", sc.noise_mean);
    sc.noise_var = cfg.get_double("noise_var", sc.noise_var);
    try {
        sc.validate(sc.dims[0]);
    } catch (const std::invalid_argument &e) {
        throw ConfigError(e.what());
    }
    return sc;
}

inline std::filesystem::path output_dir(const PipelineConfig &cfg) {
    cfg.require({"output_dir"}, "any");
    return cfg.get_path("output_dir");
}

inline std::vector<ModeGraph> load_graphs(const std::filesystem::path &dir) {
    const auto manifest_path = dir / artifact::graphs;
    require_artifact(manifest_path, "graphs");
    const json manifest = read_json(manifest_path);
    std::vector<ModeGraph> graphs;
    try {
        for (const auto &entry : manifest.at("modes")) {
            ModeGraph g;
            g.mode = entry.at("mode").get<std::size_t>();
            g.rank = entry.at("rank").get<std::size_t>();
            const auto vals = dir / artifact::graph_file(g.mode, "eigvals");
            const auto vecs = dir / artifact::graph_file(g.mode, "eigvecs");
            require_artifact(vals, "graphs");
            require_artifact(vecs, "graphs");
            g.eigvals = tensor_to_matrix(load_tensor(vals)).col(0);
            g.eigvecs = tensor_to_matrix(load_tensor(vecs));
            if (g.eigvecs.rows() != g.eigvals.size() || g.eigvecs.cols() != g.eigvals.size() ||
                g.rank < 1 || g.rank > g.extent())
                throw FormatError(manifest_path.string() + ": inconsistent spectrum for mode " +
                                  std::to_string(g.mode));
            graphs.push_back(std::move(g));
        }
    } catch (const json::exception &e) {
        throw FormatError(manifest_path.string() + ": " + e.what());
    }
    return graphs;
}

inline void write_scores_csv(const std::filesystem::path &path, const DenseTensor &scores) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    out << "i1,i2,i3,i4,score\n";
    const Dims &d = scores.dims();
    for (std::size_t flat = 0; flat < scores.size(); ++flat) {
        std::size_t rest = flat;
        for (std::size_t k = 0; k < d.size(); ++k) {
            out << rest % d[k] << ',';
            rest /= d[k];
        }
        out << fmt(scores[flat]) << '\n';
    }
}

} // namespace detail

/// Runs one stage. Config values and upstream artifacts are checked before
/// anything is written. Throws ConfigError or MissingArtifact on validation
/// failures and other exceptions on runtime or numerical failures.
inline void execute_stage(const PipelineConfig &cfg, Stage stage, std::ostream &log = std::cerr) {
    using detail::json;
    namespace fs = std::filesystem;
    const fs::path dir = detail::output_dir(cfg);
    const std::string name = stage_name(stage);

    switch (stage) {
    case Stage::synth: {
        const SynthConfig sc = detail::synth_config(cfg);
        std::optional<fs::path> templ_path;
        if (cfg.has("synth_template")) {
            templ_path = cfg.get_path("synth_template");
            detail::require_input(*templ_path, "synth_template");
        }
        const DenseTensor templ = templ_path ? load_tensor(*templ_path) : builtin_template(sc.dims);
        if (templ.order() != 4)
            throw ConfigError("synth_template must be an order-4 tensor");
        fs::create_directories(dir);
        const SyntheticInstance inst = synthesize(templ, sc);
        save_tensor(dir / artifact::data, inst.data);
        save_mask(dir / artifact::observed, inst.truth.observed);
        save_mask(dir / artifact::labels, inst.truth.anomaly_mask);
        json intervals = json::array();
        for (const auto &iv : inst.truth.intervals)
            intervals.push_back({{"fiber", iv.fiber},
                                 {"start", iv.start},
                                 {"length", iv.length},
                                 {"sign", iv.sign},
                                 {"shift", iv.shift}});
        json manifest{{"dims", templ.dims()},
                      {"c", sc.c},
                      {"l", sc.l},
                      {"m", sc.m},
                      {"P", sc.P},
                      {"seed", sc.seed},
                      {"noise_mean", sc.noise_mean},
                      {"noise_var", sc.noise_var},
                      {"template", templ_path ? templ_path->string() : std::string("builtin")},
                      {"anomalous_elements", inst.truth.anomaly_mask.count()},
                      {"observed_elements", inst.truth.observed.count()},
                      {"intervals", intervals}};
        detail::write_json(dir / artifact::manifest, manifest);
        log << "synth: " << dims_to_string(inst.data.dims()) << ", "
            << inst.truth.intervals.size() << " anomalous fibers\n";
        return;
    }
    case Stage::ingest: {
        cfg.require({"trips_csv", "zone_list", "year"}, name);
        IngestOptions opts;
        const auto trips = cfg.get_path_list("trips_csv");
        const auto zone_path = cfg.get_path("zone_list");
        opts.year = static_cast<int>(cfg.get_uint("year", 0));
        opts.timestamp_column = cfg.get_string("timestamp_column", opts.timestamp_column);
        opts.zone_column = cfg.get_string("zone_column", opts.zone_column);
        for (const auto &p : trips)
            detail::require_input(p, "trips_csv");
        detail::require_input(zone_path, "zone_list");
        opts.zones = read_zone_list(zone_path);
        const IngestResult r = ingest_trips(trips, opts);
        fs::create_directories(dir);
        save_tensor(dir / artifact::data, r.counts);
        save_mask(dir / artifact::observed, r.observed);
        detail::write_json(dir / artifact::ingest_summary,
                           json{{"dims", r.counts.dims()},
                                {"year", opts.year},
                                {"zones", opts.zones},
                                {"rows_read", r.summary.rows_read},
                                {"rows_counted", r.summary.rows_counted},
                                {"dropped_unknown_zone", r.summary.dropped_zone},
                                {"dropped_outside_weeks", r.summary.dropped_week}});
        log << "ingest: counted " << r.summary.rows_counted << " of " << r.summary.rows_read
            << " rows\n";
        return;
    }
    case Stage::graphs: {
        const SolverSettings settings = SolverSettings::from_config(cfg);
        detail::require_artifact(dir / artifact::data, "synth' or 'ingest");
        const DenseTensor y = load_tensor(dir / artifact::data);
        const auto graphs = build_all_graphs(y, settings.knn_k, settings.rank_ratio);
        json modes = json::array(), stationarity = json::array();
        for (const auto &g : graphs) {
            save_tensor(dir / artifact::graph_file(g.mode, "weights"), matrix_to_tensor(g.weights));
            save_tensor(dir / artifact::graph_file(g.mode, "laplacian"),
                        matrix_to_tensor(g.laplacian));
            save_tensor(dir / artifact::graph_file(g.mode, "eigvals"), matrix_to_tensor(g.eigvals));
            save_tensor(dir / artifact::graph_file(g.mode, "eigvecs"), matrix_to_tensor(g.eigvecs));
            modes.push_back({{"mode", g.mode}, {"extent", g.extent()}, {"rank", g.rank}});
            stationarity.push_back({{"mode", g.mode}, {"s_r", stsad::stationarity(unfold(y, g.mode), g)}});
        }
        detail::write_json(dir / artifact::graphs,
                           json{{"knn_k", settings.knn_k},
                                {"rank_ratio", settings.rank_ratio},
                                {"modes", modes}});
        detail::write_json(dir / artifact::stationarity, stationarity);
        log << "graphs: ranks";
        for (const auto &g : graphs)
            log << ' ' << g.rank;
        log << '\n';
        return;
    }
    case Stage::decompose: {
        cfg.require({"solver"}, name);
        const SolverSettings settings = SolverSettings::from_config(cfg);
        detail::require_artifact(dir / artifact::data, "synth' or 'ingest");
        detail::require_artifact(dir / artifact::observed, "synth' or 'ingest");
        std::vector<ModeGraph> graphs;
        if (settings.method == Method::logss)
            graphs = detail::load_graphs(dir);
        const DenseTensor y = load_tensor(dir / artifact::data);
        const SupportMask omega = load_mask(dir / artifact::observed);
        if (y.dims() != omega.dims())
            throw FormatError("Y.tensor and omega.mask have different shapes");
        if (!graphs.empty()) {
            if (graphs.size() != y.order())
                throw FormatError("graphs.json describes " + std::to_string(graphs.size()) +
                                  " modes, Y.tensor has " + std::to_string(y.order()));
            for (const auto &g : graphs)
                if (g.extent() != y.dim(g.mode))
                    throw FormatError("graph for mode " + std::to_string(g.mode) +
                                      " does not match Y.tensor; rerun 'graphs'");
        }
        const bool baseline = settings.method == Method::loss || settings.method == Method::horpca;
        std::string diag;
        auto observer = [&](const IterationRecord &rec) {
            json line{{"iter", rec.iter},
                      {"r_data", rec.residuals.data},
                      {"r_tv", rec.residuals.tv},
                      {"r_sw", rec.residuals.sw},
                      {"r_graph_max", rec.residuals.graph_max},
                      {"objective", rec.objective}};
            if (baseline)
                line["svd_count"] = rec.svd_count;
            diag += line.dump() + "\n";
        };
        const DecompositionResult r = decompose(y, omega, settings, graphs, observer);
        save_tensor(dir / artifact::low_rank, r.low_rank);
        save_tensor(dir / artifact::sparse, r.sparse);
        detail::write_text(dir / artifact::diagnostics, diag);
        detail::write_json(dir / artifact::decompose_summary,
                           json{{"solver", cfg.get_string("solver")},
                                {"iterations", r.iterations},
                                {"converged", r.converged}});
        log << "decompose: " << cfg.get_string("solver") << ", " << r.iterations
            << " iterations, " << (r.converged ? "converged" : "not converged") << ", "
            << r.wall_time_s << " s\n";
        return;
    }
    case Stage::score: {
        const double h_fraction = cfg.get_double("h_fraction", 0.75);
        if (!(h_fraction > 0.0 && h_fraction <= 1.0))
            throw ConfigError("h_fraction must be in (0, 1]");
        detail::require_artifact(dir / artifact::sparse, "decompose");
        const DenseTensor s = load_tensor(dir / artifact::sparse);
        const FiberScoreField field = score_sparse_tensor(s, h_fraction);
        save_tensor(dir / artifact::scores, field.scores);
        detail::write_scores_csv(dir / artifact::scores_csv, field.scores);
        log << "score: " << field.fits.size() << " fibers scored\n";
        return;
    }
    case Stage::evaluate: {
        const auto k_list = cfg.get_double_list("k_list", {0.1, 0.5, 1.0, 5.0});
        for (double k : k_list)
            if (!(k > 0.0 && k <= 100.0))
                throw ConfigError("k_list entries must be in (0, 100]");
        std::optional<fs::path> events_path;
        if (cfg.has("events_csv")) {
            cfg.require({"zone_list", "year"}, name + "' with 'events_csv");
            events_path = cfg.get_path("events_csv");
            detail::require_input(*events_path, "events_csv");
            detail::require_input(cfg.get_path("zone_list"), "zone_list");
        }
        detail::require_artifact(dir / artifact::scores, "score");
        if (!events_path) {
            detail::require_artifact(dir / artifact::labels, "synth");
            detail::require_artifact(dir / artifact::observed, "synth' or 'ingest");
        }
        const DenseTensor scores = load_tensor(dir / artifact::scores);
        if (!events_path || fs::is_regular_file(dir / artifact::labels)) {
            const SupportMask labels = load_mask(dir / artifact::labels);
            const SupportMask omega = load_mask(dir / artifact::observed);
            const LabeledScores ls = label_scores(scores, labels, omega);
            const double auc = roc_auc(ls);
            detail::write_json(dir / artifact::auc,
                               json{{"method", cfg.get_string("solver", "unknown")},
                                    {"auc", auc},
                                    {"n_pos", ls.n_pos},
                                    {"n_neg", ls.n_neg}});
            std::string roc = "fpr,tpr\n";
            for (const auto &pt : roc_curve(ls))
                roc += detail::fmt(pt.fpr) + "," + detail::fmt(pt.tpr) + "\n";
            detail::write_text(dir / artifact::roc, roc);
            log << "evaluate: AUC " << auc << '\n';
        }
        if (events_path) {
            const auto zones = read_zone_list(cfg.get_path("zone_list"));
            const auto events = load_events(*events_path, zones,
                                            static_cast<int>(cfg.get_uint("year", 0)));
            if (scores.dims() != Dims{kHours, kDays, kWeeks, zones.size()})
                throw FormatError("scores.tensor shape does not match the zone list calendar");
            const auto detected = detection_at_k(scores, events, k_list);
            json rows = json::array();
            for (std::size_t i = 0; i < k_list.size(); ++i)
                rows.push_back({{"k_percent", k_list[i]}, {"detected", detected[i]}});
            detail::write_json(dir / artifact::detection,
                               json{{"events", events.size()}, {"results", rows}});
            log << "evaluate: detection at K written for " << events.size() << " events\n";
        }
        return;
    }
    case Stage::bench: {
        const SolverSettings base = SolverSettings::from_config(cfg);
        const auto repeats = cfg.get_uint("bench_repeats", 3);
        if (repeats < 2)
            throw ConfigError("bench_repeats must be >= 2");
        const double h_fraction = cfg.get_double("h_fraction", 0.75);
        std::vector<BenchSolver> solvers;
        for (const auto &m : cfg.get_list("bench_methods", {"logss", "loss", "horpca", "raw-ee"})) {
            SolverSettings s = base;
            s.method = parse_method(m);
            solvers.push_back({m, [s, h_fraction](const DenseTensor &y, const SupportMask &omega) {
                                   return score_sparse_tensor(decompose(y, omega, s).sparse,
                                                              h_fraction)
                                       .scores;
                               }});
        }
        for (const char *f : {artifact::data, artifact::observed, artifact::labels})
            detail::require_artifact(dir / f, "synth");
        BenchInstance inst{load_tensor(dir / artifact::data), load_mask(dir / artifact::observed),
                           load_mask(dir / artifact::labels)};
        const auto rows = benchmark_timing(solvers, inst, repeats);
        json out = json::array();
        for (const auto &r : rows) {
            out.push_back({{"method", r.method},
                           {"auc_mean", r.auc_mean},
                           {"auc_std", r.auc_std},
                           {"time_mean_s", r.time_mean_s},
                           {"time_std_s", r.time_std_s},
                           {"repeats", r.successes},
                           {"failures", r.failures}});
            log << "bench: " << r.method << " AUC " << r.auc_mean << " +- " << r.auc_std
                << ", time " << r.time_mean_s << " +- " << r.time_std_s << " s";
            if (r.failures)
                log << " (" << r.failures << " failed repeats)";
            log << '\n';
        }
        detail::write_json(dir / artifact::bench, out);
        return;
    }
    }
}

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

/// execute_stage with errors reported on `log` and mapped to exit codes.
inline int run_stage(const PipelineConfig &cfg, Stage stage, std::ostream &log = std::cerr) {
    try {
        execute_stage(cfg, stage, log);
        return kExitOk;
    } catch (const ConfigError &e) {
        log << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const MissingArtifact &e) {
        log << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception &e) {
        log << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

} // namespace stsad
