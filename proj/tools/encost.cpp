// SPDX-License-Identifier: Apache-2.0
//
// encost: content-complexity analysis of raw video, encoding time/energy
// model fitting, cross-validated evaluation, and power-trace ingestion.

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "encost/descriptors.hpp"
#include "encost/digest.hpp"
#include "encost/evaluation.hpp"
#include "encost/fitting.hpp"
#include "encost/power.hpp"
#include "encost/records.hpp"
#include "encost/serialize.hpp"
#include "encost/y4m.hpp"

namespace fs = std::filesystem;
using encost::json;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_usage = 1;
constexpr int exit_partial = 2;
constexpr int exit_data = 3;

std::optional<std::string> manifest_timestamp(bool reproducible) {
    if (reproducible) return std::nullopt;
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return std::string(buf);
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw encost::Error("cannot write '" + path + "'");
    out << text;
}

void write_json_file(const std::string& path, const json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

json load_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw encost::FormatError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw encost::FormatError("'" + path + "': " + e.what());
    }
}

encost::DescriptorMap load_descriptor_dir(const std::string& dir) {
    encost::DescriptorMap map;
    if (!fs::is_directory(dir))
        throw encost::FormatError("descriptor directory '" + dir + "' does not exist");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".json")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& path : files) {
        const auto d = encost::descriptor_set_from_json(load_json_file(path.string()));
        map[d.sequence_id] = d;
    }
    return map;
}

std::vector<encost::EncodingRecord> load_records(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw encost::FormatError("cannot open records file '" + path + "'");
    return encost::read_records_csv(in);
}

int worker_count(std::size_t jobs) {
    unsigned n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    if (const char* env = std::getenv("ENCOST_THREADS")) {
        try {
            const long cap = std::stol(env);
            if (cap >= 1 && cap < static_cast<long>(n)) n = static_cast<unsigned>(cap);
        } catch (const std::exception&) {
            // ignore unparsable values, keep hardware default
        }
    }
    return static_cast<int>(std::min<std::size_t>(n, jobs));
}

encost::DescriptorSelection parse_selection(const std::string& text) {
    if (text.empty() || text == "all") return encost::DescriptorSelection::all();
    auto sel = encost::DescriptorSelection::none();
    std::istringstream in(text);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        if (tok == "si") sel.si = true;
        else if (tok == "ti") sel.ti = true;
        else if (tok == "vca") { sel.vca_spatial = true; sel.vca_temporal = true; }
        else if (tok == "vca-spatial") sel.vca_spatial = true;
        else if (tok == "vca-temporal") sel.vca_temporal = true;
        else if (tok == "var") sel.variance = true;
        else if (tok == "flow") sel.flow = true;
        else throw encost::ConfigError("unknown descriptor '" + tok + "'");
    }
    if (!sel.any())
        throw encost::ConfigError("empty descriptor selection");
    return sel;
}

std::string sequence_id_from_path(const std::string& path) {
    if (path == "-") return "stdin";
    return fs::path(path).stem().string();
}

// ---------------------------------------------------------------------------
// analyze

struct AnalyzeArgs {
    std::vector<std::string> inputs;
    std::string list_file;
    int block_size = 32;
    std::string descriptors = "all";
    std::string si_ti_aggregation = "mean";
    double ultrafast_time = 0.0;
    std::string ultrafast_csv;
    std::string sequence_id;
    std::string out_dir = ".";
    bool reproducible = false;
};

std::map<std::string, double> load_ultrafast_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw encost::FormatError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line))
        throw encost::FormatError("ultrafast csv: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "sequence_id,t_s")
        throw encost::FormatError("ultrafast csv: expected header 'sequence_id,t_s'");
    std::map<std::string, double> out;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw encost::FormatError("ultrafast csv line " + std::to_string(line_no) +
                                      ": expected 'sequence_id,t_s'");
        try {
            out[line.substr(0, comma)] = std::stod(line.substr(comma + 1));
        } catch (const std::exception&) {
            throw encost::FormatError("ultrafast csv line " + std::to_string(line_no) +
                                      ": bad number");
        }
    }
    return out;
}

int cmd_analyze(const AnalyzeArgs& args) {
    std::vector<std::string> inputs = args.inputs;
    if (!args.list_file.empty()) {
        std::ifstream in(args.list_file);
        if (!in)
            throw encost::FormatError("cannot open list file '" + args.list_file + "'");
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!line.empty() && line[0] != '#') inputs.push_back(line);
        }
    }
    if (inputs.empty())
        throw encost::ConfigError("analyze: no inputs (use --input or --list)");
    if (!args.sequence_id.empty() && inputs.size() > 1)
        throw encost::ConfigError("analyze: --sequence-id requires a single input");
    if (args.ultrafast_time > 0.0 && inputs.size() > 1)
        throw encost::ConfigError("analyze: --ultrafast-time requires a single input; "
                                  "use --ultrafast-csv for batches");

    encost::BlockGridSpec spec;
    spec.block_size_vca = args.block_size;
    spec.validate();
    const auto selection = parse_selection(args.descriptors);
    encost::SiTiAggregation aggregation;
    if (args.si_ti_aggregation == "mean")
        aggregation = encost::SiTiAggregation::mean;
    else if (args.si_ti_aggregation == "max")
        aggregation = encost::SiTiAggregation::max;
    else
        throw encost::ConfigError("analyze: --si-ti-aggregation must be mean or max");
    std::map<std::string, double> ultrafast;
    if (!args.ultrafast_csv.empty()) ultrafast = load_ultrafast_csv(args.ultrafast_csv);

    fs::create_directories(args.out_dir);

    struct Result {
        bool ok = false;
        std::string message;
    };
    std::vector<Result> results(inputs.size());
    std::atomic<std::size_t> next{0};
    std::mutex io_mutex;

    const auto run_one = [&](std::size_t i) {
        const std::string& path = inputs[i];
        try {
            const std::string seq_id = !args.sequence_id.empty()
                                           ? args.sequence_id
                                           : sequence_id_from_path(path);
            auto source = encost::open_y4m(path, std::cin);
            auto d = encost::analyze(*source, spec, selection, seq_id,
                                     encost::FarnebackParams{}, aggregation);

            std::optional<double> uf_time;
            if (args.ultrafast_time > 0.0) uf_time = args.ultrafast_time;
            if (auto it = ultrafast.find(seq_id); it != ultrafast.end())
                uf_time = it->second;
            if (uf_time)
                d.c_ultrafast = encost::ultrafast_complexity(*uf_time, source->header(),
                                                             d.frame_count);

            json out = encost::to_json(d, spec);
            out["si_ti_aggregation"] = args.si_ti_aggregation;
            encost::RunManifest manifest;
            manifest.command = "analyze";
            manifest.inputs = {path};
            manifest.config = {{"block_size", args.block_size},
                               {"descriptors", args.descriptors},
                               {"si_ti_aggregation", args.si_ti_aggregation}};
            manifest.dataset_hash =
                path == "-" ? "unavailable" : encost::digest_file(path);
            manifest.timestamp = manifest_timestamp(args.reproducible);
            out["manifest"] = encost::to_json(manifest);

            const std::string out_path =
                (fs::path(args.out_dir) / (seq_id + ".json")).string();
            write_json_file(out_path, out);
            results[i] = {true, out_path};
        } catch (const std::exception& e) {
            results[i] = {false, e.what()};
        }
    };

    const int workers = worker_count(inputs.size());
    if (workers <= 1) {
        for (std::size_t i = 0; i < inputs.size(); ++i) run_one(i);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < inputs.size();
                     i = next.fetch_add(1))
                    run_one(i);
            });
        for (auto& t : pool) t.join();
    }

    std::size_t failures = 0;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        std::lock_guard<std::mutex> lock(io_mutex);
        if (results[i].ok) {
            std::cout << inputs[i] << " -> " << results[i].message << "\n";
        } else {
            ++failures;
            std::cerr << "error: " << inputs[i] << ": " << results[i].message << "\n";
        }
    }
    if (failures == 0) return exit_ok;
    return failures == inputs.size() ? exit_data : exit_partial;
}

// ---------------------------------------------------------------------------
// fit

struct FitArgs {
    std::string records_path;
    std::string descriptors_dir;
    std::string spatial = "vca";
    std::string temporal = "vca";
    std::string spatial_normalizer = "ln";
    std::string temporal_normalizer = "identity";
    std::string objective = "relative";
    int max_iterations = 200;
    double tolerance = 1e-10;
    std::string out_path = "model.json";
    bool reproducible = false;
};

encost::FitConfig fit_config_from(const std::string& objective, int max_iterations,
                                  double tolerance) {
    encost::FitConfig cfg;
    if (objective == "relative")
        cfg.objective = encost::FitConfig::Objective::relative_squared;
    else if (objective == "absolute")
        cfg.objective = encost::FitConfig::Objective::absolute_squared;
    else
        throw encost::ConfigError("objective must be 'relative' or 'absolute'");
    cfg.max_iterations = max_iterations;
    cfg.tolerance = tolerance;
    return cfg;
}

int cmd_fit(const FitArgs& args) {
    const auto records = load_records(args.records_path);
    encost::ContentFactorSpec spec;
    spec.spatial = encost::spatial_source_from_string(args.spatial);
    spec.temporal = encost::temporal_source_from_string(args.temporal);
    spec.spatial_normalizer = encost::normalizer_from_string(args.spatial_normalizer);
    spec.temporal_normalizer = encost::normalizer_from_string(args.temporal_normalizer);
    spec.validate();

    encost::DescriptorMap descriptors;
    if (!args.descriptors_dir.empty())
        descriptors = load_descriptor_dir(args.descriptors_dir);

    const auto cfg = fit_config_from(args.objective, args.max_iterations, args.tolerance);
    const auto fit = encost::fit_time_model(records, descriptors, spec, cfg);

    const auto factors = encost::content_factors_for(records, descriptors, spec);
    std::vector<double> measured, predicted;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        measured.push_back(r.time_s);
        predicted.push_back(
            encost::predict_time_kpix(fit.params, factors[i], r.n_intra, r.crf, r.preset) *
            r.kilopixels());
    }
    const double training_mape = encost::mape(measured, predicted);

    encost::ModelFile model;
    model.time_params = fit.params;
    model.content_spec = spec;
    model.objective_value = fit.objective;
    model.objective_kind = args.objective == "relative" ? "relative-squared"
                                                        : "absolute-squared";
    model.converged = fit.converged;
    model.iterations = fit.iterations;
    model.training_mape = training_mape;
    model.n_records = static_cast<long>(records.size());
    model.dataset_hash = encost::digest_file(args.records_path);
    model.date = manifest_timestamp(args.reproducible);

    std::size_t energy_count = 0;
    for (const auto& r : records) energy_count += r.energy_j.has_value();
    if (energy_count >= 2) model.energy_params = encost::fit_energy_linear(records);

    json out = encost::to_json(model);
    {
        json ranges = {{"preset", {99, 0}}, {"crf", {99, 0}}};
        int pmin = 99, pmax = 0, cmin = 99, cmax = 0;
        for (const auto& r : records) {
            pmin = std::min(pmin, r.preset);
            pmax = std::max(pmax, r.preset);
            cmin = std::min(cmin, r.crf);
            cmax = std::max(cmax, r.crf);
        }
        out["fit_metadata"]["fitted_range"] = {{"preset", {pmin, pmax}},
                                               {"crf", {cmin, cmax}}};
    }
    encost::RunManifest manifest;
    manifest.command = "fit";
    manifest.inputs = {args.records_path};
    manifest.config = {{"spatial", args.spatial},
                       {"temporal", args.temporal},
                       {"objective", args.objective}};
    manifest.dataset_hash = model.dataset_hash;
    manifest.timestamp = manifest_timestamp(args.reproducible);
    out["manifest"] = encost::to_json(manifest);
    write_json_file(args.out_path, out);

    std::cout << "objective " << fit.objective << " after " << fit.iterations
              << " iterations" << (fit.converged ? "" : " (did not converge)")
              << "\ntraining MAPE " << training_mape << " %\nmodel -> "
              << args.out_path << "\n";
    if (!fit.converged)
        std::cerr << "warning: fit did not converge; best-so-far parameters written\n";
    return exit_ok;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateArgs {
    std::string records_path;
    std::string descriptors_dir;
    bool grid = false;
    std::string spatial = "vca";
    std::string temporal = "vca";
    int folds = 3;
    std::uint64_t seed = 0;
    std::string objective = "relative";
    int max_iterations = 200;
    double tolerance = 1e-10;
    std::string out_path = "report.json";
    std::string text_path;
    std::string oracle_csv;
    bool cv_energy = false;
    bool reproducible = false;
};

int cmd_evaluate(const EvaluateArgs& args) {
    const auto records = load_records(args.records_path);
    encost::DescriptorMap descriptors;
    if (!args.descriptors_dir.empty())
        descriptors = load_descriptor_dir(args.descriptors_dir);

    const auto cfg = fit_config_from(args.objective, args.max_iterations, args.tolerance);
    const auto folds = encost::make_fold_assignment(records, args.folds, args.seed);
    encost::CvOptions options;
    options.cv_energy_fit = args.cv_energy;

    json out = {{"schema_version", encost::schema_version},
                {"tool_version", encost::tool_version}};
    json fold_json = json::object();
    for (const auto& [seq, f] : folds.fold_of) fold_json[seq] = f;
    out["folds"] = {{"n_folds", folds.n_folds},
                    {"seed", args.seed},
                    {"assignment", fold_json}};

    std::string text;
    if (args.grid) {
        const auto grid =
            encost::descriptor_grid_evaluation(records, descriptors, cfg, folds, options);
        out["grid"] = encost::to_json(grid);
        text = encost::render_grid_text(grid, false);
        bool any_energy = false;
        for (const auto& c : grid.cells) any_energy = any_energy || c.energy_mape;
        if (any_energy) text += "\n" + encost::render_grid_text(grid, true);
    } else {
        encost::ContentFactorSpec spec;
        spec.spatial = encost::spatial_source_from_string(args.spatial);
        spec.temporal = encost::temporal_source_from_string(args.temporal);
        const auto cv =
            encost::cross_validate(records, descriptors, spec, cfg, folds, options);
        out["spec"] = encost::to_json(spec);
        out["time"] = encost::to_json(cv.time);
        if (cv.energy) out["energy"] = encost::to_json(*cv.energy);
        std::ostringstream t;
        t << "time MAPE " << cv.time.mean_mape << " %";
        if (cv.energy) t << ", energy MAPE " << cv.energy->mean_mape << " %";
        t << "\n";
        text = t.str();
    }

    if (!args.oracle_csv.empty()) {
        const auto blind = encost::fit_blind_params(records, cfg);
        const auto factors = encost::oracle_content_factors(records, blind);
        write_text_file(args.oracle_csv, encost::render_oracle_csv(factors));
        json jf = json::object();
        for (const auto& [seq, f] : factors)
            jf[seq] = {{"factor", f.factor}, {"stddev", f.stddev}, {"n", f.n}};
        out["oracle_content_factors"] = jf;
    }

    encost::RunManifest manifest;
    manifest.command = "evaluate";
    manifest.inputs = {args.records_path};
    manifest.config = {{"grid", args.grid},
                       {"spatial", args.spatial},
                       {"temporal", args.temporal},
                       {"folds", args.folds},
                       {"seed", args.seed},
                       {"objective", args.objective},
                       {"cv_energy", args.cv_energy}};
    manifest.dataset_hash = encost::digest_file(args.records_path);
    manifest.timestamp = manifest_timestamp(args.reproducible);
    out["manifest"] = encost::to_json(manifest);

    write_json_file(args.out_path, out);
    if (!args.text_path.empty())
        write_text_file(args.text_path, text);
    std::cout << text;
    std::cout << "report -> " << args.out_path << "\n";
    return exit_ok;
}

// ---------------------------------------------------------------------------
// predict

struct PredictArgs {
    std::string model_path;
    std::string descriptors_path;
    int preset = 0;
    int crf = 0;
    long n_intra = 0;
    int width = 0;
    int height = 0;
    long frames = 0;
    std::string fps = "25:1";
    bool as_json = false;
    bool reproducible = false;
};

int cmd_predict(const PredictArgs& args) {
    const json jmodel = load_json_file(args.model_path);
    const auto model = encost::model_from_json(jmodel);

    encost::DescriptorSet descriptors;
    if (!args.descriptors_path.empty())
        descriptors = encost::descriptor_set_from_json(load_json_file(args.descriptors_path));
    else if (!model.content_spec.is_blind())
        throw encost::ConfigError(
            "predict: model uses content descriptors; pass --descriptors");

    encost::Rational fps{25, 1};
    {
        const auto colon = args.fps.find(':');
        if (colon != std::string::npos) {
            fps.num = std::stol(args.fps.substr(0, colon));
            fps.den = std::stol(args.fps.substr(colon + 1));
        } else {
            fps.num = std::stol(args.fps);
            fps.den = 1;
        }
    }
    const long n_intra = args.n_intra > 0
                             ? args.n_intra
                             : encost::default_n_intra(args.frames, fps);

    if (jmodel.contains("fit_metadata") &&
        jmodel["fit_metadata"].contains("fitted_range")) {
        const auto& range = jmodel["fit_metadata"]["fitted_range"];
        const int pmin = range["preset"][0], pmax = range["preset"][1];
        const int cmin = range["crf"][0], cmax = range["crf"][1];
        if (args.preset < pmin || args.preset > pmax)
            std::cerr << "warning: preset " << args.preset
                      << " outside fitted range [" << pmin << ", " << pmax
                      << "]; extrapolating\n";
        if (args.crf < cmin || args.crf > cmax)
            std::cerr << "warning: crf " << args.crf << " outside fitted range ["
                      << cmin << ", " << cmax << "]; extrapolating\n";
    }

    const double c = encost::content_factor(descriptors, model.content_spec);
    const double t_kpix = encost::predict_time_kpix(model.time_params, c, n_intra,
                                                    args.crf, args.preset);
    const double time_s =
        t_kpix * (static_cast<double>(args.width) * args.height / 1000.0) * args.frames;
    std::optional<double> energy_j;
    if (model.energy_params)
        energy_j = encost::predict_energy(*model.energy_params, t_kpix, args.width,
                                          args.height, args.frames);

    if (args.as_json) {
        json out = {{"schema_version", encost::schema_version},
                    {"content_factor", c},
                    {"time_kpix_s", t_kpix},
                    {"time_s", time_s}};
        if (energy_j) out["energy_j"] = *energy_j;
        encost::RunManifest manifest;
        manifest.command = "predict";
        manifest.inputs = {args.model_path};
        manifest.config = {{"preset", args.preset},
                           {"crf", args.crf},
                           {"n_intra", n_intra},
                           {"width", args.width},
                           {"height", args.height},
                           {"frames", args.frames}};
        manifest.dataset_hash = encost::digest_file(args.model_path);
        manifest.timestamp = manifest_timestamp(args.reproducible);
        out["manifest"] = encost::to_json(manifest);
        std::cout << out.dump(2) << "\n";
    } else {
        std::cout << "time_s " << time_s << "\n";
        if (energy_j) std::cout << "energy_j " << *energy_j << "\n";
    }
    return exit_ok;
}

// ---------------------------------------------------------------------------
// ingest-power

struct IngestPowerArgs {
    std::string total_path;
    std::string idle_path;
    double duration = -1.0;
    std::string series_path;
    double alpha = 0.99;
    double beta = 0.02;
    bool as_json = false;
    bool reproducible = false;
};

int cmd_ingest_power(const IngestPowerArgs& args) {
    json out = {{"schema_version", encost::schema_version}};
    std::ostringstream text;
    std::vector<std::string> inputs;

    if (!args.total_path.empty() || !args.idle_path.empty()) {
        if (args.total_path.empty() || args.idle_path.empty())
            throw encost::ConfigError("ingest-power: --total and --idle go together");
        std::ifstream tin(args.total_path, std::ios::binary);
        if (!tin) throw encost::FormatError("cannot open '" + args.total_path + "'");
        std::ifstream iin(args.idle_path, std::ios::binary);
        if (!iin) throw encost::FormatError("cannot open '" + args.idle_path + "'");
        const auto total = encost::read_power_trace_csv(tin, encost::TraceLabel::total);
        const auto idle = encost::read_power_trace_csv(iin, encost::TraceLabel::idle);
        const double duration = args.duration >= 0.0
                                    ? args.duration
                                    : std::min(total.span_end(), idle.span_end());
        const auto energy = encost::encoding_energy(total, idle, duration);
        if (energy.negative)
            std::cerr << "warning: encoding energy is negative ("
                      << energy.joules << " J); idle trace exceeded total "
                      << "over the interval\n";
        out["encoding_energy_j"] = energy.joules;
        out["duration_s"] = duration;
        text << "E_enc " << energy.joules << " J over " << duration << " s\n";
        inputs.push_back(args.total_path);
        inputs.push_back(args.idle_path);
    }

    if (!args.series_path.empty()) {
        std::ifstream sin(args.series_path, std::ios::binary);
        if (!sin) throw encost::FormatError("cannot open '" + args.series_path + "'");
        encost::MeasurementSeries series;
        series.values = encost::read_series_csv(sin);
        series.alpha_m = args.alpha;
        series.beta_m = args.beta;
        const auto conf = encost::confidence_satisfied(series);
        out["confidence"] = {{"satisfied", conf.satisfied},
                             {"lhs_j", conf.lhs},
                             {"rhs_j", conf.rhs},
                             {"m", conf.m},
                             {"mean_j", conf.mean_j},
                             {"stddev_j", conf.stddev_j},
                             {"t_critical", conf.t_critical},
                             {"alpha", args.alpha},
                             {"beta", args.beta},
                             {"quantile_convention", "one-sided"}};
        text << "confidence " << (conf.satisfied ? "satisfied" : "not satisfied")
             << " (lhs " << conf.lhs << " J, rhs " << conf.rhs << " J, m "
             << conf.m << ")\n";
        inputs.push_back(args.series_path);
    }

    if (inputs.empty())
        throw encost::ConfigError(
            "ingest-power: nothing to do (pass --total/--idle and/or --series)");

    if (args.as_json) {
        encost::RunManifest manifest;
        manifest.command = "ingest-power";
        manifest.inputs = inputs;
        manifest.config = {{"duration", args.duration},
                           {"alpha", args.alpha},
                           {"beta", args.beta}};
        std::string combined;
        for (const auto& p : inputs) combined += encost::digest_file(p);
        manifest.dataset_hash = encost::fnv1a64_hex(combined);
        manifest.timestamp = manifest_timestamp(args.reproducible);
        out["manifest"] = encost::to_json(manifest);
        std::cout << out.dump(2) << "\n";
    } else {
        std::cout << text.str();
    }
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"encoding cost toolkit: video complexity descriptors, "
                 "time/energy model fitting and evaluation"};
    app.require_subcommand(1);

    AnalyzeArgs analyze_args;
    auto* analyze = app.add_subcommand(
        "analyze", "compute complexity descriptors from Y4M video");
    analyze->add_option("--input", analyze_args.inputs,
                        "Y4M file path ('-' for stdin); repeatable");
    analyze->add_option("--list", analyze_args.list_file,
                        "file with one Y4M path per line");
    analyze->add_option("--block-size", analyze_args.block_size,
                        "DCT texture block size (16, 32 or 64)");
    analyze->add_option("--descriptors", analyze_args.descriptors,
                        "comma list of si,ti,vca,vca-spatial,vca-temporal,var,flow or 'all'");
    analyze->add_option("--si-ti-aggregation", analyze_args.si_ti_aggregation,
                        "cross-frame pooling for SI/TI: mean (default) or max");
    analyze->add_option("--ultrafast-time", analyze_args.ultrafast_time,
                        "measured preset-13 encode time in seconds (single input)");
    analyze->add_option("--ultrafast-csv", analyze_args.ultrafast_csv,
                        "CSV 'sequence_id,t_s' with preset-13 encode times");
    analyze->add_option("--sequence-id", analyze_args.sequence_id,
                        "override the sequence id (single input)");
    analyze->add_option("--out", analyze_args.out_dir, "output directory");
    analyze->add_flag("--reproducible", analyze_args.reproducible,
                      "omit timestamps from outputs");

    FitArgs fit_args;
    auto* fit = app.add_subcommand("fit", "fit the time (and energy) model");
    fit->add_option("--records", fit_args.records_path, "records CSV")->required();
    fit->add_option("--descriptors", fit_args.descriptors_dir,
                    "directory of descriptor JSON files");
    fit->add_option("--spatial", fit_args.spatial, "si|vca|var|ultrafast|none");
    fit->add_option("--temporal", fit_args.temporal, "ti|vca|flow|ultrafast|none");
    fit->add_option("--spatial-normalizer", fit_args.spatial_normalizer, "ln|identity");
    fit->add_option("--temporal-normalizer", fit_args.temporal_normalizer, "ln|identity");
    fit->add_option("--objective", fit_args.objective, "relative|absolute");
    fit->add_option("--max-iterations", fit_args.max_iterations, "LM iteration cap");
    fit->add_option("--tolerance", fit_args.tolerance, "relative objective tolerance");
    fit->add_option("--out", fit_args.out_path, "model JSON path");
    fit->add_flag("--reproducible", fit_args.reproducible, "omit timestamps");

    EvaluateArgs eval_args;
    auto* evaluate = app.add_subcommand(
        "evaluate", "cross-validated MAPE for one spec or the descriptor grid");
    evaluate->add_option("--records", eval_args.records_path, "records CSV")->required();
    evaluate->add_option("--descriptors", eval_args.descriptors_dir,
                         "directory of descriptor JSON files");
    evaluate->add_flag("--grid", eval_args.grid, "evaluate every descriptor pairing");
    evaluate->add_option("--spatial", eval_args.spatial, "si|vca|var|ultrafast|none");
    evaluate->add_option("--temporal", eval_args.temporal, "ti|vca|flow|ultrafast|none");
    evaluate->add_option("--folds", eval_args.folds, "number of folds");
    evaluate->add_option("--seed", eval_args.seed, "fold shuffle seed");
    evaluate->add_option("--objective", eval_args.objective, "relative|absolute");
    evaluate->add_option("--max-iterations", eval_args.max_iterations, "LM iteration cap");
    evaluate->add_option("--tolerance", eval_args.tolerance, "relative objective tolerance");
    evaluate->add_option("--out", eval_args.out_path, "report JSON path");
    evaluate->add_option("--text", eval_args.text_path, "aligned-text tables path");
    evaluate->add_option("--oracle-csv", eval_args.oracle_csv,
                         "emit per-sequence oracle content factors as CSV");
    evaluate->add_flag("--cv-energy", eval_args.cv_energy,
                       "refit the energy line per fold instead of once on all data");
    evaluate->add_flag("--reproducible", eval_args.reproducible, "omit timestamps");

    PredictArgs predict_args;
    auto* predict = app.add_subcommand("predict", "predict time and energy");
    predict->add_option("--model", predict_args.model_path, "model JSON")->required();
    predict->add_option("--descriptors", predict_args.descriptors_path,
                        "descriptor set JSON for the sequence");
    predict->add_option("--preset", predict_args.preset, "SVT-AV1 preset 1..13")->required();
    predict->add_option("--crf", predict_args.crf, "constant rate factor 1..63")->required();
    predict->add_option("--n-intra", predict_args.n_intra,
                        "intra frame count (default: ~5 s GOP)");
    predict->add_option("--width", predict_args.width, "frame width")->required();
    predict->add_option("--height", predict_args.height, "frame height")->required();
    predict->add_option("--frames", predict_args.frames, "frame count")->required();
    predict->add_option("--fps", predict_args.fps, "frame rate num:den for the GOP default");
    predict->add_flag("--json", predict_args.as_json, "machine-readable output");
    predict->add_flag("--reproducible", predict_args.reproducible, "omit timestamps");

    IngestPowerArgs power_args;
    auto* ingest = app.add_subcommand(
        "ingest-power", "idle-subtracted energy and the confidence stopping rule");
    ingest->add_option("--total", power_args.total_path, "total power trace CSV");
    ingest->add_option("--idle", power_args.idle_path, "idle power trace CSV");
    ingest->add_option("--duration", power_args.duration,
                       "integration interval in seconds (default: trace span)");
    ingest->add_option("--series", power_args.series_path,
                       "repeated energy measurements CSV");
    ingest->add_option("--alpha", power_args.alpha, "confidence level");
    ingest->add_option("--beta", power_args.beta, "relative bound");
    ingest->add_flag("--json", power_args.as_json, "machine-readable output");
    ingest->add_flag("--reproducible", power_args.reproducible, "omit timestamps");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_usage;
    }

    try {
        if (analyze->parsed()) return cmd_analyze(analyze_args);
        if (fit->parsed()) return cmd_fit(fit_args);
        if (evaluate->parsed()) return cmd_evaluate(eval_args);
        if (predict->parsed()) return cmd_predict(predict_args);
        if (ingest->parsed()) return cmd_ingest_power(power_args);
    } catch (const encost::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_data;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_data;
    }
    return exit_usage;
}
