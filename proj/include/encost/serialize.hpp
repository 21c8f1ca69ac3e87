// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "encost/evaluation.hpp"
#include "encost/version.hpp"

namespace encost {

using json = nlohmann::json;

inline const char* to_string(SpatialSource s) {
    switch (s) {
        case SpatialSource::si: return "si";
        case SpatialSource::vca: return "vca";
        case SpatialSource::var: return "var";
        case SpatialSource::ultrafast: return "ultrafast";
        case SpatialSource::none: return "none";
    }
    return "none";
}

inline const char* to_string(TemporalSource t) {
    switch (t) {
        case TemporalSource::ti: return "ti";
        case TemporalSource::vca: return "vca";
        case TemporalSource::flow: return "flow";
        case TemporalSource::ultrafast: return "ultrafast";
        case TemporalSource::none: return "none";
    }
    return "none";
}

inline const char* to_string(Normalizer n) {
    return n == Normalizer::ln ? "ln" : "identity";
}

inline SpatialSource spatial_source_from_string(const std::string& s) {
    if (s == "si") return SpatialSource::si;
    if (s == "vca") return SpatialSource::vca;
    if (s == "var") return SpatialSource::var;
    if (s == "ultrafast") return SpatialSource::ultrafast;
    if (s == "none") return SpatialSource::none;
    throw ConfigError("unknown spatial source '" + s + "'");
}

inline TemporalSource temporal_source_from_string(const std::string& s) {
    if (s == "ti") return TemporalSource::ti;
    if (s == "vca") return TemporalSource::vca;
    if (s == "flow") return TemporalSource::flow;
    if (s == "ultrafast") return TemporalSource::ultrafast;
    if (s == "none") return TemporalSource::none;
    throw ConfigError("unknown temporal source '" + s + "'");
}

inline Normalizer normalizer_from_string(const std::string& s) {
    if (s == "ln") return Normalizer::ln;
    if (s == "identity") return Normalizer::identity;
    throw ConfigError("unknown normalizer '" + s + "'");
}

// Provenance block embedded in every output artifact.
struct RunManifest {
    std::string command;
    std::vector<std::string> inputs;
    json config = json::object();
    std::string dataset_hash;
    std::optional<std::string> timestamp;  // absent under --reproducible
};

inline json to_json(const RunManifest& m) {
    json j = {{"command", m.command},
              {"inputs", m.inputs},
              {"config", m.config},
              {"tool_version", tool_version},
              {"dataset_hash", m.dataset_hash}};
    if (m.timestamp) j["timestamp"] = *m.timestamp;
    return j;
}

inline json to_json(const BlockGridSpec& spec) {
    return {{"block_size_vca", spec.block_size_vca},
            {"block_size_var", spec.block_size_var},
            {"partial_block_policy", "drop"}};
}

inline BlockGridSpec block_spec_from_json(const json& j) {
    BlockGridSpec spec;
    spec.block_size_vca = j.value("block_size_vca", 32);
    spec.block_size_var = j.value("block_size_var", 64);
    spec.validate();
    return spec;
}

inline json to_json(const ContentFactorSpec& spec) {
    return {{"spatial", to_string(spec.spatial)},
            {"temporal", to_string(spec.temporal)},
            {"spatial_normalizer", to_string(spec.spatial_normalizer)},
            {"temporal_normalizer", to_string(spec.temporal_normalizer)},
            {"floor", spec.floor}};
}

inline ContentFactorSpec content_spec_from_json(const json& j) {
    ContentFactorSpec spec;
    spec.spatial = spatial_source_from_string(j.at("spatial").get<std::string>());
    spec.temporal = temporal_source_from_string(j.at("temporal").get<std::string>());
    spec.spatial_normalizer =
        normalizer_from_string(j.value("spatial_normalizer", "ln"));
    spec.temporal_normalizer =
        normalizer_from_string(j.value("temporal_normalizer", "identity"));
    spec.floor = j.value("floor", 1e-6);
    spec.validate();
    return spec;
}

// Flat object keyed by descriptor name; absent descriptors are omitted.
inline json to_json(const DescriptorSet& d, const BlockGridSpec& spec) {
    json j = {{"schema_version", schema_version},
              {"tool_version", tool_version},
              {"sequence_id", d.sequence_id},
              {"width", d.width},
              {"height", d.height},
              {"frame_count", d.frame_count},
              {"block_spec", to_json(spec)}};
    const auto put = [&](const char* key, const std::optional<double>& v) {
        if (v) j[key] = *v;
    };
    put("c_s_si", d.c_s_si);
    put("c_s_vca", d.c_s_vca);
    put("c_s_var", d.c_s_var);
    put("c_t_ti", d.c_t_ti);
    put("c_t_vca", d.c_t_vca);
    put("c_t_flow", d.c_t_flow);
    put("c_ultrafast", d.c_ultrafast);
    return j;
}

inline DescriptorSet descriptor_set_from_json(const json& j) {
    DescriptorSet d;
    d.sequence_id = j.at("sequence_id").get<std::string>();
    d.width = j.value("width", 0);
    d.height = j.value("height", 0);
    d.frame_count = j.value("frame_count", 0L);
    const auto get = [&](const char* key) -> std::optional<double> {
        if (j.contains(key)) return j.at(key).get<double>();
        return std::nullopt;
    };
    d.c_s_si = get("c_s_si");
    d.c_s_vca = get("c_s_vca");
    d.c_s_var = get("c_s_var");
    d.c_t_ti = get("c_t_ti");
    d.c_t_vca = get("c_t_vca");
    d.c_t_flow = get("c_t_flow");
    d.c_ultrafast = get("c_ultrafast");
    return d;
}

inline json to_json(const TimeModelParams& p) {
    return {{"alpha", p.alpha}, {"beta", p.beta},   {"gamma", p.gamma},
            {"delta", p.delta}, {"xi", p.xi},       {"t0", p.t0}};
}

inline TimeModelParams time_params_from_json(const json& j) {
    TimeModelParams p;
    p.alpha = j.at("alpha").get<double>();
    p.beta = j.at("beta").get<double>();
    p.gamma = j.at("gamma").get<double>();
    p.delta = j.at("delta").get<double>();
    p.xi = j.at("xi").get<double>();
    p.t0 = j.at("t0").get<double>();
    p.validate();
    return p;
}

inline json to_json(const EnergyModelParams& p) {
    return {{"e0", p.e0}, {"p", p.p}};
}

inline EnergyModelParams energy_params_from_json(const json& j) {
    EnergyModelParams p;
    p.e0 = j.at("e0").get<double>();
    p.p = j.at("p").get<double>();
    return p;
}

// Serialized fitted model: everything needed to predict, plus fit metadata.
struct ModelFile {
    TimeModelParams time_params;
    std::optional<EnergyModelParams> energy_params;
    ContentFactorSpec content_spec;
    BlockGridSpec block_spec;
    double objective_value = 0.0;
    std::string objective_kind = "relative-squared";
    bool converged = true;
    int iterations = 0;
    double training_mape = 0.0;
    long n_records = 0;
    std::string dataset_hash;
    std::optional<std::string> date;
};

inline json to_json(const ModelFile& m) {
    json j = {{"schema_version", schema_version},
              {"tool_version", tool_version},
              {"time_params", to_json(m.time_params)},
              {"content_spec", to_json(m.content_spec)},
              {"block_spec", to_json(m.block_spec)},
              {"fit_metadata",
               {{"objective", m.objective_kind},
                {"objective_value", m.objective_value},
                {"converged", m.converged},
                {"iterations", m.iterations},
                {"training_mape_pct", m.training_mape},
                {"n_records", m.n_records},
                {"dataset_hash", m.dataset_hash}}}};
    if (m.energy_params) j["energy_params"] = to_json(*m.energy_params);
    if (m.date) j["fit_metadata"]["date"] = *m.date;
    return j;
}

inline ModelFile model_from_json(const json& j) {
    ModelFile m;
    m.time_params = time_params_from_json(j.at("time_params"));
    if (j.contains("energy_params"))
        m.energy_params = energy_params_from_json(j.at("energy_params"));
    m.content_spec = content_spec_from_json(j.at("content_spec"));
    m.block_spec = block_spec_from_json(j.value("block_spec", json::object()));
    const auto& meta = j.at("fit_metadata");
    m.objective_kind = meta.value("objective", "relative-squared");
    m.objective_value = meta.value("objective_value", 0.0);
    m.converged = meta.value("converged", true);
    m.iterations = meta.value("iterations", 0);
    m.training_mape = meta.value("training_mape_pct", 0.0);
    m.n_records = meta.value("n_records", 0L);
    m.dataset_hash = meta.value("dataset_hash", "");
    return m;
}

inline json to_json(const EvaluationReport& r) {
    json per_preset = json::object(), per_crf = json::object();
    for (const auto& [k, v] : r.per_preset_mape) per_preset[std::to_string(k)] = v;
    for (const auto& [k, v] : r.per_crf_mape) per_crf[std::to_string(k)] = v;
    return {{"per_fold_mape_pct", r.per_fold_mape},
            {"mean_mape_pct", r.mean_mape},
            {"per_preset_mape_pct", per_preset},
            {"per_crf_mape_pct", per_crf},
            {"n_records", r.n_records},
            {"all_converged", r.all_converged}};
}

inline json to_json(const GridEvaluation& grid) {
    json cells = json::array();
    for (const auto& c : grid.cells) {
        json jc = {{"spatial", to_string(c.spatial)},
                   {"temporal", to_string(c.temporal)},
                   {"available", c.available}};
        if (c.time_mape) jc["time_mape_pct"] = *c.time_mape;
        if (c.energy_mape) jc["energy_mape_pct"] = *c.energy_mape;
        if (!c.note.empty()) jc["note"] = c.note;
        cells.push_back(std::move(jc));
    }
    return {{"cells", cells}};
}

namespace tabledetail {

inline std::string format_cell(const GridCell* cell, bool energy) {
    if (!cell || !cell->available) return "n/a";
    const auto& v = energy ? cell->energy_mape : cell->time_mape;
    if (!v) return "-";
    std::ostringstream out;
    out << std::fixed << std::setprecision(2) << *v;
    return out.str();
}

}  // namespace tabledetail

// Aligned-column table, rows = temporal metric, columns = spatial metric,
// ultrafast on its own row/column and the content-blind baseline below.
inline std::string render_grid_text(const GridEvaluation& grid, bool energy) {
    const std::vector<std::pair<TemporalSource, std::string>> rows = {
        {TemporalSource::ti, "TI"},
        {TemporalSource::vca, "VCA h"},
        {TemporalSource::flow, "Optical flow"},
    };
    const std::vector<std::pair<SpatialSource, std::string>> cols = {
        {SpatialSource::si, "SI"},
        {SpatialSource::vca, "VCA E"},
        {SpatialSource::var, "Variance"},
    };
    std::ostringstream out;
    out << (energy ? "Encoding energy MAPE [%]" : "Encoding time MAPE [%]") << "\n";
    out << std::left << std::setw(14) << "";
    for (const auto& [s, name] : cols) out << std::right << std::setw(10) << name;
    out << std::right << std::setw(11) << "Ultrafast" << "\n";
    for (const auto& [t, tname] : rows) {
        out << std::left << std::setw(14) << tname;
        for (const auto& [s, sname] : cols)
            out << std::right << std::setw(10)
                << tabledetail::format_cell(grid.find(s, t), energy);
        out << std::right << std::setw(11) << "-" << "\n";
    }
    out << std::left << std::setw(14) << "Ultrafast";
    for (std::size_t i = 0; i < cols.size(); ++i)
        out << std::right << std::setw(10) << "-";
    out << std::right << std::setw(11)
        << tabledetail::format_cell(
               grid.find(SpatialSource::ultrafast, TemporalSource::ultrafast), energy)
        << "\n";
    out << "Content-blind (C = 1): "
        << tabledetail::format_cell(
               grid.find(SpatialSource::none, TemporalSource::none), energy)
        << "\n";
    return out.str();
}

inline std::string render_oracle_csv(const std::map<std::string, OracleFactor>& factors) {
    std::ostringstream out;
    out << "sequence_id,factor,stddev,n\n";
    out.precision(17);
    for (const auto& [seq, f] : factors)
        out << seq << ',' << f.factor << ',' << f.stddev << ',' << f.n << "\n";
    return out.str();
}

}  // namespace encost
