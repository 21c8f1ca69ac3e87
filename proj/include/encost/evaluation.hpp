// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "encost/digest.hpp"
#include "encost/fitting.hpp"
#include "encost/stats.hpp"

namespace encost {

// Mean absolute percentage error, in percent.
inline double mape(const std::vector<double>& measured,
                   const std::vector<double>& predicted) {
    if (measured.size() != predicted.size())
        throw DomainError("mape: length mismatch");
    if (measured.empty())
        throw DomainError("mape: empty input");
    double s = 0.0;
    for (std::size_t i = 0; i < measured.size(); ++i) {
        if (measured[i] == 0.0)
            throw DomainError("mape: measured value is zero");
        s += std::fabs(measured[i] - predicted[i]) / measured[i];
    }
    return 100.0 * s / static_cast<double>(measured.size());
}

struct FoldAssignment {
    std::map<std::string, int> fold_of;  // sequence_id -> fold index
    int n_folds = 0;
};

// Deterministic class-stratified split: sequences are sorted by id within
// their class, shuffled with a seeded Fisher-Yates, and dealt round-robin.
// With the 18-sequence layout (3 classes x 6) every fold gets 2 per class.
inline FoldAssignment make_fold_assignment(const std::vector<EncodingRecord>& records,
                                           int n_folds, std::uint64_t seed) {
    if (n_folds < 2)
        throw ConfigError("fold assignment: need at least 2 folds");
    std::map<std::string, std::string> class_of;
    for (const auto& r : records) {
        auto it = class_of.find(r.sequence_id);
        if (it == class_of.end())
            class_of[r.sequence_id] = r.class_id;
        else if (it->second != r.class_id)
            throw ConfigError("fold assignment: sequence '" + r.sequence_id +
                              "' appears in two classes");
    }
    std::map<std::string, std::vector<std::string>> by_class;
    for (const auto& [seq, cls] : class_of) by_class[cls].push_back(seq);

    FoldAssignment fa;
    fa.n_folds = n_folds;
    for (auto& [cls, seqs] : by_class) {
        std::sort(seqs.begin(), seqs.end());
        std::mt19937_64 gen(seed ^ fnv1a64(cls));
        for (std::size_t i = seqs.size(); i > 1; --i)
            std::swap(seqs[i - 1], seqs[gen() % i]);
        for (std::size_t i = 0; i < seqs.size(); ++i)
            fa.fold_of[seqs[i]] = static_cast<int>(i % n_folds);
    }
    return fa;
}

struct EvaluationReport {
    std::vector<double> per_fold_mape;
    double mean_mape = 0.0;  // mean of the per-fold values
    std::map<int, double> per_preset_mape;  // over pooled held-out predictions
    std::map<int, double> per_crf_mape;
    long n_records = 0;
    bool all_converged = true;
};

struct CrossValidationResult {
    EvaluationReport time;
    std::optional<EvaluationReport> energy;
};

struct CvOptions {
    bool evaluate_energy = true;
    // The energy line is fitted once on all energy records by default; the
    // time model alone is cross-validated. Enable to refit energy per fold.
    bool cv_energy_fit = false;
};

namespace evaldetail {

struct PooledErrors {
    std::map<int, std::vector<double>> by_preset, by_crf;

    void add(const EncodingRecord& r, double measured, double predicted) {
        const double err = std::fabs(measured - predicted) / measured;
        by_preset[r.preset].push_back(err);
        by_crf[r.crf].push_back(err);
    }
    static std::map<int, double> reduce(const std::map<int, std::vector<double>>& m) {
        std::map<int, double> out;
        for (const auto& [k, v] : m) out[k] = 100.0 * mean(v);
        return out;
    }
};

}  // namespace evaldetail

// K-fold cross-validation of the time model (and, composed through the
// linear energy model, of predicted energy). Sequences never appear in both
// the training and the validation side of a fold.
inline CrossValidationResult cross_validate(const std::vector<EncodingRecord>& records,
                                            const DescriptorMap& descriptors,
                                            const ContentFactorSpec& spec,
                                            const FitConfig& cfg,
                                            const FoldAssignment& folds,
                                            const CvOptions& options = {}) {
    if (records.empty())
        throw EmptyInputError("cross_validate: no records");
    for (const auto& r : records)
        if (!folds.fold_of.count(r.sequence_id))
            throw ConfigError("cross_validate: sequence '" + r.sequence_id +
                              "' has no fold assignment");

    bool any_energy = false;
    for (const auto& r : records) any_energy = any_energy || r.energy_j.has_value();
    const bool do_energy = options.evaluate_energy && any_energy;

    std::optional<EnergyModelParams> global_energy;
    if (do_energy && !options.cv_energy_fit)
        global_energy = fit_energy_linear(records);

    CrossValidationResult result;
    result.time.n_records = static_cast<long>(records.size());
    evaldetail::PooledErrors time_pool, energy_pool;
    EvaluationReport energy_report;

    for (int fold = 0; fold < folds.n_folds; ++fold) {
        std::vector<EncodingRecord> train, val;
        for (const auto& r : records) {
            (folds.fold_of.at(r.sequence_id) == fold ? val : train).push_back(r);
        }
        if (val.empty())
            throw ConfigError("cross_validate: fold " + std::to_string(fold) +
                              " has no validation records");
        if (train.empty())
            throw ConfigError("cross_validate: fold " + std::to_string(fold) +
                              " has no training records");
        {
            // leakage guard
            std::set<std::string> train_seqs, val_seqs;
            for (const auto& r : train) train_seqs.insert(r.sequence_id);
            for (const auto& r : val) val_seqs.insert(r.sequence_id);
            for (const auto& s : val_seqs)
                if (train_seqs.count(s))
                    throw ConfigError("cross_validate: sequence '" + s +
                                      "' leaks between folds");
        }

        const TimeFit fit = fit_time_model(train, descriptors, spec, cfg);
        result.time.all_converged = result.time.all_converged && fit.converged;

        std::optional<EnergyModelParams> energy_params = global_energy;
        if (do_energy && options.cv_energy_fit) {
            bool train_has_energy = false;
            for (const auto& r : train)
                train_has_energy = train_has_energy || r.energy_j.has_value();
            if (train_has_energy) energy_params = fit_energy_linear(train);
        }

        const auto val_factors = content_factors_for(val, descriptors, spec);
        std::vector<double> measured, predicted;
        std::vector<double> e_measured, e_predicted;
        for (std::size_t i = 0; i < val.size(); ++i) {
            const auto& r = val[i];
            const double t_kpix = predict_time_kpix(fit.params, val_factors[i],
                                                    r.n_intra, r.crf, r.preset);
            const double t_total = t_kpix * r.kilopixels();
            measured.push_back(r.time_s);
            predicted.push_back(t_total);
            time_pool.add(r, r.time_s, t_total);
            if (do_energy && energy_params && r.energy_j) {
                const double e = predict_energy(*energy_params, t_kpix, r.width,
                                                r.height, r.n_frames);
                e_measured.push_back(*r.energy_j);
                e_predicted.push_back(e);
                energy_pool.add(r, *r.energy_j, e);
            }
        }
        result.time.per_fold_mape.push_back(mape(measured, predicted));
        if (do_energy && !e_measured.empty()) {
            energy_report.per_fold_mape.push_back(mape(e_measured, e_predicted));
            energy_report.n_records += static_cast<long>(e_measured.size());
        }
    }

    result.time.mean_mape = mean(result.time.per_fold_mape);
    result.time.per_preset_mape = evaldetail::PooledErrors::reduce(time_pool.by_preset);
    result.time.per_crf_mape = evaldetail::PooledErrors::reduce(time_pool.by_crf);

    if (do_energy && !energy_report.per_fold_mape.empty()) {
        energy_report.mean_mape = mean(energy_report.per_fold_mape);
        energy_report.per_preset_mape = evaldetail::PooledErrors::reduce(energy_pool.by_preset);
        energy_report.per_crf_mape = evaldetail::PooledErrors::reduce(energy_pool.by_crf);
        energy_report.all_converged = result.time.all_converged;
        result.energy = std::move(energy_report);
    }
    return result;
}

struct OracleFactor {
    double factor = 0.0;  // mean of measured/predicted over the sequence's records
    double stddev = 0.0;  // population spread of those ratios
    long n = 0;
};

// Optimal per-sequence content factors: the fraction between real and
// estimated time under a content-blind fit, averaged over all CRF-preset
// combinations. The supplied params should come from a blind fit with xi
// fixed to 1 so the ratio reads directly as C.
inline std::map<std::string, OracleFactor> oracle_content_factors(
    const std::vector<EncodingRecord>& records, const TimeModelParams& blind_params) {
    std::map<std::string, std::vector<double>> ratios;
    for (const auto& r : records) {
        const double t_kpix =
            predict_time_kpix(blind_params, 1.0, r.n_intra, r.crf, r.preset);
        const double predicted = t_kpix * r.kilopixels();
        if (predicted <= 0.0)
            throw DomainError("oracle factors: nonpositive prediction");
        ratios[r.sequence_id].push_back(r.time_s / predicted);
    }
    std::map<std::string, OracleFactor> out;
    for (const auto& [seq, v] : ratios) {
        OracleFactor f;
        f.factor = mean(v);
        f.stddev = population_stddev(v);
        f.n = static_cast<long>(v.size());
        out[seq] = f;
    }
    return out;
}

// Convenience for the oracle workflow: content-blind fit with xi pinned to 1.
inline TimeModelParams fit_blind_params(const std::vector<EncodingRecord>& records,
                                        const FitConfig& cfg) {
    ContentFactorSpec blind;
    blind.spatial = SpatialSource::none;
    blind.temporal = TemporalSource::none;
    TimeFit fit = fit_time_model(records, DescriptorMap{}, blind, cfg);
    fit.params.xi = 1.0;
    return fit.params;
}

struct GridCell {
    SpatialSource spatial = SpatialSource::none;
    TemporalSource temporal = TemporalSource::none;
    std::optional<double> time_mape;
    std::optional<double> energy_mape;
    bool available = true;
    std::string note;
};

struct GridEvaluation {
    std::vector<GridCell> cells;

    const GridCell* find(SpatialSource s, TemporalSource t) const {
        for (const auto& c : cells)
            if (c.spatial == s && c.temporal == t) return &c;
        return nullptr;
    }
};

// Cross-validates every admissible descriptor pairing: the 3x3 grid of
// {SI, VCA, var} x {TI, VCA, flow}, the ultrafast proxy, and the
// content-blind baseline. Cells whose descriptor is missing are marked
// unavailable and the run continues.
inline GridEvaluation descriptor_grid_evaluation(const std::vector<EncodingRecord>& records,
                                                 const DescriptorMap& descriptors,
                                                 const FitConfig& cfg,
                                                 const FoldAssignment& folds,
                                                 const CvOptions& options = {}) {
    std::vector<std::pair<SpatialSource, TemporalSource>> pairs;
    for (SpatialSource s : {SpatialSource::si, SpatialSource::vca, SpatialSource::var})
        for (TemporalSource t : {TemporalSource::ti, TemporalSource::vca, TemporalSource::flow})
            pairs.emplace_back(s, t);
    pairs.emplace_back(SpatialSource::ultrafast, TemporalSource::ultrafast);
    pairs.emplace_back(SpatialSource::none, TemporalSource::none);

    GridEvaluation grid;
    for (const auto& [s, t] : pairs) {
        GridCell cell;
        cell.spatial = s;
        cell.temporal = t;
        ContentFactorSpec spec;
        spec.spatial = s;
        spec.temporal = t;
        try {
            const auto cv = cross_validate(records, descriptors, spec, cfg, folds, options);
            cell.time_mape = cv.time.mean_mape;
            if (cv.energy) cell.energy_mape = cv.energy->mean_mape;
        } catch (const ConfigError& e) {
            cell.available = false;
            cell.note = e.what();
        }
        grid.cells.push_back(std::move(cell));
    }
    return grid;
}

}  // namespace encost
