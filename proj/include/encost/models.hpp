// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "encost/descriptors.hpp"
#include "encost/errors.hpp"

namespace encost {

// Parameters of the encoding-time-per-kilopixel model
//   t = C^xi * n_intra^delta * (1/crf) * p^alpha * e^(beta*p + gamma) + t0.
struct TimeModelParams {
    double alpha = 0.0;  // preset power
    double beta = 0.0;   // preset exponential rate
    double gamma = 0.0;  // log-scale offset
    double delta = 0.0;  // intra-frame power
    double xi = 0.0;     // content power
    double t0 = 0.0;     // offset time, seconds per kilopixel

    void validate() const {
        for (double v : {alpha, beta, gamma, delta, xi, t0})
            if (!std::isfinite(v))
                throw DomainError("time model: non-finite parameter");
        if (t0 < 0.0)
            throw DomainError("time model: t0 must be nonnegative");
    }
};

// Linear energy model E = e0 + p * t_total, where t_total is the total CPU
// time t_kpix * (W*H/1000) * n_frames.
struct EnergyModelParams {
    double e0 = 0.0;  // joules
    double p = 1.0;   // watts

    void validate() const {
        if (!std::isfinite(e0) || !std::isfinite(p))
            throw DomainError("energy model: non-finite parameter");
        if (p <= 0.0)
            throw DomainError("energy model: slope must be positive");
    }
};

enum class SpatialSource { si, vca, var, ultrafast, none };
enum class TemporalSource { ti, vca, flow, ultrafast, none };
enum class Normalizer { ln, identity };

struct ContentFactorSpec {
    SpatialSource spatial = SpatialSource::vca;
    TemporalSource temporal = TemporalSource::vca;
    Normalizer spatial_normalizer = Normalizer::ln;
    Normalizer temporal_normalizer = Normalizer::identity;
    double floor = 1e-6;  // clamp applied after normalization, before the product

    bool is_ultrafast() const {
        return spatial == SpatialSource::ultrafast || temporal == TemporalSource::ultrafast;
    }
    bool is_blind() const {
        return spatial == SpatialSource::none && temporal == TemporalSource::none;
    }

    void validate() const {
        if ((spatial == SpatialSource::ultrafast) != (temporal == TemporalSource::ultrafast))
            throw ConfigError("content spec: ultrafast occupies both roles or neither");
        if (floor <= 0.0)
            throw ConfigError("content spec: floor must be positive");
    }
};

// One measured encoding run of one sequence at one (preset, crf) point.
struct EncodingRecord {
    std::string sequence_id;
    std::string class_id;
    int width = 0;
    int height = 0;
    long n_frames = 0;
    Rational frame_rate{0, 1};
    int preset = 0;   // 1..13
    int crf = 0;      // 1..63
    long n_intra = 1;
    double time_s = 0.0;             // measured CPU time for the whole encode
    std::optional<double> energy_j;  // measured encoding energy, if any

    // (W*H/1000) * n_frames: converts per-kilopixel time into total time.
    double kilopixels() const {
        return static_cast<double>(width) * height / 1000.0 * n_frames;
    }
    double time_per_kpix() const { return time_s / kilopixels(); }

    void validate() const {
        if (width <= 0 || height <= 0)
            throw DomainError("record " + sequence_id + ": nonpositive dimensions");
        if (n_frames <= 0)
            throw DomainError("record " + sequence_id + ": nonpositive frame count");
        if (preset < 1 || preset > 13)
            throw DomainError("record " + sequence_id + ": preset outside [1,13]");
        if (crf < 1 || crf > 63)
            throw DomainError("record " + sequence_id + ": crf outside [1,63]");
        if (n_intra < 1)
            throw DomainError("record " + sequence_id + ": n_intra must be >= 1");
        if (!(time_s > 0.0))
            throw DomainError("record " + sequence_id + ": time must be positive");
        if (energy_j && !(*energy_j > 0.0))
            throw DomainError("record " + sequence_id + ": energy must be positive");
    }
};

namespace modeldetail {

inline double fetch_descriptor(const std::optional<double>& value, const char* name) {
    if (!value)
        throw ConfigError(std::string("content factor: descriptor '") + name +
                          "' missing from descriptor set");
    return *value;
}

inline double apply_normalizer(double value, Normalizer n) {
    return n == Normalizer::ln ? std::log(value) : value;
}

}  // namespace modeldetail

// Content complexity factor C = max(eps, f_s(C_S)) * max(eps, f_t(C_T)).
// The ultrafast proxy bypasses normalization; a blind spec yields C = 1.
inline double content_factor(const DescriptorSet& d, const ContentFactorSpec& spec) {
    spec.validate();
    if (spec.is_blind()) return 1.0;
    if (spec.is_ultrafast()) {
        const double c = modeldetail::fetch_descriptor(d.c_ultrafast, "c_ultrafast");
        if (!(c > 0.0))
            throw DomainError("content factor: c_ultrafast must be positive");
        return c;
    }

    double spatial_term = 1.0;
    switch (spec.spatial) {
        case SpatialSource::si:
            spatial_term = modeldetail::fetch_descriptor(d.c_s_si, "c_s_si");
            break;
        case SpatialSource::vca:
            spatial_term = modeldetail::fetch_descriptor(d.c_s_vca, "c_s_vca");
            break;
        case SpatialSource::var:
            spatial_term = modeldetail::fetch_descriptor(d.c_s_var, "c_s_var");
            break;
        case SpatialSource::none:
            break;
        case SpatialSource::ultrafast:
            break;  // unreachable, handled above
    }
    double temporal_term = 1.0;
    switch (spec.temporal) {
        case TemporalSource::ti:
            temporal_term = modeldetail::fetch_descriptor(d.c_t_ti, "c_t_ti");
            break;
        case TemporalSource::vca:
            temporal_term = modeldetail::fetch_descriptor(d.c_t_vca, "c_t_vca");
            break;
        case TemporalSource::flow:
            temporal_term = modeldetail::fetch_descriptor(d.c_t_flow, "c_t_flow");
            break;
        case TemporalSource::none:
            break;
        case TemporalSource::ultrafast:
            break;  // unreachable
    }

    const double fs = spec.spatial == SpatialSource::none
                          ? 1.0
                          : modeldetail::apply_normalizer(spatial_term, spec.spatial_normalizer);
    const double ft = spec.temporal == TemporalSource::none
                          ? 1.0
                          : modeldetail::apply_normalizer(temporal_term, spec.temporal_normalizer);
    return std::max(spec.floor, fs) * std::max(spec.floor, ft);
}

// Predicted encoding time per kilopixel.
inline double predict_time_kpix(const TimeModelParams& tp, double content,
                                long n_intra, int crf, int preset) {
    if (!(content > 0.0))
        throw DomainError("predict_time_kpix: content factor must be positive");
    if (n_intra < 1)
        throw DomainError("predict_time_kpix: n_intra must be >= 1");
    if (crf < 1)
        throw DomainError("predict_time_kpix: crf must be >= 1");
    if (preset < 1 || preset > 13)
        throw DomainError("predict_time_kpix: preset outside [1,13]");
    const double p = static_cast<double>(preset);
    return std::pow(content, tp.xi) * std::pow(static_cast<double>(n_intra), tp.delta) *
               (1.0 / crf) * std::pow(p, tp.alpha) * std::exp(tp.beta * p + tp.gamma) +
           tp.t0;
}

// Predicted encoding energy in joules for a given per-kilopixel time.
inline double predict_energy(const EnergyModelParams& ep, double t_kpix, int width,
                             int height, long n_frames) {
    if (t_kpix < 0.0)
        throw DomainError("predict_energy: time must be nonnegative");
    return ep.e0 +
           ep.p * t_kpix * (static_cast<double>(width) * height / 1000.0) * n_frames;
}

struct RecordPrediction {
    double time_s = 0.0;
    std::optional<double> energy_j;
};

// Composes the time model with the energy model for one encoding record.
inline RecordPrediction predict_record(const TimeModelParams& tp,
                                       const std::optional<EnergyModelParams>& ep,
                                       const ContentFactorSpec& spec,
                                       const DescriptorSet& d,
                                       const EncodingRecord& record) {
    if (!d.sequence_id.empty() && d.sequence_id != record.sequence_id)
        throw JoinError("predict_record: descriptor set '" + d.sequence_id +
                        "' does not match record '" + record.sequence_id + "'");
    if (d.width > 0 && d.height > 0 &&
        (d.width != record.width || d.height != record.height))
        throw JoinError("predict_record: geometry mismatch for '" +
                        record.sequence_id + "'");
    const double c = content_factor(d, spec);
    const double t_kpix =
        predict_time_kpix(tp, c, record.n_intra, record.crf, record.preset);
    RecordPrediction out;
    out.time_s = t_kpix * record.kilopixels();
    if (ep)
        out.energy_j = predict_energy(*ep, t_kpix, record.width, record.height,
                                      record.n_frames);
    return out;
}

}  // namespace encost
