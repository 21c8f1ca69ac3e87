// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <istream>
#include <string>
#include <utility>
#include <vector>

#include "encost/errors.hpp"
#include "encost/records.hpp"
#include "encost/stats.hpp"

namespace encost {

enum class TraceLabel { total, idle };

// Sampled power-over-time curve from an external meter. Timestamps are
// rebased to zero at the first sample on ingestion.
struct PowerTrace {
    std::vector<std::pair<double, double>> samples;  // (seconds, watts)
    TraceLabel label = TraceLabel::total;

    double span_end() const { return samples.empty() ? 0.0 : samples.back().first; }

    void validate() const {
        double prev = -1.0;
        bool first = true;
        for (const auto& [t, p] : samples) {
            if (!first && t <= prev)
                throw FormatError("power trace: timestamps must be strictly increasing");
            if (p < 0.0)
                throw FormatError("power trace: negative power sample");
            prev = t;
            first = false;
        }
    }
};

// CSV with header `t_s,power_w`.
inline PowerTrace read_power_trace_csv(std::istream& in,
                                       TraceLabel label = TraceLabel::total) {
    std::string line;
    if (!std::getline(in, line))
        throw FormatError("power trace csv: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "t_s,power_w")
        throw FormatError("power trace csv: expected header 't_s,power_w'");
    PowerTrace trace;
    trace.label = label;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw FormatError("power trace csv line " + std::to_string(line_no) +
                              ": expected 't,power'");
        try {
            const double t = std::stod(line.substr(0, comma));
            const double p = std::stod(line.substr(comma + 1));
            trace.samples.emplace_back(t, p);
        } catch (const std::exception&) {
            throw FormatError("power trace csv line " + std::to_string(line_no) +
                              ": bad number");
        }
    }
    if (trace.samples.empty())
        throw FormatError("power trace csv: no samples");
    const double t0 = trace.samples.front().first;
    for (auto& [t, p] : trace.samples) t -= t0;
    trace.validate();
    return trace;
}

// Trapezoidal integral of the piecewise-linear power curve over
// [t_start, t_end], which must lie within the trace span.
inline double integrate_power(const PowerTrace& trace, double t_start, double t_end) {
    if (trace.samples.empty())
        throw RangeError("integrate_power: empty trace");
    if (t_start > t_end)
        throw RangeError("integrate_power: interval is reversed");
    const double lo = trace.samples.front().first;
    const double hi = trace.samples.back().first;
    if (t_start < lo || t_end > hi)
        throw RangeError("integrate_power: interval [" + std::to_string(t_start) +
                         ", " + std::to_string(t_end) + "] outside trace span [" +
                         std::to_string(lo) + ", " + std::to_string(hi) + "]");
    if (t_start == t_end) return 0.0;

    const auto& s = trace.samples;
    const auto power_at = [&](std::size_t seg, double t) {
        const double t0 = s[seg].first, t1 = s[seg + 1].first;
        const double p0 = s[seg].second, p1 = s[seg + 1].second;
        return p0 + (p1 - p0) * (t - t0) / (t1 - t0);
    };

    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        const double seg_lo = s[i].first, seg_hi = s[i + 1].first;
        const double a = std::max(seg_lo, t_start);
        const double b = std::min(seg_hi, t_end);
        if (a >= b) continue;
        const double pa = power_at(i, a);
        const double pb = power_at(i, b);
        acc += 0.5 * (pa + pb) * (b - a);
    }
    return acc;
}

struct EncodingEnergy {
    double joules = 0.0;
    bool negative = false;  // noise pushed the idle integral above the total
};

// E_enc = integral of total power minus integral of idle power over [0, T].
// A negative result is reported, never clamped.
inline EncodingEnergy encoding_energy(const PowerTrace& total, const PowerTrace& idle,
                                      double duration_s) {
    if (duration_s < 0.0)
        throw RangeError("encoding_energy: negative duration");
    if (total.span_end() < duration_s)
        throw RangeError("encoding_energy: total trace does not cover the interval");
    if (idle.span_end() < duration_s)
        throw RangeError("encoding_energy: idle trace does not cover the interval");
    EncodingEnergy e;
    e.joules = integrate_power(total, 0.0, duration_s) -
               integrate_power(idle, 0.0, duration_s);
    e.negative = e.joules < 0.0;
    return e;
}

// Repeated energy measurements of one encode, with the stopping-rule
// parameters alpha (confidence) and beta (relative bound).
struct MeasurementSeries {
    std::vector<double> values;  // joules
    double alpha_m = 0.99;
    double beta_m = 0.02;

    void validate() const {
        if (values.empty())
            throw EmptyInputError("measurement series: no values");
        if (!(beta_m > 0.0 && beta_m < 1.0))
            throw ConfigError("measurement series: beta must be in (0, 1)");
        if (!(alpha_m > 0.5 && alpha_m < 1.0))
            throw ConfigError("measurement series: alpha must be in (0.5, 1)");
    }
};

// CSV with header `energy_j`, one measurement per line.
inline std::vector<double> read_series_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line))
        throw FormatError("series csv: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "energy_j")
        throw FormatError("series csv: expected header 'energy_j'");
    std::vector<double> values;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        try {
            values.push_back(std::stod(line));
        } catch (const std::exception&) {
            throw FormatError("series csv line " + std::to_string(line_no) +
                              ": bad number");
        }
    }
    return values;
}

struct ConfidenceResult {
    bool satisfied = false;
    double lhs = 0.0;  // 2 * (sigma / sqrt(m)) * t_alpha(m - 1)
    double rhs = 0.0;  // beta * mean
    long m = 0;
    double mean_j = 0.0;
    double stddev_j = 0.0;
    double t_critical = 0.0;
};

// Stopping rule: repetition may stop once
//   2 * (sigma / sqrt(m)) * t_alpha(m-1) < beta * mean.
// t_alpha is the one-sided Student quantile at probability alpha; sigma uses
// the m-1 divisor.
inline ConfidenceResult confidence_satisfied(const MeasurementSeries& series) {
    series.validate();
    const long m = static_cast<long>(series.values.size());
    if (m < 2)
        throw InsufficientSamplesError(
            "confidence rule: need at least 2 measurements");
    ConfidenceResult r;
    r.m = m;
    r.mean_j = mean(series.values);
    r.stddev_j = sample_stddev(series.values);
    r.t_critical = student_t_quantile(series.alpha_m, static_cast<int>(m - 1));
    r.lhs = 2.0 * (r.stddev_j / std::sqrt(static_cast<double>(m))) * r.t_critical;
    r.rhs = series.beta_m * r.mean_j;
    r.satisfied = r.lhs < r.rhs;
    return r;
}

}  // namespace encost
