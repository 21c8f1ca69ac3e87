// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "encost/linalg.hpp"
#include "encost/models.hpp"

namespace encost {

struct FitConfig {
    enum class Objective { relative_squared, absolute_squared };

    Objective objective = Objective::relative_squared;
    int max_iterations = 200;
    double tolerance = 1e-10;  // relative objective change between accepted steps
    std::optional<TimeModelParams> init;  // overrides the stage-1 start when set
    std::uint64_t seed = 0;

    void validate() const {
        if (max_iterations < 1)
            throw ConfigError("fit config: max_iterations must be >= 1");
        if (!(tolerance > 0.0))
            throw ConfigError("fit config: tolerance must be positive");
    }
};

struct TimeFit {
    TimeModelParams params;
    double objective = 0.0;
    int iterations = 0;
    bool converged = true;
};

using DescriptorMap = std::map<std::string, DescriptorSet>;

// One content factor per record, computed once per sequence. Throws JoinError
// listing every record sequence without a descriptor set.
inline std::vector<double> content_factors_for(
    const std::vector<EncodingRecord>& records, const DescriptorMap& descriptors,
    const ContentFactorSpec& spec) {
    spec.validate();
    std::vector<double> factors(records.size(), 1.0);
    if (spec.is_blind()) return factors;

    std::map<std::string, double> per_sequence;
    std::set<std::string> missing;
    for (const auto& r : records) {
        if (per_sequence.count(r.sequence_id) || missing.count(r.sequence_id))
            continue;
        auto it = descriptors.find(r.sequence_id);
        if (it == descriptors.end()) {
            missing.insert(r.sequence_id);
            continue;
        }
        per_sequence[r.sequence_id] = content_factor(it->second, spec);
    }
    if (!missing.empty()) {
        std::string joined;
        for (const auto& id : missing) {
            if (!joined.empty()) joined += ", ";
            joined += id;
        }
        throw JoinError("no descriptor set for sequence(s): " + joined);
    }
    for (std::size_t i = 0; i < records.size(); ++i)
        factors[i] = per_sequence.at(records[i].sequence_id);
    return factors;
}

// Ordinary least squares of measured energy against total CPU time.
inline EnergyModelParams fit_energy_linear(const std::vector<EncodingRecord>& records) {
    std::vector<double> t, e;
    for (const auto& r : records) {
        if (!r.energy_j) continue;
        t.push_back(r.time_s);
        e.push_back(*r.energy_j);
    }
    if (t.size() < 2)
        throw RankDeficiencyError("energy fit: need at least 2 records with energy");
    double tm = 0.0, em = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        tm += t[i];
        em += e[i];
    }
    tm /= static_cast<double>(t.size());
    em /= static_cast<double>(t.size());
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        sxx += (t[i] - tm) * (t[i] - tm);
        sxy += (t[i] - tm) * (e[i] - em);
    }
    if (sxx <= 0.0)
        throw RankDeficiencyError("energy fit: all abscissae identical");
    EnergyModelParams ep;
    ep.p = sxy / sxx;
    ep.e0 = em - ep.p * tm;
    return ep;
}

namespace fitdetail {

// Parameter vector order shared by both stages: (gamma, alpha, beta, delta,
// xi, t0). The intercept leads so that constant predictor columns (e.g. ln C
// under a content-blind spec) collapse onto it and get dropped.
inline TimeModelParams params_from_vector(const std::vector<double>& v) {
    TimeModelParams p;
    p.gamma = v[0];
    p.alpha = v[1];
    p.beta = v[2];
    p.delta = v[3];
    p.xi = v[4];
    p.t0 = v.size() > 5 ? v[5] : 0.0;
    return p;
}

inline std::vector<double> vector_from_params(const TimeModelParams& p) {
    return {p.gamma, p.alpha, p.beta, p.delta, p.xi, p.t0};
}

struct DesignPoint {
    double ln_c = 0.0;
    double ln_n_intra = 0.0;
    double ln_p = 0.0;
    double p = 0.0;
    double inv_crf = 0.0;
    double t_kpix = 0.0;  // measured
};

inline std::vector<DesignPoint> design_points(const std::vector<EncodingRecord>& records,
                                              const std::vector<double>& factors) {
    std::vector<DesignPoint> pts(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        pts[i].ln_c = std::log(factors[i]);
        pts[i].ln_n_intra = std::log(static_cast<double>(r.n_intra));
        pts[i].ln_p = std::log(static_cast<double>(r.preset));
        pts[i].p = static_cast<double>(r.preset);
        pts[i].inv_crf = 1.0 / r.crf;
        pts[i].t_kpix = r.time_per_kpix();
    }
    return pts;
}

inline void check_design(const std::vector<EncodingRecord>& records) {
    std::set<std::pair<int, int>> points;
    std::set<int> presets, crfs;
    for (const auto& r : records) {
        points.insert({r.preset, r.crf});
        presets.insert(r.preset);
        crfs.insert(r.crf);
    }
    if (points.size() < 6 || presets.size() < 2 || crfs.size() < 2)
        throw RankDeficiencyError(
            "time fit: need >= 6 distinct (preset, crf) points spanning >= 2 "
            "presets and >= 2 CRFs");
}

inline double model_factor(const TimeModelParams& tp, const DesignPoint& d) {
    return std::exp(tp.xi * d.ln_c + tp.delta * d.ln_n_intra + tp.alpha * d.ln_p +
                    tp.beta * d.p + tp.gamma) *
           d.inv_crf;
}

inline double objective_value(const TimeModelParams& tp,
                              const std::vector<DesignPoint>& pts,
                              FitConfig::Objective kind) {
    double s = 0.0;
    for (const auto& d : pts) {
        const double pred = model_factor(tp, d) + tp.t0;
        const double r = kind == FitConfig::Objective::relative_squared
                             ? (d.t_kpix - pred) / d.t_kpix
                             : (d.t_kpix - pred);
        s += r * r;
    }
    return s;
}

// Stage 1: with t0 = 0 the model is exactly log-linear,
//   ln t + ln crf = gamma + alpha ln p + beta p + delta ln n + xi ln C,
// solved in closed form by the normal equations.
inline TimeModelParams stage1_log_linear(const std::vector<DesignPoint>& pts) {
    const int k = 5;
    const int m = static_cast<int>(pts.size());
    std::vector<double> x(static_cast<std::size_t>(m) * k);
    std::vector<double> y(m);
    for (int i = 0; i < m; ++i) {
        const auto& d = pts[i];
        x[static_cast<std::size_t>(i) * k + 0] = 1.0;
        x[static_cast<std::size_t>(i) * k + 1] = d.ln_p;
        x[static_cast<std::size_t>(i) * k + 2] = d.p;
        x[static_cast<std::size_t>(i) * k + 3] = d.ln_n_intra;
        x[static_cast<std::size_t>(i) * k + 4] = d.ln_c;
        y[i] = std::log(d.t_kpix) - std::log(d.inv_crf);
    }
    const auto ls = solve_least_squares(x, y, m, k);
    for (int col : ls.dropped_columns) {
        // Only predictor columns that are constant over the data may drop
        // (they are absorbed by the intercept); losing ln p or p means the
        // design itself is degenerate.
        if (col == 1 || col == 2)
            throw RankDeficiencyError("time fit: degenerate preset design");
    }
    return params_from_vector(ls.coefficients);
}

}  // namespace fitdetail

// Two-stage fit of the time model: closed-form log-linear start, then
// Levenberg-Marquardt over all six parameters including t0. LM accepts only
// improving steps, so the final objective never exceeds the stage-1 one.
inline TimeFit fit_time_model(const std::vector<EncodingRecord>& records,
                              const DescriptorMap& descriptors,
                              const ContentFactorSpec& spec, const FitConfig& cfg) {
    cfg.validate();
    spec.validate();
    if (records.empty())
        throw EmptyInputError("time fit: no records");
    fitdetail::check_design(records);

    const auto factors = content_factors_for(records, descriptors, spec);
    const auto pts = fitdetail::design_points(records, factors);

    TimeModelParams start = cfg.init ? *cfg.init : fitdetail::stage1_log_linear(pts);
    if (start.t0 < 0.0) start.t0 = 0.0;

    std::vector<double> theta = fitdetail::vector_from_params(start);
    double current = fitdetail::objective_value(fitdetail::params_from_vector(theta),
                                                pts, cfg.objective);

    // Predictors that never vary across the records leave their parameter
    // unidentifiable (stage 1 absorbs them into the intercept). Pin those
    // parameters so the damped steps cannot drift along the null direction,
    // which would wreck extrapolation to other sequences.
    bool ln_c_varies = false, ln_n_varies = false;
    for (const auto& d : pts) {
        ln_c_varies = ln_c_varies || std::fabs(d.ln_c - pts.front().ln_c) > 1e-12;
        ln_n_varies =
            ln_n_varies || std::fabs(d.ln_n_intra - pts.front().ln_n_intra) > 1e-12;
    }

    const int n_params = 6;
    const int m = static_cast<int>(pts.size());
    double lambda = 1e-3;
    bool converged = false;
    int iterations = 0;

    std::vector<double> jac(static_cast<std::size_t>(m) * n_params);
    std::vector<double> residuals(m);

    for (int iter = 0; iter < cfg.max_iterations; ++iter) {
        iterations = iter + 1;
        const TimeModelParams tp = fitdetail::params_from_vector(theta);
        for (int i = 0; i < m; ++i) {
            const auto& d = pts[i];
            const double f = fitdetail::model_factor(tp, d);
            const double pred = f + tp.t0;
            const double scale =
                cfg.objective == FitConfig::Objective::relative_squared
                    ? 1.0 / d.t_kpix
                    : 1.0;
            residuals[i] = (d.t_kpix - pred) * scale;
            double* row = &jac[static_cast<std::size_t>(i) * n_params];
            row[0] = -f * scale;              // d/d gamma
            row[1] = -f * d.ln_p * scale;     // d/d alpha
            row[2] = -f * d.p * scale;        // d/d beta
            row[3] = -f * d.ln_n_intra * scale;  // d/d delta
            row[4] = -f * d.ln_c * scale;     // d/d xi
            row[5] = -scale;                  // d/d t0
        }

        std::vector<double> jtj(n_params * n_params, 0.0), jtr(n_params, 0.0);
        for (int i = 0; i < m; ++i) {
            const double* row = &jac[static_cast<std::size_t>(i) * n_params];
            for (int a = 0; a < n_params; ++a) {
                jtr[a] += row[a] * residuals[i];
                for (int b = a; b < n_params; ++b)
                    jtj[static_cast<std::size_t>(a) * n_params + b] += row[a] * row[b];
            }
        }
        for (int a = 0; a < n_params; ++a)
            for (int b = 0; b < a; ++b)
                jtj[static_cast<std::size_t>(a) * n_params + b] =
                    jtj[static_cast<std::size_t>(b) * n_params + a];

        // Freeze parameters with no leverage (all-zero Jacobian column), e.g.
        // xi under a content-blind spec. Also freeze t0 while it sits on its
        // bound with the gradient pointing outward (KKT), otherwise the clamp
        // produces an endless crawl of microscopic accepted steps.
        double max_diag = 0.0;
        for (int a = 0; a < n_params; ++a)
            max_diag = std::max(max_diag, jtj[static_cast<std::size_t>(a) * n_params + a]);
        const bool t0_bound = theta[5] <= 0.0 && jtr[5] >= 0.0;
        std::vector<int> active;
        for (int a = 0; a < n_params; ++a) {
            if (a == 3 && !ln_n_varies) continue;
            if (a == 4 && !ln_c_varies) continue;
            if (a == 5 && t0_bound) continue;
            if (jtj[static_cast<std::size_t>(a) * n_params + a] > 1e-14 * max_diag)
                active.push_back(a);
        }
        if (active.empty()) {
            converged = true;
            break;
        }

        bool accepted = false;
        while (lambda <= 1e12) {
            const int na = static_cast<int>(active.size());
            std::vector<double> a_red(static_cast<std::size_t>(na) * na);
            std::vector<double> b_red(na);
            for (int a = 0; a < na; ++a) {
                b_red[a] = -jtr[active[a]];
                for (int b = 0; b < na; ++b) {
                    double v = jtj[static_cast<std::size_t>(active[a]) * n_params + active[b]];
                    if (a == b) v += lambda * v;
                    a_red[static_cast<std::size_t>(a) * na + b] = v;
                }
            }
            std::vector<double> delta;
            if (!solve_linear(a_red, b_red, na, delta)) {
                lambda *= 10.0;
                continue;
            }
            std::vector<double> trial = theta;
            for (int a = 0; a < na; ++a) trial[active[a]] += delta[a];
            if (trial[5] < 0.0) trial[5] = 0.0;  // t0 >= 0

            const double value = fitdetail::objective_value(
                fitdetail::params_from_vector(trial), pts, cfg.objective);
            if (value < current) {
                const double change =
                    (current - value) / std::max(current, 1e-300);
                theta = std::move(trial);
                current = value;
                lambda = std::max(lambda / 10.0, 1e-12);
                accepted = true;
                if (change < cfg.tolerance) converged = true;
                break;
            }
            lambda *= 10.0;
        }
        if (!accepted) {
            // No improving step exists at any damping: stationary point.
            converged = true;
            break;
        }
        if (converged || current == 0.0) {
            converged = true;
            break;
        }
    }

    TimeFit fit;
    fit.params = fitdetail::params_from_vector(theta);
    fit.objective = current;
    fit.iterations = iterations;
    fit.converged = converged;
    return fit;
}

}  // namespace encost
