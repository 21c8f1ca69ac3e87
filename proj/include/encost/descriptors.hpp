// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "encost/dct.hpp"
#include "encost/frame.hpp"
#include "encost/optical_flow.hpp"

namespace encost {

struct BlockGridSpec {
    int block_size_vca = 32;  // w for the DCT-texture descriptors
    int block_size_var = 64;  // fixed by the block-variance definition
    // Partial border blocks are dropped; the block count C covers full blocks
    // only.

    void validate() const {
        if (block_size_vca != 16 && block_size_vca != 32 && block_size_vca != 64)
            throw ConfigError("block spec: block_size_vca must be 16, 32 or 64");
        if (block_size_var != 64)
            throw ConfigError("block spec: block_size_var is fixed at 64");
    }
};

struct DescriptorSelection {
    bool si = true;
    bool ti = true;
    bool vca_spatial = true;
    bool vca_temporal = true;
    bool variance = true;
    bool flow = true;

    static DescriptorSelection all() { return {}; }
    static DescriptorSelection none() {
        return {false, false, false, false, false, false};
    }
    bool any() const {
        return si || ti || vca_spatial || vca_temporal || variance || flow;
    }
};

// All computed complexity values for one sequence. Absent optionals were not
// selected (or, for c_ultrafast, not supplied).
struct DescriptorSet {
    std::string sequence_id;
    int width = 0;
    int height = 0;
    long frame_count = 0;

    std::optional<double> c_s_si;      // spatial information (Sobel RMS)
    std::optional<double> c_s_vca;     // DCT block-texture energy
    std::optional<double> c_s_var;     // 64x64 block variance
    std::optional<double> c_t_ti;      // temporal information (frame-diff RMS)
    std::optional<double> c_t_vca;     // inter-frame texture difference
    std::optional<double> c_t_flow;    // mean optical-flow displacement
    std::optional<double> c_ultrafast; // seconds per kilopixel at the fastest preset
};

// ---------------------------------------------------------------------------
// Spatial kernels

// Per-pixel gradient magnitude sqrt(Gx^2 + Gy^2) with the standard 3x3 Sobel
// kernels; borders use edge replication.
inline std::vector<double> sobel_magnitude(const LumaFrame& frame) {
    if (frame.width < 3 || frame.height < 3)
        throw DomainError("sobel_magnitude: frame smaller than 3x3");
    const int w = frame.width, h = frame.height;
    std::vector<double> mag(static_cast<std::size_t>(w) * h);
    const auto px = [&](int x, int y) -> double {
        if (x < 0) x = 0;
        if (x >= w) x = w - 1;
        if (y < 0) y = 0;
        if (y >= h) y = h - 1;
        return frame.samples[static_cast<std::size_t>(y) * w + x];
    };
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double gx = -px(x - 1, y - 1) + px(x + 1, y - 1) -
                              2.0 * px(x - 1, y) + 2.0 * px(x + 1, y) -
                              px(x - 1, y + 1) + px(x + 1, y + 1);
            const double gy = -px(x - 1, y - 1) - 2.0 * px(x, y - 1) -
                              px(x + 1, y - 1) + px(x - 1, y + 1) +
                              2.0 * px(x, y + 1) + px(x + 1, y + 1);
            mag[static_cast<std::size_t>(y) * w + x] = std::sqrt(gx * gx + gy * gy);
        }
    }
    return mag;
}

inline double rms(const std::vector<double>& values) {
    if (values.empty()) throw EmptyInputError("rms of empty grid");
    double s = 0.0;
    for (double v : values) s += v * v;
    return std::sqrt(s / static_cast<double>(values.size()));
}

namespace descdetail {

inline int full_blocks_x(const LumaFrame& f, int w) { return f.width / w; }
inline int full_blocks_y(const LumaFrame& f, int w) { return f.height / w; }

// H_{p,k}: frequency-weighted sum of absolute DCT coefficients of block k.
inline double block_texture_at(const LumaFrame& frame, int bx, int by,
                               int block_size, const Dct2d& dct,
                               std::vector<double>& block,
                               std::vector<double>& coeffs) {
    const int w = block_size;
    block.resize(static_cast<std::size_t>(w) * w);
    coeffs.resize(block.size());
    for (int y = 0; y < w; ++y)
        for (int x = 0; x < w; ++x)
            block[static_cast<std::size_t>(y) * w + x] =
                frame.at(bx * w + x, by * w + y);
    dct.forward(block.data(), coeffs.data());
    const double w2 = static_cast<double>(w) * w;
    double h = 0.0;
    for (int i = 0; i < w; ++i) {
        for (int j = 0; j < w; ++j) {
            const double f = (static_cast<double>(i) * j) / w2;
            const double weight = std::exp(std::fabs(f * f - 1.0));
            h += weight * std::fabs(coeffs[static_cast<std::size_t>(i) * w + j]);
        }
    }
    return h;
}

inline std::vector<double> block_textures(const LumaFrame& frame,
                                          const BlockGridSpec& spec,
                                          const Dct2d& dct) {
    const int w = spec.block_size_vca;
    const int nx = full_blocks_x(frame, w), ny = full_blocks_y(frame, w);
    std::vector<double> textures(static_cast<std::size_t>(nx) * ny);
    std::vector<double> block, coeffs;
    for (int by = 0; by < ny; ++by)
        for (int bx = 0; bx < nx; ++bx)
            textures[static_cast<std::size_t>(by) * nx + bx] =
                block_texture_at(frame, bx, by, w, dct, block, coeffs);
    return textures;
}

// Population variance of one 64x64 block.
inline double block_variance_at(const LumaFrame& frame, int bx, int by, int w) {
    double sum = 0.0, sq = 0.0;
    for (int y = 0; y < w; ++y) {
        for (int x = 0; x < w; ++x) {
            const double v = frame.at(bx * w + x, by * w + y);
            sum += v;
            sq += v * v;
        }
    }
    const double n = static_cast<double>(w) * w;
    const double mu = sum / n;
    const double var = sq / n - mu * mu;
    return var > 0.0 ? var : 0.0;
}

// Canonical reduce: summing in sorted order makes per-frame aggregates
// independent of frame arrival order (and of any worker fan-out).
inline double sum_sorted(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    double s = 0.0;
    for (double v : values) s += v;
    return s;
}

}  // namespace descdetail

// Block-wise texture H_{p,k} for one block, k addressing full blocks in
// row-major order.
inline double block_texture(const LumaFrame& frame, int k, const BlockGridSpec& spec) {
    spec.validate();
    const int w = spec.block_size_vca;
    if (frame.width < w || frame.height < w)
        throw DomainError("block_texture: frame smaller than one block");
    const int nx = descdetail::full_blocks_x(frame, w);
    const int ny = descdetail::full_blocks_y(frame, w);
    if (k < 0 || k >= nx * ny)
        throw IndexError("block_texture: block index " + std::to_string(k) +
                         " outside grid of " + std::to_string(nx * ny) + " blocks");
    Dct2d dct(w);
    std::vector<double> block, coeffs;
    return descdetail::block_texture_at(frame, k % nx, k / nx, w, dct, block, coeffs);
}

// Seconds per kilopixel when encoding with the fastest preset; a combined
// spatial-temporal proxy.
inline double ultrafast_complexity(double t_preset13_s, const VideoHeader& header,
                                   long n_frames) {
    if (t_preset13_s <= 0.0)
        throw DomainError("ultrafast_complexity: encode time must be positive");
    if (header.width <= 0 || header.height <= 0)
        throw DomainError("ultrafast_complexity: nonpositive frame dimensions");
    if (n_frames <= 0)
        throw DomainError("ultrafast_complexity: frame count must be positive");
    return t_preset13_s * 1000.0 /
           (static_cast<double>(header.width) * header.height * n_frames);
}

// Cross-frame pooling for the ITU-style SI/TI metrics. The sequence value is
// the mean of the per-frame (per-pair) values by default; max is the
// subjective-testing convention, kept as a sensitivity knob.
enum class SiTiAggregation { mean, max };

// ---------------------------------------------------------------------------
// Streaming orchestrator: one pass, at most two frames held.

inline DescriptorSet analyze(FrameSource& source,
                             const BlockGridSpec& spec = {},
                             const DescriptorSelection& which = {},
                             const std::string& sequence_id = "",
                             const FarnebackParams& flow_params = {},
                             SiTiAggregation si_ti_aggregation = SiTiAggregation::mean) {
    spec.validate();

    DescriptorSet out;
    out.sequence_id = sequence_id;

    std::optional<LumaFrame> prev;
    std::vector<double> prev_textures;
    std::optional<Dct2d> dct;

    long frames = 0;
    std::vector<double> per_frame_si, per_frame_vca_s, per_frame_var;
    std::vector<double> per_pair_ti, per_pair_vca_t, per_pair_flow;
    const int w = spec.block_size_vca;

    for (std::optional<LumaFrame> frame = source.next(); frame; frame = source.next()) {
        if (frames > 0 && (frame->width != out.width || frame->height != out.height))
            throw FormatError("analyze: frame " + std::to_string(frames) +
                              " changes geometry mid-stream");
        if (frames == 0) {
            out.width = frame->width;
            out.height = frame->height;
            if (which.si && (frame->width < 3 || frame->height < 3))
                throw DomainError("spatial_information: frame smaller than 3x3");
            if ((which.vca_spatial || which.vca_temporal) &&
                (frame->width < w || frame->height < w))
                throw DomainError("vca_spatial: frame smaller than one block");
            if (which.variance &&
                (frame->width < spec.block_size_var || frame->height < spec.block_size_var))
                throw DomainError("block_variance: frame smaller than 64x64");
            if (which.flow && std::min(frame->width, frame->height) < 8)
                throw DomainError("optical_flow: frame smaller than 8x8");
            if ((which.vca_spatial || which.vca_temporal) && !dct)
                dct.emplace(w);
        }

        if (which.si)
            per_frame_si.push_back(rms(sobel_magnitude(*frame)));

        std::vector<double> textures;
        if (which.vca_spatial || which.vca_temporal) {
            textures = descdetail::block_textures(*frame, spec, *dct);
            if (which.vca_spatial) {
                double s = 0.0;
                for (double t : textures) s += t;
                per_frame_vca_s.push_back(
                    s / (static_cast<double>(textures.size()) * w * w));
            }
        }

        if (which.variance) {
            const int bw = spec.block_size_var;
            const int nx = frame->width / bw, ny = frame->height / bw;
            double s = 0.0;
            for (int by = 0; by < ny; ++by)
                for (int bx = 0; bx < nx; ++bx)
                    s += descdetail::block_variance_at(*frame, bx, by, bw);
            per_frame_var.push_back(s / (static_cast<double>(nx) * ny * bw * bw));
        }

        if (frames > 0) {
            if (which.ti) {
                double sq = 0.0;
                for (std::size_t i = 0; i < frame->samples.size(); ++i) {
                    const double d = static_cast<double>(frame->samples[i]) -
                                     static_cast<double>(prev->samples[i]);
                    sq += d * d;
                }
                per_pair_ti.push_back(
                    std::sqrt(sq / static_cast<double>(frame->samples.size())));
            }
            if (which.vca_temporal) {
                double s = 0.0;
                for (std::size_t i = 0; i < textures.size(); ++i)
                    s += std::fabs(textures[i] - prev_textures[i]);
                per_pair_vca_t.push_back(
                    s / (static_cast<double>(textures.size()) * w * w));
            }
            if (which.flow) {
                const auto f = mean_absolute_flow(farneback_flow(*prev, *frame, flow_params));
                per_pair_flow.push_back(std::fabs(f.u + f.v));
            }
        }

        if (which.vca_temporal) prev_textures = std::move(textures);
        if (which.ti || which.flow) prev = std::move(*frame);
        ++frames;
    }

    if (frames == 0)
        throw EmptyInputError("analyze: stream yielded no frames");
    out.frame_count = frames;

    const double n = static_cast<double>(frames);
    const bool pool_max = si_ti_aggregation == SiTiAggregation::max;
    if (which.si)
        out.c_s_si = pool_max
                         ? *std::max_element(per_frame_si.begin(), per_frame_si.end())
                         : descdetail::sum_sorted(std::move(per_frame_si)) / n;
    if (which.vca_spatial)
        out.c_s_vca = descdetail::sum_sorted(std::move(per_frame_vca_s)) / n;
    if (which.variance)
        out.c_s_var = descdetail::sum_sorted(std::move(per_frame_var)) / n;
    // Temporal pair sums: TI and the texture difference average over the
    // n-1 pairs; the flow aggregation divides by n_frames as defined.
    if (which.ti)
        out.c_t_ti = frames <= 1 ? 0.0
                     : pool_max
                         ? *std::max_element(per_pair_ti.begin(), per_pair_ti.end())
                         : descdetail::sum_sorted(std::move(per_pair_ti)) / (n - 1.0);
    if (which.vca_temporal)
        out.c_t_vca =
            frames > 1 ? descdetail::sum_sorted(std::move(per_pair_vca_t)) / (n - 1.0)
                       : 0.0;
    if (which.flow)
        out.c_t_flow =
            frames > 1 ? descdetail::sum_sorted(std::move(per_pair_flow)) / n : 0.0;
    return out;
}

// ---------------------------------------------------------------------------
// Single-descriptor conveniences.

inline double spatial_information(FrameSource& source) {
    auto sel = DescriptorSelection::none();
    sel.si = true;
    return *analyze(source, BlockGridSpec{}, sel).c_s_si;
}

inline double temporal_information(FrameSource& source) {
    auto sel = DescriptorSelection::none();
    sel.ti = true;
    return *analyze(source, BlockGridSpec{}, sel).c_t_ti;
}

inline double vca_spatial(FrameSource& source, const BlockGridSpec& spec = {}) {
    auto sel = DescriptorSelection::none();
    sel.vca_spatial = true;
    return *analyze(source, spec, sel).c_s_vca;
}

inline double vca_temporal(FrameSource& source, const BlockGridSpec& spec = {}) {
    auto sel = DescriptorSelection::none();
    sel.vca_temporal = true;
    return *analyze(source, spec, sel).c_t_vca;
}

inline double block_variance(FrameSource& source) {
    auto sel = DescriptorSelection::none();
    sel.variance = true;
    return *analyze(source, BlockGridSpec{}, sel).c_s_var;
}

inline double optical_flow_displacement(FrameSource& source,
                                        const FarnebackParams& params = {}) {
    auto sel = DescriptorSelection::none();
    sel.flow = true;
    return *analyze(source, BlockGridSpec{}, sel, "", params).c_t_flow;
}

}  // namespace encost
