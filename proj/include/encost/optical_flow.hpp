// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "encost/frame.hpp"
#include "encost/linalg.hpp"

namespace encost {

// Dense two-frame displacement estimation via polynomial expansion
// (Farneback). Parameter defaults are the algorithm's published ones, pinned
// for reproducibility.
struct FarnebackParams {
    double pyr_scale = 0.5;
    int levels = 3;  // downscaled levels above the base image
    int winsize = 15;
    int iterations = 3;
    int poly_n = 5;
    double poly_sigma = 1.1;
    int min_level_size = 32;  // stop descending once min(W,H)*scale drops below
};

struct FlowField {
    int width = 0, height = 0;
    std::vector<float> u, v;  // per-pixel horizontal / vertical displacement
};

namespace flowdetail {

struct Plane {
    int w = 0, h = 0;
    std::vector<float> v;
    Plane() = default;
    Plane(int w_, int h_) : w(w_), h(h_), v(static_cast<std::size_t>(w_) * h_, 0.f) {}
    float at(int x, int y) const { return v[static_cast<std::size_t>(y) * w + x]; }
    float& at(int x, int y) { return v[static_cast<std::size_t>(y) * w + x]; }
};

inline int clampi(int x, int lo, int hi) { return x < lo ? lo : (x > hi ? hi : x); }

inline std::vector<double> gaussian_kernel(int ksize, double sigma) {
    std::vector<double> k(ksize);
    const int half = ksize / 2;
    double sum = 0.0;
    for (int i = 0; i < ksize; ++i) {
        const double d = i - half;
        k[i] = std::exp(-d * d / (2.0 * sigma * sigma));
        sum += k[i];
    }
    for (auto& x : k) x /= sum;
    return k;
}

inline Plane gaussian_blur(const Plane& src, int ksize, double sigma) {
    const auto k = gaussian_kernel(ksize, sigma);
    const int half = ksize / 2;
    Plane tmp(src.w, src.h), dst(src.w, src.h);
    for (int y = 0; y < src.h; ++y)
        for (int x = 0; x < src.w; ++x) {
            double s = 0.0;
            for (int i = -half; i <= half; ++i)
                s += k[i + half] * src.at(clampi(x + i, 0, src.w - 1), y);
            tmp.at(x, y) = static_cast<float>(s);
        }
    for (int y = 0; y < src.h; ++y)
        for (int x = 0; x < src.w; ++x) {
            double s = 0.0;
            for (int i = -half; i <= half; ++i)
                s += k[i + half] * tmp.at(x, clampi(y + i, 0, src.h - 1));
            dst.at(x, y) = static_cast<float>(s);
        }
    return dst;
}

inline Plane resize_bilinear(const Plane& src, int w2, int h2) {
    if (src.w == w2 && src.h == h2) return src;
    Plane dst(w2, h2);
    const double sx = static_cast<double>(src.w) / w2;
    const double sy = static_cast<double>(src.h) / h2;
    for (int y = 0; y < h2; ++y) {
        const double fy = (y + 0.5) * sy - 0.5;
        const int y0 = static_cast<int>(std::floor(fy));
        const double wy = fy - y0;
        const int y0c = clampi(y0, 0, src.h - 1);
        const int y1c = clampi(y0 + 1, 0, src.h - 1);
        for (int x = 0; x < w2; ++x) {
            const double fx = (x + 0.5) * sx - 0.5;
            const int x0 = static_cast<int>(std::floor(fx));
            const double wx = fx - x0;
            const int x0c = clampi(x0, 0, src.w - 1);
            const int x1c = clampi(x0 + 1, 0, src.w - 1);
            const double top = src.at(x0c, y0c) * (1.0 - wx) + src.at(x1c, y0c) * wx;
            const double bot = src.at(x0c, y1c) * (1.0 - wx) + src.at(x1c, y1c) * wx;
            dst.at(x, y) = static_cast<float>(top * (1.0 - wy) + bot * wy);
        }
    }
    return dst;
}

// Per-pixel quadratic fit f(p) ~ p^T A p + b^T p + c over a Gaussian-weighted
// neighborhood. A = [[axx, axy/2], [axy/2, ayy]].
struct PolyExpansion {
    Plane bx, by, axx, ayy, axy;
    PolyExpansion(int w, int h) : bx(w, h), by(w, h), axx(w, h), ayy(w, h), axy(w, h) {}
};

inline PolyExpansion poly_expansion(const Plane& img, int poly_n, double sigma) {
    const int half = poly_n / 2;
    const auto g = gaussian_kernel(poly_n, sigma);

    double m2 = 0.0;
    for (int i = -half; i <= half; ++i) m2 += g[i + half] * i * i;

    double m4 = 0.0;
    for (int i = -half; i <= half; ++i) m4 += g[i + half] * i * i * i * i;

    // Metric over the (1, x^2, y^2) sub-basis; x and y rows decouple because
    // the applicability is separable and even.
    const std::vector<double> g3 = {1.0, m2, m2, m2, m4, m2 * m2, m2, m2 * m2, m4};
    const std::vector<double> inv3 = invert_matrix(g3, 3);
    const double i10 = inv3[3], i11 = inv3[4], i12 = inv3[5];

    Plane s0(img.w, img.h), s1(img.w, img.h), s2(img.w, img.h);
    for (int y = 0; y < img.h; ++y)
        for (int x = 0; x < img.w; ++x) {
            double a0 = 0.0, a1 = 0.0, a2 = 0.0;
            for (int i = -half; i <= half; ++i) {
                const double f = img.at(x, clampi(y + i, 0, img.h - 1));
                const double gv = g[i + half];
                a0 += gv * f;
                a1 += gv * i * f;
                a2 += gv * i * i * f;
            }
            s0.at(x, y) = static_cast<float>(a0);
            s1.at(x, y) = static_cast<float>(a1);
            s2.at(x, y) = static_cast<float>(a2);
        }

    PolyExpansion pe(img.w, img.h);
    for (int y = 0; y < img.h; ++y)
        for (int x = 0; x < img.w; ++x) {
            double m00 = 0.0, m10 = 0.0, m01 = 0.0, m20 = 0.0, m02 = 0.0, m11 = 0.0;
            for (int i = -half; i <= half; ++i) {
                const int xi = clampi(x + i, 0, img.w - 1);
                const double gv = g[i + half];
                const double v0 = s0.at(xi, y);
                const double v1 = s1.at(xi, y);
                m00 += gv * v0;
                m10 += gv * i * v0;
                m01 += gv * v1;
                m20 += gv * i * i * v0;
                m02 += gv * s2.at(xi, y);
                m11 += gv * i * v1;
            }
            pe.bx.at(x, y) = static_cast<float>(m10 / m2);
            pe.by.at(x, y) = static_cast<float>(m01 / m2);
            pe.axx.at(x, y) = static_cast<float>(i10 * m00 + i11 * m20 + i12 * m02);
            pe.ayy.at(x, y) = static_cast<float>(i10 * m00 + i12 * m20 + i11 * m02);
            pe.axy.at(x, y) = static_cast<float>(m11 / (m2 * m2));
        }
    return pe;
}

struct FlowMatrices {
    Plane g11, g12, g22, h1, h2;
    FlowMatrices(int w, int h) : g11(w, h), g12(w, h), g22(w, h), h1(w, h), h2(w, h) {}
};

// Builds the per-pixel normal-equation pieces for A d = db with the second
// expansion sampled at the position displaced by the current flow estimate.
inline void update_matrices(const PolyExpansion& r0, const PolyExpansion& r1,
                            const Plane& u, const Plane& v, FlowMatrices& m) {
    const int w = u.w, h = u.h;
    const int border = 5;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double dx = u.at(x, y);
            const double dy = v.at(x, y);
            const double fx = x + dx;
            const double fy = y + dy;

            double bx1, by1, p, r, q;
            if (fx >= 0.0 && fx <= w - 1 && fy >= 0.0 && fy <= h - 1) {
                int ix = static_cast<int>(std::floor(fx));
                int iy = static_cast<int>(std::floor(fy));
                if (ix > w - 2) ix = w - 2;
                if (iy > h - 2) iy = h - 2;
                const double ax = fx - ix;
                const double ay = fy - iy;
                const double w00 = (1.0 - ax) * (1.0 - ay);
                const double w01 = ax * (1.0 - ay);
                const double w10 = (1.0 - ax) * ay;
                const double w11 = ax * ay;
                const auto sample = [&](const Plane& pl) {
                    return w00 * pl.at(ix, iy) + w01 * pl.at(ix + 1, iy) +
                           w10 * pl.at(ix, iy + 1) + w11 * pl.at(ix + 1, iy + 1);
                };
                bx1 = sample(r1.bx);
                by1 = sample(r1.by);
                p = 0.5 * (r0.axx.at(x, y) + sample(r1.axx));
                r = 0.5 * (r0.ayy.at(x, y) + sample(r1.ayy));
                q = 0.25 * (r0.axy.at(x, y) + sample(r1.axy));
            } else {
                bx1 = 0.0;
                by1 = 0.0;
                p = r0.axx.at(x, y);
                r = r0.ayy.at(x, y);
                q = 0.5 * r0.axy.at(x, y);
            }

            double dbx = 0.5 * (r0.bx.at(x, y) - bx1) + p * dx + q * dy;
            double dby = 0.5 * (r0.by.at(x, y) - by1) + q * dx + r * dy;

            const int dist = std::min(std::min(x, y), std::min(w - 1 - x, h - 1 - y));
            if (dist < border) {
                const double scale = static_cast<double>(dist + 1) / (border + 1);
                p *= scale;
                r *= scale;
                q *= scale;
                dbx *= scale;
                dby *= scale;
            }

            m.g11.at(x, y) = static_cast<float>(p * p + q * q);
            m.g12.at(x, y) = static_cast<float>(q * (p + r));
            m.g22.at(x, y) = static_cast<float>(r * r + q * q);
            m.h1.at(x, y) = static_cast<float>(p * dbx + q * dby);
            m.h2.at(x, y) = static_cast<float>(q * dbx + r * dby);
        }
    }
}

inline std::vector<double> integral_image(const Plane& p) {
    const int w = p.w, h = p.h;
    std::vector<double> s(static_cast<std::size_t>(w + 1) * (h + 1), 0.0);
    for (int y = 0; y < h; ++y) {
        double row = 0.0;
        for (int x = 0; x < w; ++x) {
            row += p.at(x, y);
            s[static_cast<std::size_t>(y + 1) * (w + 1) + (x + 1)] =
                s[static_cast<std::size_t>(y) * (w + 1) + (x + 1)] + row;
        }
    }
    return s;
}

// Aggregates the normal equations over a winsize box (clipped at the image
// boundary) and solves the 2x2 system per pixel.
inline void solve_flow(const FlowMatrices& m, Plane& u, Plane& v, int winsize) {
    const int w = u.w, h = u.h;
    const int half = winsize / 2;
    const auto s11 = integral_image(m.g11);
    const auto s12 = integral_image(m.g12);
    const auto s22 = integral_image(m.g22);
    const auto sh1 = integral_image(m.h1);
    const auto sh2 = integral_image(m.h2);
    const auto win_sum = [&](const std::vector<double>& s, int x0, int y0, int x1, int y1) {
        return s[static_cast<std::size_t>(y1 + 1) * (w + 1) + (x1 + 1)] -
               s[static_cast<std::size_t>(y0) * (w + 1) + (x1 + 1)] -
               s[static_cast<std::size_t>(y1 + 1) * (w + 1) + x0] +
               s[static_cast<std::size_t>(y0) * (w + 1) + x0];
    };
    for (int y = 0; y < h; ++y) {
        const int y0 = std::max(0, y - half);
        const int y1 = std::min(h - 1, y + half);
        for (int x = 0; x < w; ++x) {
            const int x0 = std::max(0, x - half);
            const int x1 = std::min(w - 1, x + half);
            const double area = static_cast<double>(x1 - x0 + 1) * (y1 - y0 + 1);
            const double g11 = win_sum(s11, x0, y0, x1, y1) / area;
            const double g12 = win_sum(s12, x0, y0, x1, y1) / area;
            const double g22 = win_sum(s22, x0, y0, x1, y1) / area;
            const double h1 = win_sum(sh1, x0, y0, x1, y1) / area;
            const double h2 = win_sum(sh2, x0, y0, x1, y1) / area;
            const double det = g11 * g22 - g12 * g12 + 1e-3;
            u.at(x, y) = static_cast<float>((g22 * h1 - g12 * h2) / det);
            v.at(x, y) = static_cast<float>((g11 * h2 - g12 * h1) / det);
        }
    }
}

}  // namespace flowdetail

inline FlowField farneback_flow(const LumaFrame& prev, const LumaFrame& cur,
                                const FarnebackParams& params = {}) {
    if (prev.width != cur.width || prev.height != cur.height)
        throw DomainError("optical_flow: frame geometry mismatch");
    const int width = prev.width, height = prev.height;
    if (std::min(width, height) < 8)
        throw DomainError("optical_flow: frame smaller than 8x8");
    if (params.poly_n < 3 || params.poly_n % 2 == 0)
        throw DomainError("optical_flow: poly_n must be odd and >= 3");

    flowdetail::Plane f0(width, height), f1(width, height);
    for (std::size_t i = 0; i < prev.samples.size(); ++i) {
        f0.v[i] = prev.samples[i];
        f1.v[i] = cur.samples[i];
    }

    int levels = 0;
    {
        double s = 1.0;
        for (int k = 1; k <= params.levels; ++k) {
            s *= params.pyr_scale;
            if (std::min(width, height) * s < params.min_level_size) break;
            levels = k;
        }
    }

    flowdetail::Plane u, v;
    for (int k = levels; k >= 0; --k) {
        const double scale = std::pow(params.pyr_scale, k);
        const int lw = std::max(2, static_cast<int>(std::lround(width * scale)));
        const int lh = std::max(2, static_cast<int>(std::lround(height * scale)));

        double sigma = (1.0 / scale - 1.0) * 0.5;
        int ksize = std::max(3, static_cast<int>(std::lround(sigma * 5)) | 1);
        if (sigma < 1e-9) sigma = 0.3 * ((ksize - 1) * 0.5 - 1.0) + 0.8;

        const auto i0 = flowdetail::resize_bilinear(
            flowdetail::gaussian_blur(f0, ksize, sigma), lw, lh);
        const auto i1 = flowdetail::resize_bilinear(
            flowdetail::gaussian_blur(f1, ksize, sigma), lw, lh);

        if (k == levels) {
            u = flowdetail::Plane(lw, lh);
            v = flowdetail::Plane(lw, lh);
        } else {
            const float inv = static_cast<float>(1.0 / params.pyr_scale);
            u = flowdetail::resize_bilinear(u, lw, lh);
            v = flowdetail::resize_bilinear(v, lw, lh);
            for (auto& x : u.v) x *= inv;
            for (auto& x : v.v) x *= inv;
        }

        const auto r0 = flowdetail::poly_expansion(i0, params.poly_n, params.poly_sigma);
        const auto r1 = flowdetail::poly_expansion(i1, params.poly_n, params.poly_sigma);
        flowdetail::FlowMatrices m(lw, lh);
        flowdetail::update_matrices(r0, r1, u, v, m);
        for (int it = 0; it < params.iterations; ++it) {
            flowdetail::solve_flow(m, u, v, params.winsize);
            if (it + 1 < params.iterations)
                flowdetail::update_matrices(r0, r1, u, v, m);
        }
    }

    FlowField out;
    out.width = width;
    out.height = height;
    out.u = std::move(u.v);
    out.v = std::move(v.v);
    return out;
}

struct MeanAbsoluteFlow {
    double u = 0.0;  // mean |horizontal displacement| over pixels
    double v = 0.0;  // mean |vertical displacement| over pixels
};

inline MeanAbsoluteFlow mean_absolute_flow(const FlowField& f) {
    MeanAbsoluteFlow m;
    if (f.u.empty()) return m;
    double su = 0.0, sv = 0.0;
    for (float x : f.u) su += std::fabs(static_cast<double>(x));
    for (float x : f.v) sv += std::fabs(static_cast<double>(x));
    m.u = su / static_cast<double>(f.u.size());
    m.v = sv / static_cast<double>(f.v.size());
    return m;
}

}  // namespace encost
