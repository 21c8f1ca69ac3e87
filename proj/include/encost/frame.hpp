// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "encost/errors.hpp"

namespace encost {

enum class ChromaSubsampling {
    c420,       // 4:2:0, unspecified siting
    c420jpeg,   // 4:2:0 with JPEG chroma siting
    c420mpeg2,  // 4:2:0 with MPEG-2 chroma siting
    c420p10,    // 4:2:0, 10 bits per sample
};

struct Rational {
    long num = 0;
    long den = 1;

    double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
};

struct VideoHeader {
    int width = 0;
    int height = 0;
    Rational frame_rate{25, 1};
    int bit_depth = 8;
    ChromaSubsampling chroma = ChromaSubsampling::c420;

    void validate() const {
        if (width <= 0 || height <= 0)
            throw FormatError("video header: nonpositive frame dimensions");
        if (frame_rate.num <= 0 || frame_rate.den <= 0)
            throw FormatError("video header: nonpositive frame rate");
        if (bit_depth != 8 && bit_depth != 10)
            throw UnsupportedFormatError("video header: unsupported bit depth");
    }
};

// One decoded luma plane. 10-bit sources are normalized to 8 bits on read, so
// samples are always in [0, 255].
struct LumaFrame {
    int width = 0;
    int height = 0;
    long index = 0;
    std::vector<std::uint8_t> samples;  // row-major, width * height

    LumaFrame() = default;
    LumaFrame(int w, int h, long idx = 0)
        : width(w), height(h), index(idx), samples(static_cast<std::size_t>(w) * h, 0) {}

    std::uint8_t at(int x, int y) const {
        return samples[static_cast<std::size_t>(y) * width + x];
    }
    std::uint8_t& at(int x, int y) {
        return samples[static_cast<std::size_t>(y) * width + x];
    }
};

// Sequential source of luma frames in presentation order, indices 0,1,2,...
// Implementations hold at most the frame being produced; callers that need
// temporal context keep one previous frame themselves.
class FrameSource {
public:
    virtual ~FrameSource() = default;
    virtual const VideoHeader& header() const = 0;
    virtual std::optional<LumaFrame> next() = 0;
};

class MemoryFrameSource : public FrameSource {
public:
    MemoryFrameSource(VideoHeader header, std::vector<LumaFrame> frames)
        : header_(header), frames_(std::move(frames)) {
        long idx = 0;
        for (auto& f : frames_) f.index = idx++;
    }

    explicit MemoryFrameSource(std::vector<LumaFrame> frames)
        : frames_(std::move(frames)) {
        if (!frames_.empty()) {
            header_.width = frames_.front().width;
            header_.height = frames_.front().height;
        }
        long idx = 0;
        for (auto& f : frames_) f.index = idx++;
    }

    const VideoHeader& header() const override { return header_; }

    std::optional<LumaFrame> next() override {
        if (pos_ >= frames_.size()) return std::nullopt;
        return frames_[pos_++];
    }

    void rewind() { pos_ = 0; }

private:
    VideoHeader header_;
    std::vector<LumaFrame> frames_;
    std::size_t pos_ = 0;
};

}  // namespace encost
