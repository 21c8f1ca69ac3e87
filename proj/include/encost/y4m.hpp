// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <fstream>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "encost/frame.hpp"

namespace encost {

namespace detail {

inline std::string read_stream_line(std::istream& in, std::size_t max_len) {
    std::string line;
    line.reserve(64);
    int c;
    while ((c = in.get()) != std::char_traits<char>::eof()) {
        if (c == '\n') return line;
        line.push_back(static_cast<char>(c));
        if (line.size() > max_len)
            throw FormatError("y4m: unterminated header line");
    }
    if (!line.empty())
        throw FormatError("y4m: stream ended inside a header line");
    return line;  // clean EOF before any byte
}

inline Rational parse_y4m_fraction(const std::string& s, const char* what) {
    auto colon = s.find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 >= s.size())
        throw FormatError(std::string("y4m: malformed ") + what + " '" + s + "'");
    Rational r;
    try {
        r.num = std::stol(s.substr(0, colon));
        r.den = std::stol(s.substr(colon + 1));
    } catch (const std::exception&) {
        throw FormatError(std::string("y4m: malformed ") + what + " '" + s + "'");
    }
    return r;
}

}  // namespace detail

// Parses the YUV4MPEG2 signature line and leaves the source positioned at the
// first FRAME marker. Accepted chroma tags: C420, C420jpeg, C420mpeg2,
// C420p10; a missing C tag means C420.
inline VideoHeader parse_y4m_header(std::istream& in) {
    std::string line = detail::read_stream_line(in, 4096);
    if (line.empty())
        throw FormatError("y4m: empty input");

    std::istringstream tokens(line);
    std::string tok;
    tokens >> tok;
    if (tok != "YUV4MPEG2")
        throw FormatError("y4m: missing YUV4MPEG2 signature");

    VideoHeader h;
    bool have_w = false, have_h = false, have_f = false;
    while (tokens >> tok) {
        if (tok.empty()) continue;
        const std::string value = tok.substr(1);
        switch (tok[0]) {
            case 'W':
                try { h.width = std::stoi(value); } catch (const std::exception&) {
                    throw FormatError("y4m: malformed width '" + tok + "'");
                }
                have_w = true;
                break;
            case 'H':
                try { h.height = std::stoi(value); } catch (const std::exception&) {
                    throw FormatError("y4m: malformed height '" + tok + "'");
                }
                have_h = true;
                break;
            case 'F':
                h.frame_rate = detail::parse_y4m_fraction(value, "frame rate");
                have_f = true;
                break;
            case 'C':
                if (value == "420") h.chroma = ChromaSubsampling::c420;
                else if (value == "420jpeg") h.chroma = ChromaSubsampling::c420jpeg;
                else if (value == "420mpeg2") h.chroma = ChromaSubsampling::c420mpeg2;
                else if (value == "420p10") { h.chroma = ChromaSubsampling::c420p10; h.bit_depth = 10; }
                else throw UnsupportedFormatError("y4m: unsupported chroma tag 'C" + value + "'");
                break;
            case 'I':
            case 'A':
            case 'X':
                break;  // interlacing, aspect and comments are irrelevant to luma analysis
            default:
                throw FormatError("y4m: unknown header token '" + tok + "'");
        }
    }
    if (!have_w || !have_h)
        throw FormatError("y4m: header missing W or H");
    if (!have_f)
        h.frame_rate = Rational{25, 1};
    if (h.width % 2 != 0 || h.height % 2 != 0)
        throw UnsupportedFormatError("y4m: 4:2:0 requires even frame dimensions");
    h.validate();
    return h;
}

// Streaming Y4M reader over a caller-owned istream. Yields luma planes only;
// chroma is skipped, 10-bit samples are right-shifted by 2.
class Y4mReader : public FrameSource {
public:
    explicit Y4mReader(std::istream& in) : in_(in), header_(parse_y4m_header(in)) {}

    const VideoHeader& header() const override { return header_; }

    long frames_read() const { return next_index_; }

    std::optional<LumaFrame> next() override {
        std::string marker;
        try {
            marker = detail::read_stream_line(in_, 4096);
        } catch (const FormatError&) {
            throw FormatError("y4m: frame " + std::to_string(next_index_) +
                              ": truncated FRAME marker line");
        }
        if (marker.empty() && in_.eof())
            return std::nullopt;
        if (marker.compare(0, 5, "FRAME") != 0)
            throw FormatError("y4m: frame " + std::to_string(next_index_) +
                              ": expected FRAME marker");

        LumaFrame frame(header_.width, header_.height, next_index_);
        const std::size_t luma_samples = frame.samples.size();
        const std::size_t chroma_samples =
            static_cast<std::size_t>(header_.width / 2) * (header_.height / 2) * 2;

        if (header_.bit_depth == 8) {
            in_.read(reinterpret_cast<char*>(frame.samples.data()),
                     static_cast<std::streamsize>(luma_samples));
            if (static_cast<std::size_t>(in_.gcount()) != luma_samples)
                throw_truncated();
            skip(chroma_samples);
        } else {
            raw16_.resize(luma_samples * 2);
            in_.read(reinterpret_cast<char*>(raw16_.data()),
                     static_cast<std::streamsize>(raw16_.size()));
            if (static_cast<std::size_t>(in_.gcount()) != raw16_.size())
                throw_truncated();
            for (std::size_t i = 0; i < luma_samples; ++i) {
                unsigned v = raw16_[2 * i] | (unsigned(raw16_[2 * i + 1]) << 8);
                v >>= 2;  // 10-bit -> 8-bit
                frame.samples[i] = static_cast<std::uint8_t>(v > 255 ? 255 : v);
            }
            skip(chroma_samples * 2);
        }
        ++next_index_;
        return frame;
    }

private:
    void skip(std::size_t bytes) {
        in_.ignore(static_cast<std::streamsize>(bytes));
        if (static_cast<std::size_t>(in_.gcount()) != bytes)
            throw_truncated();
    }

    [[noreturn]] void throw_truncated() const {
        throw FormatError("y4m: frame " + std::to_string(next_index_) +
                          ": stream ended inside a plane");
    }

    std::istream& in_;
    VideoHeader header_;
    long next_index_ = 0;
    std::vector<std::uint8_t> raw16_;
};

// Y4M reader that owns its file handle.
class Y4mFileReader : public FrameSource {
public:
    explicit Y4mFileReader(const std::string& path)
        : file_(path, std::ios::binary) {
        if (!file_)
            throw FormatError("y4m: cannot open '" + path + "'");
        reader_.emplace(file_);
    }

    const VideoHeader& header() const override { return reader_->header(); }
    std::optional<LumaFrame> next() override { return reader_->next(); }
    long frames_read() const { return reader_->frames_read(); }

private:
    std::ifstream file_;
    std::optional<Y4mReader> reader_;
};

inline std::unique_ptr<FrameSource> open_y4m(const std::string& path_or_dash,
                                             std::istream& stdin_stream) {
    struct StdinY4mSource : FrameSource {
        explicit StdinY4mSource(std::istream& in) : reader(in) {}
        const VideoHeader& header() const override { return reader.header(); }
        std::optional<LumaFrame> next() override { return reader.next(); }
        Y4mReader reader;
    };
    if (path_or_dash == "-")
        return std::make_unique<StdinY4mSource>(stdin_stream);
    return std::make_unique<Y4mFileReader>(path_or_dash);
}

// 8-bit 4:2:0 writer; chroma planes are mid-gray. Used by tests and by tools
// that synthesize clips.
class Y4mWriter {
public:
    Y4mWriter(std::ostream& out, const VideoHeader& header)
        : out_(out), header_(header) {
        header_.validate();
        if (header_.width % 2 != 0 || header_.height % 2 != 0)
            throw UnsupportedFormatError("y4m writer: 4:2:0 requires even dimensions");
        out_ << "YUV4MPEG2 W" << header_.width << " H" << header_.height
             << " F" << header_.frame_rate.num << ":" << header_.frame_rate.den
             << " Ip A1:1 C420\n";
    }

    void write_frame(const LumaFrame& frame) {
        if (frame.width != header_.width || frame.height != header_.height)
            throw DomainError("y4m writer: frame geometry mismatch");
        out_ << "FRAME\n";
        out_.write(reinterpret_cast<const char*>(frame.samples.data()),
                   static_cast<std::streamsize>(frame.samples.size()));
        const std::size_t chroma =
            static_cast<std::size_t>(header_.width / 2) * (header_.height / 2) * 2;
        chroma_.assign(chroma, 128);
        out_.write(reinterpret_cast<const char*>(chroma_.data()),
                   static_cast<std::streamsize>(chroma_.size()));
    }

private:
    std::ostream& out_;
    VideoHeader header_;
    std::vector<std::uint8_t> chroma_;
};

}  // namespace encost
