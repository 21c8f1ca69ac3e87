// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "encost/models.hpp"

namespace encost {

inline constexpr const char* records_csv_header =
    "sequence_id,class_id,width,height,n_frames,fps_num,fps_den,preset,crf,"
    "n_intra,time_s,energy_j";

// Keyframe count fallback for the ~5 s default GOP: ceil(n_frames / gop)
// with gop = round(5 * fps) frames.
inline long default_n_intra(long n_frames, const Rational& fps) {
    long gop = std::lround(5.0 * fps.to_double());
    if (gop < 1) gop = 1;
    long n = (n_frames + gop - 1) / gop;
    return n < 1 ? 1 : n;
}

namespace csvdetail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

inline long parse_long(const std::string& s, int line_no, const char* what) {
    try {
        std::size_t pos = 0;
        long v = std::stol(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw FormatError("records csv line " + std::to_string(line_no) +
                          ": bad " + what + " '" + s + "'");
    }
}

inline double parse_double(const std::string& s, int line_no, const char* what) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw FormatError("records csv line " + std::to_string(line_no) +
                          ": bad " + what + " '" + s + "'");
    }
}

}  // namespace csvdetail

// Parses the canonical records CSV. A blank n_intra falls back to the GOP
// default; a blank energy_j means no energy measurement.
inline std::vector<EncodingRecord> read_records_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line))
        throw FormatError("records csv: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != records_csv_header)
        throw FormatError("records csv: expected header '" +
                          std::string(records_csv_header) + "'");

    std::vector<EncodingRecord> records;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto f = csvdetail::split_csv_line(line);
        if (f.size() != 12)
            throw FormatError("records csv line " + std::to_string(line_no) +
                              ": expected 12 fields, got " + std::to_string(f.size()));
        EncodingRecord r;
        r.sequence_id = f[0];
        r.class_id = f[1];
        r.width = static_cast<int>(csvdetail::parse_long(f[2], line_no, "width"));
        r.height = static_cast<int>(csvdetail::parse_long(f[3], line_no, "height"));
        r.n_frames = csvdetail::parse_long(f[4], line_no, "n_frames");
        r.frame_rate.num = csvdetail::parse_long(f[5], line_no, "fps_num");
        r.frame_rate.den = csvdetail::parse_long(f[6], line_no, "fps_den");
        r.preset = static_cast<int>(csvdetail::parse_long(f[7], line_no, "preset"));
        r.crf = static_cast<int>(csvdetail::parse_long(f[8], line_no, "crf"));
        r.n_intra = f[9].empty() ? default_n_intra(r.n_frames, r.frame_rate)
                                 : csvdetail::parse_long(f[9], line_no, "n_intra");
        r.time_s = csvdetail::parse_double(f[10], line_no, "time_s");
        if (!f[11].empty())
            r.energy_j = csvdetail::parse_double(f[11], line_no, "energy_j");
        try {
            r.validate();
        } catch (const DomainError& e) {
            throw FormatError("records csv line " + std::to_string(line_no) + ": " +
                              e.what());
        }
        records.push_back(std::move(r));
    }
    return records;
}

inline void write_records_csv(std::ostream& out,
                              const std::vector<EncodingRecord>& records) {
    out << records_csv_header << "\n";
    out.precision(17);
    for (const auto& r : records) {
        out << r.sequence_id << ',' << r.class_id << ',' << r.width << ','
            << r.height << ',' << r.n_frames << ',' << r.frame_rate.num << ','
            << r.frame_rate.den << ',' << r.preset << ',' << r.crf << ','
            << r.n_intra << ',' << r.time_s << ',';
        if (r.energy_j) out << *r.energy_j;
        out << "\n";
    }
}

}  // namespace encost
