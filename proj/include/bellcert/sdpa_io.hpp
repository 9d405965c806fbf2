#pragma once

#include "bellcert/sdp.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace bellcert {

/// Sparse SDPA text ("*.dat-s"). SDPA solves min c.x s.t. X = sum_i x_i F_i - F0 >= 0,
/// so our  max g.z s.t. F0 + sum z_k F_k >= 0  maps to  F_i = F_k, F0_sdpa = -F0,
/// c = -g; an external solver's optimal value is the negative of ours.
/// Layout: mDIM / nBLOCK / block sizes / objective row / one entry per line
/// "matno blkno i j value", 1-based upper-triangular, 17 significant digits,
/// LF line endings.
inline std::string export_standard(const SdpProblem& p) {
    p.validate();
    std::string out;
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.16e", v);
        return std::string(buf);
    };
    out += std::to_string(p.variables.size()) + "\n";
    out += std::to_string(p.block_sizes.size()) + "\n";
    for (std::size_t b = 0; b < p.block_sizes.size(); ++b) {
        if (b) out += " ";
        out += std::to_string(p.block_sizes[b]);
    }
    out += "\n";
    for (std::size_t k = 0; k < p.objective.size(); ++k) {
        if (k) out += " ";
        out += num(-p.objective[k]);
    }
    out += "\n";
    auto emit = [&](std::size_t matno, const SdpMatrix& m, double sign) {
        for (std::size_t b = 0; b < m.blocks.size(); ++b) {
            std::vector<SdpTriplet> trips = m.blocks[b];
            std::sort(trips.begin(), trips.end(), [](const SdpTriplet& x, const SdpTriplet& y) {
                return x.row != y.row ? x.row < y.row : x.col < y.col;
            });
            for (const auto& t : trips) {
                if (t.value == 0.0) continue;
                out += std::to_string(matno) + " " + std::to_string(b + 1) + " " +
                       std::to_string(t.row + 1) + " " + std::to_string(t.col + 1) + " " +
                       num(sign * t.value) + "\n";
            }
        }
    };
    emit(0, p.constant, -1.0);
    for (std::size_t k = 0; k < p.variables.size(); ++k) emit(k + 1, p.variables[k], 1.0);
    return out;
}

/// Inverse of export_standard. Comment lines start with '*' or '"'.
inline SdpProblem parse_sdpa(const std::string& text) {
    std::vector<std::string> lines;
    {
        std::istringstream is(text);
        std::string line;
        while (std::getline(is, line)) {
            if (line.empty() || line[0] == '*' || line[0] == '"') continue;
            lines.push_back(line);
        }
    }
    if (lines.size() < 4) throw std::invalid_argument("sdpa: truncated header");
    auto clean = [](std::string s) {
        for (char& c : s)
            if (c == ',' || c == '(' || c == ')' || c == '{' || c == '}') c = ' ';
        return s;
    };
    SdpProblem p;
    std::size_t m = 0, nblock = 0;
    {
        std::istringstream is(clean(lines[0]));
        is >> m;
    }
    {
        std::istringstream is(clean(lines[1]));
        is >> nblock;
    }
    {
        std::istringstream is(clean(lines[2]));
        long long s;
        while (is >> s) p.block_sizes.push_back(static_cast<int>(s < 0 ? -s : s));
    }
    if (p.block_sizes.size() != nblock) throw std::invalid_argument("sdpa: block size count");
    {
        std::istringstream is(clean(lines[3]));
        double c;
        while (is >> c) p.objective.push_back(-c);
    }
    if (p.objective.size() != m) throw std::invalid_argument("sdpa: objective length");
    p.constant.blocks.resize(nblock);
    p.variables.assign(m, SdpMatrix{});
    for (auto& v : p.variables) v.blocks.resize(nblock);
    p.var_names.resize(m);
    for (std::size_t li = 4; li < lines.size(); ++li) {
        std::istringstream is(clean(lines[li]));
        long long matno, blkno, i, j;
        double value;
        if (!(is >> matno >> blkno >> i >> j >> value)) continue;
        if (blkno < 1 || blkno > static_cast<long long>(nblock))
            throw std::invalid_argument("sdpa: block index out of range");
        if (i > j) std::swap(i, j);
        SdpTriplet t{static_cast<int>(i - 1), static_cast<int>(j - 1), value};
        if (matno == 0) {
            t.value = -t.value;
            p.constant.blocks[blkno - 1].push_back(t);
        } else if (matno >= 1 && matno <= static_cast<long long>(m)) {
            p.variables[matno - 1].blocks[blkno - 1].push_back(t);
        } else {
            throw std::invalid_argument("sdpa: matrix index out of range");
        }
    }
    p.validate();
    return p;
}

} // namespace bellcert
