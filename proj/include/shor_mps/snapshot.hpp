// Copyright 2026 The shor-mps Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file snapshot.hpp
 * MPS snapshots: a binary tensor container plus a JSON sidecar.
 *
 * Binary layout, all integers little-endian:
 *
 *   bytes 0..3   "MPS1"
 *   u8           scalar mode (0 real, 1 complex)
 *   u64          site count n
 *   per site     u64 left, u64 phys, u64 right, then left*phys*right scalars
 *                (row-major; complex scalars as re, im pairs of f64)
 *   per bond     u64 length, then that many f64 weights (n - 1 bonds)
 *
 * The sidecar holds {"schema": 1, "scalar_mode", "labels", "left_normal",
 * "right_normal"}, with labels written as strings such as "q3", "R" or "q1+R".
 */

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "shor_mps/error.hpp"
#include "shor_mps/mps.hpp"

namespace shor_mps {

static_assert(std::endian::native == std::endian::little, "snapshot I/O assumes a little-endian host");

namespace detail {

template <class V> void put(std::ostream &out, const V &v) { out.write(reinterpret_cast<const char *>(&v), sizeof(V)); }

template <class V> V get(std::istream &in) {
    V v{};
    in.read(reinterpret_cast<char *>(&v), sizeof(V));
    if (!in) {
        throw InvalidArgument("snapshot: truncated input");
    }
    return v;
}

template <Scalar T> void write_mps(std::ostream &out, const BasicMps<T> &mps) {
    out.write("MPS1", 4);
    put<std::uint8_t>(out, is_complex<T>::value ? 1 : 0);
    put<std::uint64_t>(out, mps.size());
    for (std::size_t m = 0; m < mps.size(); ++m) {
        const auto &s = mps.site(m);
        put<std::uint64_t>(out, s.left);
        put<std::uint64_t>(out, s.phys);
        put<std::uint64_t>(out, s.right);
        out.write(reinterpret_cast<const char *>(s.data.data()), static_cast<std::streamsize>(s.data.size() * sizeof(T)));
    }
    for (const auto &b : mps.bonds()) {
        put<std::uint64_t>(out, b.size());
        out.write(reinterpret_cast<const char *>(b.data()), static_cast<std::streamsize>(b.size() * sizeof(double)));
    }
}

template <Scalar T>
BasicMps<T> read_mps(std::istream &in, std::uint64_t n, std::vector<LabelGroup> labels, std::vector<char> ln,
                     std::vector<char> rn) {
    std::vector<SiteTensor<T>> sites;
    for (std::uint64_t m = 0; m < n; ++m) {
        const auto l = get<std::uint64_t>(in);
        const auto d = get<std::uint64_t>(in);
        const auto r = get<std::uint64_t>(in);
        if (l == 0 || d == 0 || r == 0 || l > (std::uint64_t{1} << 40) / d / r) {
            throw InvalidArgument("snapshot: bad site dimensions");
        }
        SiteTensor<T> s(l, d, r);
        in.read(reinterpret_cast<char *>(s.data.data()), static_cast<std::streamsize>(s.data.size() * sizeof(T)));
        if (!in) {
            throw InvalidArgument("snapshot: truncated site data");
        }
        sites.push_back(std::move(s));
    }
    std::vector<std::vector<double>> bonds;
    for (std::uint64_t m = 0; m + 1 < n; ++m) {
        const auto len = get<std::uint64_t>(in);
        if (len == 0 || len > (std::uint64_t{1} << 32)) {
            throw InvalidArgument("snapshot: bad bond length");
        }
        std::vector<double> w(len);
        in.read(reinterpret_cast<char *>(w.data()), static_cast<std::streamsize>(len * sizeof(double)));
        if (!in) {
            throw InvalidArgument("snapshot: truncated bond data");
        }
        bonds.push_back(std::move(w));
    }
    return BasicMps<T>::from_parts(std::move(sites), std::move(bonds), std::move(labels), std::move(ln), std::move(rn));
}

inline LabelGroup parse_label_group(const std::string &text) {
    LabelGroup out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto plus = text.find('+', start);
        const auto end = plus == std::string::npos ? text.size() : plus;
        out.push_back(SiteLabel::parse(text.substr(start, end - start)));
        if (plus == std::string::npos) {
            break;
        }
        start = plus + 1;
    }
    return out;
}

} // namespace detail

/// Writes `<path>` (binary) and `<path>.json` (sidecar).
inline void save_snapshot(const MpsState &state, const std::string &path) {
    std::ofstream bin(path, std::ios::binary);
    if (!bin) {
        throw InvalidArgument("cannot open '" + path + "' for writing");
    }
    nlohmann::json side;
    side["schema"] = 1;
    side["scalar_mode"] = to_string(state.mode());
    state.visit([&](const auto &mps) {
        detail::write_mps(bin, mps);
        side["labels"] = mps.layout();
        std::vector<bool> ln, rn;
        for (std::size_t m = 0; m < mps.size(); ++m) {
            ln.push_back(mps.left_normal(m));
            rn.push_back(mps.right_normal(m));
        }
        side["left_normal"] = ln;
        side["right_normal"] = rn;
    });
    std::ofstream js(path + ".json");
    js << side.dump(2) << '\n';
    if (!bin || !js) {
        throw InvalidArgument("failed writing snapshot '" + path + "'");
    }
}

inline MpsState load_snapshot(const std::string &path) {
    std::ifstream js(path + ".json");
    if (!js) {
        throw InvalidArgument("missing snapshot sidecar '" + path + ".json'");
    }
    const nlohmann::json side = nlohmann::json::parse(js);
    if (side.at("schema").get<int>() != 1) {
        throw InvalidArgument("unsupported snapshot schema");
    }
    std::ifstream bin(path, std::ios::binary);
    if (!bin) {
        throw InvalidArgument("cannot open '" + path + "'");
    }
    char magic[4];
    bin.read(magic, 4);
    if (!bin || std::memcmp(magic, "MPS1", 4) != 0) {
        throw InvalidArgument("'" + path + "' is not an MPS1 snapshot");
    }
    const auto mode = detail::get<std::uint8_t>(bin);
    const auto n = detail::get<std::uint64_t>(bin);
    const auto label_text = side.at("labels").get<std::vector<std::string>>();
    const auto ln_b = side.at("left_normal").get<std::vector<bool>>();
    const auto rn_b = side.at("right_normal").get<std::vector<bool>>();
    if (label_text.size() != n || ln_b.size() != n || rn_b.size() != n) {
        throw InvalidArgument("snapshot sidecar does not match site count");
    }
    if ((mode == 1) != (side.at("scalar_mode").get<std::string>() == "complex")) {
        throw InvalidArgument("snapshot sidecar scalar mode disagrees with binary");
    }
    std::vector<LabelGroup> labels;
    for (const auto &t : label_text) {
        labels.push_back(detail::parse_label_group(t));
    }
    std::vector<char> ln(ln_b.begin(), ln_b.end());
    std::vector<char> rn(rn_b.begin(), rn_b.end());
    if (mode == 0) {
        return MpsState(detail::read_mps<Real>(bin, n, std::move(labels), std::move(ln), std::move(rn)));
    }
    if (mode == 1) {
        return MpsState(detail::read_mps<Complex>(bin, n, std::move(labels), std::move(ln), std::move(rn)));
    }
    throw InvalidArgument("snapshot: unknown scalar mode");
}

} // namespace shor_mps
