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

//=========================================================================
// Command implementations behind the shor_mps executable
//=========================================================================
// Each cmd_* takes parsed options and two streams and returns an exit code:
//   0 success, 2 invalid input, 3 resource limit, 4 verification failure.
// Reports are JSON objects with "schema": 1. Everything that depends on wall
// clock time lives under the top-level "timing" key, so two runs with the same
// flags and seed agree byte for byte once that key is dropped.
//--------------------------------------------------------------------------

#pragma once

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "shor_mps/error.hpp"
#include "shor_mps/numtheory.hpp"
#include "shor_mps/oracle.hpp"
#include "shor_mps/shor.hpp"
#include "shor_mps/snapshot.hpp"

namespace shor_mps::cli {

inline constexpr const char *kToolVersion = "0.1.0";

using Json = nlohmann::ordered_json;

enum ExitCode : int { ok = 0, invalid_input = 2, resource_limit = 3, verification_failure = 4 };

struct Options {
    u64 n = 0;
    std::optional<u64> a;
    u64 samples = 1;
    std::string layout = "dynamic";
    u64 seed = 0;
    u64 max_elements = u64{1} << 28;
    unsigned retries = 0;
    std::string out;
    std::string format = "json";
    u64 dense_cap = kDefaultDenseCap;
    std::optional<u64> p;
    std::optional<u64> q;
    std::optional<unsigned> l;
    std::optional<u64> r;
    std::string snapshot;
    /// 0 means: read SHOR_MPS_THREADS, else hardware concurrency.
    unsigned threads = 0;
};

/// Serializes with every floating-point value at 17 significant digits.
inline void write_json(std::ostream &out, const Json &j, int indent = 2, int depth = 0) {
    const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
    const std::string close(static_cast<std::size_t>(indent * depth), ' ');
    switch (j.type()) {
    case Json::value_t::object: {
        if (j.empty()) {
            out << "{}";
            return;
        }
        out << "{\n";
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first) {
                out << ",\n";
            }
            first = false;
            out << pad << Json(it.key()).dump() << ": ";
            write_json(out, it.value(), indent, depth + 1);
        }
        out << '\n' << close << '}';
        return;
    }
    case Json::value_t::array: {
        if (j.empty()) {
            out << "[]";
            return;
        }
        const bool flat = std::all_of(j.begin(), j.end(), [](const Json &e) { return e.is_primitive(); });
        if (flat) {
            out << '[';
            for (std::size_t k = 0; k < j.size(); ++k) {
                if (k) {
                    out << ", ";
                }
                write_json(out, j[k], indent, depth + 1);
            }
            out << ']';
            return;
        }
        out << "[\n";
        for (std::size_t k = 0; k < j.size(); ++k) {
            if (k) {
                out << ",\n";
            }
            out << pad;
            write_json(out, j[k], indent, depth + 1);
        }
        out << '\n' << close << ']';
        return;
    }
    case Json::value_t::number_float: {
        const double v = j.get<double>();
        if (!std::isfinite(v)) {
            out << "null";
            return;
        }
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << buf;
        return;
    }
    default:
        out << j.dump();
    }
}

inline std::string to_json_text(const Json &j) {
    std::ostringstream os;
    write_json(os, j);
    os << '\n';
    return os.str();
}

/// Odd, composite, not a prime power, below 2^62.
inline void validate_modulus(u64 N) {
    if (N < 15 || N >= kMaxModulus) {
        throw InvalidArgument("N must be an odd composite in [15, 2^62)");
    }
    if (N % 2 == 0) {
        throw InvalidArgument("N must be odd");
    }
    if (is_prime(N)) {
        throw InvalidArgument("N must be composite");
    }
    if (is_prime_power(N)) {
        throw InvalidArgument("N must not be a prime power");
    }
}

inline unsigned resolve_threads(unsigned requested) {
    if (requested > 0) {
        return requested;
    }
    if (const char *env = std::getenv("SHOR_MPS_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) {
            return static_cast<unsigned>(v);
        }
    }
    return std::max(1U, std::thread::hardware_concurrency());
}

inline std::vector<Layout> requested_layouts(const std::string &text) {
    if (text == "both") {
        return {Layout::static_order, Layout::dynamic_order};
    }
    return {parse_layout(text)};
}

inline void emit(const Options &opt, const std::string &text, std::ostream &out) {
    if (opt.out.empty()) {
        out << text;
        return;
    }
    std::ofstream f(opt.out);
    if (!f) {
        throw InvalidArgument("cannot open '" + opt.out + "' for writing");
    }
    f << text;
}

inline Json rank_profile_json(const RankProfile &p) {
    return Json{{"stage", p.stage}, {"ranks", p.ranks}, {"layout", p.layout}};
}

inline Json order_profile_json(const OrderProfile &op) {
    Json j{{"r", op.r}, {"alpha", op.alpha}, {"beta", op.beta}};
    if (op.lambda_N) {
        j["lambda_N"] = *op.lambda_N;
        j["dp"] = *op.dp;
        j["dq"] = *op.dq;
        j["alpha_max"] = std::max(*op.dp, *op.dq);
    }
    return j;
}

inline Json record_json(const SampleRecord &rec) {
    Json conv = Json::array();
    for (const auto &c : rec.convergents) {
        conv.push_back({c.numerator, c.denominator});
    }
    Json j{{"seed", rec.seed}, {"a", rec.a}, {"residue", rec.residue}, {"s", rec.s}, {"convergents", conv}};
    j["r_candidate"] = rec.r_candidate ? Json(*rec.r_candidate) : Json(nullptr);
    j["factors"] = rec.factors ? Json{rec.factors->first, rec.factors->second} : Json(nullptr);
    j["attempts"] = rec.attempts;
    return j;
}

inline Json stage_json(const std::vector<StageStats> &stages) {
    Json out = Json::array();
    for (const auto &st : stages) {
        Json j{{"stage", st.stage}, {"live_units", st.live_units}, {"peak_units", st.peak_units}};
        if (st.ranks) {
            j["ranks"] = st.ranks->ranks;
            j["layout"] = st.ranks->layout;
        }
        out.push_back(std::move(j));
    }
    return out;
}

inline PipelineConfig pipeline_config(const Options &opt, Layout layout) {
    PipelineConfig cfg;
    cfg.layout = layout;
    cfg.max_elements = opt.max_elements;
    cfg.retries = opt.retries;
    cfg.seed = opt.seed;
    cfg.dense_cap = opt.dense_cap;
    return cfg;
}

inline Json config_json(const Options &opt) {
    return Json{{"layout", opt.layout},       {"samples", opt.samples}, {"seed", opt.seed},
                {"max_elements", opt.max_elements}, {"retries", opt.retries}, {"dense_cap", opt.dense_cap}};
}

/// Runs `body` and maps library errors to exit codes.
template <class F> int guarded(std::ostream &err, F &&body) {
    try {
        return body();
    } catch (const MemoryLimit &e) {
        err << "error: " << e.what() << '\n';
        return resource_limit;
    } catch (const CapExceeded &e) {
        err << "error: " << e.what() << '\n';
        return resource_limit;
    } catch (const InvalidArgument &e) {
        err << "error: " << e.what() << '\n';
        return invalid_input;
    } catch (const Error &e) {
        err << "error: " << e.what() << '\n';
        return verification_failure;
    }
}

/// Sampling campaign. The modexp stage is deterministic, so it runs once per
/// layout and every sample starts from a copy of its output. Sample k uses
/// seed + k, which keeps results independent of the thread count.
inline int cmd_sample(const Options &opt, std::ostream &out, std::ostream &err) {
    return guarded(err, [&]() -> int {
        validate_modulus(opt.n);
        if (opt.samples == 0) {
            throw InvalidArgument("--samples must be positive");
        }
        if (opt.format != "json") {
            throw InvalidArgument("sample writes JSON reports only");
        }
        const auto layouts = requested_layouts(opt.layout);
        Rng campaign(opt.seed);
        Json instance{{"N", opt.n}};
        std::vector<u64> lucky;
        u64 a = 0;
        if (opt.a) {
            a = *opt.a;
            instance["a_source"] = "flag";
        } else {
            auto draw = random_coprime(opt.n, campaign);
            a = draw.a;
            lucky = draw.lucky_factors;
            instance["a_source"] = "random";
        }
        auto inst = make_instance(opt.n, a, opt.p, opt.q);

        const auto wall_start = std::chrono::steady_clock::now();
        std::vector<ShorSimulation> prepared;
        unsigned attempts = 0;
        for (;;) {
            ++attempts;
            try {
                prepared.clear();
                for (Layout layout : layouts) {
                    PipelineConfig cfg = pipeline_config(opt, layout);
                    ShorSimulation sim(inst, cfg);
                    sim.build_initial();
                    sim.run_modexp();
                    prepared.push_back(std::move(sim));
                }
                break;
            } catch (const MemoryLimit &e) {
                if (attempts > opt.retries) {
                    throw;
                }
                err << "warning: " << e.what() << "; redrawing a\n";
                auto draw = random_coprime(opt.n, campaign);
                inst = make_instance(opt.n, draw.a, opt.p, opt.q);
                lucky.insert(lucky.end(), draw.lucky_factors.begin(), draw.lucky_factors.end());
            }
        }
        instance["a"] = inst.a;
        instance["l"] = inst.l;
        instance["lucky_factors"] = lucky;
        instance["modexp_attempts"] = attempts;

        const unsigned threads = static_cast<unsigned>(std::min<u64>(resolve_threads(opt.threads), opt.samples));
        std::optional<u64> r_oracle;
        if (2 * inst.l <= 24) {
            r_oracle = multiplicative_order(inst.a, inst.N);
        }

        Json report;
        report["schema"] = 1;
        report["tool"] = "shor_mps";
        report["version"] = kToolVersion;
        report["command"] = "sample";
        report["instance"] = instance;
        report["config"] = config_json(opt);
        if (opt.p) {
            report["order_profile"] = order_profile_json(order_profile(inst));
        }
        Json per_layout = Json::array();
        Json timing{{"layouts", Json::array()}};

        for (const ShorSimulation &sim : prepared) {
            std::vector<SampleRecord> records(opt.samples);
            std::vector<std::exception_ptr> failures(threads);
            std::vector<std::thread> pool;
            for (unsigned t = 0; t < threads; ++t) {
                pool.emplace_back([&, t] {
                    try {
                        for (u64 k = t; k < opt.samples; k += threads) {
                            Rng rng(opt.seed + k);
                            records[k] = sample_from(sim, rng);
                            records[k].seed = opt.seed + k;
                        }
                    } catch (...) {
                        failures[t] = std::current_exception();
                    }
                });
            }
            for (auto &th : pool) {
                th.join();
            }
            for (auto &f : failures) {
                if (f) {
                    std::rethrow_exception(f);
                }
            }

            std::map<u64, u64> histogram;
            u64 successes = 0;
            std::map<std::string, u64> stage_peak;
            Json recs = Json::array();
            for (const auto &rec : records) {
                ++histogram[rec.s];
                successes += rec.factors.has_value();
                for (const auto &st : rec.stages) {
                    stage_peak[st.stage] = std::max(stage_peak[st.stage], st.peak_units);
                }
                recs.push_back(record_json(rec));
            }
            Json hist = Json::array();
            for (const auto &[s, c] : histogram) {
                hist.push_back({s, c});
            }
            Json agg{{"s_histogram", hist},
                     {"factor_success_rate", static_cast<double>(successes) / static_cast<double>(opt.samples)}};
            if (r_oracle) {
                const auto p = exact_distribution(inst.l, *r_oracle);
                std::vector<u64> counts(p.size(), 0);
                for (const auto &[s, c] : histogram) {
                    counts[s] = c;
                }
                agg["tvd_vs_oracle"] = tvd(p, counts);
            } else {
                agg["tvd_vs_oracle"] = nullptr;
            }
            Json peaks = Json::object();
            for (const auto &[name, v] : stage_peak) {
                peaks[name] = v;
            }
            Json lj{{"layout", to_string(sim.config().layout)},
                    {"alpha_hat", sim.alpha_hat()},
                    {"lower_dim", sim.lower_index().size()},
                    {"peak_units", peaks},
                    {"modexp_stages", stage_json(sim.stages())},
                    {"aggregate", agg},
                    {"records", recs}};
            per_layout.push_back(std::move(lj));

            Json t{{"layout", to_string(sim.config().layout)}};
            for (const auto &st : sim.stages()) {
                t[st.stage + "_seconds"] = st.seconds;
            }
            double measure_s = 0.0;
            double qft_s = 0.0;
            for (const auto &rec : records) {
                for (const auto &st : rec.stages) {
                    if (st.stage == "measure") {
                        measure_s += st.seconds;
                    } else if (st.stage == "qft") {
                        qft_s += st.seconds;
                    }
                }
            }
            t["measure_seconds_total"] = measure_s;
            t["qft_seconds_total"] = qft_s;
            timing["layouts"].push_back(std::move(t));
        }
        report["layouts"] = per_layout;
        timing["threads"] = threads;
        timing["wall_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
        report["timing"] = timing;
        emit(opt, to_json_text(report), out);
        return ok;
    });
}

struct PaperRow {
    unsigned l;
    u64 N;
    u64 a;
    u64 r;
    unsigned alpha;
    u64 beta;
};

/// Published (l, N, a) instances with their orders and two-adic splits.
inline const std::vector<PaperRow> &paper_rows() {
    static const std::vector<PaperRow> rows = {
        {13, 8189, 10, 3870, 1, 1935},      {14, 16351, 2, 8036, 2, 2009},    {15, 32663, 6, 16104, 3, 2013},
        {16, 56759, 2, 28140, 2, 7035},     {17, 124631, 2, 57516, 2, 14379}, {20, 961307, 5, 479568, 4, 29973},
        {11, 1943, 2, 924, 2, 231},
    };
    return rows;
}

inline int cmd_verify_paper(const Options &opt, std::ostream &out, std::ostream &err) {
    return guarded(err, [&]() -> int {
        bool all = true;
        Json rows = Json::array();
        std::ostringstream table;
        table << "l   N        a   r       alpha beta   lambda_N  status\n";
        for (const auto &row : paper_rows()) {
            const auto inst = make_instance(row.N, row.a);
            const u64 r = multiplicative_order(row.a, row.N);
            const auto split = two_adic_split(r);
            // lambda(N) from the factorization, as an independent divisibility check.
            const auto fac = factorize(row.N);
            std::optional<u64> lambda;
            if (fac.size() == 2 && fac[0].second == 1 && fac[1].second == 1) {
                lambda = carmichael_semiprime(fac[0].first, fac[1].first);
            }
            const bool pass = inst.l == row.l && r == row.r && split.alpha == row.alpha && split.beta == row.beta &&
                              (!lambda || *lambda % r == 0);
            all = all && pass;
            char line[160];
            std::snprintf(line, sizeof line, "%-3u %-8" PRIu64 " %-3" PRIu64 " %-7" PRIu64 " %-5u %-6" PRIu64 " %-9s %s\n",
                          inst.l, row.N, row.a, r, split.alpha, split.beta,
                          lambda ? std::to_string(*lambda).c_str() : "-", pass ? "PASS" : "FAIL");
            table << line;
            Json j{{"l", inst.l},         {"N", row.N},         {"a", row.a},
                   {"r", r},              {"alpha", split.alpha}, {"beta", split.beta},
                   {"expected", Json{{"r", row.r}, {"alpha", row.alpha}, {"beta", row.beta}}}};
            j["lambda_N"] = lambda ? Json(*lambda) : Json(nullptr);
            j["pass"] = pass;
            rows.push_back(std::move(j));
        }
        if (opt.format == "json") {
            Json report{{"schema", 1}, {"tool", "shor_mps"}, {"version", kToolVersion}, {"command", "verify-paper"},
                        {"rows", rows}, {"pass", all}};
            emit(opt, to_json_text(report), out);
        } else {
            emit(opt, table.str(), out);
        }
        return all ? ok : verification_failure;
    });
}

/// Modexp under the requested layouts with rank profiles after every gate and
/// true Schmidt ranks at the end.
inline int cmd_profile(const Options &opt, std::ostream &out, std::ostream &err) {
    return guarded(err, [&]() -> int {
        validate_modulus(opt.n);
        if (!opt.a) {
            throw InvalidArgument("profile requires --a");
        }
        if (opt.format != "json" && opt.format != "csv") {
            throw InvalidArgument("unknown format '" + opt.format + "'");
        }
        const auto inst = make_instance(opt.n, *opt.a, opt.p, opt.q);
        Json layouts = Json::array();
        std::ostringstream csv;
        csv << "stage,bond,rank,layout\n";
        std::map<std::string, u64> peaks;
        for (Layout layout : requested_layouts(opt.layout)) {
            PipelineConfig cfg = pipeline_config(opt, layout);
            cfg.trace_gates = true;
            ShorSimulation sim(inst, cfg);
            sim.build_initial();
            sim.run_modexp();
            if (!opt.snapshot.empty()) {
                save_snapshot(sim.state(), opt.snapshot + "." + to_string(layout));
            }
            std::vector<RankProfile> profiles = sim.gate_trace();
            for (const auto &st : sim.stages()) {
                if (st.ranks) {
                    profiles.push_back(*st.ranks);
                }
            }
            Json pj = Json::array();
            for (const auto &p : profiles) {
                pj.push_back(rank_profile_json(p));
                for (std::size_t b = 0; b < p.ranks.size(); ++b) {
                    csv << p.stage << ',' << b << ',' << p.ranks[b] << ',' << to_string(layout) << '\n';
                }
            }
            const u64 peak = sim.state().peak_units();
            peaks[to_string(layout)] = peak;
            layouts.push_back(Json{{"layout", to_string(layout)},
                                   {"alpha_hat", sim.alpha_hat()},
                                   {"lower_dim", sim.lower_index().size()},
                                   {"peak_units", peak},
                                   {"live_units", sim.state().live_units()},
                                   {"profiles", pj}});
        }
        Json report{{"schema", 1}, {"tool", "shor_mps"}, {"version", kToolVersion}, {"command", "profile"},
                    {"instance", Json{{"N", inst.N}, {"a", inst.a}, {"l", inst.l}}}, {"layouts", layouts}};
        if (opt.p) {
            report["order_profile"] = order_profile_json(order_profile(inst));
        }
        if (peaks.size() == 2) {
            const double ratio = static_cast<double>(peaks["static"]) / static_cast<double>(peaks["dynamic"]);
            report["static_over_dynamic_peak"] = ratio;
            err << "peak units: static " << peaks["static"] << ", dynamic " << peaks["dynamic"] << " (ratio " << ratio
                << ")\n";
        }
        emit(opt, opt.format == "csv" ? csv.str() : to_json_text(report), out);
        return ok;
    });
}

/// Exact output distribution for (l, r), or for (N, a) with r computed.
inline int cmd_oracle(const Options &opt, std::ostream &out, std::ostream &err) {
    return guarded(err, [&]() -> int {
        unsigned l = 0;
        u64 r = 0;
        if (opt.r) {
            if (!opt.l) {
                throw InvalidArgument("--r requires --l");
            }
            l = *opt.l;
            r = *opt.r;
        } else if (opt.n && opt.a) {
            const auto inst = make_instance(opt.n, *opt.a);
            l = opt.l.value_or(inst.l);
            r = multiplicative_order(*opt.a, opt.n);
        } else {
            throw InvalidArgument("oracle needs --l with --r, or --n with --a");
        }
        if (l == 0 || 2 * l > 26) {
            throw InvalidArgument("oracle supports 1 <= l <= 13");
        }
        const auto dist = exact_distribution(l, r);
        if (opt.format == "csv") {
            std::ostringstream csv;
            csv << "s,probability\n";
            char buf[40];
            for (std::size_t s = 0; s < dist.size(); ++s) {
                std::snprintf(buf, sizeof buf, "%.17g", dist[s]);
                csv << s << ',' << buf << '\n';
            }
            emit(opt, csv.str(), out);
        } else {
            Json report{{"schema", 1}, {"tool", "shor_mps"}, {"version", kToolVersion}, {"command", "oracle"},
                        {"l", l},      {"r", r},             {"distribution", dist}};
            emit(opt, to_json_text(report), out);
        }
        return ok;
    });
}

} // namespace shor_mps::cli
