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

#include <iostream>

#include <CLI11.hpp>

#include "shor_mps/cli.hpp"

namespace {

void add_common(CLI::App *cmd, shor_mps::cli::Options &opt) {
    cmd->add_option("--n", opt.n, "Odd composite modulus N");
    cmd->add_option("--a", opt.a, "Base a, coprime to N (drawn at random when omitted)");
    cmd->add_option("--samples", opt.samples, "Number of end-to-end samples");
    cmd->add_option("--layout", opt.layout, "Qubit layout")->check(CLI::IsMember({"static", "dynamic", "both"}));
    cmd->add_option("--seed", opt.seed, "Base RNG seed; sample k uses seed + k");
    cmd->add_option("--max-elements", opt.max_elements, "Guard on live tensor storage (64-bit words)");
    cmd->add_option("--retries", opt.retries, "Redraws of a after a memory-limit failure");
    cmd->add_option("--out", opt.out, "Output file (stdout when omitted)");
    cmd->add_option("--format", opt.format, "Output format")->check(CLI::IsMember({"json", "csv", "text"}));
    cmd->add_option("--dense-cap", opt.dense_cap, "Cap on dense state-vector size");
    cmd->add_option("--p", opt.p, "Prime factor p (verification only)");
    cmd->add_option("--q", opt.q, "Prime factor q (verification only)");
    cmd->add_option("--l", opt.l, "Bit count l (oracle only)");
    cmd->add_option("--r", opt.r, "Order r (oracle only)");
    cmd->add_option("--snapshot", opt.snapshot, "Write post-modexp MPS snapshots with this path prefix");
    cmd->add_option("--threads", opt.threads, "Worker threads (overrides SHOR_MPS_THREADS)");
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Order finding on matrix product states"};
    app.require_subcommand(1);
    shor_mps::cli::Options opt;
    auto *sample = app.add_subcommand("sample", "Run a sampling campaign");
    auto *verify = app.add_subcommand("verify-paper", "Check the published (r, alpha, beta) values");
    auto *profile = app.add_subcommand("profile", "Schmidt-rank profiles of the modexp stage");
    auto *oracle = app.add_subcommand("oracle", "Exact output distribution");
    for (auto *cmd : {sample, verify, profile, oracle}) {
        add_common(cmd, opt);
    }
    verify->get_option("--format")->default_str("text");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : shor_mps::cli::invalid_input;
    }
    if (verify->parsed() && verify->count("--format") == 0) {
        opt.format = "text";
    }
    if (sample->parsed()) {
        return shor_mps::cli::cmd_sample(opt, std::cout, std::cerr);
    }
    if (verify->parsed()) {
        return shor_mps::cli::cmd_verify_paper(opt, std::cout, std::cerr);
    }
    if (profile->parsed()) {
        return shor_mps::cli::cmd_profile(opt, std::cout, std::cerr);
    }
    return shor_mps::cli::cmd_oracle(opt, std::cout, std::cerr);
}
