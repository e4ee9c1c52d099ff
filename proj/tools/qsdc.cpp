// Copyright 2026 The qsdc-sim Authors
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
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"

namespace {

void add_common(CLI::App* sub, qsdc::cli::Options& o, bool needs_seed) {
    sub->add_option("--config", o.config_path, "INI configuration file")->check(CLI::ExistingFile);
    sub->add_option("--out", o.out_path, "CSV output path");
    auto* seed = sub->add_option("--seed", o.seed, "Root seed for all random streams");
    if (needs_seed) seed->required();
    sub->add_option("--threads", o.threads, "Worker threads; results do not depend on this")
        ->check(CLI::Range(1U, 1024U));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Entanglement-based quantum secure direct communication simulator", "qsdc"};
    app.require_subcommand(1);

    qsdc::cli::Options opts;
    auto* belltest = app.add_subcommand("belltest", "CHSH test: simulate counts or analyse a counts CSV");
    add_common(belltest, opts, false);
    belltest->add_option("--counts", opts.counts_path, "Measured counts CSV (analysis-only mode)")
        ->check(CLI::ExistingFile);
    auto* bsmscan = app.add_subcommand("bsmscan", "Bell-state-measurement delay scan with Gaussian fits");
    add_common(bsmscan, opts, true);
    auto* perf = app.add_subcommand("perf", "Maximum coincidence rate versus distance");
    add_common(perf, opts, false);
    auto* session = app.add_subcommand("session", "Full protocol session: security test and message transfer");
    add_common(session, opts, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : qsdc::cli::kConfigError;
    }

    return qsdc::cli::guarded(
        [&]() -> int {
            if (*belltest) return qsdc::cli::cmd_belltest(opts, std::cout);
            if (*bsmscan) return qsdc::cli::cmd_bsmscan(opts, std::cout);
            if (*perf) return qsdc::cli::cmd_perf(opts, std::cout);
            return qsdc::cli::cmd_session(opts, std::cout);
        },
        std::cerr);
}
