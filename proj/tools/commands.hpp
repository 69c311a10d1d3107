#pragma once

#include "config.hpp"

namespace phaselab::cli {

void cmd_generate_corpus(const RunConfig& config);
void cmd_simulate(const RunConfig& config);
void cmd_train(const RunConfig& config);
void cmd_reconstruct(const RunConfig& config);
void cmd_benchmark(const RunConfig& config);
void cmd_analyze_filters(const RunConfig& config);

}  // namespace phaselab::cli
