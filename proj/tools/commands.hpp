#pragma once

#include <string>

#include "config.hpp"

namespace minerdr::cli {

void run_ingest(const RunConfig& config);
void run_transform(const RunConfig& config);
void run_test(const RunConfig& config);
void run_fit(const RunConfig& config);
void run_simulate(const RunConfig& config);
void run_report(const RunConfig& config);

}  // namespace minerdr::cli
