#pragma once

#include <string>
#include <vector>

// Command-line driver.  Subcommands:
//
//   simulate  --out DIR --seed S [--config C] [--n-train --n-test --snr ...]
//   fit       --scheme F --signals F --out F [--lambda-n --lambda-l --zeta --order]
//   train     --corpus F --scheme-dense F --scheme-sparse F --out F --seed S
//             [--config C] [--ablation-mse-only] [training hyperparameters]
//   predict   --model F --signals F --out F
//   evaluate  --gold F --pred NAME=F ... --report F [--truth F]
//
// Every subcommand accepts --config <json>; explicit flags override config
// keys.  Exit codes: 0 success, 2 usage error, 3 data error.

namespace leape {

// Entry point used by both the installed binary and the test harness.
// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args);

int run_cli(int argc, const char* const* argv);

}  // namespace leape
