/*
 * Copyright 2026 The mcemu Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <CLI11.hpp>

#include <iostream>

#include "mcemu/cli.hpp"

int main(int argc, char** argv) {
  using namespace mcemu::cli;

  CLI::App app{"mcemu: multi-clock multicore emulation and design-space sweeps"};
  app.require_subcommand(1);

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Run one design");
  simulate->add_option("--app", sim.app_path, "Application JSON")->required();
  simulate->add_option("--power", sim.power_path,
                       "Power table JSON (default: built-in table)");
  simulate->add_option("--out-dir", sim.out_dir, "Output directory");
  simulate->add_option("--mapping", sim.mapping,
                       "Task groups per core, e.g. 'Read+DCT|Quant'");
  simulate->add_option("--clocks", sim.clocks,
                       "Per-core clocks, e.g. '60,125' (MHz) or '100Hz,50Hz'");

  SweepOptions sw;
  auto* sweep = app.add_subcommand("sweep", "Evaluate mappings x clock domains");
  sweep->add_option("--app", sw.app_path, "Application JSON")->required();
  sweep->add_option("--power", sw.power_path,
                    "Power table JSON (default: built-in table)");
  sweep->add_option("--out-dir", sw.out_dir, "Output directory");
  sweep->add_option("--freqs", sw.freqs, "Clock domains, e.g. '60,125'")
      ->required();
  sweep->add_option("--max-cores", sw.max_cores,
                    "Largest core count to enumerate (default: task count)");
  sweep->add_option("--mappings", sw.mappings,
                    "Explicit ';'-separated mapping list instead of enumeration");
  sweep->add_option("--jobs", sw.jobs, "Worker threads")
      ->check(CLI::PositiveNumber);

  CommonOptions val;
  auto* validate = app.add_subcommand("validate", "Schema check only");
  validate->add_option("--app", val.app_path, "Application JSON")->required();
  validate->add_option("--power", val.power_path, "Power table JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  if (*simulate) return cmd_simulate(sim, std::cout, std::cerr);
  if (*sweep) return cmd_sweep(sw, std::cout, std::cerr);
  return cmd_validate(val, std::cout, std::cerr);
}
