#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sharetrack {

// Exit codes of run_cli.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitFailure = 2;

// Entry point of the sharetrack command. args[0] is the program name.
// Subcommands:
//   sites add|list|import
//   crawl deep|light|schedule
//   ingest --tweets <path|->
//   analyze ccf|ccdf|breakdown|timeseries|powerlaw|stats --out <path|->
//   synth corpus
//   serve
//   compact
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sharetrack
