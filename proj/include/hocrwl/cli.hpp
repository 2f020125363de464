// Command-line front end: program loading, the denote/observe/ext-equiv/
// distinguish/check commands, and argument dispatch.
#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include "hocrwl/analysis.hpp"
#include "hocrwl/calculus.hpp"
#include "hocrwl/syntax.hpp"
#include "hocrwl/transforms.hpp"

namespace hocrwl {

struct RunConfig {
  std::string program_path;  // empty: start from an empty program
  bool prelude = false;
  ProgramFlags flags;
  SearchBudget budget{};
  int letrw_steps = 200;
  std::uint64_t seed = 1;
  bool json = false;
};

/// Reads and parses the program, prepending the prelude when requested.
/// HOCRWL_PRELUDE overrides the built-in prelude file.
Program load_program(const RunConfig& cfg);

int cmd_denote(const RunConfig& cfg, const std::string& expr_text,
               const std::optional<std::string>& emit_proof, std::ostream& out);
int cmd_observe(const RunConfig& cfg, const std::string& expr_text,
                ObsKind kind, std::ostream& out);
int cmd_ext_equiv(const RunConfig& cfg, const std::string& e1,
                  const std::string& e2, int arity, std::ostream& out);
int cmd_distinguish(const RunConfig& cfg, const std::string& e1,
                    const std::string& e2, HatVariant variant,
                    std::ostream& out);
int cmd_check(const RunConfig& cfg, const std::string& suite, int count,
              std::ostream& out);

/// Full argument parsing and dispatch; returns the process exit code.
int run_cli(int argc, char** argv);

}  // namespace hocrwl
