#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace shapkit {

// Entry point of the `shapkit` command line tool. Returns the process exit
// status: 0 success, 2 config/validation, 3 numeric failure, 4 I/O. Errors
// are reported on `err` as one JSON line {"error": code, "message": text}.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace shapkit
