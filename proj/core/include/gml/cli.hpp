#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace gml {

/// Command-line entry point. `args` excludes the program name.
///
///   generate                 write a graph-set file (data.*, io.out)
///   moments [file]           print Mₚ per graph (data.order)
///   train                    regression or classification per train.task
///   experiment <id>|all      run experiments into io.out (or $GML_OUT_DIR)
///   kstest                   KS summary of BA graphs against rewirings
///
/// Options are --key=value overrides; --config=<file> is read first.
/// Returns 0 on success, 1 on usage errors, 2 on runtime errors.
int cli_main(std::span<const std::string> args, std::ostream& out, std::ostream& err);

std::string usage_text();

}  // namespace gml
