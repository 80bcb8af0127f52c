#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "counterpoint/counter_namespace.hpp"
#include "counterpoint/error.hpp"
#include "counterpoint/mudd.hpp"

namespace counterpoint::dsl {

// Textual µDD description language (`.mudd` files):
//
//   action <name>;                       event node
//   counter <counter-name>;              counter node
//   done;                                done node
//   switch (<property>) {                decision node; each case body runs
//     case <value>: <statements>         until the next case or the closing
//     ...                                brace, then control joins after the
//   }                                    switch
//   order <labelA> -> <labelB>;          happens-before edge
//   <label>: <statement>                 labels an action/counter/done/switch
//   { <statements> }                     compound statement
//
// Statements run in sequence and the end of the file is an implicit `done`.
// Names are runs of [A-Za-z0-9_.$] or double-quoted strings. Comments start
// with `//` or `#`.

struct DslSource {
  std::string text;
  std::string origin = "<inline>";
};

DslSource load_file(const std::filesystem::path& path);

struct SourcePos {
  std::size_t line = 1;
  std::size_t column = 1;
  friend auto operator<=>(const SourcePos&, const SourcePos&) = default;
};

struct Diagnostic {
  ErrorKind kind = ErrorKind::SyntaxError;
  SourcePos pos;
  std::string message;
};

/// Raised by parse(); carries every diagnostic found, in source order.
class DslError : public Error {
 public:
  DslError(std::string origin, std::vector<Diagnostic> diagnostics);

  const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }
  const std::string& origin() const noexcept { return origin_; }

 private:
  std::string origin_;
  std::vector<Diagnostic> diagnostics_;
};

MuDD parse(const DslSource& src, const CounterNamespace& ns);

/// Counter names referenced by the source, in order of first appearance.
CounterNamespace infer_namespace(const DslSource& src);

/// One line per diagnostic: `origin:line:col: Kind: message`, sorted by position.
std::string format_diagnostics(const std::vector<Diagnostic>& diagnostics, const std::string& origin = "<inline>");

/// Renders a model back to source. Joins are recovered from post-dominators,
/// so diagrams produced by parse() print without duplicated suffixes.
std::string to_source(const MuDD& model);

}  // namespace counterpoint::dsl
