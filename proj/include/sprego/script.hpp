#pragma once

// Task scripts: a line-oriented format that rebuilds a worked solution step
// by step and checks it against expected tables.
//
//   # comment
//   LOAD <csv-path> [AT <column-offset>] [TEXT] [HEADER]
//   SET <cell> = <literal>
//   STEP <label> <target-range> = <formula>
//   TRACE <label> [<input-range>] [FROM <n>]
//   EXPECT <target-range> = @<csv-path> | <csv-record>
//   EXPECT <target-range> =
//   | <csv-record>
//   | ...
//
// Lines that start with whitespace continue the previous directive.

#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "sprego/evaluator.hpp"
#include "sprego/grid.hpp"
#include "sprego/parser.hpp"
#include "sprego/tracer.hpp"

namespace sprego {

/// Process exit codes shared by the script runner and the CLI.
enum ExitCode : int {
  kExitOk = 0,
  kExitMismatch = 1,
  kExitParse = 2,
  kExitEval = 3,
  kExitIo = 4,
};

class ScriptError : public std::runtime_error {
 public:
  ScriptError(std::size_t line, const std::string& msg, int code = kExitParse)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + msg : msg), line_(line), code_(code) {}
  std::size_t line() const { return line_; }
  int code() const { return code_; }

 private:
  std::size_t line_;
  int code_;
};

namespace script {

struct Load {
  std::string path;
  int column_offset = 0;
  bool force_text = false;
  bool header = false;
};
struct Set {
  CellAddress cell;
  std::string literal;
};
struct Step {
  std::string label;
  RangeRef target;
  std::string formula;
};
struct Trace {
  std::string label;
  std::optional<RangeRef> input;
  int first_label = 1;
};
struct Expect {
  RangeRef target;
  std::vector<std::vector<std::string>> rows;  // empty when loaded from `file`
  std::vector<std::vector<bool>> quoted;
  std::string file;
};

using Directive = std::variant<Load, Set, Step, Trace, Expect>;

struct Line {
  std::size_t number;
  Directive directive;
};

}  // namespace script

struct TaskScript {
  std::vector<script::Line> lines;
  std::filesystem::path base_dir;  // relative paths resolve against this
};

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline std::vector<std::string> words(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

inline std::string upper(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

inline RangeRef range_arg(const std::string& token, std::size_t line) {
  try {
    return parse_range(token);
  } catch (const A1Error& e) {
    throw ScriptError(line, "bad range '" + token + "': " + e.what());
  }
}

inline int int_arg(const std::string& token, std::size_t line) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return v;
  } catch (const std::exception&) {
    throw ScriptError(line, "expected an integer, got '" + token + "'");
  }
}

// Splits "<head> = <rest>" at the first '='.
inline std::pair<std::string, std::string> split_assign(const std::string& body, std::size_t line) {
  const auto eq = body.find('=');
  if (eq == std::string::npos) throw ScriptError(line, "expected '='");
  return {trim(body.substr(0, eq)), trim(body.substr(eq + 1))};
}

}  // namespace detail

/// Parses script text and validates label uniqueness and that every EXPECT
/// targets cells already produced by an earlier STEP.
inline TaskScript parse_script(std::string_view text, std::filesystem::path base_dir = {}) {
  struct Raw {
    std::size_t number;
    std::string text;
    std::vector<std::string> table;  // '|' rows
  };
  std::vector<Raw> raw;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t[0] == '|') {
      if (raw.empty()) throw ScriptError(n, "table row outside EXPECT");
      raw.back().table.push_back(t.substr(1));
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(line[0]))) {
      if (raw.empty()) throw ScriptError(n, "continuation line without a directive");
      raw.back().text += t;
      continue;
    }
    raw.push_back({n, t, {}});
  }

  TaskScript script;
  script.base_dir = std::move(base_dir);
  std::set<std::string> labels;
  std::vector<RangeRef> produced;

  for (auto& r : raw) {
    const auto first_space = r.text.find_first_of(" \t");
    const std::string keyword = detail::upper(r.text.substr(0, first_space));
    const std::string body = first_space == std::string::npos ? "" : detail::trim(r.text.substr(first_space));
    if (keyword != "EXPECT" && !r.table.empty()) throw ScriptError(r.number, "table rows only follow EXPECT");

    if (keyword == "LOAD") {
      auto w = detail::words(body);
      if (w.empty()) throw ScriptError(r.number, "LOAD needs a file");
      script::Load load{w[0]};
      for (std::size_t i = 1; i < w.size(); ++i) {
        const auto opt = detail::upper(w[i]);
        if (opt == "AT" && i + 1 < w.size()) load.column_offset = detail::int_arg(w[++i], r.number);
        else if (opt == "TEXT") load.force_text = true;
        else if (opt == "HEADER") load.header = true;
        else throw ScriptError(r.number, "unknown LOAD option '" + w[i] + "'");
      }
      if (load.column_offset < 0) throw ScriptError(r.number, "negative column offset");
      script.lines.push_back({r.number, std::move(load)});
    } else if (keyword == "SET") {
      auto [cell, literal] = detail::split_assign(body, r.number);
      const RangeRef target = detail::range_arg(cell, r.number);
      if (!target.is_single_cell()) throw ScriptError(r.number, "SET takes a single cell");
      script.lines.push_back({r.number, script::Set{target.top_left, literal}});
    } else if (keyword == "STEP") {
      auto [head, formula] = detail::split_assign(body, r.number);
      auto w = detail::words(head);
      if (w.size() != 2) throw ScriptError(r.number, "STEP needs a label and a target range");
      if (!labels.insert(w[0]).second) throw ScriptError(r.number, "duplicate label '" + w[0] + "'");
      const RangeRef target = detail::range_arg(w[1], r.number);
      produced.push_back(target);
      script.lines.push_back({r.number, script::Step{w[0], target, formula}});
    } else if (keyword == "TRACE") {
      auto w = detail::words(body);
      if (w.empty()) throw ScriptError(r.number, "TRACE needs a label");
      if (!labels.count(w[0])) throw ScriptError(r.number, "TRACE of unknown label '" + w[0] + "'");
      script::Trace tr{w[0], std::nullopt, 1};
      for (std::size_t i = 1; i < w.size(); ++i) {
        if (detail::upper(w[i]) == "FROM" && i + 1 < w.size()) tr.first_label = detail::int_arg(w[++i], r.number);
        else tr.input = detail::range_arg(w[i], r.number);
      }
      script.lines.push_back({r.number, std::move(tr)});
    } else if (keyword == "EXPECT") {
      auto [head, rest] = detail::split_assign(body, r.number);
      script::Expect ex{detail::range_arg(head, r.number), {}, {}, {}};
      for (int row = ex.target.top_left.row; row <= ex.target.bottom_right.row; ++row)
        for (int col = ex.target.top_left.column; col <= ex.target.bottom_right.column; ++col) {
          const CellAddress a{col, row};
          bool covered = false;
          for (const auto& p : produced) covered = covered || p.contains(a);
          if (!covered) throw ScriptError(r.number, "EXPECT covers " + to_string(a) + ", which no earlier STEP produced");
        }
      if (!rest.empty() && rest[0] == '@') {
        ex.file = detail::trim(rest.substr(1));
      } else {
        std::string csv = rest.empty() ? "" : rest + "\n";
        for (const auto& row : r.table) csv += detail::trim(row) + "\n";
        try {
          ex.rows = parse_csv_records(csv, &ex.quoted);
        } catch (const CsvError& e) {
          throw ScriptError(r.number, e.what());
        }
      }
      script.lines.push_back({r.number, std::move(ex)});
    } else {
      throw ScriptError(r.number, "unknown directive '" + keyword + "'");
    }
  }
  return script;
}

inline TaskScript load_script(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScriptError(0, "cannot open script " + path.string(), kExitIo);
  std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return parse_script(text, path.parent_path());
}

/// Literal typing for SET and EXPECT cells: empty is Blank, then number,
/// TRUE/FALSE, error spellings, and a double-quoted literal is always text.
inline Scalar parse_literal(const std::string& raw) {
  const std::string s = detail::trim(raw);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
    std::string body;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
      if (s[i] == '"' && i + 2 < s.size() && s[i + 1] == '"') ++i;
      body.push_back(s[i]);
    }
    return Scalar::text(body);
  }
  if (s.empty()) return Scalar::blank();
  if (auto d = parse_number(s)) return Scalar::number(*d);
  if (s == "TRUE") return Scalar::boolean(true);
  if (s == "FALSE") return Scalar::boolean(false);
  if (auto e = parse_error_kind(s)) return Scalar::error(*e);
  return Scalar::text(s);
}

/// Cell equality for expectations: text exact, numbers within 1e-9
/// relative or 1e-12 absolute, whichever is looser.
inline bool cells_match(const Scalar& expected, const Scalar& actual) {
  if (expected.is_number() && actual.is_number()) {
    const double e = expected.as_number(), a = actual.as_number();
    const double tol = std::max(1e-9 * std::max(std::fabs(e), std::fabs(a)), 1e-12);
    return std::fabs(e - a) <= tol;
  }
  auto blankish = [](const Scalar& v) { return v.is_blank() || (v.is_text() && v.as_text().empty()); };
  if (blankish(expected) && blankish(actual)) return true;
  return expected == actual;
}

struct RunOptions {
  bool keep_going = false;
  std::uint64_t seed = 0;
};

struct RunResult {
  int passed = 0;
  int failed = 0;
  int exit_code = kExitOk;
};

/// Executes directives in order against its own sheet, writing a
/// deterministic report.
class ScriptRunner {
 public:
  explicit ScriptRunner(RunOptions opt = {}) : opt_(opt) {}

  RunResult run(const TaskScript& script, std::ostream& report) {
    RunResult result;
    for (const auto& line : script.lines) {
      try {
        std::visit([&](const auto& d) { execute(d, script, report, result); }, line.directive);
      } catch (const ScriptError& e) {
        fail(result, e.code(), report, "line " + std::to_string(line.number) + ": " + e.what());
      } catch (const SyntaxError& e) {
        fail(result, kExitParse, report, "line " + std::to_string(line.number) + ": syntax error: " + e.what());
      } catch (const CsvError& e) {
        fail(result, kExitIo, report, "line " + std::to_string(line.number) + ": " + e.what());
      }
      if (result.exit_code != kExitOk && !opt_.keep_going) {
        report << "ABORT at line " << line.number << '\n';
        break;
      }
    }
    report << "SUMMARY " << result.passed << " passed, " << result.failed << " failed\n";
    return result;
  }

  const Sheet& sheet() const { return sheet_; }
  Sheet& sheet() { return sheet_; }

 private:
  void fail(RunResult& r, int code, std::ostream& report, const std::string& msg) {
    report << "ERROR " << msg << '\n';
    if (r.exit_code == kExitOk) r.exit_code = code;
  }

  static std::filesystem::path resolve(const TaskScript& s, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : s.base_dir / path;
  }

  void execute(const script::Load& d, const TaskScript& s, std::ostream& report, RunResult&) {
    const auto path = resolve(s, d.path);
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ScriptError(0, "cannot open " + path.string(), kExitIo);
    CsvOptions opt;
    opt.column_offset = d.column_offset;
    opt.force_text = d.force_text;
    opt.header = d.header;
    Sheet loaded = load_csv(in, opt);
    for (const auto& [addr, v] : loaded.cells()) sheet_.set(addr, v);
    const auto extent = loaded.extent();
    report << "LOAD " << d.path << " (" << extent.row << " rows)\n";
  }

  void execute(const script::Set& d, const TaskScript&, std::ostream& report, RunResult&) {
    sheet_.set(d.cell, parse_literal(d.literal));
    report << "SET " << to_string(d.cell) << " = " << render(sheet_.get(d.cell)) << '\n';
  }

  void execute(const script::Step& d, const TaskScript&, std::ostream& report, RunResult&) {
    const auto parsed = parse_formula(d.formula);
    EvalContext ctx(sheet_, parsed.array_entered, d.target.top_left, opt_.seed);
    const Value v = evaluate(parsed.expr, ctx);
    ArrayValue out(d.target.rows(), d.target.cols());
    if (d.target.is_single_cell()) {
      out.at(0, 0) = display_value(v);
    } else if (const auto* s = std::get_if<Scalar>(&v)) {
      out = ArrayValue(d.target.rows(), d.target.cols(), *s);
    } else {
      const auto& a = std::get<ArrayValue>(v);
      if (a.rows() != d.target.rows() || a.cols() != d.target.cols())
        throw ScriptError(0,
                          "result is " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " but " +
                              to_string(d.target) + " is " + std::to_string(d.target.rows()) + "x" +
                              std::to_string(d.target.cols()),
                          kExitEval);
      out = a;
    }
    if (spill(sheet_, d.target.top_left, out)) throw ScriptError(0, "spill outside sheet", kExitEval);
    steps_.push_back({d.label, parsed.expr});
    report << "STEP " << d.label << ' ' << to_string(d.target) << (parsed.array_entered ? " {=" : " =")
           << unparse(parsed.expr) << (parsed.array_entered ? "}" : "") << '\n';
  }

  void execute(const script::Trace& d, const TaskScript&, std::ostream& report, RunResult&) {
    for (const auto& [label, expr] : steps_) {
      if (label != d.label) continue;
      EvalContext ctx(sheet_, true, {1, 1}, opt_.seed);
      const auto table = trace(expr, ctx, TraceOptions{d.input, d.first_label});
      report << "TRACE " << d.label << '\n';
      write_tsv(table, report);
      return;
    }
    throw ScriptError(0, "TRACE of label '" + d.label + "' before its STEP");
  }

  void execute(const script::Expect& d, const TaskScript& s, std::ostream& report, RunResult& result) {
    auto rows = d.rows;
    auto quoted = d.quoted;
    if (!d.file.empty()) {
      const auto path = resolve(s, d.file);
      std::ifstream in(path, std::ios::binary);
      if (!in) throw ScriptError(0, "cannot open " + path.string(), kExitIo);
      std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
      quoted.clear();
      rows = parse_csv_records(text, &quoted);
    }
    if (rows.size() != d.target.rows())
      throw ScriptError(0, "expected table has " + std::to_string(rows.size()) + " rows, range has " +
                               std::to_string(d.target.rows()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != d.target.cols())
        throw ScriptError(0, "expected row " + std::to_string(r + 1) + " has " + std::to_string(rows[r].size()) +
                                 " fields, range has " + std::to_string(d.target.cols()));
      for (std::size_t c = 0; c < rows[r].size(); ++c) {
        const CellAddress at{d.target.top_left.column + static_cast<int>(c), d.target.top_left.row + static_cast<int>(r)};
        // quoted expectation fields are text even when they look numeric
        const Scalar want = quoted[r][c] ? Scalar::text(rows[r][c]) : parse_literal(rows[r][c]);
        const Scalar& got = sheet_.get(at);
        if (!cells_match(want, got)) {
          ++result.failed;
          if (result.exit_code == kExitOk) result.exit_code = kExitMismatch;
          report << "EXPECT " << to_string(d.target) << " FAIL at " << to_string(at) << ": expected "
                 << render(want) << ", got " << render(got) << '\n';
          return;
        }
      }
    }
    ++result.passed;
    report << "EXPECT " << to_string(d.target) << " PASS (" << d.target.rows() * d.target.cols() << " cells)\n";
  }

  RunOptions opt_;
  Sheet sheet_;
  std::vector<std::pair<std::string, ExprPtr>> steps_;
};

}  // namespace sprego
