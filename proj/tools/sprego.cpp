// sprego: evaluate formulas, trace them step by step, and run task scripts
// against a CSV workbook.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sprego/evaluator.hpp"
#include "sprego/grid.hpp"
#include "sprego/parser.hpp"
#include "sprego/script.hpp"
#include "sprego/tracer.hpp"

namespace {

using namespace sprego;

struct WorkbookArgs {
  std::string workbook;
  bool force_text = false;
  bool header = false;
  int column_offset = 0;
  std::vector<std::string> sets;
  std::string script;
  std::uint64_t seed = 0;

  void attach(CLI::App* cmd) {
    cmd->add_option("-w,--workbook", workbook, "CSV file loaded at A1");
    cmd->add_flag("--text", force_text, "Load every CSV field as text");
    cmd->add_flag("--header", header, "Keep the first CSV record as text");
    cmd->add_option("--at", column_offset, "Column offset for the CSV load")->check(CLI::NonNegativeNumber);
    cmd->add_option("--set", sets, "CELL=literal, applied after loading (repeatable)");
    cmd->add_option("--script", script, "Task script run first to build the workbook");
    cmd->add_option("--seed", seed, "RNG seed for RAND()");
  }
};

class CliError : public std::runtime_error {
 public:
  CliError(int code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
  int code() const { return code_; }

 private:
  int code_;
};

Sheet build_sheet(const WorkbookArgs& args) {
  ScriptRunner runner(RunOptions{false, args.seed});
  if (!args.workbook.empty()) {
    std::ifstream in(args.workbook, std::ios::binary);
    if (!in) throw CliError(kExitIo, "cannot open " + args.workbook);
    CsvOptions opt;
    opt.force_text = args.force_text;
    opt.header = args.header;
    opt.column_offset = args.column_offset;
    try {
      runner.sheet() = load_csv(in, opt);
    } catch (const CsvError& e) {
      throw CliError(kExitIo, e.what());
    }
  }
  if (!args.script.empty()) {
    TaskScript script;
    try {
      script = load_script(args.script);
    } catch (const ScriptError& e) {
      throw CliError(e.code(), args.script + ": " + e.what());
    }
    std::ostringstream sink;
    const auto result = runner.run(script, sink);
    if (result.exit_code != kExitOk) throw CliError(result.exit_code, args.script + " failed:\n" + sink.str());
  }
  for (const auto& s : args.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw CliError(kExitParse, "--set expects CELL=literal, got '" + s + "'");
    try {
      const RangeRef target = parse_range(s.substr(0, eq));
      runner.sheet().set(target.top_left, parse_literal(s.substr(eq + 1)));
    } catch (const A1Error& e) {
      throw CliError(kExitParse, "--set " + s + ": " + e.what());
    }
  }
  return runner.sheet();
}

void print_value(const Value& v, std::ostream& out) {
  if (const auto* s = std::get_if<Scalar>(&v)) {
    out << render(*s) << '\n';
    return;
  }
  const auto& a = std::get<ArrayValue>(v);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t c = 0; c < a.cols(); ++c) out << (c ? "\t" : "") << render(a.at(r, c));
    out << '\n';
  }
}

ParsedFormula parse_or_throw(const std::string& text) {
  try {
    return parse_formula(text);
  } catch (const SyntaxError& e) {
    throw CliError(kExitParse, "syntax error at offset " + std::to_string(e.offset()) + ": " + e.message());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spreadsheet formula engine with array formulas and step tracing"};
  app.require_subcommand(1);

  WorkbookArgs eval_wb;
  std::string eval_formula;
  std::string eval_anchor = "A1";
  bool eval_cell = false, eval_strict = false, eval_array = false;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate one formula");
  eval_wb.attach(eval_cmd);
  eval_cmd->add_option("formula", eval_formula, "Formula, e.g. '{=SUM(IF(I2:I15>H1003,1))}'")->required();
  eval_cmd->add_flag("--cell", eval_cell, "Print only the first component, as the cell would show it");
  eval_cmd->add_flag("--strict", eval_strict, "Exit 3 when the displayed value is an error");
  eval_cmd->add_flag("--array", eval_array, "Treat the formula as array-entered even without braces");
  eval_cmd->add_option("--anchor", eval_anchor, "Cell the formula notionally lives in (for ROW()/COLUMN())");

  std::string run_script;
  std::string run_export;
  bool run_keep_going = false;
  std::uint64_t run_seed = 0;
  auto* run_cmd = app.add_subcommand("run", "Run a task script and report expectations");
  run_cmd->add_option("script", run_script, "Task script (.sprego)")->required();
  run_cmd->add_flag("--keep-going", run_keep_going, "Continue after a failed directive");
  run_cmd->add_option("--seed", run_seed, "RNG seed for RAND()");
  run_cmd->add_option("--export", run_export, "Write the resulting workbook as CSV");

  WorkbookArgs trace_wb;
  std::string trace_formula;
  std::string trace_input;
  int trace_from = 1;
  auto* trace_cmd = app.add_subcommand("trace", "Print the step-by-step table of a formula as TSV");
  trace_wb.attach(trace_cmd);
  trace_cmd->add_option("formula", trace_formula, "Formula to decompose")->required();
  trace_cmd->add_option("input", trace_input, "Input range (defaults to the first range in the formula)");
  trace_cmd->add_option("--from", trace_from, "Number of the first step label");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*eval_cmd) {
      const Sheet sheet = build_sheet(eval_wb);
      const auto parsed = parse_or_throw(eval_formula);
      CellAddress anchor;
      try {
        anchor = parse_range(eval_anchor).top_left;
      } catch (const A1Error& e) {
        throw CliError(kExitParse, std::string("--anchor: ") + e.what());
      }
      EvalContext ctx(sheet, parsed.array_entered || eval_array, anchor, eval_wb.seed);
      Value v = evaluate(parsed.expr, ctx);
      if (eval_cell) v = display_value(v);
      print_value(v, std::cout);
      if (eval_strict) {
        const auto* s = std::get_if<Scalar>(&v);
        if (s && s->is_error()) return kExitEval;
      }
      return kExitOk;
    }

    if (*run_cmd) {
      TaskScript script;
      try {
        script = load_script(run_script);
      } catch (const ScriptError& e) {
        std::cerr << run_script << ": " << e.what() << '\n';
        return e.code();
      }
      ScriptRunner runner(RunOptions{run_keep_going, run_seed});
      const auto result = runner.run(script, std::cout);
      if (!run_export.empty()) {
        std::ofstream out(run_export, std::ios::binary);
        if (!out) throw CliError(kExitIo, "cannot write " + run_export);
        write_csv(runner.sheet(), out);
      }
      return result.exit_code;
    }

    if (*trace_cmd) {
      const Sheet sheet = build_sheet(trace_wb);
      const auto parsed = parse_or_throw(trace_formula);
      TraceOptions opt;
      opt.first_label = trace_from;
      if (!trace_input.empty()) {
        try {
          opt.input = parse_range(trace_input);
        } catch (const A1Error& e) {
          throw CliError(kExitParse, std::string("input range: ") + e.what());
        }
      }
      EvalContext ctx(sheet, true, {1, 1}, trace_wb.seed);
      write_tsv(trace(parsed.expr, ctx, opt), std::cout);
      return kExitOk;
    }
  } catch (const CliError& e) {
    std::cerr << "sprego: " << e.what() << '\n';
    return e.code();
  } catch (const std::exception& e) {
    std::cerr << "sprego: " << e.what() << '\n';
    return kExitEval;
  }
  return kExitOk;
}
