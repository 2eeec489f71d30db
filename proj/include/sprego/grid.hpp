#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <istream>
#include <iterator>
#include <optional>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sprego/value.hpp"

namespace sprego {

inline constexpr int kMaxColumns = 16384;
inline constexpr int kMaxRows = 1048576;

/// 1-based column/row address; column 1 is "A".
struct CellAddress {
  int column = 1;
  int row = 1;

  bool valid() const { return column >= 1 && column <= kMaxColumns && row >= 1 && row <= kMaxRows; }

  // Row-major ordering so sparse maps iterate like a sheet reads.
  friend auto operator<=>(const CellAddress& a, const CellAddress& b) {
    if (auto c = a.row <=> b.row; c != 0) return c;
    return a.column <=> b.column;
  }
  friend bool operator==(const CellAddress&, const CellAddress&) = default;
};

struct RangeRef {
  CellAddress top_left;
  CellAddress bottom_right;

  static RangeRef normalized(CellAddress a, CellAddress b) {
    return {{std::min(a.column, b.column), std::min(a.row, b.row)},
            {std::max(a.column, b.column), std::max(a.row, b.row)}};
  }
  static RangeRef single(CellAddress a) { return {a, a}; }

  std::size_t rows() const { return static_cast<std::size_t>(bottom_right.row - top_left.row + 1); }
  std::size_t cols() const { return static_cast<std::size_t>(bottom_right.column - top_left.column + 1); }
  bool is_single_cell() const { return top_left == bottom_right; }
  bool contains(CellAddress a) const {
    return a.column >= top_left.column && a.column <= bottom_right.column && a.row >= top_left.row &&
           a.row <= bottom_right.row;
  }

  friend bool operator==(const RangeRef&, const RangeRef&) = default;
};

class A1Error : public std::runtime_error {
 public:
  A1Error(std::size_t offset, const std::string& msg)
      : std::runtime_error(msg + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

inline std::string column_name(int column) {
  std::string out;
  while (column > 0) {
    const int rem = (column - 1) % 26;
    out.insert(out.begin(), static_cast<char>('A' + rem));
    column = (column - 1) / 26;
  }
  return out;
}

inline std::string to_string(CellAddress a) { return column_name(a.column) + std::to_string(a.row); }

inline std::string to_string(const RangeRef& r) {
  if (r.is_single_cell()) return to_string(r.top_left);
  return to_string(r.top_left) + ":" + to_string(r.bottom_right);
}

namespace detail {

// Parses [$]letters[$]digits starting at `pos`; advances `pos` past it.
inline CellAddress parse_cell(std::string_view s, std::size_t& pos) {
  const std::size_t start = pos;
  if (pos < s.size() && s[pos] == '$') ++pos;
  long column = 0;
  std::size_t letters = 0;
  while (pos < s.size() && std::isalpha(static_cast<unsigned char>(s[pos]))) {
    column = column * 26 + (std::toupper(static_cast<unsigned char>(s[pos])) - 'A' + 1);
    if (column > kMaxColumns) throw A1Error(start, "column out of range");
    ++pos, ++letters;
  }
  if (letters == 0) throw A1Error(pos, "expected column letters");
  if (pos < s.size() && s[pos] == '$') ++pos;
  long row = 0;
  std::size_t digits = 0;
  while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
    row = row * 10 + (s[pos] - '0');
    if (row > kMaxRows) throw A1Error(start, "row out of range");
    ++pos, ++digits;
  }
  if (digits == 0) throw A1Error(pos, "expected row digits");
  if (row < 1) throw A1Error(start, "row out of range");
  return {static_cast<int>(column), static_cast<int>(row)};
}

}  // namespace detail

/// "C2" -> CellAddress; "C2:C1001" -> RangeRef. '$' markers are accepted and ignored.
inline std::variant<CellAddress, RangeRef> parse_a1(std::string_view token) {
  std::size_t pos = 0;
  const CellAddress first = detail::parse_cell(token, pos);
  if (pos == token.size()) return first;
  if (token[pos] != ':') throw A1Error(pos, "unexpected character");
  ++pos;
  const CellAddress second = detail::parse_cell(token, pos);
  if (pos != token.size()) throw A1Error(pos, "trailing characters");
  return RangeRef::normalized(first, second);
}

inline RangeRef parse_range(std::string_view token) {
  auto v = parse_a1(token);
  if (auto* a = std::get_if<CellAddress>(&v)) return RangeRef::single(*a);
  return std::get<RangeRef>(v);
}

/// Sparse grid; unset cells read as Blank.
class Sheet {
 public:
  const Scalar& get(CellAddress a) const {
    static const Scalar kBlank = Scalar::blank();
    auto it = cells_.find(a);
    return it == cells_.end() ? kBlank : it->second;
  }

  void set(CellAddress a, Scalar v) {
    if (!a.valid()) throw std::out_of_range("cell address outside sheet limits");
    if (v.is_blank() || v.is_omitted()) {
      cells_.erase(a);
      return;
    }
    cells_.insert_or_assign(a, std::move(v));
  }

  const std::map<CellAddress, Scalar>& cells() const { return cells_; }
  bool empty() const { return cells_.empty(); }

  /// Smallest A1-anchored rectangle holding every stored cell.
  CellAddress extent() const {
    CellAddress e{0, 0};
    for (const auto& [a, _] : cells_) {
      e.column = std::max(e.column, a.column);
      e.row = std::max(e.row, a.row);
    }
    return e;
  }

 private:
  std::map<CellAddress, Scalar> cells_;
};

inline ArrayValue get_range(const Sheet& sheet, const RangeRef& r) {
  ArrayValue out(r.rows(), r.cols());
  for (std::size_t i = 0; i < r.rows(); ++i)
    for (std::size_t j = 0; j < r.cols(); ++j)
      out.at(i, j) = sheet.get({r.top_left.column + static_cast<int>(j), r.top_left.row + static_cast<int>(i)});
  return out;
}

/// Writes `a` row-major from `anchor`. Returns #REF! (and writes nothing)
/// when the rectangle would leave the sheet.
inline std::optional<ErrorKind> spill(Sheet& sheet, CellAddress anchor, const ArrayValue& a) {
  const CellAddress far{anchor.column + static_cast<int>(a.cols()) - 1, anchor.row + static_cast<int>(a.rows()) - 1};
  if (!anchor.valid() || !far.valid()) return ErrorKind::RefErr;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      Scalar v = a.at(i, j);
      if (v.is_omitted()) v = Scalar::blank();
      sheet.set({anchor.column + static_cast<int>(j), anchor.row + static_cast<int>(i)}, std::move(v));
    }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// CSV

class CsvError : public std::runtime_error {
 public:
  CsvError(std::size_t line, const std::string& msg)
      : std::runtime_error("csv line " + std::to_string(line) + ": " + msg), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct CsvOptions {
  bool header = false;      // first record is kept as text, never inferred numeric
  bool force_text = false;  // every non-empty field is Text
  int column_offset = 0;    // CSV column c lands at sheet column c + offset
};

/// RFC-4180 records. Quoted fields may contain commas, "" and newlines;
/// CRLF and LF both end a record. When `quoted` is given it receives, per
/// field, whether the field was written in quotes.
inline std::vector<std::vector<std::string>> parse_csv_records(std::string_view text,
                                                               std::vector<std::vector<bool>>* quoted = nullptr) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::vector<bool> record_quoted;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  bool field_quoted = false;
  std::size_t line = 1;
  std::size_t i = 0;

  auto end_field = [&] {
    record.push_back(std::move(field));
    record_quoted.push_back(field_quoted);
    field.clear();
    field_started = false;
    field_quoted = false;
  };
  auto end_record = [&] {
    end_field();
    records.push_back(std::move(record));
    record.clear();
    if (quoted) quoted->push_back(std::move(record_quoted));
    record_quoted.clear();
  };

  while (i < text.size()) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          i += 2;
          continue;
        }
        in_quotes = false;
        ++i;
        continue;
      }
      if (c == '\n') ++line;
      field.push_back(c);
      ++i;
      continue;
    }
    if (c == '"' && field.empty() && !field_started) {
      in_quotes = true;
      field_started = true;
      field_quoted = true;
      ++i;
    } else if (c == ',') {
      end_field();
      ++i;
    } else if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
      end_record();
      ++line;
      i += 2;
    } else if (c == '\n') {
      end_record();
      ++line;
      ++i;
    } else {
      field.push_back(c);
      field_started = true;
      ++i;
    }
  }
  if (in_quotes) throw CsvError(line, "unterminated quoted field");
  if (field_started || !field.empty() || !record.empty()) end_record();
  return records;
}

/// Field typing used by CSV ingestion: empty -> Blank, full numeric parse -> Number, else Text.
inline Scalar infer_field(const std::string& field, bool force_text) {
  if (field.empty()) return Scalar::blank();
  if (!force_text) {
    if (auto d = parse_number(field)) return Scalar::number(*d);
  }
  return Scalar::text(field);
}

inline Sheet load_csv(std::istream& in, const CsvOptions& opt = {}) {
  std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  if (text.size() >= 3 && text.compare(0, 3, "\xEF\xBB\xBF") == 0) text.erase(0, 3);
  if (auto bad = utf8::first_invalid(text)) {
    const auto line = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + *bad, '\n'));
    throw CsvError(line, "invalid UTF-8 at byte " + std::to_string(*bad));
  }
  const auto records = parse_csv_records(text);
  Sheet sheet;
  for (std::size_t r = 0; r < records.size(); ++r) {
    const bool as_text = opt.force_text || (opt.header && r == 0);
    for (std::size_t c = 0; c < records[r].size(); ++c) {
      const CellAddress at{static_cast<int>(c) + 1 + opt.column_offset, static_cast<int>(r) + 1};
      if (!at.valid()) throw CsvError(r + 1, "field lands outside sheet limits");
      sheet.set(at, infer_field(records[r][c], as_text));
    }
  }
  return sheet;
}

inline std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

/// Writes the A1-anchored extent of the sheet, one record per row.
inline void write_csv(const Sheet& sheet, std::ostream& out) {
  const CellAddress extent = sheet.extent();
  for (int r = 1; r <= extent.row; ++r) {
    for (int c = 1; c <= extent.column; ++c) {
      if (c > 1) out << ',';
      const Scalar& v = sheet.get({c, r});
      out << csv_quote(v.is_number() ? format_number_roundtrip(v.as_number()) : render(v));
    }
    out << '\n';
  }
}

}  // namespace sprego
