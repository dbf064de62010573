#include "parsemunge/tidytable.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "parsemunge/error.hpp"
#include "parsemunge/text.hpp"

namespace parsemunge {

CellValue CellValue::number(double value) {
  CellValue cell;
  if (std::isfinite(value)) cell.value_ = value;
  return cell;
}

CellValue CellValue::text(std::string value) {
  CellValue cell;
  if (!value.empty()) cell.value_ = std::move(value);
  return cell;
}

std::string CellValue::canonical_text() const {
  if (is_text()) return as_text();
  return format_number(as_number());
}

bool operator==(const CellValue& a, const CellValue& b) {
  if (a.value_.index() != b.value_.index()) return false;
  if (a.is_number()) {
    return std::bit_cast<std::uint64_t>(a.as_number()) == std::bit_cast<std::uint64_t>(b.as_number());
  }
  if (a.is_text()) return a.as_text() == b.as_text();
  return true;
}

std::string_view to_string(ColType type) {
  switch (type) {
    case ColType::numeric:
      return "numeric";
    case ColType::categoric:
      return "categoric";
    case ColType::all_missing:
      return "all-missing";
  }
  return "categoric";
}

std::string format_number(double value) {
  std::array<char, 64> buf{};
  const auto result = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), result.ptr);
}

std::optional<double> parse_decimal(std::string_view text) {
  if (text.empty()) return std::nullopt;
  double value = 0.0;
  const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
  if (result.ec == std::errc::result_out_of_range && result.ptr == text.data() + text.size()) {
    // from_chars leaves `value` untouched on overflow and underflow
    const bool negative = text.front() == '-';
    const auto epos = text.find_first_of("eE");
    const bool underflow = epos != std::string_view::npos && epos + 1 < text.size() && text[epos + 1] == '-';
    if (underflow) return negative ? -0.0 : 0.0;
    return negative ? -HUGE_VAL : HUGE_VAL;
  }
  if (result.ec != std::errc() || result.ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

std::optional<double> numeric_value(const CellValue& cell) {
  if (cell.is_number()) return cell.as_number();
  if (cell.is_text()) {
    auto parsed = parse_decimal(cell.as_text());
    if (parsed && std::isfinite(*parsed)) return parsed;
  }
  return std::nullopt;
}

void TidyTable::add_column(std::string header, Column values) {
  if (index_.contains(header)) throw DataError("duplicate header \"" + header + "\"");
  if (!columns_.empty() && values.size() != rows_) {
    throw DataError("column \"" + header + "\" has " + std::to_string(values.size()) +
                    " rows, table has " + std::to_string(rows_));
  }
  if (columns_.empty()) rows_ = values.size();
  index_.emplace(header, headers_.size());
  headers_.push_back(std::move(header));
  columns_.push_back(std::move(values));
}

const Column& TidyTable::column(std::string_view header) const {
  auto idx = find(header);
  if (!idx) throw DataError("missing column \"" + std::string(header) + "\"");
  return columns_[*idx];
}

std::optional<std::size_t> TidyTable::find(std::string_view header) const {
  auto it = index_.find(std::string(header));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TidyTable TidyTable::select_rows(std::span<const std::size_t> rows) const {
  TidyTable out;
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    Column col;
    col.reserve(rows.size());
    for (std::size_t r : rows) col.push_back(columns_[c].at(r));
    out.add_column(headers_[c], std::move(col));
  }
  return out;
}

TidyTable TidyTable::select_columns(std::span<const std::string> headers) const {
  TidyTable out;
  for (const auto& h : headers) out.add_column(h, column(h));
  return out;
}

const std::set<std::string>& default_missing_tokens() {
  static const std::set<std::string> tokens = {"", "NA", "NaN", "null"};
  return tokens;
}

namespace {

struct Field {
  std::string value;
  bool quoted = false;
};

// Splits CSV content into records of fields.
std::vector<std::vector<Field>> split_records(std::string_view content) {
  std::vector<std::vector<Field>> records;
  std::vector<Field> record;
  Field field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t i = 0;
  auto end_field = [&] {
    record.push_back(std::move(field));
    field = Field{};
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    records.push_back(std::move(record));
    record.clear();
  };
  while (i < content.size()) {
    const char c = content[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < content.size() && content[i + 1] == '"') {
          field.value.push_back('"');
          i += 2;
          continue;
        }
        in_quotes = false;
        ++i;
        continue;
      }
      field.value.push_back(c);
      ++i;
      continue;
    }
    if (c == '"' && !field_started) {
      in_quotes = true;
      field.quoted = true;
      field_started = true;
      ++i;
    } else if (c == ',') {
      end_field();
      ++i;
    } else if (c == '\r' && i + 1 < content.size() && content[i + 1] == '\n') {
      end_record();
      i += 2;
    } else if (c == '\n') {
      end_record();
      ++i;
    } else {
      field.value.push_back(c);
      field_started = true;
      ++i;
    }
  }
  if (in_quotes) throw DataError("unterminated quoted field at end of input");
  // content without a trailing newline still ends a record
  if (field_started || field.quoted || !record.empty()) end_record();
  return records;
}

CellValue to_cell(const Field& field, const std::set<std::string>& missing_tokens) {
  if (field.quoted) return CellValue::text(field.value);
  if (missing_tokens.contains(field.value)) return CellValue::missing();
  if (auto number = parse_decimal(field.value)) return CellValue::number(*number);
  return CellValue::text(field.value);
}

bool needs_quotes(const std::string& text) {
  if (text.find_first_of(",\"\r\n") != std::string::npos) return true;
  // text that would read back as a number or a missing token
  if (default_missing_tokens().contains(text)) return true;
  return parse_decimal(text).has_value();
}

void append_field(std::string& out, const std::string& value, bool quote) {
  if (!quote) {
    out += value;
    return;
  }
  out.push_back('"');
  for (char c : value) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
}

}  // namespace

TidyTable parse_csv(std::string_view content, const std::set<std::string>& missing_tokens) {
  auto records = split_records(content);
  if (records.empty()) throw DataError("CSV input has no header row");
  const auto& header_fields = records.front();
  std::vector<Column> columns(header_fields.size());
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.size() != header_fields.size()) {
      throw DataError("ragged row " + std::to_string(r) + ": expected " +
                      std::to_string(header_fields.size()) + " fields, found " +
                      std::to_string(rec.size()));
    }
    for (std::size_t c = 0; c < rec.size(); ++c) columns[c].push_back(to_cell(rec[c], missing_tokens));
  }
  TidyTable table;
  for (std::size_t c = 0; c < header_fields.size(); ++c) {
    table.add_column(header_fields[c].value, std::move(columns[c]));
  }
  return table;
}

TidyTable load_csv(const std::filesystem::path& path, const std::set<std::string>& missing_tokens) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_csv(buffer.str(), missing_tokens);
}

std::string to_csv(const TidyTable& table) {
  std::string out;
  const auto& headers = table.headers();
  for (std::size_t c = 0; c < headers.size(); ++c) {
    if (c) out.push_back(',');
    append_field(out, headers[c], headers[c].find_first_of(",\"\r\n") != std::string::npos);
  }
  out.push_back('\n');
  for (std::size_t r = 0; r < table.row_count(); ++r) {
    for (std::size_t c = 0; c < headers.size(); ++c) {
      if (c) out.push_back(',');
      const CellValue& cell = table.column(c)[r];
      if (cell.is_number()) {
        out += format_number(cell.as_number());
      } else if (cell.is_text()) {
        append_field(out, cell.as_text(), needs_quotes(cell.as_text()));
      }
    }
    out.push_back('\n');
  }
  return out;
}

void write_csv(const TidyTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << to_csv(table);
  if (!out) throw DataError("failed writing " + path.string());
}

UniqueSetStats column_stats(std::span<const CellValue> column) {
  UniqueSetStats stats;
  for (const auto& cell : column) {
    if (cell.is_missing()) continue;
    ++stats.freq[cell.canonical_text()];
  }
  stats.n_unique = stats.freq.size();
  if (stats.n_unique > 0) {
    std::size_t total = 0;
    for (const auto& [value, count] : stats.freq) total += utf8_length(value);
    stats.avg_len = static_cast<double>(total) / static_cast<double>(stats.n_unique);
  }
  return stats;
}

ColType infer_coltype(std::span<const CellValue> column) {
  bool any_present = false;
  for (const auto& cell : column) {
    if (cell.is_text()) return ColType::categoric;
    if (cell.is_number()) any_present = true;
  }
  return any_present ? ColType::numeric : ColType::all_missing;
}

}  // namespace parsemunge
