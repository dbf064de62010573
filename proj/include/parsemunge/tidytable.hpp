#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

namespace parsemunge {

// One cell of a tidy table. Text never holds the empty string (that is the
// Missing marker) and Number is always finite.
class CellValue {
 public:
  CellValue() = default;

  static CellValue missing() { return {}; }
  // Non-finite values normalize to Missing.
  static CellValue number(double value);
  // The empty string normalizes to Missing.
  static CellValue text(std::string value);

  bool is_missing() const { return std::holds_alternative<std::monostate>(value_); }
  bool is_number() const { return std::holds_alternative<double>(value_); }
  bool is_text() const { return std::holds_alternative<std::string>(value_); }

  double as_number() const { return std::get<double>(value_); }
  const std::string& as_text() const { return std::get<std::string>(value_); }

  // The string form categoric transforms see: Text verbatim, Number rendered
  // as its shortest round-trip decimal. Must not be called on Missing.
  std::string canonical_text() const;

  // Numbers compare by bit pattern so that 0.0 and -0.0 are distinct.
  friend bool operator==(const CellValue& a, const CellValue& b);

 private:
  std::variant<std::monostate, double, std::string> value_;
};

using Column = std::vector<CellValue>;

enum class ColType { numeric, categoric, all_missing };

std::string_view to_string(ColType type);

// Shortest decimal that parses back to the same double.
std::string format_number(double value);

// Parses the whole of `text` as a decimal number; nullopt when any character
// is left over. May return a non-finite value for "inf" / "nan" spellings.
std::optional<double> parse_decimal(std::string_view text);

// Number for Number cells and fully parsable Text; nullopt otherwise.
std::optional<double> numeric_value(const CellValue& cell);

class TidyTable {
 public:
  TidyTable() = default;

  // Throws DataError on a duplicate header or a length mismatch.
  void add_column(std::string header, Column values);

  const std::vector<std::string>& headers() const { return headers_; }
  std::size_t column_count() const { return columns_.size(); }
  std::size_t row_count() const { return rows_; }

  const Column& column(std::size_t index) const { return columns_.at(index); }
  // Throws DataError naming the header when it is absent.
  const Column& column(std::string_view header) const;
  std::optional<std::size_t> find(std::string_view header) const;
  bool contains(std::string_view header) const { return find(header).has_value(); }

  TidyTable select_rows(std::span<const std::size_t> rows) const;
  TidyTable select_columns(std::span<const std::string> headers) const;

  friend bool operator==(const TidyTable& a, const TidyTable& b) {
    return a.headers_ == b.headers_ && a.columns_ == b.columns_ && a.rows_ == b.rows_;
  }

 private:
  std::vector<std::string> headers_;
  std::vector<Column> columns_;
  std::size_t rows_ = 0;
  std::unordered_map<std::string, std::size_t> index_;
};

const std::set<std::string>& default_missing_tokens();

// RFC-4180 reader. Unquoted fields matching a missing token become Missing,
// unquoted fields that parse as a finite decimal become Number, anything
// else is Text. Quoted fields are always Text (or Missing when empty), which
// is what lets write_csv round-trip Text that looks like a number.
TidyTable parse_csv(std::string_view content,
                    const std::set<std::string>& missing_tokens = default_missing_tokens());
TidyTable load_csv(const std::filesystem::path& path,
                   const std::set<std::string>& missing_tokens = default_missing_tokens());

std::string to_csv(const TidyTable& table);
void write_csv(const TidyTable& table, const std::filesystem::path& path);

struct UniqueSetStats {
  std::size_t n_unique = 0;
  double avg_len = 0.0;
  std::map<std::string, std::size_t> freq;
};

UniqueSetStats column_stats(std::span<const CellValue> column);

ColType infer_coltype(std::span<const CellValue> column);

}  // namespace parsemunge
