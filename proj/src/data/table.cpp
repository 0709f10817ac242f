#include "tabml/data/table.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "tabml/core/error.hpp"

namespace tabml::data {
namespace {

struct Record {
  std::vector<std::string> fields;
  std::vector<bool> quoted;
  std::size_t line = 0;
};

bool IsBlankRecord(const Record& r) {
  return r.fields.size() == 1 && !r.quoted[0] &&
         std::all_of(r.fields[0].begin(), r.fields[0].end(),
                     [](unsigned char c) { return std::isspace(c); });
}

// RFC 4180 tokenizer: quoted fields may span lines and use "" as an escaped
// quote. Comment lines are skipped only at the start of a record.
std::vector<Record> Tokenize(std::string_view text, char delimiter) {
  std::vector<Record> records;
  std::size_t i = 0;
  std::size_t line = 1;
  if (text.substr(0, 3) == "\xEF\xBB\xBF") i = 3;

  while (i < text.size()) {
    // Comment line?
    std::size_t j = i;
    while (j < text.size() && (text[j] == ' ' || text[j] == '\t') && text[j] != delimiter) ++j;
    if (j < text.size() && text[j] == '#') {
      while (i < text.size() && text[i] != '\n') ++i;
      if (i < text.size()) ++i;
      ++line;
      continue;
    }

    Record rec;
    rec.line = line;
    std::string field;
    bool quoted = false;
    bool in_quotes = false;
    bool done = false;
    while (!done) {
      if (i >= text.size()) {
        Require(!in_quotes, ErrorCode::kMalformedInput,
                "line " + std::to_string(rec.line) + ": unterminated quoted field");
        rec.fields.push_back(std::move(field));
        rec.quoted.push_back(quoted);
        done = true;
        break;
      }
      const char c = text[i];
      if (in_quotes) {
        if (c == '"') {
          if (i + 1 < text.size() && text[i + 1] == '"') {
            field.push_back('"');
            i += 2;
          } else {
            in_quotes = false;
            ++i;
          }
        } else {
          if (c == '\n') ++line;
          field.push_back(c);
          ++i;
        }
        continue;
      }
      if (c == '"' && std::all_of(field.begin(), field.end(),
                                  [](unsigned char ch) { return std::isspace(ch); })) {
        field.clear();
        in_quotes = true;
        quoted = true;
        ++i;
      } else if (c == delimiter) {
        rec.fields.push_back(std::move(field));
        rec.quoted.push_back(quoted);
        field.clear();
        quoted = false;
        ++i;
      } else if (c == '\n' || c == '\r') {
        rec.fields.push_back(std::move(field));
        rec.quoted.push_back(quoted);
        if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
        ++i;
        ++line;
        done = true;
      } else {
        field.push_back(c);
        ++i;
      }
    }
    if (!IsBlankRecord(rec)) records.push_back(std::move(rec));
  }
  return records;
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  Require(static_cast<bool>(in), ErrorCode::kFileNotFound,
          "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TableFormat FormatFor(const std::filesystem::path& path) {
  auto ext = ToLower(path.extension().string());
  return (ext == ".tsv" || ext == ".tab") ? TableFormat::kTsv : TableFormat::kCsv;
}

bool IsTableFile(const std::filesystem::path& path) {
  auto ext = ToLower(path.extension().string());
  return ext == ".csv" || ext == ".tsv" || ext == ".tab";
}

}  // namespace

std::optional<std::size_t> RawTable::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < column_names.size(); ++i) {
    if (column_names[i] == name) return i;
  }
  return std::nullopt;
}

std::string Trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string ToLower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool IsMissingToken(std::string_view token) {
  static const std::array<std::string_view, 6> kTokens = {"", "na", "n/a", "nan",
                                                          "null", "none"};
  const std::string lowered = ToLower(Trim(token));
  return std::find(kTokens.begin(), kTokens.end(), lowered) != kTokens.end();
}

std::optional<double> ParseNumber(std::string_view token) {
  std::string t = Trim(token);
  if (t.empty()) return std::nullopt;
  std::string_view v = t;
  if (v.front() == '+') v.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), value);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

RawTable ParseTable(std::string_view text, TableFormat format, const std::string& source) {
  const char delimiter = format == TableFormat::kTsv ? '\t' : ',';
  std::vector<Record> records = Tokenize(text, delimiter);
  Require(!records.empty(), ErrorCode::kEmptyTable, source + ": no header row");

  RawTable table;
  table.source_path = source;
  std::set<std::string> seen;
  for (const auto& name : records.front().fields) {
    std::string trimmed = Trim(name);
    Require(seen.insert(trimmed).second, ErrorCode::kMalformedInput,
            source + ": duplicate column name '" + trimmed + "'");
    table.column_names.push_back(std::move(trimmed));
  }
  const std::size_t width = table.column_names.size();

  for (std::size_t r = 1; r < records.size(); ++r) {
    Record& rec = records[r];
    // Trailing empty cells past the header width are a common export artifact.
    while (rec.fields.size() > width && !rec.quoted.back() && Trim(rec.fields.back()).empty()) {
      rec.fields.pop_back();
      rec.quoted.pop_back();
    }
    Require(rec.fields.size() <= width, ErrorCode::kMalformedInput,
            source + ": line " + std::to_string(rec.line) + ": expected " +
                std::to_string(width) + " fields, found " + std::to_string(rec.fields.size()));
    std::vector<Cell> row;
    row.reserve(width);
    for (const auto& f : rec.fields) {
      if (IsMissingToken(f)) {
        row.emplace_back(std::nullopt);
      } else {
        row.emplace_back(Trim(f));
      }
    }
    row.resize(width, std::nullopt);
    table.rows.push_back(std::move(row));
  }
  Require(!table.rows.empty(), ErrorCode::kEmptyTable, source + ": no data rows");
  return table;
}

RawTable JoinTables(const std::vector<RawTable>& tables, const std::string& key) {
  Require(!tables.empty(), ErrorCode::kEmptyTable, "nothing to join");
  RawTable out;
  out.source_path = tables.front().source_path;
  out.column_names.push_back(key);

  std::set<std::string> used = {key};
  std::vector<std::size_t> key_index;
  for (std::size_t t = 0; t < tables.size(); ++t) {
    auto idx = tables[t].column_index(key);
    Require(idx.has_value(), ErrorCode::kMalformedInput,
            "join key '" + key + "' missing from " + tables[t].source_path);
    key_index.push_back(*idx);
    for (std::size_t c = 0; c < tables[t].num_cols(); ++c) {
      if (c == *idx) continue;
      std::string name = tables[t].column_names[c];
      if (!used.insert(name).second) {
        name += "." + std::to_string(t + 1);
        used.insert(name);
      }
      out.column_names.push_back(std::move(name));
    }
  }

  // Rows of the accumulated join, each paired with its key.
  std::vector<std::vector<Cell>> partial;
  for (const auto& row : tables[0].rows) {
    if (!row[key_index[0]]) continue;
    std::vector<Cell> r = {row[key_index[0]]};
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c != key_index[0]) r.push_back(row[c]);
    }
    partial.push_back(std::move(r));
  }
  for (std::size_t t = 1; t < tables.size(); ++t) {
    std::unordered_map<std::string, std::vector<std::size_t>> by_key;
    for (std::size_t r = 0; r < tables[t].rows.size(); ++r) {
      const Cell& k = tables[t].rows[r][key_index[t]];
      if (k) by_key[*k].push_back(r);
    }
    std::vector<std::vector<Cell>> next;
    for (const auto& left : partial) {
      auto it = by_key.find(*left[0]);
      if (it == by_key.end()) continue;
      for (std::size_t r : it->second) {
        std::vector<Cell> joined = left;
        const auto& right = tables[t].rows[r];
        for (std::size_t c = 0; c < right.size(); ++c) {
          if (c != key_index[t]) joined.push_back(right[c]);
        }
        next.push_back(std::move(joined));
      }
    }
    partial = std::move(next);
  }
  out.rows = std::move(partial);
  Require(!out.rows.empty(), ErrorCode::kEmptyTable, "join on '" + key + "' produced no rows");
  return out;
}

RawTable ReadTable(const std::filesystem::path& path, std::optional<TableFormat> format) {
  namespace fs = std::filesystem;
  Require(fs::exists(path), ErrorCode::kFileNotFound, "no such file: " + path.string());

  if (!fs::is_directory(path)) {
    return ParseTable(ReadFile(path), format.value_or(FormatFor(path)), path.string());
  }

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(path)) {
    if (entry.is_regular_file() && IsTableFile(entry.path())) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  Require(!files.empty(), ErrorCode::kEmptyTable, path.string() + ": no CSV/TSV files");

  std::vector<RawTable> sheets;
  for (const auto& f : files) {
    sheets.push_back(ParseTable(ReadFile(f), format.value_or(FormatFor(f)), f.string()));
  }
  if (sheets.size() == 1) return sheets.front();

  std::optional<std::string> key;
  for (const auto& name : sheets.front().column_names) {
    bool shared = std::all_of(sheets.begin() + 1, sheets.end(),
                              [&](const RawTable& t) { return t.column_index(name).has_value(); });
    if (shared) {
      key = name;
      break;
    }
  }
  Require(key.has_value(), ErrorCode::kMalformedInput,
          path.string() + ": sheets share no column to join on");
  RawTable joined = JoinTables(sheets, *key);
  joined.source_path = path.string();
  return joined;
}

RawTable SelectColumns(const RawTable& table, const std::vector<std::string>& names) {
  std::vector<std::size_t> idx;
  for (const auto& n : names) {
    auto i = table.column_index(n);
    Require(i.has_value(), ErrorCode::kTargetNotFound, "unknown column '" + n + "'");
    idx.push_back(*i);
  }
  RawTable out;
  out.source_path = table.source_path;
  out.column_names = names;
  out.rows.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    std::vector<Cell> r;
    r.reserve(idx.size());
    for (std::size_t i : idx) r.push_back(row[i]);
    out.rows.push_back(std::move(r));
  }
  return out;
}

}  // namespace tabml::data
