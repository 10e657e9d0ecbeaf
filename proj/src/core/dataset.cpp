#include "mcartest/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "mcartest/error.hpp"

namespace mcar {

Dataset::Dataset(Eigen::MatrixXd values, MaskMatrix mask, std::vector<std::string> names)
    : values_(std::move(values)), mask_(std::move(mask)), names_(std::move(names)) {
  if (values_.rows() < 1 || values_.cols() < 1) {
    throw DataError("dataset needs at least one row and one column");
  }
  if (mask_.rows() != values_.rows() || mask_.cols() != values_.cols()) {
    throw DataError("mask shape does not match values shape");
  }
  if (names_.size() != static_cast<std::size_t>(values_.cols())) {
    throw DataError("column name count does not match column count");
  }
}

Dataset Dataset::complete(Eigen::MatrixXd values) {
  std::vector<std::string> names;
  for (Eigen::Index j = 0; j < values.cols(); ++j) names.push_back("V" + std::to_string(j + 1));
  MaskMatrix mask = MaskMatrix::Constant(values.rows(), values.cols(), true);
  return Dataset(std::move(values), std::move(mask), std::move(names));
}

Eigen::Index Dataset::missing_count(Eigen::Index j) const {
  return mask_.rows() - mask_.col(j).count();
}

Eigen::Index Dataset::missing_count() const { return mask_.size() - mask_.count(); }

int Dataset::column_index(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  return it == names_.end() ? -1 : static_cast<int>(it - names_.begin());
}

ColumnRoles infer_roles(const Dataset& ds) {
  ColumnRoles roles;
  for (Eigen::Index j = 0; j < ds.cols(); ++j) {
    if (ds.missing_count(j) == 0) {
      roles.complete.push_back(static_cast<int>(j));
    } else {
      roles.incomplete.push_back(static_cast<int>(j));
    }
  }
  return roles;
}

void validate_roles(const Dataset& ds, const ColumnRoles& roles) {
  std::vector<int> seen(static_cast<std::size_t>(ds.cols()), 0);
  auto mark = [&](int j) {
    if (j < 0 || j >= ds.cols()) throw DataError("role refers to column index out of range");
    if (seen[static_cast<std::size_t>(j)]++) {
      throw DataError("column '" + ds.column_names()[static_cast<std::size_t>(j)] +
                      "' assigned more than one role");
    }
  };
  for (int j : roles.complete) {
    mark(j);
    if (ds.missing_count(j) != 0) {
      throw DataError("column '" + ds.column_names()[static_cast<std::size_t>(j)] +
                      "' is declared complete but has missing cells");
    }
  }
  for (int j : roles.incomplete) mark(j);
  for (std::size_t j = 0; j < seen.size(); ++j) {
    if (!seen[j]) throw DataError("column '" + ds.column_names()[j] + "' has no role");
  }
  if (roles.complete.empty()) {
    throw DataError("at least one completely observed column is required");
  }
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

int resolve_column(const Dataset& ds, const std::string& token) {
  int idx = ds.column_index(token);
  if (idx >= 0) return idx;
  int one_based = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), one_based);
  if (ec == std::errc() && ptr == token.data() + token.size() && one_based >= 1 &&
      one_based <= ds.cols()) {
    return one_based - 1;
  }
  throw DataError("unknown column '" + token + "' in roles");
}

}  // namespace

ColumnRoles parse_roles(const Dataset& ds, const std::string& spec) {
  auto colon = spec.find(':');
  if (colon == std::string::npos) {
    throw SpecError("roles must look like 'complete,...:incomplete,...'");
  }
  ColumnRoles roles;
  for (const auto& t : split(spec.substr(0, colon), ',')) {
    if (!t.empty()) roles.complete.push_back(resolve_column(ds, t));
  }
  for (const auto& t : split(spec.substr(colon + 1), ',')) {
    if (!t.empty()) roles.incomplete.push_back(resolve_column(ds, t));
  }
  validate_roles(ds, roles);
  return roles;
}

Eigen::MatrixXd response_matrix(const Dataset& ds, const ColumnRoles& roles) {
  if (roles.incomplete.empty()) throw DataError("no incomplete columns");
  Eigen::MatrixXd r(ds.rows(), roles.q());
  for (int v = 0; v < roles.q(); ++v) {
    r.col(v) = ds.mask().col(roles.incomplete[static_cast<std::size_t>(v)]).cast<double>();
  }
  return r;
}

Eigen::MatrixXd complete_block(const Dataset& ds, const ColumnRoles& roles) {
  Eigen::MatrixXd x(ds.rows(), roles.p());
  for (int u = 0; u < roles.p(); ++u) {
    x.col(u) = ds.values().col(roles.complete[static_cast<std::size_t>(u)]);
  }
  return x;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

// One logical record; quoted fields may contain separators, quotes ("") and newlines.
bool read_record(std::istream& in, std::vector<std::string>& fields, std::size_t& line_no) {
  fields.clear();
  std::string line;
  if (!std::getline(in, line)) return false;
  ++line_no;
  std::string field;
  bool quoted = false;
  std::size_t i = 0;
  while (true) {
    if (i >= line.size()) {
      if (quoted) {
        std::string next;
        if (!std::getline(in, next)) throw DataError("unterminated quoted field");
        ++line_no;
        field += '\n';
        line = std::move(next);
        i = 0;
        continue;
      }
      break;
    }
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\r' && i + 1 == line.size()) {
      // CRLF line ending
    } else {
      field += c;
    }
    ++i;
  }
  fields.push_back(std::move(field));
  return true;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

Dataset read_csv(std::istream& in, const CsvOptions& opts) {
  std::size_t line_no = 0;
  std::vector<std::string> header;
  if (!read_record(in, header, line_no)) throw DataError("CSV is empty (header row required)");
  const std::size_t d = header.size();

  std::vector<double> vals;
  std::vector<char> obs;
  std::vector<std::string> fields;
  std::size_t n = 0;
  while (read_record(in, fields, line_no)) {
    ++n;
    if (fields.size() != d) {
      throw DataError("line " + std::to_string(line_no) + ": expected " + std::to_string(d) +
                      " fields, found " + std::to_string(fields.size()));
    }
    for (std::size_t j = 0; j < d; ++j) {
      const std::string& raw = fields[j];
      if (std::find(opts.na_tokens.begin(), opts.na_tokens.end(), raw) != opts.na_tokens.end()) {
        vals.push_back(0.0);
        obs.push_back(0);
        continue;
      }
      std::string t = trim(raw);
      double v = 0.0;
      const char* first = t.data();
      const char* last = t.data() + t.size();
      if (!t.empty() && *first == '+') ++first;
      auto [ptr, ec] = std::from_chars(first, last, v);
      if (t.empty() || ec != std::errc() || ptr != last || !std::isfinite(v)) {
        throw DataError("row " + std::to_string(n) + " (line " + std::to_string(line_no) +
                        "), column '" + header[j] + "': cannot parse '" + raw + "' as a number");
      }
      vals.push_back(v);
      obs.push_back(1);
    }
  }
  if (n == 0) throw DataError("CSV has a header but no data rows");

  Eigen::MatrixXd values(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  MaskMatrix mask(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = vals[i * d + j];
      mask(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = obs[i * d + j] != 0;
    }
  }
  return Dataset(std::move(values), std::move(mask), std::move(header));
}

Dataset read_csv(const std::filesystem::path& path, const CsvOptions& opts) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return read_csv(in, opts);
}

LoadedData load_csv(const std::filesystem::path& path, const CsvOptions& opts,
                    const std::optional<std::string>& roles) {
  Dataset ds = read_csv(path, opts);
  for (Eigen::Index j = 0; j < ds.cols(); ++j) {
    if (ds.missing_count(j) == ds.rows()) {
      throw DataError("column '" + ds.column_names()[static_cast<std::size_t>(j)] +
                      "' is entirely missing");
    }
  }
  ColumnRoles r = roles ? parse_roles(ds, *roles) : infer_roles(ds);
  validate_roles(ds, r);
  return {std::move(ds), std::move(r)};
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void write_csv(const Dataset& ds, std::ostream& out, const std::string& na_token) {
  const auto& names = ds.column_names();
  for (std::size_t j = 0; j < names.size(); ++j) {
    if (j) out << ',';
    out << quote_if_needed(names[j]);
  }
  out << '\n';
  for (Eigen::Index i = 0; i < ds.rows(); ++i) {
    for (Eigen::Index j = 0; j < ds.cols(); ++j) {
      if (j) out << ',';
      out << (ds.observed(i, j) ? format_double(ds.values()(i, j)) : quote_if_needed(na_token));
    }
    out << '\n';
  }
}

void write_csv(const Dataset& ds, const std::filesystem::path& path,
               const std::string& na_token) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  write_csv(ds, out, na_token);
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

}  // namespace mcar
