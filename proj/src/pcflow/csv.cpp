#include "pcflow/csv.hpp"

#include "pcflow/error.hpp"

#include <boost/tokenizer.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

namespace pcflow {

namespace {

std::string quoted(std::string const &field)
{
  if (field.find_first_of(",\"\\\n") == std::string::npos) { return field; }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"' || c == '\\') { out += '\\'; }
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

std::vector<std::string> split(std::string const &line)
{
  boost::escaped_list_separator<char> sep('\\', ',', '"');
  boost::tokenizer<boost::escaped_list_separator<char>> tok(line, sep);
  return {tok.begin(), tok.end()};
}

void write_row(std::ostream &out, std::vector<std::string> const &fields)
{
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) { out << ','; }
    out << quoted(fields[i]);
  }
  out << '\n';
}

} // namespace

std::size_t CsvTable::column(std::string const &name) const
{
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) { return i; }
  }
  fail(ErrorKind::Io, "csv: missing column '" + name + "'");
}

std::string const &CsvTable::text(std::size_t row, std::string const &name) const
{
  auto const c = column(name);
  if (row >= rows.size() || c >= rows[row].size()) { fail(ErrorKind::Io, "csv: short row " + std::to_string(row)); }
  return rows[row][c];
}

double CsvTable::number(std::size_t row, std::string const &name) const
{
  auto const &s = text(row, name);
  try {
    std::size_t used = 0;
    double const v = std::stod(s, &used);
    if (used != s.size()) { throw std::invalid_argument(s); }
    return v;
  } catch (std::exception const &) {
    fail(ErrorKind::Io, "csv: bad number '" + s + "' in column '" + name + "'");
  }
}

std::string format_number(double value)
{
  if (std::isnan(value)) { return "nan"; }
  if (std::isinf(value)) { return value > 0 ? "inf" : "-inf"; }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

void write_csv(std::ostream &out, CsvTable const &table)
{
  for (auto const &[k, v] : table.meta) { out << "# " << k << '=' << v << '\n'; }
  write_row(out, table.header);
  for (auto const &row : table.rows) { write_row(out, row); }
}

CsvTable read_csv(std::istream &in, std::string const &origin)
{
  CsvTable t;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') { line.pop_back(); }
    if (line.empty()) { continue; }
    if (!have_header && line.front() == '#') {
      auto const body = line.substr(line.find_first_not_of("# "));
      auto const eq = body.find('=');
      if (eq != std::string::npos) { t.meta[body.substr(0, eq)] = body.substr(eq + 1); }
      continue;
    }
    std::vector<std::string> fields;
    try {
      fields = split(line);
    } catch (std::exception const &e) {
      fail(ErrorKind::Io, origin + ": malformed line: " + e.what());
    }
    if (!have_header) {
      t.header = std::move(fields);
      have_header = true;
    } else {
      if (fields.size() != t.header.size()) {
        fail(ErrorKind::Io, origin + ": row has " + std::to_string(fields.size()) + " fields, header has " +
                                std::to_string(t.header.size()));
      }
      t.rows.push_back(std::move(fields));
    }
  }
  if (!have_header) { fail(ErrorKind::Io, origin + ": no header line"); }
  return t;
}

void write_csv_file(std::filesystem::path const &path, CsvTable const &table)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) { fail(ErrorKind::Io, "cannot write " + path.string()); }
  write_csv(out, table);
  if (!out) { fail(ErrorKind::Io, "write failed: " + path.string()); }
}

CsvTable read_csv_file(std::filesystem::path const &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) { fail(ErrorKind::Io, "cannot read " + path.string()); }
  return read_csv(in, path.string());
}

} // namespace pcflow
