#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace pcflow {

// Small comma-separated table. Lines of the form `# key=value` before the
// header are kept as metadata; fields containing commas or quotes are quoted.
struct CsvTable
{
  std::map<std::string, std::string> meta;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string const &name) const;
  double number(std::size_t row, std::string const &name) const;
  std::string const &text(std::size_t row, std::string const &name) const;
};

/// %.9g, with "nan"/"inf" spelled out.
std::string format_number(double value);

void write_csv(std::ostream &out, CsvTable const &table);
CsvTable read_csv(std::istream &in, std::string const &origin = "<csv>");

void write_csv_file(std::filesystem::path const &path, CsvTable const &table);
CsvTable read_csv_file(std::filesystem::path const &path);

} // namespace pcflow
