#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace fracgelfand {

/// Provenance stamped on every output file.
struct OutputMeta {
  std::string command;
  std::string config_hash;
  std::string version = FRACGELFAND_VERSION;
};

/// 17 significant digits; non-finite values print as inf, -inf or nan.
std::string format_double(double x);
/// Inverse of format_double (accepts inf, -inf, nan).
double parse_double(const std::string& text);

struct CsvTable {
  std::vector<std::string> comments;  ///< comment lines without the leading "# "
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column; throws std::out_of_range when absent.
  std::size_t column(const std::string& name) const;
  std::vector<double> numeric_column(const std::string& name) const;
};

/// Writes `# fracgelfand <version>`, `# config <hash>` and `# command <cmd>` lines, any extra
/// comment lines, the header, the rows and then `trailer` comment lines.
void write_csv(const std::string& path, const OutputMeta& meta, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows,
               const std::vector<std::string>& comments = {},
               const std::vector<std::string>& trailer = {});
CsvTable read_csv(const std::string& path);

/// JSON documents carry a "meta" object. Doubles are written in shortest round-trip form;
/// non-finite doubles become the strings "inf", "-inf" and "nan".
nlohmann::ordered_json json_number(double x);
double json_to_double(const nlohmann::json& value);
void write_json(const std::string& path, const OutputMeta& meta, nlohmann::ordered_json body);
nlohmann::json read_json(const std::string& path);

}  // namespace fracgelfand
