#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace reservoir::cli {

enum class Format { csv, json };

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;  // (z, value)
};

/// Output record of one CLI invocation.
///
/// JSON: a single object {"params", "derived", "results"} with insertion
/// order preserved; series live under results.series as parallel "z" and
/// "value" arrays.
///
/// CSV: one long table with header `section,key,z,value`. Scalars appear as
/// (section, key, "", value) with nested keys joined by '.' and array
/// elements as key[i]; series rows are (series name, "", z, value). Reals
/// are written with 17 significant digits.
class Report {
 public:
  using Json = nlohmann::ordered_json;

  Json& params() { return params_; }
  Json& derived() { return derived_; }
  Json& results() { return results_; }
  void add_series(Series series) { series_.push_back(std::move(series)); }

  void write(std::ostream& out, Format format) const;
  void write_json(std::ostream& out) const;
  void write_csv(std::ostream& out) const;

 private:
  Json params_ = Json::object();
  Json derived_ = Json::object();
  Json results_ = Json::object();
  std::vector<Series> series_;
};

// printf("%.17g"), with nan/inf spelled out.
std::string format_real(double x);

// RFC 4180 field quoting.
std::string csv_field(const std::string& text);

}  // namespace reservoir::cli
