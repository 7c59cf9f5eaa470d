#include "reservoir/report.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace reservoir::cli {

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\r\n") == std::string::npos) return text;
  std::string quoted = "\"";
  for (char c : text) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

namespace {

std::string scalar_text(const Report::Json& value) {
  switch (value.type()) {
    case Report::Json::value_t::number_float:
      return format_real(value.get<double>());
    case Report::Json::value_t::string:
      return value.get<std::string>();
    case Report::Json::value_t::null:
      return "";
    default:
      return value.dump();
  }
}

void flatten(std::ostream& out, const std::string& section, const std::string& key,
             const Report::Json& value) {
  if (value.is_object()) {
    for (const auto& [k, v] : value.items()) {
      flatten(out, section, key.empty() ? k : key + "." + k, v);
    }
  } else if (value.is_array()) {
    for (std::size_t i = 0; i < value.size(); ++i) {
      flatten(out, section, key + "[" + std::to_string(i) + "]", value[i]);
    }
  } else {
    out << csv_field(section) << ',' << csv_field(key) << ",," << csv_field(scalar_text(value))
        << "\r\n";
  }
}

// JSON has no representation for non-finite reals.
Report::Json real_or_null(double x) {
  return std::isfinite(x) ? Report::Json(x) : Report::Json(nullptr);
}

}  // namespace

void Report::write(std::ostream& out, Format format) const {
  if (format == Format::json) {
    write_json(out);
  } else {
    write_csv(out);
  }
}

void Report::write_json(std::ostream& out) const {
  Json doc = Json::object();
  doc["params"] = params_;
  doc["derived"] = derived_;
  Json results = results_;
  if (!series_.empty()) {
    Json series = Json::object();
    for (const Series& s : series_) {
      Json z = Json::array();
      Json v = Json::array();
      for (const auto& [x, y] : s.points) {
        z.push_back(real_or_null(x));
        v.push_back(real_or_null(y));
      }
      series[s.name] = Json{{"z", std::move(z)}, {"value", std::move(v)}};
    }
    results["series"] = std::move(series);
  }
  doc["results"] = std::move(results);
  out << doc.dump(2) << '\n';
}

void Report::write_csv(std::ostream& out) const {
  out << "section,key,z,value\r\n";
  flatten(out, "params", "", params_);
  flatten(out, "derived", "", derived_);
  flatten(out, "results", "", results_);
  for (const Series& s : series_) {
    const std::string name = csv_field(s.name);
    for (const auto& [x, y] : s.points) {
      out << name << ",," << format_real(x) << ',' << format_real(y) << "\r\n";
    }
  }
}

}  // namespace reservoir::cli
