#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "kacrice/covariance.hpp"
#include "kacrice/estimate.hpp"
#include "kacrice/rice.hpp"
#include "kacrice/signal.hpp"
#include "kacrice/special.hpp"
#include "kacrice/theorem2.hpp"

namespace kacrice {

inline constexpr int kSchemaVersion = 1;

/// %.17g, with "inf", "-inf" and "nan" spelled out.
std::string format_number(double x);

/// Plain number when it fits a double, otherwise "<mantissa>e<exponent>" from the log.
std::string format_log(LogValue v);

/// Finite values as JSON numbers, others as strings.
nlohmann::json json_number(double x);
nlohmann::json json_log(LogValue v);

/// RFC 4180 table: fields with commas, quotes or line breaks are quoted.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
  void add(std::vector<std::string> row);
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

std::string csv_field(const std::string& s);

nlohmann::json to_json(const HypothesisReport& h);
nlohmann::json to_json(const SnrReport& r);
nlohmann::json to_json(const BoundChain& b);
nlohmann::json to_json(const BoundConstants& c);
nlohmann::json to_json(const McEstimate& e);
nlohmann::json to_json(const DecayRow& r);

}  // namespace kacrice
