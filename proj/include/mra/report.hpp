#pragma once

// Stable, field-ordered report output. Bits values are printed with nine
// fractional digits; non-finite values become null in JSON and
// "inf" / "-inf" / "nan" in CSV.

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "mra/analysis.hpp"
#include "mra/montecarlo.hpp"

namespace mra {

class JsonWriter {
 public:
  explicit JsonWriter(std::ostream& out) : out_(out) {}

  JsonWriter& begin_object();
  JsonWriter& end_object();
  JsonWriter& begin_array();
  JsonWriter& end_array();
  JsonWriter& key(std::string_view k);

  JsonWriter& value(std::string_view s);
  JsonWriter& value(const char* s) { return value(std::string_view(s)); }
  JsonWriter& value(const std::string& s) { return value(std::string_view(s)); }
  JsonWriter& value(bool b);
  JsonWriter& value(std::int64_t v);
  JsonWriter& value(std::uint64_t v);
  JsonWriter& value(int v) { return value(static_cast<std::int64_t>(v)); }
  JsonWriter& value(unsigned v) { return value(static_cast<std::uint64_t>(v)); }
  JsonWriter& null();
  // Fixed nine fractional digits; null when not finite.
  JsonWriter& bits(double v);
  // Shortest round-trip form; null when not finite.
  JsonWriter& number(double v);

  // key(k).bits(v), plus k + "_infinite": true when v is +inf.
  JsonWriter& field_bits(std::string_view k, double v);

  // Terminates the document with a newline.
  void finish();

 private:
  void before_value();
  JsonWriter& end_object_like(char close);
  void newline();

  std::ostream& out_;
  struct Frame {
    bool array;
    bool empty;
  };
  std::vector<Frame> stack_;
  bool after_key_ = false;
};

std::string format_bits(double v);
std::string json_escape(std::string_view s);
// RFC 4180: quote when the field holds a comma, quote or line break.
std::string csv_field(std::string_view s);

// 64-bit FNV-1a, rendered as 16 hex digits.
std::string fnv1a_hex(std::string_view data);

void write_json(JsonWriter& w, const DivergenceReport& r);
void write_json(JsonWriter& w, const CertifiedValue& v);
void write_json(JsonWriter& w, const RateReport& r);
void write_json(JsonWriter& w, const EmpiricalSummary& s);
void write_json(JsonWriter& w, const ChiSquareResult& r);

std::string rate_csv_header();
std::string rate_csv_row(const RateReport& r);

// One line per kept T value plus an "overflow" line.
void write_histogram_csv(std::ostream& out, const EmpiricalSummary& s,
                         std::string_view case_name);

}  // namespace mra
