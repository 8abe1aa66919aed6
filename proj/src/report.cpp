#include "mra/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace mra {

std::string format_bits(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) v = 0.0;  // no "-0.000000000"
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9f", v);
  std::string s(buf);
  if (s == "-0.000000000") s = "0.000000000";
  return s;
}

std::string json_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string fnv1a_hex(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------- JsonWriter

void JsonWriter::newline() {
  out_ << '\n';
  for (std::size_t i = 0; i < stack_.size(); ++i) out_ << "  ";
}

void JsonWriter::before_value() {
  if (after_key_) {
    after_key_ = false;
    return;
  }
  if (!stack_.empty()) {
    if (!stack_.back().empty) out_ << ',';
    stack_.back().empty = false;
    newline();
  }
}

JsonWriter& JsonWriter::begin_object() {
  before_value();
  out_ << '{';
  stack_.push_back({false, true});
  return *this;
}

JsonWriter& JsonWriter::end_object() { return end_object_like('}'); }

JsonWriter& JsonWriter::begin_array() {
  before_value();
  out_ << '[';
  stack_.push_back({true, true});
  return *this;
}

JsonWriter& JsonWriter::end_array() { return end_object_like(']'); }

JsonWriter& JsonWriter::end_object_like(char close) {
  const bool empty = stack_.back().empty;
  stack_.pop_back();
  if (!empty) newline();
  out_ << close;
  return *this;
}

JsonWriter& JsonWriter::key(std::string_view k) {
  if (!stack_.back().empty) out_ << ',';
  stack_.back().empty = false;
  newline();
  out_ << '"' << json_escape(k) << "\": ";
  after_key_ = true;
  return *this;
}

JsonWriter& JsonWriter::value(std::string_view s) {
  before_value();
  out_ << '"' << json_escape(s) << '"';
  return *this;
}

JsonWriter& JsonWriter::value(bool b) {
  before_value();
  out_ << (b ? "true" : "false");
  return *this;
}

JsonWriter& JsonWriter::value(std::int64_t v) {
  before_value();
  out_ << v;
  return *this;
}

JsonWriter& JsonWriter::value(std::uint64_t v) {
  before_value();
  out_ << v;
  return *this;
}

JsonWriter& JsonWriter::null() {
  before_value();
  out_ << "null";
  return *this;
}

JsonWriter& JsonWriter::bits(double v) {
  if (!std::isfinite(v)) return null();
  before_value();
  out_ << format_bits(v);
  return *this;
}

JsonWriter& JsonWriter::number(double v) {
  if (!std::isfinite(v)) return null();
  before_value();
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out_.write(buf, res.ptr - buf);
  return *this;
}

JsonWriter& JsonWriter::field_bits(std::string_view k, double v) {
  key(k).bits(v);
  if (std::isinf(v)) key(std::string(k) + "_infinite").value(true);
  return *this;
}

void JsonWriter::finish() { out_ << '\n'; }

// ---------------------------------------------------------------- records

void write_json(JsonWriter& w, const DivergenceReport& r) {
  w.begin_object();
  w.field_bits("d_pq", r.d_pq);
  w.key("q_max").number(r.q_max);
  w.key("q_min").number(r.q_min);
  w.key("support_violations").value(r.support_violations);
  w.end_object();
}

void write_json(JsonWriter& w, const CertifiedValue& v) {
  w.begin_object();
  w.key("value").bits(v.value);
  w.key("radius").number(v.radius);
  w.end_object();
}

void write_json(JsonWriter& w, const RateReport& r) {
  w.begin_object();
  w.key("name").value(r.name);
  w.key("source_entropy").bits(r.source_entropy);
  w.key("divergence");
  write_json(w, r.divergence);
  w.field_bits("bound_eq14", r.bound_eq14);
  w.key("bound_eq15");
  r.bound_eq15 ? w.bits(*r.bound_eq15) : w.null();
  w.key("exact_HT");
  r.exact_HT ? write_json(w, *r.exact_HT) : void(w.null());
  w.key("exact_E_log_T");
  r.exact_E_log_T ? write_json(w, *r.exact_E_log_T) : void(w.null());
  if (r.achievable) w.key("achievable").bits(*r.achievable);
  if (r.converse) w.key("converse").bits(*r.converse);
  if (r.d_max) w.key("d_max").number(*r.d_max);
  if (r.empirical) {
    const auto& e = *r.empirical;
    w.key("empirical").begin_object();
    w.key("trials").value(static_cast<std::uint64_t>(e.trials));
    w.key("mean_log_T").bits(e.mean_log_T);
    w.key("mean_log_T_stderr").bits(e.mean_log_T_stderr);
    w.key("plugin_HT").bits(e.plugin_HT);
    w.key("plugin_HT_miller_madow").bits(e.plugin_HT_miller_madow);
    w.key("delta_bits_per_msg").bits(e.delta_bits_per_msg);
    w.key("delta_bits_stderr").bits(e.delta_bits_stderr);
    w.end_object();
  }
  w.key("notes").begin_array();
  for (const auto& n : r.notes) w.value(n);
  w.end_array();
  w.end_object();
}

void write_json(JsonWriter& w, const EmpiricalSummary& s) {
  w.begin_object();
  w.key("trials_run").value(static_cast<std::uint64_t>(s.trials_run));
  w.key("successes").value(static_cast<std::uint64_t>(s.successes));
  w.key("failures").value(static_cast<std::uint64_t>(s.failures()));
  w.key("budget_exhausted").value(static_cast<std::uint64_t>(s.budget_exhausted));
  w.key("unencodable").value(static_cast<std::uint64_t>(s.unencodable));
  w.key("mean_log_T").bits(s.mean_log_T);
  w.key("mean_log_T_stderr").bits(s.mean_log_T_stderr);
  w.key("mean_log_T_ci95").bits(s.mean_log_T_ci());
  w.key("plugin_HT").bits(s.plugin_HT);
  w.key("plugin_HT_miller_madow").bits(s.plugin_HT_miller_madow);
  w.key("plugin_HT_note").value("plug-in entropy is biased low; Miller-Madow adds (bins-1)/(2N ln 2)");
  w.key("mean_delta_bits").bits(s.mean_delta_bits);
  w.key("delta_bits_stderr").bits(s.delta_bits_stderr);
  w.key("mean_gamma_bits").bits(s.mean_gamma_bits);
  w.key("max_T").value(s.max_T);
  const auto h = s.histogram();
  w.key("histogram").begin_array();
  for (const auto& [t, c] : h.bins) {
    w.begin_array().value(t).value(c).end_array();
  }
  w.end_array();
  w.key("histogram_overflow").value(h.overflow);
  w.end_object();
}

void write_json(JsonWriter& w, const ChiSquareResult& r) {
  w.begin_object();
  w.key("statistic").number(r.statistic);
  w.key("bins").value(static_cast<std::uint64_t>(r.bins));
  w.key("dof").value(static_cast<std::uint64_t>(r.dof));
  w.key("p_value").number(r.p_value);
  w.end_object();
}

namespace {

std::string opt_bits(const std::optional<double>& v) { return v ? format_bits(*v) : ""; }

std::string shortest(double v) {
  if (!std::isfinite(v)) return format_bits(v);
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string rate_csv_header() {
  return "name,source_entropy,divergence,q_max,q_min,bound_eq14,bound_eq15,exact_HT,"
         "exact_HT_radius,exact_E_log_T,exact_E_log_T_radius,achievable,converse,d_max,"
         "mean_log_T,mean_log_T_stderr,plugin_HT,delta_bits_per_msg";
}

std::string rate_csv_row(const RateReport& r) {
  std::ostringstream o;
  o << csv_field(r.name) << ',' << format_bits(r.source_entropy) << ','
    << format_bits(r.divergence.d_pq) << ',' << shortest(r.divergence.q_max) << ','
    << shortest(r.divergence.q_min) << ',' << format_bits(r.bound_eq14) << ','
    << opt_bits(r.bound_eq15) << ',';
  if (r.exact_HT) {
    o << format_bits(r.exact_HT->value) << ',' << shortest(r.exact_HT->radius) << ',';
  } else {
    o << ",,";
  }
  if (r.exact_E_log_T) {
    o << format_bits(r.exact_E_log_T->value) << ',' << shortest(r.exact_E_log_T->radius) << ',';
  } else {
    o << ",,";
  }
  o << opt_bits(r.achievable) << ',' << opt_bits(r.converse) << ','
    << (r.d_max ? shortest(*r.d_max) : "") << ',';
  if (r.empirical) {
    o << format_bits(r.empirical->mean_log_T) << ',' << format_bits(r.empirical->mean_log_T_stderr)
      << ',' << format_bits(r.empirical->plugin_HT) << ','
      << format_bits(r.empirical->delta_bits_per_msg);
  } else {
    o << ",,,";
  }
  return o.str();
}

void write_histogram_csv(std::ostream& out, const EmpiricalSummary& s,
                         std::string_view case_name) {
  const auto h = s.histogram();
  for (const auto& [t, c] : h.bins) {
    out << csv_field(case_name) << ',' << t << ',' << c << '\n';
  }
  out << csv_field(case_name) << ",overflow," << h.overflow << '\n';
}

}  // namespace mra
