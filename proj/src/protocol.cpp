#include "wavekit/protocol.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>

#include <json.hpp>

namespace wavekit {

namespace {

using nlohmann::json;

void append_double(std::string& buf, double v) {
  // "-0" would be parsed back as the integer zero, dropping the sign bit.
  if (v == 0.0 && std::signbit(v)) {
    buf += "-0.0";
    return;
  }
  char tmp[32];
  const auto res = std::to_chars(tmp, tmp + sizeof(tmp), v);
  buf.append(tmp, res.ptr);
}

void append_vector(std::string& buf, const VectorXd& v) {
  buf += '[';
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) buf += ',';
    append_double(buf, v[i]);
  }
  buf += ']';
}

void check_finite(const VectorXd& v, const char* field) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw DecodeError("non-finite entry at index " + std::to_string(i), field);
    }
  }
}

VectorXd vector_field(const json& j, const char* field, Eigen::Index expected) {
  const auto it = j.find(field);
  if (it == j.end() || !it->is_array()) {
    throw DecodeError("missing or non-array value", field);
  }
  if (static_cast<Eigen::Index>(it->size()) != expected) {
    throw DecodeError("length " + std::to_string(it->size()) +
                          " does not match p = " + std::to_string(expected),
                      field);
  }
  VectorXd out(expected);
  Eigen::Index i = 0;
  for (const auto& e : *it) {
    if (!e.is_number()) throw DecodeError("non-numeric entry", field);
    out[i++] = e.get<double>();
  }
  check_finite(out, field);
  return out;
}

long int_field(const json& j, const char* field) {
  const auto it = j.find(field);
  if (it == j.end() || !it->is_number_integer()) {
    throw DecodeError("missing or non-integer value", field);
  }
  return it->get<long>();
}

}  // namespace

LocalSummary WireMessage::to_summary() const {
  return LocalSummary{worker_id, n_j, beta_hat, lambda_diag};
}

WireMessage WireMessage::from_summary(const LocalSummary& s) {
  WireMessage m;
  m.version = kWireVersion;
  m.worker_id = s.worker_id;
  m.n_j = s.n_j;
  m.p = static_cast<int>(s.beta_hat.size());
  m.beta_hat = s.beta_hat;
  m.lambda_diag = s.lambda_diag;
  return m;
}

std::string encode_message(const WireMessage& m) {
  if (m.beta_hat.size() != m.p || m.lambda_diag.size() != m.p) {
    throw DimensionError("wire message vectors do not match p");
  }
  if (!m.beta_hat.allFinite() || !m.lambda_diag.allFinite()) {
    throw DomainError("wire message vectors must be finite");
  }
  std::string out = "{\"version\":" + std::to_string(m.version) +
                    ",\"worker_id\":" + std::to_string(m.worker_id) +
                    ",\"n\":" + std::to_string(m.n_j) +
                    ",\"p\":" + std::to_string(m.p) + ",\"beta\":";
  append_vector(out, m.beta_hat);
  out += ",\"lambda_diag\":";
  append_vector(out, m.lambda_diag);
  out += "}\n";
  return out;
}

std::string encode_summary(const LocalSummary& s) {
  return encode_message(WireMessage::from_summary(s));
}

WireMessage decode_message(std::string_view line) {
  // Trim the trailing newline, if present.
  while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) {
    line.remove_suffix(1);
  }
  if (line.empty()) throw DecodeError("truncated message", "message");
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw DecodeError("truncated message or malformed JSON", "message");
  }
  WireMessage m;
  m.version = static_cast<int>(int_field(j, "version"));
  if (m.version != kWireVersion) {
    throw DecodeError("unsupported version " + std::to_string(m.version) +
                          " (expected " + std::to_string(kWireVersion) + ")",
                      "version");
  }
  m.worker_id = static_cast<int>(int_field(j, "worker_id"));
  m.n_j = int_field(j, "n");
  if (m.n_j < 1) throw DecodeError("sample count must be positive", "n");
  m.p = static_cast<int>(int_field(j, "p"));
  if (m.p < 1) throw DecodeError("dimension must be positive", "p");
  m.beta_hat = vector_field(j, "beta", m.p);
  m.lambda_diag = vector_field(j, "lambda_diag", m.p);
  return m;
}

LocalSummary decode_summary(std::string_view line) {
  return decode_message(line).to_summary();
}

void write_summaries(std::ostream& os, const std::vector<LocalSummary>& summaries) {
  for (const auto& s : summaries) os << encode_summary(s);
}

std::vector<LocalSummary> read_summaries(std::istream& is) {
  std::vector<LocalSummary> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    out.push_back(decode_summary(line));
  }
  return out;
}

}  // namespace wavekit
