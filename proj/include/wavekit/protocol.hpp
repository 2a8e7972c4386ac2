#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "wavekit/worker.hpp"

namespace wavekit {

inline constexpr int kWireVersion = 1;

// The one-line JSON embodiment of a LocalSummary. Real entries are written as
// shortest round-trip decimals, so decode(encode(m)) reproduces every binary64
// bit pattern (zeros, subnormals and extreme exponents included).
struct WireMessage {
  int version = kWireVersion;
  int worker_id = 0;
  long n_j = 0;
  int p = 0;
  VectorXd beta_hat;
  VectorXd lambda_diag;

  LocalSummary to_summary() const;
  static WireMessage from_summary(const LocalSummary& s);
};

// One newline-terminated JSON object with keys
// version, worker_id, n, p, beta, lambda_diag.
std::string encode_message(const WireMessage& m);
std::string encode_summary(const LocalSummary& s);

// Throws DecodeError naming the offending field on version mismatch, length
// mismatch, non-finite entries, or truncated/malformed input.
WireMessage decode_message(std::string_view line);
LocalSummary decode_summary(std::string_view line);

void write_summaries(std::ostream& os, const std::vector<LocalSummary>& summaries);
std::vector<LocalSummary> read_summaries(std::istream& is);

}  // namespace wavekit
