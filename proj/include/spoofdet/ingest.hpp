#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spoofdet/orderbook.hpp"

namespace spoofdet {

/// A decoded update stream: optional boot snapshot followed by diffs.
struct UpdateStream {
  std::optional<BookSnapshot> snapshot;
  std::vector<L2Update> updates;
};

// Line formats. Field order is fixed so output is byte-stable:
//   {"seq":1,"ts":1583712000000,"side":"bid","price":"100.5","size":"2"}
// A boot snapshot may appear as the first record with seq 0:
//   {"seq":0,"ts":...,"type":"snapshot","bids":[["100","2"],...],"asks":[...]}
std::string format_update_json(const L2Update& u);
std::string format_snapshot_json(const BookSnapshot& s);

// Parsers validate invariants (price > 0, size >= 0, seq strictly
// increasing, ts non-decreasing) and throw DataError naming the line.
UpdateStream read_ndjson(std::istream& in);
UpdateStream read_ndjson(const std::filesystem::path& path);
void write_ndjson(std::ostream& out, const UpdateStream& stream);
void write_ndjson(const std::filesystem::path& path, const UpdateStream& stream);

// CSV with header "seq,ts,side,price,size"; no snapshot support.
UpdateStream read_csv(std::istream& in);
void write_csv(std::ostream& out, const std::vector<L2Update>& updates);

/// Picks the reader by extension (.csv, otherwise NDJSON).
UpdateStream read_stream(const std::filesystem::path& path);

}  // namespace spoofdet
