#include "spoofdet/ingest.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "spoofdet/errors.hpp"

namespace spoofdet {

namespace {

using nlohmann::json;

DataError line_error(std::size_t line_no, const std::string& what) {
  return DataError("line " + std::to_string(line_no) + ": " + what);
}

Side parse_side(std::string_view s, std::size_t line_no) {
  if (s == "bid") return Side::Bid;
  if (s == "ask") return Side::Ask;
  throw line_error(line_no, "side must be \"bid\" or \"ask\"");
}

class StreamValidator {
 public:
  void check(const L2Update& u, std::size_t line_no) {
    if (!u.price.positive()) throw line_error(line_no, "price must be > 0");
    if (u.size.raw() < 0) throw line_error(line_no, "size must be >= 0");
    if (have_prev_) {
      if (u.seq <= prev_seq_) throw line_error(line_no, "seq not strictly increasing");
      if (u.ts < prev_ts_) throw line_error(line_no, "ts decreased");
    }
    have_prev_ = true;
    prev_seq_ = u.seq;
    prev_ts_ = u.ts;
  }
  void seed(std::int64_t seq, std::int64_t ts) {
    have_prev_ = true;
    prev_seq_ = seq;
    prev_ts_ = ts;
  }

 private:
  bool have_prev_ = false;
  std::int64_t prev_seq_ = 0;
  std::int64_t prev_ts_ = 0;
};

std::vector<Level> parse_levels(const json& arr, std::size_t line_no) {
  if (!arr.is_array()) throw line_error(line_no, "snapshot levels must be an array");
  std::vector<Level> out;
  out.reserve(arr.size());
  for (const json& lv : arr) {
    if (!lv.is_array() || lv.size() != 2 || !lv[0].is_string() || !lv[1].is_string()) {
      throw line_error(line_no, "snapshot level must be [\"price\",\"size\"]");
    }
    Level l{Price::parse(lv[0].get<std::string>()), Volume::parse(lv[1].get<std::string>())};
    if (!l.price.positive() || l.size.raw() < 0) throw line_error(line_no, "bad snapshot level");
    out.push_back(l);
  }
  return out;
}

std::string level_array(const std::vector<Level>& levels) {
  std::string s = "[";
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (i) s += ',';
    s += "[\"" + levels[i].price.to_string() + "\",\"" + levels[i].size.to_string() + "\"]";
  }
  s += ']';
  return s;
}

}  // namespace

std::string format_update_json(const L2Update& u) {
  std::string s;
  s.reserve(96);
  s += "{\"seq\":";
  s += std::to_string(u.seq);
  s += ",\"ts\":";
  s += std::to_string(u.ts);
  s += ",\"side\":\"";
  s += to_string(u.side);
  s += "\",\"price\":\"";
  s += u.price.to_string();
  s += "\",\"size\":\"";
  s += u.size.to_string();
  s += "\"}";
  return s;
}

std::string format_snapshot_json(const BookSnapshot& snap) {
  return "{\"seq\":0,\"ts\":" + std::to_string(snap.ts) + ",\"type\":\"snapshot\",\"bids\":" +
         level_array(snap.bids) + ",\"asks\":" + level_array(snap.asks) + "}";
}

UpdateStream read_ndjson(std::istream& in) {
  UpdateStream out;
  StreamValidator validator;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw line_error(line_no, std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) throw line_error(line_no, "record must be an object");
    try {
      if (j.contains("type")) {
        if (j.at("type") != "snapshot") throw line_error(line_no, "unknown record type");
        if (!out.updates.empty() || out.snapshot) {
          throw line_error(line_no, "snapshot only allowed as the first record");
        }
        if (j.at("seq").get<std::int64_t>() != 0) throw line_error(line_no, "snapshot must have seq 0");
        BookSnapshot snap;
        snap.ts = j.at("ts").get<std::int64_t>();
        snap.bids = parse_levels(j.at("bids"), line_no);
        snap.asks = parse_levels(j.at("asks"), line_no);
        validator.seed(0, snap.ts);
        out.snapshot = std::move(snap);
        continue;
      }
      L2Update u;
      u.seq = j.at("seq").get<std::int64_t>();
      u.ts = j.at("ts").get<std::int64_t>();
      u.side = parse_side(j.at("side").get<std::string>(), line_no);
      u.price = Price::parse(j.at("price").get<std::string>());
      u.size = Volume::parse(j.at("size").get<std::string>());
      validator.check(u, line_no);
      out.updates.push_back(u);
    } catch (const json::exception& e) {
      throw line_error(line_no, std::string("bad field: ") + e.what());
    } catch (const DataError& e) {
      const std::string msg = e.what();
      if (msg.rfind("line ", 0) == 0) throw;
      throw line_error(line_no, msg);
    }
  }
  return out;
}

UpdateStream read_ndjson(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return read_ndjson(in);
}

void write_ndjson(std::ostream& out, const UpdateStream& stream) {
  if (stream.snapshot) out << format_snapshot_json(*stream.snapshot) << '\n';
  for (const L2Update& u : stream.updates) out << format_update_json(u) << '\n';
}

void write_ndjson(const std::filesystem::path& path, const UpdateStream& stream) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  write_ndjson(out, stream);
}

UpdateStream read_csv(std::istream& in) {
  UpdateStream out;
  StreamValidator validator;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != "seq,ts,side,price,size") throw line_error(line_no, "expected header seq,ts,side,price,size");
      header_seen = true;
      continue;
    }
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cols.push_back(cell);
    if (cols.size() != 5) throw line_error(line_no, "expected 5 columns");
    try {
      L2Update u;
      std::size_t pos = 0;
      u.seq = std::stoll(cols[0], &pos);
      if (pos != cols[0].size()) throw line_error(line_no, "bad seq");
      u.ts = std::stoll(cols[1], &pos);
      if (pos != cols[1].size()) throw line_error(line_no, "bad ts");
      u.side = parse_side(cols[2], line_no);
      u.price = Price::parse(cols[3]);
      u.size = Volume::parse(cols[4]);
      validator.check(u, line_no);
      out.updates.push_back(u);
    } catch (const std::logic_error&) {
      throw line_error(line_no, "bad integer field");
    } catch (const DataError& e) {
      const std::string msg = e.what();
      if (msg.rfind("line ", 0) == 0) throw;
      throw line_error(line_no, msg);
    }
  }
  return out;
}

void write_csv(std::ostream& out, const std::vector<L2Update>& updates) {
  out << "seq,ts,side,price,size\n";
  for (const L2Update& u : updates) {
    out << u.seq << ',' << u.ts << ',' << to_string(u.side) << ',' << u.price.to_string() << ','
        << u.size.to_string() << '\n';
  }
}

UpdateStream read_stream(const std::filesystem::path& path) {
  if (path.extension() == ".csv") {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    return read_csv(in);
  }
  return read_ndjson(path);
}

}  // namespace spoofdet
