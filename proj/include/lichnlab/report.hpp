#pragma once

// Flat key = value configuration files, deterministic JSON/CSV emission with
// 17-significant-digit floats, FNV config hashing and the report envelope.
//
// JSON is emitted by a purpose-built writer (insertion-ordered keys, fixed
// float formatting) so that identical configs produce byte-identical
// payloads; the timestamp lives outside the hashed payload.

#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "quad.hpp"

namespace lichnlab {

inline std::string format_real(real x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", (double)x);
  return buf;
}

// ---------------------------------------------------------------------------
// flat key = value config
// ---------------------------------------------------------------------------

struct RunConfig {
  std::map<std::string, std::string> kv;  // raw pairs, insertion by key order

  bool has(const std::string& k) const { return kv.count(k) != 0; }
  std::string str(const std::string& k, const std::string& dflt) const {
    auto it = kv.find(k);
    return it == kv.end() ? dflt : it->second;
  }
  real num(const std::string& k, real dflt) const {
    auto it = kv.find(k);
    if (it == kv.end()) return dflt;
    size_t pos = 0;
    real v;
    try {
      v = std::stold(it->second, &pos);
    } catch (const std::exception&) {
      throw std::runtime_error("config: malformed numeric for key '" + k +
                               "': " + it->second);
    }
    if (pos != it->second.size())
      throw std::runtime_error("config: malformed numeric for key '" + k +
                               "': " + it->second);
    return v;
  }
  int integer(const std::string& k, int dflt) const {
    return (int)num(k, dflt);
  }
};

inline std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// Grammar: one `key = value` per line; blank lines and lines starting with
// '#' ignored; parse errors carry the 1-based line number.
inline RunConfig parse_config(std::istream& in) {
  RunConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config: line " + std::to_string(lineno) +
                               ": expected key = value");
    const std::string k = trim(t.substr(0, eq));
    const std::string v = trim(t.substr(eq + 1));
    if (k.empty())
      throw std::runtime_error("config: line " + std::to_string(lineno) +
                               ": empty key");
    cfg.kv[k] = v;
  }
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  RunConfig cfg = parse_config(in);
  if (!cfg.has("n")) throw std::runtime_error("config: missing mandatory key 'n'");
  const int n = cfg.integer("n", 0);
  if (cfg.str("branch", n == 6 ? "n6" : "lcf") == "n6" && n != 6)
    throw std::runtime_error("config: branch n6 requires n = 6");
  if (n == 6 && !cfg.has("a0"))
    throw std::runtime_error("config: n = 6 requires key 'a0'");
  return cfg;
}

inline std::string serialize_config(const RunConfig& cfg) {
  std::ostringstream os;
  for (const auto& [k, v] : cfg.kv) os << k << " = " << v << "\n";
  return os.str();
}

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string config_hash(const RunConfig& cfg) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx",
                (unsigned long long)fnv1a(serialize_config(cfg)));
  return buf;
}

// ---------------------------------------------------------------------------
// deterministic JSON emission
// ---------------------------------------------------------------------------

// convenience: ordered key/value payload assembled from typed entries
struct Payload {
  struct Entry {
    std::string key;
    std::string json;  // pre-rendered value
  };
  std::vector<Entry> entries;

  void add(const std::string& k, real v) { entries.push_back({k, format_real(v)}); }
  void add(const std::string& k, int v) { entries.push_back({k, std::to_string(v)}); }
  void add(const std::string& k, bool v) {
    entries.push_back({k, v ? "true" : "false"});
  }
  void add(const std::string& k, const std::string& v) {
    entries.push_back({k, '"' + v + '"'});
  }
  void addArray(const std::string& k, const std::vector<real>& v) {
    std::string s = "[";
    for (size_t i = 0; i < v.size(); ++i) {
      if (i) s += ',';
      s += format_real(v[i]);
    }
    s += ']';
    entries.push_back({k, s});
  }
  void addRaw(const std::string& k, const std::string& json) {
    entries.push_back({k, json});
  }

  std::string render() const {
    std::string s = "{";
    for (size_t i = 0; i < entries.size(); ++i) {
      if (i) s += ',';
      s += '"' + entries[i].key + "\":" + entries[i].json;
    }
    s += '}';
    return s;
  }
};

struct ReportEnvelope {
  std::string command;
  std::string configHash;
  std::string toolVersion = "1.0.0";
  std::string payload;  // rendered JSON (hash-relevant, no timestamp)
  std::string csv;      // optional table
  bool pass = false;    // acceptance verdict attached to the command

  std::string renderJson(bool withTimestamp = true) const {
    std::string s = "{";
    s += "\"command\":\"" + command + "\",";
    s += "\"configHash\":\"" + configHash + "\",";
    s += "\"toolVersion\":\"" + toolVersion + "\",";
    if (withTimestamp) {
      char buf[32];
      const std::time_t t = std::time(nullptr);
      std::tm tm{};
      gmtime_r(&t, &tm);
      std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
      s += std::string("\"timestamp\":\"") + buf + "\",";
    }
    s += std::string("\"pass\":") + (pass ? "true" : "false") + ",";
    s += "\"payload\":" + payload + "}";
    return s;
  }
};

// stable file naming: command.config-hash.{json,csv}
inline std::vector<std::string> emit_report(const ReportEnvelope& env,
                                            const std::string& dir) {
  std::vector<std::string> paths;
  const std::string base = dir + "/" + env.command + "." + env.configHash;
  {
    std::ofstream out(base + ".json", std::ios::binary);
    if (!out) throw std::runtime_error("emit_report: cannot write to " + dir);
    out << env.renderJson() << "\n";
    paths.push_back(base + ".json");
  }
  if (!env.csv.empty()) {
    std::ofstream out(base + ".csv", std::ios::binary);
    if (!out) throw std::runtime_error("emit_report: cannot write to " + dir);
    out << env.csv;
    paths.push_back(base + ".csv");
  }
  return paths;
}

}  // namespace lichnlab
