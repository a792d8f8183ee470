#ifndef IBSIM_REPORT_HPP
#define IBSIM_REPORT_HPP

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ibsim/configuration.hpp"
#include "ibsim/errors.hpp"

namespace ibsim {

inline constexpr int kReportSchemaVersion = 1;

// Sorted key=value report. Ensemble statistics are stored as the five
// aggregate keys <name>.count/.sum/.sumsq/.min/.max, which merge
// associatively, so worker count and merge order never change the result
// beyond float re-association.
class Report {
 public:
  Report() { set_text("report_schema", std::to_string(kReportSchemaVersion)); }

  void set_text(const std::string& key, const std::string& value) { kv_[key] = value; }

  void set_scalar(const std::string& key, double value) { kv_[key] = format_double(value); }

  void add_sample(const std::string& name, double x) {
    bump(name + ".count", 1.0);
    bump(name + ".sum", x);
    bump(name + ".sumsq", x * x);
    extremum(name + ".min", x, true);
    extremum(name + ".max", x, false);
  }

  bool has(const std::string& key) const { return kv_.count(key) != 0; }

  const std::string& text(const std::string& key) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) throw SchemaMismatch("report key missing: " + key);
    return it->second;
  }

  double scalar(const std::string& key) const { return std::strtod(text(key).c_str(), nullptr); }

  double sample_mean(const std::string& name) const {
    const double n = scalar(name + ".count");
    if (n <= 0) throw SchemaMismatch("report sample empty: " + name);
    return scalar(name + ".sum") / n;
  }

  std::string serialize() const {
    std::string out;
    for (const auto& [k, v] : kv_) {
      out += k;
      out += " = ";
      out += v;
      out += '\n';
    }
    return out;
  }

  static Report parse(const std::string& text) {
    Report r;
    r.kv_.clear();
    std::size_t pos = 0;
    while (pos < text.size()) {
      std::size_t e = text.find('\n', pos);
      if (e == std::string::npos) e = text.size();
      const std::string line = text.substr(pos, e - pos);
      pos = e + 1;
      if (line.empty() || line[0] == '#') continue;
      const std::size_t sep = line.find(" = ");
      if (sep == std::string::npos) throw IoError("report: bad line '" + line + "'");
      r.kv_[line.substr(0, sep)] = line.substr(sep + 3);
    }
    return r;
  }

  // Associative, order-independent merge: aggregate keys combine, plain
  // keys must agree.
  static Report merge(const Report& a, const Report& b) {
    if (a.text("report_schema") != b.text("report_schema"))
      throw SchemaMismatch("report schema versions differ");
    Report out = a;
    for (const auto& [k, v] : b.kv_) {
      auto it = out.kv_.find(k);
      if (it == out.kv_.end()) {
        out.kv_[k] = v;
        continue;
      }
      if (ends_with(k, ".count") || ends_with(k, ".sum") || ends_with(k, ".sumsq")) {
        out.kv_[k] = format_double(std::strtod(it->second.c_str(), nullptr) +
                                   std::strtod(v.c_str(), nullptr));
      } else if (ends_with(k, ".min")) {
        out.kv_[k] = format_double(std::min(std::strtod(it->second.c_str(), nullptr),
                                            std::strtod(v.c_str(), nullptr)));
      } else if (ends_with(k, ".max")) {
        out.kv_[k] = format_double(std::max(std::strtod(it->second.c_str(), nullptr),
                                            std::strtod(v.c_str(), nullptr)));
      } else if (it->second != v) {
        throw SchemaMismatch("report merge conflict on plain key: " + k);
      }
    }
    return out;
  }

 private:
  static bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
  }

  void bump(const std::string& key, double delta) {
    auto it = kv_.find(key);
    const double cur = it == kv_.end() ? 0.0 : std::strtod(it->second.c_str(), nullptr);
    kv_[key] = format_double(cur + delta);
  }

  void extremum(const std::string& key, double x, bool is_min) {
    auto it = kv_.find(key);
    if (it == kv_.end()) {
      kv_[key] = format_double(x);
      return;
    }
    const double cur = std::strtod(it->second.c_str(), nullptr);
    kv_[key] = format_double(is_min ? std::min(cur, x) : std::max(cur, x));
  }

  std::map<std::string, std::string> kv_;
};

}  // namespace ibsim

#endif  // IBSIM_REPORT_HPP
