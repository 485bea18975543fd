#include "odekit/monitor.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>

namespace odekit {

namespace {

bool same_double(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

std::vector<std::string> split_fields(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw Error("monitor parse: bad number '" + s + "'");
  return v;
}

std::string events_field(const std::vector<int>& ev) {
  std::string s;
  for (std::size_t i = 0; i < ev.size(); ++i) {
    if (i) s += ';';
    s += std::to_string(ev[i]);
  }
  return s;
}

std::string json_double(double v) { return std::isfinite(v) ? format_double(v) : "null"; }

double from_json(const nlohmann::json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

}  // namespace

bool MonitorRecord::operator==(const MonitorRecord& o) const {
  if (step_index != o.step_index || !same_double(t, o.t) || !same_double(dt, o.dt) || accepted != o.accepted ||
      !same_double(werr, o.werr) || newton_iters != o.newton_iters || linear_iters != o.linear_iters ||
      event_flags != o.event_flags || u_snapshot.has_value() != o.u_snapshot.has_value())
    return false;
  if (u_snapshot) {
    if (u_snapshot->size() != o.u_snapshot->size()) return false;
    for (Eigen::Index i = 0; i < u_snapshot->size(); ++i)
      if (!same_double((*u_snapshot)[i], (*o.u_snapshot)[i])) return false;
  }
  return true;
}

MonitorFormat monitor_format_for_path(const std::string& path) {
  auto ends = [&](const std::string& suf) {
    return path.size() >= suf.size() && path.compare(path.size() - suf.size(), suf.size(), suf) == 0;
  };
  if (ends(".csv")) return MonitorFormat::CSV;
  if (ends(".jsonl")) return MonitorFormat::JSONL;
  throw ConfigError("monitor path must end in .csv or .jsonl: " + path);
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_header(std::size_t ncomponents) {
  std::string h = "step,t,dt,accepted,werr,newton_iters,linear_iters,events";
  for (std::size_t i = 0; i < ncomponents; ++i) h += ",u" + std::to_string(i);
  return h;
}

std::string format_csv_row(const MonitorRecord& r, std::size_t ncomponents) {
  std::string s = std::to_string(r.step_index) + ',' + format_double(r.t) + ',' + format_double(r.dt) + ',' +
                  (r.accepted ? "1" : "0") + ',' + format_double(r.werr) + ',' + std::to_string(r.newton_iters) +
                  ',' + std::to_string(r.linear_iters) + ',' + events_field(r.event_flags);
  if (r.u_snapshot) {
    for (Eigen::Index i = 0; i < r.u_snapshot->size(); ++i) s += ',' + format_double((*r.u_snapshot)[i]);
  } else {
    s.append(ncomponents, ',');
  }
  return s;
}

std::string format_jsonl(const MonitorRecord& r) {
  std::string s = "{\"step\":" + std::to_string(r.step_index) + ",\"t\":" + json_double(r.t) +
                  ",\"dt\":" + json_double(r.dt) + ",\"accepted\":" + (r.accepted ? "true" : "false") +
                  ",\"werr\":" + json_double(r.werr) + ",\"newton_iters\":" + std::to_string(r.newton_iters) +
                  ",\"linear_iters\":" + std::to_string(r.linear_iters) + ",\"events\":[";
  for (std::size_t i = 0; i < r.event_flags.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(r.event_flags[i]);
  }
  s += ']';
  if (r.u_snapshot)
    for (Eigen::Index i = 0; i < r.u_snapshot->size(); ++i)
      s += ",\"u" + std::to_string(i) + "\":" + json_double((*r.u_snapshot)[i]);
  s += '}';
  return s;
}

std::string emit(const std::vector<MonitorRecord>& records, MonitorFormat fmt, std::size_t ncomponents) {
  std::string out;
  if (fmt == MonitorFormat::CSV) {
    out = csv_header(ncomponents) + '\n';
    for (const auto& r : records) out += format_csv_row(r, ncomponents) + '\n';
  } else {
    for (const auto& r : records) out += format_jsonl(r) + '\n';
  }
  return out;
}

std::vector<MonitorRecord> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error("monitor parse: missing CSV header");
  const auto header = split_fields(line, ',');
  if (header.size() < 8) throw Error("monitor parse: short CSV header");
  const std::size_t ncomp = header.size() - 8;
  std::vector<MonitorRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_fields(line, ',');
    if (f.size() != header.size()) throw Error("monitor parse: row has wrong column count");
    MonitorRecord r;
    r.step_index = std::stol(f[0]);
    r.t = parse_double(f[1]);
    r.dt = parse_double(f[2]);
    r.accepted = f[3] == "1";
    r.werr = parse_double(f[4]);
    r.newton_iters = std::stoi(f[5]);
    r.linear_iters = std::stoi(f[6]);
    if (!f[7].empty())
      for (const auto& e : split_fields(f[7], ';')) r.event_flags.push_back(std::stoi(e));
    if (ncomp > 0 && !f[8].empty()) {
      Vector u(static_cast<Eigen::Index>(ncomp));
      for (std::size_t i = 0; i < ncomp; ++i) u[static_cast<Eigen::Index>(i)] = parse_double(f[8 + i]);
      r.u_snapshot = std::move(u);
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<MonitorRecord> parse_jsonl(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<MonitorRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    MonitorRecord r;
    r.step_index = j.at("step").get<long>();
    r.t = from_json(j.at("t"));
    r.dt = from_json(j.at("dt"));
    r.accepted = j.at("accepted").get<bool>();
    r.werr = from_json(j.at("werr"));
    r.newton_iters = j.at("newton_iters").get<int>();
    r.linear_iters = j.at("linear_iters").get<int>();
    r.event_flags = j.at("events").get<std::vector<int>>();
    std::size_t n = 0;
    while (j.contains("u" + std::to_string(n))) ++n;
    if (n > 0) {
      Vector u(static_cast<Eigen::Index>(n));
      for (std::size_t i = 0; i < n; ++i) u[static_cast<Eigen::Index>(i)] = from_json(j.at("u" + std::to_string(i)));
      r.u_snapshot = std::move(u);
    }
    out.push_back(std::move(r));
  }
  return out;
}

StreamSink::StreamSink(std::ostream& os, MonitorFormat fmt, std::size_t ncomponents)
    : os_(os), fmt_(fmt), ncomp_(ncomponents) {}

StreamSink::~StreamSink() { finish(); }

bool StreamSink::write(const MonitorRecord& r) {
  if (fmt_ == MonitorFormat::CSV) {
    if (!header_done_) {
      os_ << csv_header(ncomp_) << '\n';
      header_done_ = true;
    }
    os_ << format_csv_row(r, ncomp_) << '\n';
  } else {
    os_ << format_jsonl(r) << '\n';
  }
  return static_cast<bool>(os_);
}

void StreamSink::finish() {
  if (fmt_ == MonitorFormat::CSV && !header_done_) {
    os_ << csv_header(ncomp_) << '\n';
    header_done_ = true;
  }
  os_.flush();
}

void AttachedMonitor::offer(MonitorRecord r, const Vector& state) {
  const long k = attempts++;
  if (failed || !sink) return;
  if (options.every_k > 1 && k % options.every_k != 0) return;
  if (options.snapshot && r.accepted) r.u_snapshot = state;
  try {
    if (!sink->write(r)) failed = true;
  } catch (const std::exception&) {
    failed = true;
  }
}

}  // namespace odekit
