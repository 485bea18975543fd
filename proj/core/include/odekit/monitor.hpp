#pragma once

#include "odekit/types.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace odekit {

struct MonitorRecord {
  long step_index = 0;
  double t = 0.0;
  double dt = 0.0;
  bool accepted = false;
  double werr = -1.0;  // -1 when no estimate was computed
  int newton_iters = 0;
  int linear_iters = 0;
  std::vector<int> event_flags;
  std::optional<Vector> u_snapshot;
  double next_dt = 0.0;  // controller proposal, not emitted

  bool operator==(const MonitorRecord& o) const;
};

enum class MonitorFormat { CSV, JSONL };
MonitorFormat monitor_format_for_path(const std::string& path);

class MonitorSink {
 public:
  virtual ~MonitorSink() = default;
  /** @brief Returns false when the sink can no longer accept records. */
  virtual bool write(const MonitorRecord& r) = 0;
};

class CollectingSink : public MonitorSink {
 public:
  bool write(const MonitorRecord& r) override {
    records.push_back(r);
    return true;
  }
  std::vector<MonitorRecord> records;
};

/** @brief Streams CSV or JSONL. The CSV header is written before the first record. */
class StreamSink : public MonitorSink {
 public:
  StreamSink(std::ostream& os, MonitorFormat fmt, std::size_t ncomponents);
  ~StreamSink() override;
  bool write(const MonitorRecord& r) override;
  void finish();

 private:
  std::ostream& os_;
  MonitorFormat fmt_;
  std::size_t ncomp_;
  bool header_done_ = false;
};

struct MonitorOptions {
  int every_k = 1;
  bool snapshot = false;
};

struct AttachedMonitor {
  MonitorSink* sink = nullptr;
  MonitorOptions options;
  long attempts = 0;
  bool failed = false;

  void offer(MonitorRecord r, const Vector& state);
};

std::string csv_header(std::size_t ncomponents);
std::string format_csv_row(const MonitorRecord& r, std::size_t ncomponents = 0);
std::string format_jsonl(const MonitorRecord& r);
std::string emit(const std::vector<MonitorRecord>& records, MonitorFormat fmt, std::size_t ncomponents);
std::vector<MonitorRecord> parse_csv(const std::string& text);
std::vector<MonitorRecord> parse_jsonl(const std::string& text);

std::string format_double(double v);

}  // namespace odekit
