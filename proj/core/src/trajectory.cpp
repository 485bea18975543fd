#include "odekit/sensitivity.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace odekit {

namespace {

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
    if (r > (1ULL << 40)) return r;
  }
  return r;
}

void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

bool get_u64(std::istream& is, std::uint64_t& v) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) return false;
  v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return true;
}

}  // namespace

Trajectory::Trajectory(TrajectoryPolicy policy, std::size_t max_checkpoints)
    : policy_(policy), capacity_(max_checkpoints) {
  if (policy_ == TrajectoryPolicy::Binomial && capacity_ < 1)
    throw ConfigError("binomial trajectory needs at least one checkpoint");
}

void Trajectory::store(TrajectoryRecord r) {
  const long k = r.step;
  stored_.insert_or_assign(k, std::move(r));
  max_retained_ = std::max(max_retained_, stored_.size());
}

void Trajectory::thin() {
  while (stored_.size() > capacity_ && stored_.size() > 1) {
    stride_ *= 2;
    for (auto it = stored_.begin(); it != stored_.end();) {
      if (it->first != 0 && it->first % static_cast<long>(stride_) != 0)
        it = stored_.erase(it);
      else
        ++it;
    }
  }
}

void Trajectory::set(long step, double t, const Vector& u, const std::optional<Vector>& udot, const StageData& sd) {
  if (step != static_cast<long>(times_.size()))
    throw Error("trajectory: expected step " + std::to_string(times_.size()) + ", got " + std::to_string(step));
  if (step > 0 && !(t >= times_.back())) throw Error("trajectory: times must not decrease");
  times_.push_back(t);
  dts_.push_back(step == 0 ? 0.0 : sd.dt);
  if (policy_ == TrajectoryPolicy::StoreAll) {
    store(TrajectoryRecord{step, t, u, udot, sd});
    return;
  }
  if (step % static_cast<long>(stride_) != 0) return;
  // Count the new entry against the budget before it is inserted.
  stored_.emplace(step, TrajectoryRecord{step, t, u, udot, sd});
  thin();
  max_retained_ = std::max(max_retained_, stored_.size());
}

TrajectoryRecord Trajectory::get(long step, const Replayer& replay) {
  if (step < 0 || step > last_step()) throw Error("trajectory: step " + std::to_string(step) + " was not recorded");
  if (policy_ == TrajectoryPolicy::Binomial) stored_.erase(stored_.upper_bound(step), stored_.end());
  auto it = stored_.upper_bound(step);
  if (it == stored_.begin()) throw Error("trajectory: no checkpoint at or before step " + std::to_string(step));
  --it;
  if (it->first == step) return it->second;
  if (!replay) throw Error("trajectory: step " + std::to_string(step) + " needs recomputation but no replayer given");

  const long j = it->first;
  TrajectoryRecord cur = it->second;
  long place = -1;
  const std::size_t used = stored_.size();
  if (used < capacity_) {
    const std::uint64_t f = capacity_ - used;
    const auto d = static_cast<std::uint64_t>(step - j);
    std::uint64_t r = 1;
    while (binomial(f + r, f) < d) ++r;
    place = std::max(j + 1, step - static_cast<long>(binomial(f - 1 + r, f - 1)));
    if (place >= step) place = -1;
  }
  for (long i = j; i < step; ++i) {
    cur = replay(cur, dt(i));
    ++recomputations_;
    if (cur.step != i + 1 || cur.t != times_[static_cast<std::size_t>(i + 1)])
      throw Error("trajectory: replay diverged from the forward run at step " + std::to_string(i + 1));
    if (cur.step == place) store(cur);
  }
  return cur;
}

void Trajectory::spill(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("trajectory: cannot open " + path);
  for (const auto& [k, r] : stored_) {
    put_u64(os, static_cast<std::uint64_t>(k));
    put_u64(os, std::bit_cast<std::uint64_t>(r.t));
    put_u64(os, static_cast<std::uint64_t>(r.u.size()));
    for (Eigen::Index i = 0; i < r.u.size(); ++i) put_u64(os, std::bit_cast<std::uint64_t>(r.u[i]));
  }
  if (!os) throw Error("trajectory: write failed for " + path);
}

std::vector<TrajectoryRecord> Trajectory::read_spill(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("trajectory: cannot open " + path);
  std::vector<TrajectoryRecord> out;
  std::uint64_t step, t, n;
  while (get_u64(is, step)) {
    if (!get_u64(is, t) || !get_u64(is, n)) throw Error("trajectory: truncated spill file");
    TrajectoryRecord r;
    r.step = static_cast<long>(step);
    r.t = std::bit_cast<double>(t);
    r.u.resize(static_cast<Eigen::Index>(n));
    for (std::uint64_t i = 0; i < n; ++i) {
      std::uint64_t v;
      if (!get_u64(is, v)) throw Error("trajectory: truncated spill file");
      r.u[static_cast<Eigen::Index>(i)] = std::bit_cast<double>(v);
    }
    out.push_back(std::move(r));
  }
  return out;
}

Replayer make_replayer(const Problem& p, const Scheme& scheme) {
  auto stepper = std::make_shared<Stepper>(p, scheme, true);
  return [stepper](const TrajectoryRecord& from, double dt) {
    StepperState s;
    s.t = from.t;
    s.u = from.u;
    s.udot = from.udot;
    s.step_index = from.step;
    stepper->initialize(s);
    StepOutcome out = stepper->step(s, dt, StepOptions{});
    if (!out.ok) throw Error("trajectory replay failed: " + out.failure);
    stepper->accept(s, out);
    return TrajectoryRecord{from.step + 1, s.t, s.u, s.udot, out.stage_data};
  };
}

}  // namespace odekit
