#pragma once

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <map>
#include <queue>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "rsms/cost_model.hpp"
#include "rsms/rng.hpp"

namespace rsms {

inline std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

// Monte Carlo study of service throughput (TP): the number of services
// completed inside the evaluation period, with and without the protocol
// overhead charged. Rates for pool joins and mid-service leaves are per
// minute; request arrivals are per day.
struct SimConfig {
  double lambda_join = 0.2;
  double lambda_leave = 0.2;
  double lambda_arrive = 0.5;
  int service_time_min = 3;  // minutes, discrete uniform
  int service_time_max = 6;
  double period_minutes = 30.0;
  bool rsms_enabled = true;
  int group_size = 3;
  int pool_initial = 100;
  std::uint64_t seed = 1;
  int replications = 1000;
  ProtocolTimeTable times;

  void validate() const {
    if (period_minutes <= 0) throw std::invalid_argument("sim: period must be > 0");
    if (service_time_min > service_time_max)
      throw std::invalid_argument("sim: service time range inverted");
    if (service_time_min < 1) throw std::invalid_argument("sim: service time < 1 min");
    if (lambda_join < 0 || lambda_leave < 0 || lambda_arrive < 0)
      throw std::invalid_argument("sim: negative rate");
    if (group_size < 1) throw std::invalid_argument("sim: group size must be >= 1");
    if (replications < 1) throw std::invalid_argument("sim: replications must be >= 1");
    if (pool_initial < group_size)
      throw std::invalid_argument("sim: pool smaller than one group");
  }
};

struct SimResult {
  double tp_mean = 0.0;
  double ci_halfwidth = 0.0;
  bool ci_valid = false;  // requires >= 30 replications
  std::vector<double> samples;
  std::uint64_t auth_events = 0;
  std::uint64_t key_updates = 0;
  double total_protocol_ms = 0.0;
};

namespace detail {

struct ReplicationStats {
  double tp = 0;
  std::uint64_t auth_events = 0;
  std::uint64_t key_updates = 0;
  double protocol_ms = 0;
};

// One replication. Every random draw is keyed by (seed, replication,
// purpose), so the with/without arms and every sweep point see identical
// arrival, duration, and departure randomness.
inline ReplicationStats run_replication(const SimConfig& cfg, int replication) {
  const double period_ms = cfg.period_minutes * 60'000.0;
  const double arrive_per_ms = cfg.lambda_arrive / (1440.0 * 60'000.0);
  const double leave_per_ms = cfg.lambda_leave / 60'000.0;
  const double join_per_ms = cfg.lambda_join / 60'000.0;
  const int n = cfg.group_size;

  Rng rep_rng = Rng(cfg.seed).fork(0x5EED0000ull + static_cast<std::uint64_t>(replication));

  // Event kinds; lower processes first at equal times.
  enum Kind : int { kJoin = 0, kArrival = 1, kLeave = 2, kEnd = 3 };
  using Event = std::tuple<double, int, std::uint64_t, std::uint64_t>;  // time, kind, id, version
  std::priority_queue<Event, std::vector<Event>, std::greater<Event>> queue;

  if (arrive_per_ms > 0) {
    Rng arrivals = rep_rng.fork(1);
    double t = arrivals.exponential(arrive_per_ms);
    std::uint64_t idx = 0;
    while (t < period_ms) {
      queue.push({t, kArrival, idx++, 0});
      t += arrivals.exponential(arrive_per_ms);
    }
  }
  if (join_per_ms > 0) {
    Rng joins = rep_rng.fork(2);
    double t = joins.exponential(join_per_ms);
    std::uint64_t idx = 0;
    while (t < period_ms) {
      queue.push({t, kJoin, idx++, 0});
      t += joins.exponential(join_per_ms);
    }
  }

  struct Service {
    double end = 0;
    int holding = 0;
    std::uint64_t version = 0;
    std::uint64_t leaves = 0;
    Rng rng;
  };

  ReplicationStats stats;
  std::map<std::uint64_t, Service> active;
  std::queue<std::uint64_t> waiting;
  int pool = cfg.pool_initial;
  static constexpr std::uint64_t kMaxLeavesPerService = 10'000;

  auto try_start = [&](double now) {
    while (!waiting.empty() && pool >= n) {
      std::uint64_t id = waiting.front();
      waiting.pop();
      pool -= n;
      Service svc{0, n, 0, 0, rep_rng.fork(0x100000ull + id)};
      double u = svc.rng.uniform01();
      int span = cfg.service_time_max - cfg.service_time_min + 1;
      int duration_min = cfg.service_time_min +
                         std::min(span - 1, static_cast<int>(u * span));
      double setup = cfg.rsms_enabled ? cfg.times.group_setup_ms(n) : 0.0;
      if (cfg.rsms_enabled) {
        stats.auth_events++;
        stats.protocol_ms += setup;
      }
      svc.end = now + setup + duration_min * 60'000.0;
      if (leave_per_ms > 0) {
        double leave_t = now + svc.rng.exponential(leave_per_ms);
        queue.push({leave_t, kLeave, id, 0});
      }
      queue.push({svc.end, kEnd, id, svc.version});
      active.emplace(id, std::move(svc));
    }
  };

  while (!queue.empty()) {
    auto [t, kind, id, version] = queue.top();
    queue.pop();
    switch (kind) {
      case kJoin:
        pool++;
        try_start(t);
        break;
      case kArrival:
        waiting.push(id);
        try_start(t);
        break;
      case kLeave: {
        auto it = active.find(id);
        if (it == active.end()) break;  // service already completed
        Service& svc = it->second;
        if (t >= svc.end) break;
        svc.leaves++;
        double charge = 0;
        if (cfg.rsms_enabled && svc.leaves <= kMaxLeavesPerService) {
          charge += cfg.times.key_update_ms();
          stats.key_updates++;
        }
        if (pool > 0) {
          pool--;  // replacement joins the group
          if (cfg.rsms_enabled && svc.leaves <= kMaxLeavesPerService) {
            charge += cfg.times.replacement_join_ms();
            stats.auth_events++;
          }
        } else {
          svc.holding--;  // continue degraded; nothing to hand back later
        }
        if (charge > 0) {
          stats.protocol_ms += charge;
          svc.end += charge;
          svc.version++;
          queue.push({svc.end, kEnd, id, svc.version});
        }
        double next_leave = t + svc.rng.exponential(leave_per_ms);
        queue.push({next_leave, kLeave, id, 0});
        break;
      }
      case kEnd: {
        auto it = active.find(id);
        if (it == active.end() || it->second.version != version) break;
        if (t <= period_ms) stats.tp += 1;
        pool += it->second.holding;
        active.erase(it);
        try_start(t);
        break;
      }
    }
  }
  return stats;
}

}  // namespace detail

inline SimResult run_throughput_sim(const SimConfig& cfg) {
  cfg.validate();
  SimResult result;
  result.samples.reserve(cfg.replications);
  double sum = 0;
  for (int rep = 0; rep < cfg.replications; ++rep) {
    auto stats = detail::run_replication(cfg, rep);
    result.samples.push_back(stats.tp);
    sum += stats.tp;
    result.auth_events += stats.auth_events;
    result.key_updates += stats.key_updates;
    result.total_protocol_ms += stats.protocol_ms;
  }
  result.tp_mean = sum / cfg.replications;
  if (cfg.replications >= 2) {
    double ss = 0;
    for (double s : result.samples) ss += (s - result.tp_mean) * (s - result.tp_mean);
    double sd = std::sqrt(ss / (cfg.replications - 1));
    result.ci_halfwidth = 1.96 * sd / std::sqrt(static_cast<double>(cfg.replications));
    result.ci_valid = cfg.replications >= 30;
  }
  return result;
}

// Both arms under common random numbers.
struct TwoArmResult {
  SimResult with_rsms;
  SimResult without_rsms;
  double ratio = 0.0;               // mean TP with / mean TP without
  double ratio_ci_halfwidth = 0.0;  // delta-method over paired samples
};

inline TwoArmResult run_two_arm(SimConfig cfg) {
  TwoArmResult out;
  cfg.rsms_enabled = true;
  out.with_rsms = run_throughput_sim(cfg);
  cfg.rsms_enabled = false;
  out.without_rsms = run_throughput_sim(cfg);
  double mw = out.with_rsms.tp_mean;
  double mo = out.without_rsms.tp_mean;
  if (mo > 0) {
    out.ratio = mw / mo;
    std::size_t r = out.with_rsms.samples.size();
    double var_w = 0, var_o = 0, cov = 0;
    for (std::size_t i = 0; i < r; ++i) {
      double dw = out.with_rsms.samples[i] - mw;
      double dn = out.without_rsms.samples[i] - mo;
      var_w += dw * dw;
      var_o += dn * dn;
      cov += dw * dn;
    }
    if (r >= 2) {
      var_w /= static_cast<double>(r - 1);
      var_o /= static_cast<double>(r - 1);
      cov /= static_cast<double>(r - 1);
      double var_ratio = (var_w + out.ratio * out.ratio * var_o -
                          2 * out.ratio * cov) /
                         (mo * mo * static_cast<double>(r));
      out.ratio_ci_halfwidth = 1.96 * std::sqrt(std::max(0.0, var_ratio));
    }
  }
  return out;
}

// --- sweeps & CSV emission ---

struct SweepSpec {
  std::string param;  // service_time | lambda_join | lambda_leave | lambda_arrive
  double lo = 0, hi = 0, step = 1;
};

inline SimConfig apply_sweep_value(SimConfig cfg, const std::string& param,
                                   double value) {
  if (param == "service_time") {
    cfg.service_time_min = static_cast<int>(value);
    cfg.service_time_max = 2 * static_cast<int>(value);
  } else if (param == "lambda_join") {
    cfg.lambda_join = value;
  } else if (param == "lambda_leave") {
    cfg.lambda_leave = value;
  } else if (param == "lambda_arrive") {
    cfg.lambda_arrive = value;
  } else {
    throw std::invalid_argument("sweep: unknown parameter " + param);
  }
  return cfg;
}

struct SweepRow {
  std::string arm;  // "with" | "without"
  double param_value = 0;
  int replication = 0;
  double tp = 0;
};

inline std::vector<SweepRow> run_sweep(const SimConfig& base, const SweepSpec& spec,
                                       bool arm_with, bool arm_without) {
  if (spec.step <= 0 || spec.hi < spec.lo)
    throw std::invalid_argument("sweep: bad range");
  std::vector<SweepRow> rows;
  for (double v = spec.lo; v <= spec.hi + 1e-9; v += spec.step) {
    SimConfig cfg = apply_sweep_value(base, spec.param, v);
    if (arm_with) {
      cfg.rsms_enabled = true;
      SimResult r = run_throughput_sim(cfg);
      for (std::size_t i = 0; i < r.samples.size(); ++i)
        rows.push_back({"with", v, static_cast<int>(i), r.samples[i]});
    }
    if (arm_without) {
      cfg.rsms_enabled = false;
      SimResult r = run_throughput_sim(cfg);
      for (std::size_t i = 0; i < r.samples.size(); ++i)
        rows.push_back({"without", v, static_cast<int>(i), r.samples[i]});
    }
  }
  return rows;
}

inline constexpr const char* kSimCsvSchema = "rsms.sim.v1";

inline std::string sweep_rows_to_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "# schema: " << kSimCsvSchema << "\n";
  os << "arm,param_value,replication,tp\n";
  for (const auto& row : rows) {
    os << row.arm << "," << format_double(row.param_value) << ","
       << row.replication << "," << format_double(row.tp) << "\n";
  }
  return os.str();
}

}  // namespace rsms
