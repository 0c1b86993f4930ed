// Command-line front end: protocol demo, Monte Carlo throughput study, and
// the computation/communication cost report.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "rsms/rsms.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace rsms;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitProtocolReject = 2;
constexpr int kExitThresholdMiss = 3;
constexpr int kExitConfigError = 4;

std::string timestamp_dir(const std::string& subcommand, std::uint64_t seed) {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << "out/" << subcommand << "/" << std::put_time(&tm, "%Y%m%dT%H%M%S") << "-"
     << seed;
  return os.str();
}

fs::path prepare_out_dir(const std::string& explicit_out,
                         const std::string& subcommand, std::uint64_t seed) {
  fs::path dir = explicit_out.empty() ? fs::path(timestamp_dir(subcommand, seed))
                                      : fs::path(explicit_out);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

void write_manifest(const fs::path& dir, const std::string& subcommand,
                    std::uint64_t seed, const json& resolved_config,
                    const std::vector<std::string>& outputs) {
  json manifest;
  manifest["subcommand"] = subcommand;
  manifest["seed"] = seed;
  manifest["config"] = resolved_config;
  manifest["artifact_version"] = kArtifactVersion;
  manifest["outputs"] = outputs;
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

json sim_config_to_json(const SimConfig& cfg) {
  json j;
  j["lambda_join"] = cfg.lambda_join;
  j["lambda_leave"] = cfg.lambda_leave;
  j["lambda_arrive"] = cfg.lambda_arrive;
  j["service_time_range"] = {cfg.service_time_min, cfg.service_time_max};
  j["period_minutes"] = cfg.period_minutes;
  j["rsms_enabled"] = cfg.rsms_enabled;
  j["group_size"] = cfg.group_size;
  j["pool_initial"] = cfg.pool_initial;
  j["seed"] = cfg.seed;
  j["replications"] = cfg.replications;
  return j;
}

SimConfig sim_config_from_json(const json& j) {
  SimConfig cfg;
  if (j.contains("lambda_join")) cfg.lambda_join = j["lambda_join"].get<double>();
  if (j.contains("lambda_leave")) cfg.lambda_leave = j["lambda_leave"].get<double>();
  if (j.contains("lambda_arrive"))
    cfg.lambda_arrive = j["lambda_arrive"].get<double>();
  if (j.contains("service_time_range")) {
    auto range = j["service_time_range"];
    cfg.service_time_min = range.at(0).get<int>();
    cfg.service_time_max = range.at(1).get<int>();
  }
  if (j.contains("period_minutes"))
    cfg.period_minutes = j["period_minutes"].get<double>();
  if (j.contains("rsms_enabled")) cfg.rsms_enabled = j["rsms_enabled"].get<bool>();
  if (j.contains("group_size")) cfg.group_size = j["group_size"].get<int>();
  if (j.contains("pool_initial")) cfg.pool_initial = j["pool_initial"].get<int>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("replications")) cfg.replications = j["replications"].get<int>();
  if (j.contains("charges")) {
    auto c = j["charges"];
    if (c.contains("ecpsm_ms")) cfg.times.ecpsm = c["ecpsm_ms"].get<double>();
    if (c.contains("ecpa_ms")) cfg.times.ecpa = c["ecpa_ms"].get<double>();
    if (c.contains("hf_ms")) cfg.times.hf = c["hf_ms"].get<double>();
    if (c.contains("bf_ms")) cfg.times.bf = c["bf_ms"].get<double>();
  }
  return cfg;
}

// --- demo ---

int cmd_demo(int pool_size, int group_size, std::uint64_t seed,
             const std::string& tamper, const std::string& out_dir) {
  if (group_size < 1 || pool_size < group_size) {
    std::cerr << "demo: need pool-size >= group-size >= 1\n";
    return kExitConfigError;
  }
  if (!tamper.empty() && !known_tamper_field(tamper)) {
    std::cerr << "demo: unknown tamper field " << tamper << "\n";
    return kExitConfigError;
  }
  ProtocolDriver driver(seed);
  auto hook_rng = std::make_shared<Rng>(driver.rng().fork(0x7A3B));
  if (!tamper.empty()) driver.set_hook(make_tamper_hook(tamper, hook_rng));

  driver.transcript().note("demo: setup and registration");
  driver.add_pool(1);
  driver.add_pool(2);
  std::vector<std::string> rns;
  for (int i = 0; i < pool_size; ++i) {
    rns.push_back("rn-" + std::to_string(i + 1));
    driver.register_rn(rns.back(), 1);
  }
  driver.register_rn("rn-spare", 1);
  driver.register_user("user");
  driver.handoff(1);

  driver.transcript().note("demo: initial authentication into pool 1");
  bool all_joined = true;
  for (const auto& rn : rns) all_joined &= driver.run_initial_auth(rn, 1).joined;
  bool spare_joined = driver.run_initial_auth("rn-spare", 1).joined;

  driver.transcript().note("demo: cross-pool re-authentication into pool 2");
  if (all_joined) driver.run_reauth(rns[0], 2);

  driver.transcript().note("demo: group membership + key agreement");
  std::vector<std::string> group(rns.begin(), rns.begin() + group_size);
  ProtocolDriver::GroupRun session{};
  if (all_joined) session = driver.run_group_session("user", group);

  driver.transcript().note("demo: suspicion injected, key update");
  if (session.ok && spare_joined)
    driver.run_key_update(session.session_id, {group.back()}, {"rn-spare"});

  std::string transcript = driver.transcript().to_text();
  std::cout << transcript;
  fs::path dir = prepare_out_dir(out_dir, "demo", seed);
  write_file(dir / "transcript.txt", transcript);
  json cfg;
  cfg["pool_size"] = pool_size;
  cfg["group_size"] = group_size;
  cfg["tamper"] = tamper;
  write_manifest(dir, "demo", seed, cfg, {"transcript.txt"});
  std::cout << "wrote " << (dir / "transcript.txt").string() << "\n";

  if (driver.transcript().reject_count() > 0) {
    std::cout << "demo: " << driver.transcript().reject_count()
              << " reject verdict(s)\n";
    return kExitProtocolReject;
  }
  std::cout << "demo: all verdicts accept\n";
  return kExitOk;
}

// --- simulate ---

int cmd_simulate(const std::string& config_path, const std::string& sweep_arg,
                 const std::string& arms_arg, std::uint64_t seed, int replications,
                 const std::string& out_dir) {
  SimConfig base;
  json loaded = json::object();
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) {
      std::cerr << "simulate: cannot read config " << config_path << "\n";
      return kExitConfigError;
    }
    try {
      in >> loaded;
      base = sim_config_from_json(loaded);
    } catch (const std::exception& e) {
      std::cerr << "simulate: bad config: " << e.what() << "\n";
      return kExitConfigError;
    }
  }
  if (seed != 0) base.seed = seed;
  if (replications != 0) base.replications = replications;

  bool arm_with = arms_arg.find("with") != std::string::npos;
  bool arm_without = arms_arg.find("without") != std::string::npos;
  if (arms_arg == "with") arm_without = false;  // "with" is a prefix of "without"
  if (!arm_with && !arm_without) {
    std::cerr << "simulate: --arms must name with and/or without\n";
    return kExitConfigError;
  }

  std::vector<SweepRow> rows;
  std::ostringstream summary;
  summary << std::setprecision(6) << std::fixed;
  double ratio = -1;
  try {
    base.validate();
    if (!sweep_arg.empty()) {
      SweepSpec spec;
      char colon;
      std::istringstream ss(sweep_arg);
      std::getline(ss, spec.param, ':');
      if (!(ss >> spec.lo >> colon >> spec.hi >> colon >> spec.step))
        throw std::invalid_argument("sweep spec is param:lo:hi:step");
      rows = run_sweep(base, spec, arm_with, arm_without);
      summary << "sweep " << spec.param << " over [" << spec.lo << ", " << spec.hi
              << "] step " << spec.step << ", " << base.replications
              << " replication(s) per point\n";
      for (double v = spec.lo; v <= spec.hi + 1e-9; v += spec.step) {
        SimConfig point = apply_sweep_value(base, spec.param, v);
        summary << "  " << spec.param << "=" << v << ":";
        TwoArmResult two;
        if (arm_with && arm_without) {
          two = run_two_arm(point);
          summary << " with=" << two.with_rsms.tp_mean << " (ci +-"
                  << two.with_rsms.ci_halfwidth << ")"
                  << " without=" << two.without_rsms.tp_mean << " (ci +-"
                  << two.without_rsms.ci_halfwidth << ")"
                  << " ratio=" << two.ratio;
        } else {
          point.rsms_enabled = arm_with;
          auto r = run_throughput_sim(point);
          summary << (arm_with ? " with=" : " without=") << r.tp_mean << " (ci +-"
                  << r.ci_halfwidth << ")";
        }
        summary << "\n";
      }
    } else {
      if (arm_with && arm_without) {
        auto two = run_two_arm(base);
        ratio = two.ratio;
        for (std::size_t i = 0; i < two.with_rsms.samples.size(); ++i)
          rows.push_back({"with", 0, static_cast<int>(i), two.with_rsms.samples[i]});
        for (std::size_t i = 0; i < two.without_rsms.samples.size(); ++i)
          rows.push_back(
              {"without", 0, static_cast<int>(i), two.without_rsms.samples[i]});
        summary << "TP with RSMS:    " << two.with_rsms.tp_mean << " +- "
                << two.with_rsms.ci_halfwidth << " (95% CI)\n";
        summary << "TP without RSMS: " << two.without_rsms.tp_mean << " +- "
                << two.without_rsms.ci_halfwidth << " (95% CI)\n";
        summary << "ratio with/without: " << two.ratio << " +- "
                << two.ratio_ci_halfwidth << "\n";
        summary << "protocol events: " << two.with_rsms.auth_events
                << " auth, " << two.with_rsms.key_updates << " key updates\n";
      } else {
        SimConfig point = base;
        point.rsms_enabled = arm_with;
        auto r = run_throughput_sim(point);
        for (std::size_t i = 0; i < r.samples.size(); ++i)
          rows.push_back({arm_with ? "with" : "without", 0, static_cast<int>(i),
                          r.samples[i]});
        summary << "TP " << (arm_with ? "with" : "without") << " RSMS: "
                << r.tp_mean << " +- " << r.ci_halfwidth << " (95% CI)\n";
      }
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "simulate: " << e.what() << "\n";
    return kExitConfigError;
  }

  fs::path dir = prepare_out_dir(out_dir, "simulate", base.seed);
  write_file(dir / "results.csv", sweep_rows_to_csv(rows));
  write_file(dir / "summary.txt", summary.str());
  json resolved = sim_config_to_json(base);
  resolved["sweep"] = sweep_arg;
  resolved["arms"] = arms_arg;
  write_manifest(dir, "simulate", base.seed, resolved,
                 {"results.csv", "summary.txt"});
  std::cout << summary.str();
  std::cout << "wrote " << (dir / "results.csv").string() << "\n";

  if (ratio >= 0 && ratio < 0.99) {
    std::cerr << "simulate: with/without ratio " << ratio << " below 0.99\n";
    return kExitThresholdMiss;
  }
  return kExitOk;
}

// --- costs ---

struct PhaseRow {
  Phase phase;
  Role role;
  const char* label;
};

int cmd_costs(int group_size, std::uint64_t seed, const std::string& out_dir) {
  std::size_t n = static_cast<std::size_t>(group_size);
  auto measured = MeasuredPrimitivesMs::benchmark(seed);

  std::ostringstream report;
  report << std::fixed << std::setprecision(4);
  report << "primitive timings on this host vs reference (ms)\n";
  report << "  operation                     measured   reference  delta\n";
  auto prim_row = [&](const char* name, double meas, double ref) {
    report << "  " << std::left << std::setw(28) << name << std::right
           << std::setw(10) << meas << std::setw(11) << ref << std::setw(9)
           << (meas - ref) << "\n";
  };
  prim_row("point scalar multiplication", measured.ecpsm, ReferenceTimesMs::ecpsm);
  prim_row("point addition", measured.ecpa, ReferenceTimesMs::ecpa);
  prim_row("hash", measured.hf, ReferenceTimesMs::hf);
  prim_row("modular inversion", measured.mio, ReferenceTimesMs::mio);
  prim_row("modular multiplication", measured.mmo, ReferenceTimesMs::mmo);
  prim_row("bloom filter check", measured.bf, ReferenceTimesMs::bf);

  const PhaseRow rows[] = {
      {Phase::InitialAuth, Role::Rn, "initial-auth / rn"},
      {Phase::InitialAuth, Role::Rpm, "initial-auth / rpm"},
      {Phase::Reauth, Role::Rn, "re-auth / rn"},
      {Phase::Reauth, Role::Rpm, "re-auth / rpm"},
      {Phase::GroupMembership, Role::Party, "group-membership / party"},
      {Phase::GroupKeyAgreement, Role::Party, "group-key-agreement / party"},
      {Phase::GroupKeyUpdate, Role::Party, "group-key-update / party"},
  };

  std::ostringstream counts_csv;
  counts_csv << "# schema: rsms.costs.counts.v1\n";
  counts_csv << "phase,role,section,point_mul,point_add,hash,mod_inv,bf_check,"
                "ref_point_mul,ref_point_add,ref_hash,ref_mod_inv,ref_bf_check\n";
  report << "\nper-phase operation counts (traced core / reference formula), N="
         << n << "\n";
  report << "  phase / role                  mul  add hash  inv   bf |  ref: mul add hash inv bf\n";
  for (const auto& row : rows) {
    PhaseCost cost = measure_costs(row.phase, row.role, n, seed);
    RefCounts ref = reference_counts(row.phase, row.role, n);
    report << "  " << std::left << std::setw(28) << row.label << std::right
           << std::setw(5) << cost.core.point_mul << std::setw(5)
           << cost.core.point_add << std::setw(5) << cost.core.hash_calls
           << std::setw(5) << cost.core.mod_inv << std::setw(5)
           << cost.core.bf_check << " |  " << std::setw(6) << ref.point_mul
           << std::setw(4) << ref.point_add << std::setw(5) << ref.hash_calls
           << std::setw(4) << ref.mod_inv << std::setw(3) << ref.bf_check << "\n";
    counts_csv << to_string(row.phase) << "," << to_string(row.role) << ",core,"
               << cost.core.point_mul << "," << cost.core.point_add << ","
               << cost.core.hash_calls << "," << cost.core.mod_inv << ","
               << cost.core.bf_check << "," << ref.point_mul << ","
               << ref.point_add << "," << ref.hash_calls << "," << ref.mod_inv
               << "," << ref.bf_check << "\n";
    counts_csv << to_string(row.phase) << "," << to_string(row.role) << ",extras,"
               << cost.extras.point_mul << "," << cost.extras.point_add << ","
               << cost.extras.hash_calls << "," << cost.extras.mod_inv << ","
               << cost.extras.bf_check << ",,,,,\n";
  }

  // serialized sizes in bits, next to the reference communication table
  std::ostringstream sizes_csv;
  sizes_csv << "# schema: rsms.costs.sizes.v1\n";
  sizes_csv << "phase,entity,bits,ref_bits\n";
  report << "\nserialized message sizes (bits) vs reference\n";
  auto ia = measure_costs(Phase::InitialAuth, Role::Rpm, n, seed);
  auto rea = measure_costs(Phase::Reauth, Role::Rpm, n, seed);
  auto bytes_of = [](const PhaseCost& c, const char* k) {
    return 8.0 * static_cast<double>(c.message_bytes.at(k));
  };
  auto size_row = [&](const char* phase, const char* entity, double bits,
                      double ref) {
    report << "  " << std::left << std::setw(24) << phase << std::setw(7)
           << entity << std::right << std::setw(10) << bits << std::setw(12)
           << ref << std::setw(12) << (bits - ref) << "\n";
    sizes_csv << phase << "," << entity << "," << bits << "," << ref << "\n";
  };
  report << "  phase                   entity       bits    ref_bits       delta\n";
  size_row("initial-auth", "rn", bytes_of(ia, "initial-auth-msg1"),
           reference_bits(Phase::InitialAuth, Role::Rn, n));
  size_row("initial-auth", "rpm",
           bytes_of(ia, "auth-ack") + bytes_of(ia, "auth-report"),
           reference_bits(Phase::InitialAuth, Role::Rpm, n));
  size_row("initial-auth>msrp", "rpm", bytes_of(ia, "auth-report"), 1024);
  size_row("re-auth", "rn", bytes_of(rea, "reauth-msg1"),
           reference_bits(Phase::Reauth, Role::Rn, n));
  size_row("re-auth", "rpm", bytes_of(rea, "auth-ack") + bytes_of(rea, "auth-report"),
           reference_bits(Phase::Reauth, Role::Rpm, n));
  size_row("re-auth>msrp", "rpm", bytes_of(rea, "auth-report"), 1184);
  auto group_bytes = group_party_bytes(n, seed);
  size_row("group-membership", "party", 8.0 * group_bytes.membership,
           reference_bits(Phase::GroupMembership, Role::Party, n));
  size_row("group-key-agreement", "party", 8.0 * group_bytes.key_agreement,
           reference_bits(Phase::GroupKeyAgreement, Role::Party, n));
  auto upd = measure_costs(Phase::GroupKeyUpdate, Role::Party, n, seed);
  size_row("group-key-update", "msrp",
           bytes_of(upd, "key-update") * static_cast<double>(n + 1),
           reference_bits(Phase::GroupKeyUpdate, Role::Msrp, n));

  report << "\nencoding widths: point " << kPointBits << " bits, scalar "
         << kScalarBits << " bits, pseudonym " << kPidBits << " bits\n";
  report << "note: reference sizes assume the original evaluation's encodings; "
            "deltas reflect this artifact's compressed points and framing\n";

  fs::path dir = prepare_out_dir(out_dir, "costs", seed);
  write_file(dir / "costs.txt", report.str());
  write_file(dir / "counts.csv", counts_csv.str());
  write_file(dir / "sizes.csv", sizes_csv.str());
  json cfg;
  cfg["group_size"] = group_size;
  write_manifest(dir, "costs", seed, cfg, {"costs.txt", "counts.csv", "sizes.csv"});
  std::cout << report.str();
  std::cout << "wrote " << (dir / "costs.txt").string() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RSMS protocol artifact: demos, simulations, cost tables"};
  app.require_subcommand(1);

  auto* demo = app.add_subcommand("demo", "annotated end-to-end protocol run");
  int pool_size = 4;
  int group_size = 3;
  std::uint64_t seed = 1;
  std::string tamper;
  std::string out_dir;
  demo->add_option("--pool-size", pool_size, "RNs registered in pool 1");
  demo->add_option("--group-size", group_size, "RNs allocated to the user");
  demo->add_option("--seed", seed, "deterministic seed");
  demo->add_option("--tamper", tamper, "adversary tamper target, e.g. msg1.c2");
  demo->add_option("--out", out_dir, "output directory (default out/demo/<ts>-<seed>)");

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo throughput study");
  std::string config_path;
  std::string sweep;
  std::string arms = "with,without";
  std::uint64_t sim_seed = 0;
  int replications = 0;
  std::string sim_out;
  simulate->add_option("--config", config_path, "JSON config (SimConfig fields)");
  simulate->add_option("--sweep", sweep, "param:lo:hi:step");
  simulate->add_option("--arms", arms, "with,without");
  simulate->add_option("--seed", sim_seed, "override config seed");
  simulate->add_option("--replications", replications, "override replication count");
  simulate->add_option("--out", sim_out, "output directory");

  auto* costs = app.add_subcommand("costs", "operation counts, timings, sizes");
  int costs_group = 3;
  std::uint64_t costs_seed = 42;
  std::string costs_out;
  costs->add_option("--group-size", costs_group, "N for the group phases");
  costs->add_option("--seed", costs_seed, "benchmark seed");
  costs->add_option("--out", costs_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfigError;
  }

  try {
    if (demo->parsed()) return cmd_demo(pool_size, group_size, seed, tamper, out_dir);
    if (simulate->parsed())
      return cmd_simulate(config_path, sweep, arms, sim_seed, replications, sim_out);
    if (costs->parsed()) return cmd_costs(costs_group, costs_seed, costs_out);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
