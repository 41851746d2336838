#include "cvqkd/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include "cvqkd/attack_ff.hpp"
#include "cvqkd/errors.hpp"
#include "cvqkd/keyrate.hpp"
#include "cvqkd/montecarlo.hpp"
#include "cvqkd/sweep.hpp"

namespace cvqkd::cli {

namespace {

// Flags shared by every subcommand.
struct PhysicsFlags {
  double eta = 0.5;
  double vn = 1.0;
  std::optional<double> vn_plus;
  std::optional<double> vn_minus;
  double va = 100.0;
  double vsqz = 1.0;
  std::optional<double> vsqz_minus;
  std::optional<double> bandwidth;
  std::string config;

  void add_to(CLI::App& app) {
    app.add_option("--eta", eta, "channel transmission in (0, 1]")->capture_default_str();
    app.add_option("--vn", vn, "channel noise variance, both quadratures (shot-noise units)")
        ->capture_default_str();
    app.add_option("--vn-plus", vn_plus, "amplitude-quadrature channel noise (overrides --vn)");
    app.add_option("--vn-minus", vn_minus, "phase-quadrature channel noise (overrides --vn)");
    app.add_option("--va", va, "Alice's total quadrature variance V_A")->capture_default_str();
    app.add_option("--vsqz", vsqz,
                   "amplitude variance of the transmitted state; phase variance defaults to 1/vsqz")
        ->capture_default_str();
    app.add_option("--vsqz-minus", vsqz_minus, "phase variance of the transmitted state");
    app.add_option("--bandwidth", bandwidth, "symbol rate W; also report delta_I in bits/second");
    app.add_option("--config", config, "JSON file whose keys mirror flag names; flags take precedence");
  }

  [[nodiscard]] QuadPair vn_pair() const { return {vn_plus.value_or(vn), vn_minus.value_or(vn)}; }
  [[nodiscard]] QuadPair vsqz_pair() const { return {vsqz, vsqz_minus.value_or(1.0 / vsqz)}; }
  [[nodiscard]] ChannelParams channel() const { return ChannelParams::make(eta, vn_pair()); }
  [[nodiscard]] SourceParams source() const { return SourceParams::from_va(QuadPair::both(va), vsqz_pair()); }
};

std::string pair_str(const QuadPair& p) { return format_number(p.plus) + " " + format_number(p.minus); }

void print_params(std::ostream& out, const PhysicsFlags& f) {
  out << "eta: " << format_number(f.eta) << '\n'
      << "vn: " << pair_str(f.vn_pair()) << '\n'
      << "va: " << pair_str(QuadPair::both(f.va)) << '\n'
      << "vsqz: " << pair_str(f.vsqz_pair()) << '\n';
}

void print_rate(std::ostream& out, const PhysicsFlags& f, const RateReport& r) {
  out << "protocol: " << to_string(r.protocol) << '\n';
  out << "quadratures: "
      << (r.protocol == Protocol::heterodyne ? "both measured on every symbol"
                                             : "one per symbol, delta_I averaged over the two bases")
      << '\n';
  print_params(out, f);
  out << "V_B: " << pair_str(r.v_b) << '\n'
      << "V_A|B: " << pair_str(r.v_ab) << '\n'
      << "V_E|B: " << pair_str(r.v_eb) << '\n'
      << "I_BA: " << pair_str(r.i_ba) << '\n'
      << "I_BE: " << pair_str(r.i_be) << '\n'
      << "delta_I: " << format_number(r.delta_i) << " bits/symbol\n";
  if (r.bandwidth) {
    out << "bandwidth: " << format_number(*r.bandwidth) << " symbols/second\n"
        << "delta_I_abs: " << format_number(*r.delta_i_abs) << " bits/second\n";
  }
}

int cmd_rate(const PhysicsFlags& f, const std::string& protocol, std::ostream& out) {
  const SourceParams src = f.source();
  const ChannelParams ch = f.channel();
  RateReport r = protocol == "homodyne" ? secret_key_rate_homodyne(src, ch) : secret_key_rate_heterodyne(src, ch);
  if (f.bandwidth) r = with_bandwidth(r, *f.bandwidth);
  print_rate(out, f, r);
  return kOk;
}

int cmd_attack(const PhysicsFlags& f, double tol, std::ostream& out) {
  const SourceParams src = f.source();
  const ChannelParams ch = f.channel();
  print_params(out, f);
  const FeasibleWindow w = feasibility_window(src, ch);
  if (w.empty) {
    out << "window: empty\n"
        << "attack infeasible: no tap transmission can be hidden inside channel noise V_N=("
        << format_number(ch.vn.plus) << ", " << format_number(ch.vn.minus) << ")\n";
    return kOk;
  }
  const AttackReport rep = optimize_attack(src, ch, tol);
  out << "window: " << format_number(w.epsilon_min) << " " << format_number(w.epsilon_max) << '\n'
      << "epsilon_star: " << format_number(rep.epsilon_star) << '\n'
      << "g_E: " << pair_str(rep.config.g_e) << '\n'
      << "V_extra: " << pair_str(rep.config.v_extra) << '\n'
      << "V_E: " << pair_str(rep.v_e) << '\n'
      << "V_B: " << pair_str(rep.v_b) << '\n'
      << "V_E|B_ff: " << pair_str(rep.v_eb_ff) << '\n'
      << "V_A|B: " << pair_str(rep.v_ab) << '\n'
      << "delta_I_ff: " << format_number(rep.delta_i_ff) << " bits/symbol\n"
      << "delta_I_bound: " << format_number(rep.delta_i_bound) << " bits/symbol\n"
      << "gap: " << format_number(rep.gap()) << " bits/symbol\n";
  if (f.bandwidth) {
    RateReport r;
    r.delta_i = rep.delta_i_ff;
    out << "delta_I_ff_abs: " << format_number(absolute_rate(r, *f.bandwidth)) << " bits/second\n";
  }
  return kOk;
}

struct SweepFlags {
  double eta_start = 0.005, eta_stop = 1.0;
  std::size_t eta_steps = 200;
  double vn_start = 1.0, vn_stop = 1.0;
  std::size_t vn_steps = 1;
  std::vector<double> vn_list;
  std::vector<std::string> protocols{"heterodyne", "homodyne"};
  std::string out = "-";
  std::size_t threads = 1;
  double tol = kDefaultAttackTolerance;
};

int cmd_sweep(const PhysicsFlags& f, const SweepFlags& s, CLI::App& sub, std::ostream& out) {
  SweepSpec spec;
  spec.eta = {s.eta_start, s.eta_stop, s.eta_steps};
  const bool explicit_range = sub.count("--vn-start") + sub.count("--vn-stop") + sub.count("--vn-steps") > 0;
  if (!s.vn_list.empty())
    spec.vn = s.vn_list;
  else if (explicit_range)
    spec.vn = Range{s.vn_start, sub.count("--vn-stop") ? s.vn_stop : s.vn_start, s.vn_steps}.values();
  else
    spec.vn = {f.vn};
  spec.va = f.va;
  spec.vsqz = f.vsqz_pair();
  spec.heterodyne = spec.homodyne = spec.feedforward = false;
  for (const auto& p : s.protocols) {
    if (p == "heterodyne") spec.heterodyne = true;
    if (p == "homodyne") spec.homodyne = true;
    if (p == "feedforward") spec.feedforward = true;
  }
  spec.attack_tol = s.tol;
  spec.threads = s.threads;
  const auto rows = run_sweep(spec);

  if (s.out == "-") {
    write_sweep_csv(out, rows);
    return kOk;
  }
  std::ofstream file(s.out, std::ios::binary);
  if (!file) throw IoError("cannot open '" + s.out + "' for writing");
  write_sweep_csv(file, rows);
  file.close();
  if (!file) throw IoError("failed writing '" + s.out + "'");
  return kOk;
}

struct ValidateFlags {
  std::string scenario = "honest";
  std::optional<double> epsilon;
  std::size_t samples = 1'000'000;
  std::uint64_t seed = 42;
  std::size_t shards = 1;
  std::string raw_out;
  bool corrupt = false;
};

int cmd_validate(const PhysicsFlags& f, const ValidateFlags& v, std::ostream& out) {
  RunSpec spec;
  spec.src = f.source();
  spec.ch = f.channel();
  spec.n = v.samples;
  spec.seed = v.seed;
  spec.shards = v.shards;
  if (v.scenario == "feedforward") {
    spec.scenario = Scenario::feedforward;
    const double eps = v.epsilon ? *v.epsilon : optimize_attack(spec.src, spec.ch).epsilon_star;
    spec.attack = make_attack_config(spec.ch, eps);
  }
  ConcordanceOptions opts;
  if (v.corrupt) opts.analytic_offset = 1e6;
  const ConcordanceReport rep = concordance_report(spec, opts);
  print_concordance(out, rep);
  if (!v.raw_out.empty()) {
    std::ofstream file(v.raw_out, std::ios::binary);
    if (!file) throw IoError("cannot open '" + v.raw_out + "' for writing");
    write_raw_samples(file, spec);
  }
  return rep.all_pass() ? kOk : kValidationFailed;
}

// Turns {"eta": 0.5, "rate": {"protocol": "homodyne"}} into flag tokens for
// the chosen subcommand. Keys the subcommand does not know are ignored.
std::vector<std::string> config_tokens(const std::string& path, const CLI::App& sub) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw StructuralError("config file '" + path + "': " + e.what());
  }
  if (!j.is_object()) throw StructuralError("config file must hold a JSON object");

  std::vector<std::string> tokens;
  auto add = [&](const std::string& key, const nlohmann::json& value) {
    const std::string flag = "--" + key;
    if (key == "config" || sub.get_option_no_throw(flag) == nullptr) return;
    if (value.is_boolean()) {
      if (value.get<bool>()) tokens.push_back(flag);
      return;
    }
    std::string text;
    if (value.is_string()) {
      text = value.get<std::string>();
    } else if (value.is_array()) {
      for (std::size_t i = 0; i < value.size(); ++i)
        text += (i ? "," : "") + (value[i].is_string() ? value[i].get<std::string>() : value[i].dump());
    } else {
      text = value.dump();
    }
    tokens.push_back(flag);
    tokens.push_back(text);
  };
  for (const auto& [key, value] : j.items())
    if (!value.is_object()) add(key, value);
  if (j.contains(sub.get_name()) && j[sub.get_name()].is_object())
    for (const auto& [key, value] : j[sub.get_name()].items()) add(key, value);
  return tokens;
}

std::optional<std::string> find_config_path(const std::vector<std::string>& args) {
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return std::nullopt;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Key rates, feed-forward attack optimization and Monte Carlo validation for "
               "no-switching continuous-variable QKD"};
  app.name(raw_args.empty() ? "cvqkd" : raw_args[0]);
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  PhysicsFlags rate_f, sweep_f, attack_f, validate_f;
  std::string protocol = "heterodyne";
  double attack_tol = kDefaultAttackTolerance;
  SweepFlags sweep_s;
  ValidateFlags validate_v;

  auto* rate = app.add_subcommand("rate", "secret key rate at one parameter point");
  rate_f.add_to(*rate);
  rate->add_option("--protocol", protocol, "heterodyne (simultaneous) or homodyne (single quadrature)")
      ->check(CLI::IsMember({"heterodyne", "homodyne"}))
      ->capture_default_str();

  auto* sweep = app.add_subcommand("sweep", "2-D (eta, V_N) sweep written as CSV");
  sweep_f.add_to(*sweep);
  sweep->add_option("--eta-start", sweep_s.eta_start)->capture_default_str();
  sweep->add_option("--eta-stop", sweep_s.eta_stop)->capture_default_str();
  sweep->add_option("--eta-steps", sweep_s.eta_steps)->check(CLI::PositiveNumber)->capture_default_str();
  sweep->add_option("--vn-start", sweep_s.vn_start);
  sweep->add_option("--vn-stop", sweep_s.vn_stop);
  sweep->add_option("--vn-steps", sweep_s.vn_steps)->check(CLI::PositiveNumber);
  sweep->add_option("--vn-list", sweep_s.vn_list, "explicit comma-separated V_N values")->delimiter(',');
  sweep->add_option("--protocols,--protocol", sweep_s.protocols, "subset of heterodyne,homodyne,feedforward")
      ->delimiter(',')
      ->check(CLI::IsMember({"heterodyne", "homodyne", "feedforward"}))
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  sweep->add_option("--out", sweep_s.out, "CSV path, '-' for stdout")->capture_default_str();
  sweep->add_option("--threads", sweep_s.threads)->check(CLI::PositiveNumber)->capture_default_str();
  sweep->add_option("--tol", sweep_s.tol, "epsilon tolerance of the attack optimizer")->check(CLI::PositiveNumber);

  auto* attack = app.add_subcommand("attack", "optimize the feed-forward attack");
  attack_f.add_to(*attack);
  attack->add_option("--tol", attack_tol, "epsilon tolerance")->check(CLI::PositiveNumber)->capture_default_str();

  auto* validate = app.add_subcommand("validate", "Monte Carlo concordance against closed forms");
  validate_f.add_to(*validate);
  validate->add_option("--scenario", validate_v.scenario)
      ->check(CLI::IsMember({"honest", "feedforward"}))
      ->capture_default_str();
  validate->add_option("--epsilon", validate_v.epsilon, "tap transmission (feedforward; default: optimal)");
  validate->add_option("--samples", validate_v.samples)->check(CLI::Range(2ul, 1ul << 40))->capture_default_str();
  validate->add_option("--seed", validate_v.seed)->capture_default_str();
  validate->add_option("--shards", validate_v.shards)->check(CLI::PositiveNumber)->capture_default_str();
  validate->add_option("--raw-out", validate_v.raw_out, "write raw samples as columnar text");
  validate->add_flag("--corrupt-analytic", validate_v.corrupt)->group("");

  std::vector<std::string> args = raw_args;
  try {
    if (auto path = find_config_path(args)) {
      // Config tokens go right after the subcommand so later flags win.
      for (std::size_t i = 1; i < args.size(); ++i) {
        CLI::App* sub = nullptr;
        for (auto* s : {rate, sweep, attack, validate})
          if (args[i] == s->get_name()) sub = s;
        if (!sub) continue;
        auto tokens = config_tokens(*path, *sub);
        args.insert(args.begin() + static_cast<std::ptrdiff_t>(i) + 1, tokens.begin(), tokens.end());
        break;
      }
    }
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const StructuralError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (rate->parsed()) return cmd_rate(rate_f, protocol, out);
    if (sweep->parsed()) return cmd_sweep(sweep_f, sweep_s, *sweep, out);
    if (attack->parsed()) return cmd_attack(attack_f, attack_tol, out);
    if (validate->parsed()) return cmd_validate(validate_f, validate_v, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const StructuralError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDomain;
  }
  return kUsage;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  return run(std::vector<std::string>(argv, argv + argc), out, err);
}

}  // namespace cvqkd::cli
