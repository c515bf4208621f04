#include "pdmp/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <functional>
#include <map>
#include <ostream>

#include "commands.hpp"
#include "pdmp/io.hpp"
#include "pdmp/model_io.hpp"

namespace pdmp::cli {

namespace {

using nlohmann::json;

json sigmoid_neuron_json(int N) {
  return {{"type", "neuron"}, {"N", N}, {"lambda", 1.0}, {"v_star", 1.0}, {"weights", 0.2},
          {"rates", {{"kind", "sigmoid"}, {"floor", 0.5}, {"bound", 2.0}, {"slope", 4.0}, {"center", 0.5}}}};
}

json base_defaults() {
  return {{"seed", 0},
          {"workers", 1},
          {"out", "."},
          {"integrator", {{"step", 1e-3}, {"max_time", 1e3}, {"trunc_eps", 1e-8}, {"closed_form", true}}},
          {"simulation",
           {{"horizon", nullptr}, {"max_jumps", nullptr}, {"paths", 1}, {"burn_in", 0.1}, {"batches", 30},
            {"stride", 1.0}, {"samples", 10000}, {"start", nullptr}}},
          {"region", {{"d", 0.1}, {"k", 0}, {"A", nullptr}}},
          {"model_N", 2}};
}

json command_defaults(const std::string& cmd) {
  if (cmd == "simulate") return {{"simulation", {{"horizon", 100.0}}}};
  if (cmd == "check-good")
    return {{"schedule", {{"indices", nullptr}, {"times", nullptr}, {"length", nullptr}, {"lo", -5.0},
                          {"hi", 5.0}, {"draws", 1000}, {"threshold", nullptr}}}};
  if (cmd == "verify-identities" || cmd == "neuron-demo")
    return {{"integrator", {{"step", 1e-2}}},
            {"simulation", {{"horizon", 2e4}}},
            {"ipp", {{"lo", nullptr}, {"hi", nullptr}}},
            {"demo", {{"schedules", 20}}}};
  if (cmd == "estimate-density")
    return {{"integrator", {{"step", 1e-2}}}, {"density", {{"coord", 1}, {"cells", 512}, {"order", 2}}}};
  if (cmd == "propagate-density")
    return {{"integrator", {{"step", 1e-2}}},
            {"propagate", {{"r_lo", 0.1}, {"r_hi", 0.6}, {"grid", 50}, {"quad", 200}, {"lo", nullptr},
                           {"hi", nullptr}}},
            {"model",
             {{"type", "neuron"}, {"N", 2}, {"lambda", 1.0}, {"v_star", 1.0}, {"weights", 0.2},
              {"rates", {{"kind", "constant"}, {"value", 1.5}}}}}};
  if (cmd == "threshold") return {{"threshold", {{"N", nullptr}, {"f0", nullptr}, {"B", 1.0}}}};
  return json::object();
}

struct Command {
  std::string description;
  std::function<bool(const Context&)> body;
  bool uses_model;
};

const std::map<std::string, Command>& commands() {
  static const std::map<std::string, Command> table{
      {"simulate", {"simulate paths and write jump tables", run_simulate, true}},
      {"check-good", {"goodness certificates for jump schedules", run_check_good, true}},
      {"verify-identities", {"ergodic, stationarity, representation and IPP checks", run_verify_identities, true}},
      {"estimate-density", {"invariant marginal densities and smoothness probe", run_estimate_density, true}},
      {"propagate-density", {"one-jump density propagation", run_propagate_density, true}},
      {"neuron-demo", {"end-to-end checks on the neuron example", run_neuron_demo, true}},
      {"threshold", {"regularity threshold k*", run_threshold, false}},
  };
  return table;
}

void add_command_flags(FlagBinder& fb, CLI::App* sub, const std::string& cmd) {
  const auto num = Kind::number;
  const auto integer = Kind::integer;
  if (cmd != "threshold") {
    fb.add(sub, "--model", "/model", Kind::text, "model description file (JSON)");
    fb.add(sub, "--N", "/model_N", integer, "particles of the default neuron model");
  }
  if (cmd == "simulate") {
    fb.add(sub, "--horizon", "/simulation/horizon", num, "simulated time");
    fb.add(sub, "--jumps", "/simulation/max_jumps", integer, "maximal number of jumps");
    fb.add(sub, "--paths", "/simulation/paths", integer, "independent paths");
    fb.add(sub, "--start", "/simulation/start", Kind::numbers, "initial state, comma separated");
  }
  if (cmd == "check-good") {
    fb.add(sub, "--indices", "/schedule/indices", Kind::integers, "jump indices i_0..i_n (1-based)");
    fb.add(sub, "--times", "/schedule/times", Kind::numbers, "times t_1..t_{n+1}");
    fb.add(sub, "--length", "/schedule/length", integer, "enumerate all index sequences of this length");
    fb.add(sub, "--lo", "/schedule/lo", num, "search box lower bound");
    fb.add(sub, "--hi", "/schedule/hi", num, "search box upper bound");
    fb.add(sub, "--draws", "/schedule/draws", integer, "random starts in the box");
    fb.add(sub, "--threshold", "/schedule/threshold", num, "absolute singular value threshold");
  }
  if (cmd == "verify-identities" || cmd == "neuron-demo" || cmd == "estimate-density") {
    fb.add(sub, "--horizon", "/simulation/horizon", num, "length of the long run");
    fb.add(sub, "--samples", "/simulation/samples", integer, "time-sampled states for m-hat");
    fb.add(sub, "--stride", "/simulation/stride", num, "sampling stride");
    fb.add(sub, "--burn-in", "/simulation/burn_in", num, "burn-in fraction");
    fb.add(sub, "--batches", "/simulation/batches", integer, "batches for standard errors");
    fb.add(sub, "--d", "/region/d", num, "region: |b~| > d");
    fb.add(sub, "--k", "/region/k", integer, "region: |v| > (k+2) A");
    fb.add(sub, "--A", "/region/A", num, "region: shift bound A (default: the model's)");
  }
  if (cmd == "verify-identities" || cmd == "neuron-demo") {
    fb.add(sub, "--g-lo", "/ipp/lo", num, "support of the IPP test function, lower end");
    fb.add(sub, "--g-hi", "/ipp/hi", num, "support of the IPP test function, upper end");
  }
  if (cmd == "neuron-demo") fb.add(sub, "--schedules", "/demo/schedules", integer, "random schedules for det sigma");
  if (cmd == "estimate-density") {
    fb.add(sub, "--coord", "/density/coord", integer, "coordinate (1-based)");
    fb.add(sub, "--cells", "/density/cells", integer, "KDE grid cells");
    fb.add(sub, "--order", "/density/order", integer, "highest FD order of the probe");
  }
  if (cmd == "propagate-density") {
    fb.add(sub, "--r-lo", "/propagate/r_lo", num, "support of the input bump, lower end");
    fb.add(sub, "--r-hi", "/propagate/r_hi", num, "support of the input bump, upper end");
    fb.add(sub, "--grid", "/propagate/grid", integer, "tabulation points per coordinate");
    fb.add(sub, "--quad", "/propagate/quad", integer, "quadrature cells per coordinate");
    fb.add(sub, "--lo", "/propagate/lo", num, "box lower bound (default 0)");
    fb.add(sub, "--hi", "/propagate/hi", num, "box upper bound (default: the flow limit)");
  }
  if (cmd == "threshold") {
    fb.add(sub, "--N", "/threshold/N", integer, "number of particles");
    fb.add(sub, "--f0", "/threshold/f0", num, "rate floor f0");
    fb.add(sub, "--B", "/threshold/B", num, "drift derivative bound B");
  }
}

int report_error(std::ostream& err, const Error& e, int code) {
  err << "error [" << e.module() << "]: " << e.what() << "\n";
  return code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulation and verification toolkit for house-of-cards PDMPs", "pdmp"};
  app.require_subcommand(1);
  app.fallthrough();
  FlagBinder global;
  global.add(&app, "--config", "/config", Kind::text, "JSON configuration file");
  global.add(&app, "--seed", "/seed", Kind::integer, "base random seed");
  global.add(&app, "--workers", "/workers", Kind::integer, "worker threads");
  global.add(&app, "--out", "/out", Kind::text, "output directory");
  global.add(&app, "--step", "/integrator/step", Kind::number, "RK4 step");
  global.add(&app, "--max-time", "/integrator/max_time", Kind::number, "integration time cap");
  global.add(&app, "--trunc-eps", "/integrator/trunc_eps", Kind::number, "survival truncation level");
  global.add(&app, "--no-closed-form", "/no_closed_form", Kind::flag, "always integrate numerically");

  std::map<std::string, FlagBinder> local;
  for (const auto& [name, c] : commands()) {
    CLI::App* sub = app.add_subcommand(name, c.description);
    add_command_flags(local[name], sub, name);
  }

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kPass;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kPass;
    }
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  const Command& command = commands().at(cmd);
  try {
    json flags = json::object();
    global.apply(flags);
    local.at(cmd).apply(flags);

    json config = base_defaults();
    config.merge_patch(command_defaults(cmd));
    if (flags.contains("config")) {
      json file = read_json_file(flags["config"].get<std::string>());
      if (!file.is_object()) throw ConfigError("cli", "configuration file must hold a JSON object");
      config.merge_patch(file);
    }
    const bool no_closed = flags.value("no_closed_form", false);
    flags.erase("config");
    flags.erase("no_closed_form");
    // Explicit flags replace whole values (a --model path replaces the model object).
    for (auto& [key, value] : flags.items()) {
      if (value.is_object() && config.contains(key) && config[key].is_object()) {
        for (auto& [k2, v2] : value.items()) config[key][k2] = v2;
      } else {
        config[key] = value;
      }
    }
    if (no_closed) config["integrator"]["closed_form"] = false;
    config["command"] = cmd;

    if (command.uses_model) {
      if (flags.contains("model_N") && config["model"].is_object()) config["model"]["N"] = flags["model_N"];
      if (!config.contains("model") || config["model"].is_null())
        config["model"] = sigmoid_neuron_json(static_cast<int>(Settings(config).count("/model_N")));
      if (config["model"].is_string()) config["model"] = read_json_file(config["model"].get<std::string>());
    } else {
      config.erase("model");
    }
    config.erase("model_N");

    Settings settings(config);
    settings.integrator();
    settings.workers();
    settings.seed();
    const std::string out_dir = settings.out_dir();
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw ConfigError("cli", "cannot create output directory " + out_dir);

    Context ctx{settings, io::config_hash(config), out};
    const bool pass = command.body(ctx);
    out << (pass ? "PASS" : "FAIL") << " " << cmd << " (config " << ctx.hash << ")\n";
    return pass ? kPass : kFail;
  } catch (const ConfigError& e) {
    return report_error(err, e, kUsage);
  } catch (const Error& e) {
    return report_error(err, e, kFail);
  } catch (const nlohmann::json::exception& e) {
    err << "error [cli]: malformed configuration: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFail;
  }
}

}  // namespace pdmp::cli
