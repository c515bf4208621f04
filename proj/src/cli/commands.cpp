#include "commands.hpp"

#include <cmath>
#include <filesystem>
#include <ostream>
#include <sstream>

#include "pdmp/cli.hpp"
#include "pdmp/coarea.hpp"
#include "pdmp/io.hpp"
#include "pdmp/ipp.hpp"
#include "pdmp/model_io.hpp"
#include "pdmp/parallel.hpp"
#include "pdmp/skeleton.hpp"

namespace pdmp::cli {

namespace {

using nlohmann::json;

std::string artifact(const Context& ctx, const std::string& name) {
  return (std::filesystem::path(ctx.settings.out_dir()) / name).string();
}

json report(const Context& ctx) {
  json config = ctx.settings.json();
  config.erase("out");
  config.erase("workers");
  return {{"command", config.value("command", "")}, {"config_hash", ctx.hash}, {"config", config}};
}

void finish(const Context& ctx, json rep, const std::string& name, bool pass) {
  rep["verdict"] = pass ? "pass" : "fail";
  io::write_json(artifact(ctx, name), rep);
}

void print(const Context& ctx, const Check& c) {
  ctx.out << (c.pass ? "  ok   " : "  FAIL ") << c.identity << ": " << io::format_number(c.lhs) << " vs "
          << io::format_number(c.rhs) << " (se " << io::format_number(c.se) << ")\n";
}

EstimatorConfig estimator(const Settings& s) {
  EstimatorConfig est;
  est.burn_in_fraction = s.number("/simulation/burn_in");
  est.batches = s.count("/simulation/batches");
  if (!(est.burn_in_fraction >= 0.0 && est.burn_in_fraction < 1.0))
    throw ConfigError("cli", "burn-in fraction must lie in [0, 1)");
  return est;
}

EmpiricalMeasure sample_invariant(const Context& ctx, const ModelSpec& model) {
  const Settings& s = ctx.settings;
  SamplingConfig sc;
  sc.burn_in_fraction = s.number("/simulation/burn_in");
  sc.stride = s.positive("/simulation/stride");
  const auto samples = static_cast<double>(s.count("/simulation/samples"));
  sc.horizon = std::max(samples - 1.0, 1.0) * sc.stride / (1.0 - sc.burn_in_fraction);
  sc.seed = s.seed() + 1;  // independent of the long-run path (seed, stream 0)
  return estimate_invariant(model, sc, s.integrator(), s.workers());
}

RegionSpec region(const Settings& s, const NonInteractingSpec& spec) {
  RegionSpec r;
  r.d = s.number("/region/d");
  r.k = static_cast<int>(s.integer("/region/k"));
  r.A = s.has("/region/A") ? s.number("/region/A") : spec.A;
  if (r.d < 0.0 || r.k < 0 || r.A < 0.0) throw ConfigError("cli", "region needs d, k, A >= 0");
  return r;
}

TestFunction constant_one() {
  return {"one", [](const State&) { return 1.0; }, [](const State& x) { return State::Zero(x.size()); }};
}

// Representation formula and one IPP level on time-sampled m-hat.
std::vector<Check> sample_checks(const Context& ctx, const ModelSpec& model, json& notes) {
  const Settings& s = ctx.settings;
  std::vector<Check> out;
  if (!model.house_of_cards()) {
    notes.push_back("representation formula skipped: jumps are not house-of-cards");
    return out;
  }
  const IntegratorConfig cfg = s.integrator();
  const EmpiricalMeasure m = sample_invariant(ctx, model);
  const TestFunction sin1 = test_function_suite(model.dimension())[2];
  const RepresentationResult rep = representation_rhs(model, m, {constant_one(), sin1}, cfg, s.workers(),
                                                      s.count("/simulation/batches"));
  if (rep.capped > 0) notes.push_back(std::to_string(rep.capped) + " samples reached max_time before truncation");
  Check one = compare("representation/one", rep.values[0], {1.0, 0.0});
  one.pass = std::abs(one.lhs - 1.0) <= std::max(0.01, 3.0 * one.se);
  out.push_back(one);
  out.push_back(compare("representation/sin_x1", rep.values[1], m.mean(sin1, s.count("/simulation/batches"))));

  const NonInteractingSpec* spec = model.structure();
  if (spec == nullptr) {
    notes.push_back("integration by parts skipped: model is not non-interacting");
    return out;
  }
  const RegionSpec reg = region(s, *spec);
  double lo = 0.0, hi = 0.0;
  if (s.has("/ipp/lo") && s.has("/ipp/hi")) {
    lo = s.number("/ipp/lo");
    hi = s.number("/ipp/hi");
  } else if (const NeuronParams* p = model.neuron()) {
    lo = (reg.k + 2) * reg.A + 0.05 * p->v_star;
    hi = p->v_star - reg.d / p->lambda - 0.05 * p->v_star;
  } else {
    notes.push_back("integration by parts skipped: pass --g-lo and --g-hi for this model");
    return out;
  }
  if (!(hi > lo)) {
    notes.push_back("integration by parts skipped: the region leaves no room for a test function");
    return out;
  }
  const ScalarTest g = bump_test_function(lo, hi);
  const IdentityCheck ic = ipp_check(model, constant_one(), g, reg, m, cfg, s.workers());
  out.push_back({"ipp/H=1", ic.lhs, ic.rhs, ic.se, ic.pass});
  if (model.dimension() == 1) {
    const BoundCheck b = ipp_bound_check(model, g, m);
    out.push_back({"ipp-bound", std::abs(b.m_gprime), b.bound, b.se, b.pass});
  }
  return out;
}

std::vector<Check> identity_checks(const Context& ctx, const ModelSpec& model, json& notes) {
  const Settings& s = ctx.settings;
  const IntegratorConfig cfg = s.integrator();
  const PathRecord path = simulate_path(model, State::Zero(model.dimension()),
                                        StopRule{s.positive("/simulation/horizon"), std::nullopt},
                                        RngSpec{s.seed(), 0}, cfg);
  std::vector<Check> checks = long_run_checks(model, path, cfg, estimator(s));
  for (Check& c : sample_checks(ctx, model, notes)) checks.push_back(std::move(c));
  return checks;
}

bool summarize(const Context& ctx, const std::vector<Check>& checks, json& rep) {
  bool pass = true;
  rep["identities"] = json::array();
  for (const Check& c : checks) {
    print(ctx, c);
    rep["identities"].push_back(c.to_json());
    pass = pass && c.pass;
  }
  return pass;
}

}  // namespace

ModelSpec load_model(const Settings& s) {
  if (!s.has("/model") || !s.json().at("model").is_object())
    throw ConfigError("cli", "configuration has no model object");
  return model_from_json(s.json().at("model"));
}

bool run_simulate(const Context& ctx) {
  const Settings& s = ctx.settings;
  const ModelSpec model = load_model(s);
  const IntegratorConfig cfg = s.integrator();
  StopRule stop;
  if (s.has("/simulation/horizon")) stop.horizon = s.positive("/simulation/horizon");
  if (s.has("/simulation/max_jumps")) {
    const long long k = s.integer("/simulation/max_jumps");
    if (k < 0) throw ConfigError("cli", "jump count must be >= 0");
    stop.max_jumps = static_cast<std::size_t>(k);
  }
  if (!stop.horizon && !stop.max_jumps) throw ConfigError("cli", "simulate needs a horizon or a jump count");
  State x0 = State::Zero(model.dimension());
  if (s.has("/simulation/start")) {
    const auto v = s.numbers("/simulation/start");
    if (static_cast<int>(v.size()) != model.dimension()) throw ConfigError("cli", "start state has the wrong dimension");
    x0 = Eigen::Map<const State>(v.data(), model.dimension());
  }

  const std::size_t paths = s.count("/simulation/paths");
  std::vector<PathRecord> records(paths);
  std::vector<PathCheck> verdicts(paths);
  parallel_for(paths, s.workers(), [&](std::size_t p) {
    records[p] = simulate_path(model, x0, stop, RngSpec{s.seed(), p}, cfg);
    verdicts[p] = check_path(model, records[p], cfg);
  });

  json rep = report(ctx);
  rep["paths"] = json::array();
  rep["artifacts"] = json::array();
  bool pass = true;
  for (std::size_t p = 0; p < paths; ++p) {
    const std::string name = "path_" + std::to_string(p + 1) + ".csv";
    io::write_text(artifact(ctx, name), io::path_table(records[p]).str());
    const PathCheck& c = verdicts[p];
    const bool ok = c.post_states_exact && c.resets_exact && c.times_increasing && c.max_reflow_error <= 1e-12;
    pass = pass && ok;
    rep["artifacts"].push_back(name);
    rep["paths"].push_back({{"path", p + 1},
                            {"jumps", records[p].jumps()},
                            {"final_time", records[p].final_time},
                            {"final_state", io::state_json(records[p].final_state)},
                            {"max_reflow_error", c.max_reflow_error},
                            {"post_states_exact", c.post_states_exact},
                            {"resets_exact", c.resets_exact},
                            {"times_increasing", c.times_increasing}});
    ctx.out << "path " << p + 1 << ": " << records[p].jumps() << " jumps, final time "
            << io::format_number(records[p].final_time) << "\n";
  }
  finish(ctx, rep, "simulate.json", pass);
  return pass;
}

bool run_check_good(const Context& ctx) {
  const Settings& s = ctx.settings;
  const ModelSpec model = load_model(s);
  const IntegratorConfig cfg = s.integrator();
  const int N = model.dimension();
  BoxSpec box;
  box.lo = s.number("/schedule/lo");
  box.hi = s.number("/schedule/hi");
  box.draws = static_cast<std::size_t>(s.integer("/schedule/draws"));
  box.seed = s.seed();
  if (!(box.hi > box.lo)) throw ConfigError("cli", "search box needs hi > lo");
  std::optional<double> threshold;
  if (s.has("/schedule/threshold")) threshold = s.number("/schedule/threshold");

  std::vector<std::vector<int>> sequences;
  const bool single = s.has("/schedule/indices");
  if (single) {
    std::vector<int> idx;
    for (double v : s.numbers("/schedule/indices")) {
      if (v < 1 || v > N || v != std::floor(v)) throw ConfigError("cli", "indices must lie in 1..N");
      idx.push_back(static_cast<int>(v) - 1);
    }
    if (idx.empty()) throw ConfigError("cli", "empty index sequence");
    sequences.push_back(idx);
  } else {
    const std::size_t length = s.has("/schedule/length") ? s.count("/schedule/length") : static_cast<std::size_t>(N);
    sequences = enumerate_index_sequences(N, length);
  }
  const std::size_t len = sequences.front().size();
  std::vector<double> times(len, 0.5);
  if (s.has("/schedule/times")) times = s.numbers("/schedule/times");
  if (times.size() != len) throw ConfigError("cli", "need one time per jump index (t_1..t_{n+1})");
  for (double t : times)
    if (!(t >= 0.0)) throw ConfigError("cli", "times must be >= 0");

  json rep = report(ctx);
  rep["certificates"] = json::array();
  io::CsvTable summary({"indices", "worst_min_singular_value", "threshold", "good"});
  bool any_good = false;
  bool all_good = true;
  for (const auto& seq : sequences) {
    const JumpSchedule sched{times, seq};
    const SweepReport sw = sweep_box(model, sched, box, cfg, threshold, s.workers());
    const SweepRow& worst = sw.rows[sw.worst];
    json idx = json::array();
    std::string label;
    for (int i : seq) {
      idx.push_back(i + 1);
      label += (label.empty() ? "" : " ") + std::to_string(i + 1);
    }
    rep["certificates"].push_back({{"indices", idx},
                                   {"times", times},
                                   {"worst_y", io::state_json(worst.y)},
                                   {"min_sv", worst.min_singular_value},
                                   {"threshold", worst.threshold},
                                   {"starts", sw.rows.size()},
                                   {"verdict", sw.good ? "good" : "not good"}});
    summary.add_row({label, io::format_number(worst.min_singular_value), io::format_number(worst.threshold),
                     sw.good ? "true" : "false"});
    any_good = any_good || sw.good;
    all_good = all_good && sw.good;
    if (single) io::write_text(artifact(ctx, "sweep.csv"), io::sweep_table(sw).str());
    ctx.out << "indices " << label << ": min sv " << io::format_number(worst.min_singular_value)
            << (sw.good ? " good" : " not good") << "\n";
  }
  rep["artifacts"] = json::array({single ? "sweep.csv" : "sequences.csv"});
  if (!single) io::write_text(artifact(ctx, "sequences.csv"), summary.str());
  const bool pass = single ? all_good : any_good;
  finish(ctx, rep, "goodness.json", pass);
  return pass;
}

bool run_verify_identities(const Context& ctx) {
  const ModelSpec model = load_model(ctx.settings);
  json rep = report(ctx);
  json notes = json::array();
  const bool pass = summarize(ctx, identity_checks(ctx, model, notes), rep);
  rep["notes"] = notes;
  for (const auto& n : notes) ctx.out << "  note: " << n.get<std::string>() << "\n";
  finish(ctx, rep, "identities.json", pass);
  return pass;
}

bool run_estimate_density(const Context& ctx) {
  const Settings& s = ctx.settings;
  const ModelSpec model = load_model(s);
  const long long coord1 = s.integer("/density/coord");
  if (coord1 < 1 || coord1 > model.dimension()) throw ConfigError("cli", "coordinate must lie in 1..N");
  const int coord = static_cast<int>(coord1 - 1);
  const EmpiricalMeasure m = sample_invariant(ctx, model);
  const GridDensity hist = histogram(m, coord);
  const GridDensity k = kde(m, coord, s.count("/density/cells"));
  const std::string suffix = "_" + std::to_string(coord1) + ".csv";
  io::write_text(artifact(ctx, "histogram" + suffix), io::grid_table(hist).str());
  io::write_text(artifact(ctx, "kde" + suffix), io::grid_table(k).str());

  json rep = report(ctx);
  rep["samples"] = m.size();
  rep["provenance"] = m.provenance;
  rep["histogram"] = {{"method", hist.method}, {"bins", hist.axes[0].count}, {"width", hist.axes[0].width()}};
  rep["kde"] = {{"method", k.method}, {"bandwidth", *k.bandwidth}, {"cells", k.axes[0].count}};
  rep["artifacts"] = json::array({"histogram" + suffix, "kde" + suffix});
  if (const NonInteractingSpec* spec = model.structure()) {
    const RegionSpec reg = region(s, *spec);
    const auto order = static_cast<int>(s.count("/density/order"));
    const std::vector<double> sup = smoothness_probe(k, *spec, reg, order);
    rep["probe"] = {{"region", {{"d", reg.d}, {"k", reg.k}, {"A", reg.A}}}, {"order", order}, {"sup", sup}};
    for (int o = 1; o <= order; ++o)
      ctx.out << "  sup |FD order " << o << "| = " << io::format_number(sup[static_cast<std::size_t>(o - 1)]) << "\n";
  }
  ctx.out << "  " << m.size() << " samples, bandwidth " << io::format_number(*k.bandwidth) << "\n";
  finish(ctx, rep, "density.json", true);
  return true;
}

bool run_propagate_density(const Context& ctx) {
  const Settings& s = ctx.settings;
  const ModelSpec model = load_model(s);
  const NonInteractingSpec* spec = model.structure();
  if (spec == nullptr) throw ConfigError("cli", "propagate-density needs a non-interacting model");
  const int N = model.dimension();
  const CompactDensity r =
      normalize_product_input(*spec, smooth_bump(s.number("/propagate/r_lo"), s.number("/propagate/r_hi")));
  IntegratorConfig cfg = s.integrator();
  IntegratorConfig generic_cfg = cfg;
  generic_cfg.use_closed_form = false;
  const CoareaPropagator main(*spec, r, cfg);
  const CoareaPropagator generic(*spec, r, generic_cfg);

  const double limit = main.flow_limit();
  const double lo = s.has("/propagate/lo") ? s.number("/propagate/lo") : std::min(0.0, limit);
  const double hi = s.has("/propagate/hi") ? s.number("/propagate/hi") : std::max(0.0, limit);
  if (!(hi > lo)) throw ConfigError("cli", "propagation box needs hi > lo");
  const std::size_t grid = s.count("/propagate/grid");
  const std::size_t quad = s.count("/propagate/quad");
  if (std::pow(static_cast<double>(std::max(grid, quad)), N) > 4e6)
    throw ConfigError("cli", "grid too large for this dimension");

  // Closed form exists for neurons with one constant rate and one weight.
  std::optional<std::pair<double, double>> closed;  // (f, a)
  if (const NeuronParams* p = model.neuron()) {
    bool ok = std::all_of(p->rates.begin(), p->rates.end(), [&](const RateFunction& f) {
      return f.is_constant() && f(0.0) == p->rates.front()(0.0);
    });
    const double a = N > 1 ? p->weights(0, 1) : 0.0;
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j)
        if (i != j && p->weights(i, j) != a) ok = false;
    if (ok) closed = std::make_pair(p->rates.front()(0.0), a);
  }

  const std::vector<double> los(static_cast<std::size_t>(N), lo), his(static_cast<std::size_t>(N), hi);
  const auto table = tabulate(generic, los, his, grid, s.workers());
  std::vector<std::string> header;
  for (int l = 1; l <= N; ++l) header.push_back("y_" + std::to_string(l));
  for (int l = 1; l <= N; ++l) header.push_back("q_" + std::to_string(l));
  header.push_back("q_total");
  if (closed) header.push_back("closed_total");
  io::CsvTable csv(header);
  double max_rel = 0.0;
  std::size_t compared = 0;
  const NeuronParams* np = model.neuron();
  for (const auto& pt : table) {
    std::vector<double> row(pt.y.data(), pt.y.data() + N);
    row.insert(row.end(), pt.q.begin(), pt.q.end());
    row.push_back(pt.q_total);
    if (closed) {
      double total = 0.0;
      for (int i = 0; i < N; ++i) {
        const double c = neuron_q_closed_form(N, np->lambda, np->v_star, closed->first, closed->second, r, i, pt.y);
        total += c;
        if (c > 1e-6) {
          max_rel = std::max(max_rel, std::abs(pt.q[static_cast<std::size_t>(i)] / c - 1.0));
          ++compared;
        }
      }
      row.push_back(total);
    }
    csv.add_numbers(row);
  }
  io::write_text(artifact(ctx, "q_grid.csv"), csv.str());
  const double integral = integrate_total(main, los, his, quad, s.workers());

  json rep = report(ctx);
  rep["input_scale"] = r.scale;
  rep["flow_limit"] = limit;
  rep["grid_points"] = table.size();
  rep["integral"] = integral;
  bool pass = std::abs(integral - 1.0) <= 1e-2;
  if (closed) {
    rep["closed_form"] = {{"compared", compared}, {"max_rel_diff", max_rel}};
    pass = pass && max_rel < 1e-3;
    ctx.out << "  generic vs closed form: max rel diff " << io::format_number(max_rel) << " over " << compared
            << " values\n";
  }
  ctx.out << "  integral of sum q_i: " << io::format_number(integral) << "\n";
  rep["artifacts"] = json::array({"q_grid.csv"});
  finish(ctx, rep, "propagate.json", pass);
  return pass;
}

bool run_neuron_demo(const Context& ctx) {
  const Settings& s = ctx.settings;
  const ModelSpec model = load_model(s);
  const NeuronParams* p = model.neuron();
  if (p == nullptr) throw ConfigError("cli", "neuron-demo needs a neuron model");
  const IntegratorConfig cfg = s.integrator();
  const int N = model.dimension();
  const double tol = cfg.use_closed_form ? 1e-6 : 1e-4;

  Rng rng({s.seed(), 7});
  double worst = 0.0;
  const std::size_t trials = s.count("/demo/schedules");
  for (std::size_t k = 0; k < trials; ++k) {
    JumpSchedule sched;
    for (int i = 0; i < N; ++i) {
      sched.indices.push_back(i);
      sched.times.push_back(rng.uniform(0.0, 2.0));
    }
    State y(N);
    for (int l = 0; l < N; ++l) y[l] = rng.uniform(-2.0, 2.0);
    const double exact = neuron_determinant(sched, p->lambda, p->v_star);
    const double det = derivation_matrix(model, y, sched, cfg).sigma.determinant();
    worst = std::max(worst, std::abs(det / exact - 1.0));
  }
  ctx.out << "  det sigma vs closed form: max rel error " << io::format_number(worst) << " over " << trials
          << " schedules\n";
  json rep = report(ctx);
  rep["determinant"] = {{"schedules", trials}, {"max_rel_error", worst}, {"tolerance", tol},
                        {"verdict", worst < tol ? "pass" : "fail"}};
  json notes = json::array();
  bool pass = summarize(ctx, identity_checks(ctx, model, notes), rep) && worst < tol;
  const RegularityThreshold th = regularity_threshold(N, neuron_structure(*p).rate_floor(), p->lambda);
  rep["threshold"] = {{"k_star", th.guaranteed ? json(th.k_star) : json(nullptr)}, {"guaranteed", th.guaranteed}};
  rep["notes"] = notes;
  finish(ctx, rep, "neuron_demo.json", pass);
  return pass;
}

bool run_threshold(const Context& ctx) {
  const Settings& s = ctx.settings;
  const auto N = static_cast<int>(s.count("/threshold/N"));
  const double f0 = s.number("/threshold/f0");
  const double B = s.number("/threshold/B");
  if (!(B > 0.0)) throw ConfigError("cli", "B must be positive");
  if (f0 < 0.0) throw ConfigError("cli", "f0 must be >= 0");
  const RegularityThreshold th = regularity_threshold(N, f0, B);
  json rep = report(ctx);
  rep["bound"] = th.bound;
  rep["k_star"] = th.guaranteed ? json(th.k_star) : json(nullptr);
  rep["guaranteed"] = th.guaranteed;
  if (th.guaranteed)
    ctx.out << "k* = " << th.k_star << "\n";
  else
    ctx.out << "k* = none (N f0 / B - (N-1) = " << io::format_number(th.bound) << ")\n";
  finish(ctx, rep, "threshold.json", true);
  return true;
}

}  // namespace pdmp::cli
