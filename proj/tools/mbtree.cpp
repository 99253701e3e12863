// mbtree: build and match host-level MLTree signatures for encrypted C&C
// traffic. One binary, subcommand style; see --help for the full surface.

#include <CLI11.hpp>
#include <json.hpp>

#include <mbtree/mbtree.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace mbtree;

// Scoring and pipeline knobs shared by several subcommands. Flags override
// config-file values, which override built-in defaults; ->count() tells the
// layering which flags were actually given.
struct CommonFlags {
  double alpha{0}, beta{0}, theta{0}, rt_clamp{0}, udp_timeout{0};
  uint32_t max_level{0};
  std::string stoplist;
  std::vector<std::string> internal;

  CLI::Option* alpha_o{nullptr};
  CLI::Option* beta_o{nullptr};
  CLI::Option* theta_o{nullptr};
  CLI::Option* rt_clamp_o{nullptr};
  CLI::Option* udp_timeout_o{nullptr};
  CLI::Option* max_level_o{nullptr};
  CLI::Option* stoplist_o{nullptr};
  CLI::Option* internal_o{nullptr};

  void attach_scoring(CLI::App* cmd) {
    alpha_o = cmd->add_option("--alpha", alpha, "path similarity ratio");
    beta_o = cmd->add_option("--beta", beta, "head signature ratio");
    theta_o = cmd->add_option("--theta", theta, "detection threshold");
    rt_clamp_o = cmd->add_option("--rt-clamp", rt_clamp, "time ratio clamp");
  }
  void attach_tree(CLI::App* cmd) {
    max_level_o = cmd->add_option("--max-level", max_level, "tree depth L");
    stoplist_o = cmd->add_option("--stoplist", stoplist, "stoplist file, one DirPiz per line");
  }
  void attach_pipeline(CLI::App* cmd) {
    udp_timeout_o = cmd->add_option("--udp-timeout", udp_timeout, "UDP session gap in seconds");
    internal_o = cmd->add_option("--internal", internal, "internal CIDR prefixes")
                     ->delimiter(',');
  }

  void apply(Config& cfg) const {
    if (alpha_o && alpha_o->count()) cfg.alpha = alpha;
    if (beta_o && beta_o->count()) cfg.beta = beta;
    if (theta_o && theta_o->count()) cfg.theta = theta;
    if (rt_clamp_o && rt_clamp_o->count()) cfg.rt_clamp = rt_clamp;
    if (udp_timeout_o && udp_timeout_o->count()) cfg.udp_timeout = udp_timeout;
    if (max_level_o && max_level_o->count()) cfg.max_level = max_level;
    if (stoplist_o && stoplist_o->count()) cfg.stoplist_path = stoplist;
    if (internal_o && internal_o->count()) cfg.internal_prefixes = internal;
  }
};

std::set<DirPiz> load_stoplist(const Config& cfg) {
  if (cfg.stoplist_path.empty()) return {};
  return read_stoplist(cfg.stoplist_path);
}

PipelineOptions pipeline_options(const Config& cfg, CleanMode mode) {
  PipelineOptions opt;
  opt.mode = mode;
  opt.udp_timeout = cfg.udp_timeout;
  for (const auto& p : cfg.internal_prefixes) opt.internal_prefixes.push_back(parse_cidr(p));
  return opt;
}

// Data goes to --out when given, stdout otherwise.
struct Sink {
  std::ofstream file;
  std::ostream* os{&std::cout};
  explicit Sink(const std::string& path) {
    if (path.empty()) return;
    file.open(path);
    if (!file) throw IoError("cannot write " + path);
    os = &file;
  }
  std::ostream& out() { return *os; }
};

ScoreParams score_params(const Config& cfg, uint32_t L) {
  ScoreParams p;
  p.alpha = cfg.alpha;
  p.beta = cfg.beta;
  p.theta = cfg.theta;
  p.rt_clamp = cfg.rt_clamp;
  p.L = L;
  validate_params(p);
  return p;
}

struct BuildArgs {
  std::vector<std::string> pcaps;
  std::string label, cc_ips, out;
};

int run_build(const BuildArgs& a, const Config& cfg) {
  PipelineOptions opt;
  std::set<IpAddr> cc;
  if (!a.cc_ips.empty()) {
    cc = read_ip_list(a.cc_ips);
    opt = pipeline_options(cfg, CleanMode::Training);
    opt.cc_ips = cc;
  } else {
    opt = pipeline_options(cfg, CleanMode::Testing);
  }
  auto stop = load_stoplist(cfg);

  PipelineStats stats;
  auto traces = ingest_pcaps(a.pcaps, opt, &stats);
  std::unique_ptr<Signature> sig;
  for (const auto& trace : traces) {
    if (trace.sessions.empty()) continue;
    Signature s = build_signature(trace, a.label, cfg.max_level, stop);
    if (!sig)
      sig = std::make_unique<Signature>(std::move(s));
    else
      merge_into_signature(*sig, s);
  }
  if (!sig) throw InputError("no usable sessions in input; cannot build a signature");

  SignatureSet set;
  set.L = cfg.max_level;
  if (!a.out.empty() && std::filesystem::exists(a.out)) {
    set = read_signatures(a.out);
    if (set.L != cfg.max_level)
      throw InputError("existing signature file has L=" + std::to_string(set.L) +
                       ", requested L=" + std::to_string(cfg.max_level));
  }
  bool merged = false;
  for (auto& existing : set.signatures)
    if (existing.label == sig->label) {
      merge_into_signature(existing, *sig);
      merged = true;
      break;
    }
  if (!merged) set.signatures.push_back(std::move(*sig));

  if (a.out.empty()) {
    write_signatures(set, std::cout);
  } else {
    write_signatures(set, a.out);
  }
  std::cerr << "mbtree: read " << stats.read.frames << " frames, " << traces.size()
            << " host(s), label '" << a.label << "'" << (merged ? " (merged)" : "") << '\n';
  return 0;
}

struct DetectArgs {
  std::vector<std::string> pcaps;
  std::string signatures, format{"jsonl"}, out;
};

int run_detect(const DetectArgs& a, const Config& cfg) {
  auto set = read_signatures(a.signatures);
  auto params = score_params(cfg, set.L);
  auto stop = load_stoplist(cfg);
  auto traces = ingest_pcaps(a.pcaps, pipeline_options(cfg, CleanMode::Testing));
  auto reports = detect_all(traces, set.signatures, params, stop, cfg.jobs);

  Sink sink(a.out);
  if (a.format == "csv")
    write_report_csv(reports, sink.out());
  else
    write_report_jsonl(reports, sink.out());
  size_t hits = 0;
  for (const auto& r : reports) hits += r.malicious;
  std::cerr << "mbtree: scored " << reports.size() << " host(s), " << hits << " malicious\n";
  return 0;
}

struct EvalArgs {
  std::string truth, reports, out;
};

int run_eval(const EvalArgs& a, const Config&) {
  auto labels = read_labels_csv(a.truth);
  auto lines = read_report_jsonl(a.reports);
  std::vector<LabeledOutcome> outcomes;
  outcomes.reserve(lines.size());
  for (const auto& line : lines) {
    auto it = labels.find(line.host);
    if (it == labels.end()) throw InputError("no truth label for host " + line.host);
    LabeledOutcome o;
    o.host = line.host;
    o.true_label = it->second;
    o.malicious = line.malicious;
    o.predicted_label = line.malicious ? line.label : std::string(kBenignLabel);
    outcomes.push_back(std::move(o));
  }
  Metrics m = metrics(outcomes);
  nlohmann::json j = {{"hosts", outcomes.size()},
                      {"fpr", m.fpr},
                      {"fnr", m.fnr},
                      {"acc", m.acc},
                      {"macro_f1", m.macro_f1}};
  Sink sink(a.out);
  sink.out() << j.dump(2) << '\n';
  return 0;
}

struct TuneArgs {
  std::vector<std::string> train, test;
  std::vector<uint32_t> Ls;
  std::vector<double> alphas, betas, thetas;
  std::string out;
};

std::vector<LabeledTrace> load_labeled(const std::vector<std::string>& pairs,
                                       const PipelineOptions& opt) {
  std::vector<LabeledTrace> out;
  for (const auto& pair : pairs) {
    auto eq = pair.find('=');
    std::string label = pair.substr(0, eq);
    std::string path = pair.substr(eq + 1);
    for (auto& trace : ingest_pcaps({path}, opt)) out.push_back({label, std::move(trace)});
  }
  return out;
}

int run_tune(const TuneArgs& a, const Config& cfg) {
  auto opt = pipeline_options(cfg, CleanMode::Testing);
  auto train = load_labeled(a.train, opt);
  auto test = load_labeled(a.test, opt);

  SweepGrid grid;
  grid.Ls = a.Ls.empty() ? std::vector<uint32_t>{cfg.max_level} : a.Ls;
  grid.alphas = a.alphas.empty() ? std::vector<double>{cfg.alpha} : a.alphas;
  grid.betas = a.betas.empty() ? std::vector<double>{cfg.beta} : a.betas;
  grid.thetas = a.thetas;  // empty: 10 log-spaced points per L
  auto rows = sweep(train, test, grid, load_stoplist(cfg), cfg.rt_clamp, cfg.jobs);
  Sink sink(a.out);
  write_sweep_csv(rows, sink.out());
  std::cerr << "mbtree: swept " << rows.size() << " grid cell(s)\n";
  return 0;
}

struct SimulateArgs {
  std::string tmpl, out;
  uint32_t hosts{1};
  uint64_t seed{1};
};

int run_simulate(const SimulateArgs& a, const Config&) {
  auto t = read_template(a.tmpl);
  std::filesystem::create_directories(a.out);
  std::ofstream labels(a.out + "/labels.csv");
  if (!labels) throw IoError("cannot write " + a.out + "/labels.csv");
  labels << "host,label\n";
  for (uint32_t i = 0; i < a.hosts; ++i) {
    IpAddr host_ip = 0x0A000002u + i;
    HostTrace trace = gen_host(t, a.seed + i, host_ip);
    std::ostringstream name;
    name << a.out << '/' << t.label << '-' << std::setw(3) << std::setfill('0') << i << ".pcap";
    gen_pcap(trace, name.str());
    labels << ip_to_string(host_ip) << ',' << t.label << '\n';
  }
  std::cerr << "mbtree: wrote " << a.hosts << " host pcap(s) to " << a.out << '\n';
  return 0;
}

struct TheoryArgs {
  uint32_t L{10}, m{10};
  uint64_t na{100};
  double p{3e-3};
  double trials{1e7};
  uint64_t seed{42};
  std::string out;
};

int run_theory_suggest(const TheoryArgs& a, const Config&) {
  auto s = suggest_threshold(a.L, a.na, a.m, a.p);
  nlohmann::json j = {{"n", s.n}, {"theta", s.theta}, {"saturated", s.saturated}};
  if (s.has_reference) j["reference"] = {{"n", s.reference_n}, {"theta", s.reference_theta}};
  Sink sink(a.out);
  sink.out() << j.dump(2) << '\n';
  return 0;
}

int run_theory_mc(const TheoryArgs& a, const Config& cfg) {
  auto trials = uint64_t(std::llround(a.trials));
  auto pmf = uniform_pmf();
  auto res = monte_carlo_collisions(trials, a.m, pmf, pmf, a.seed, cfg.jobs);
  nlohmann::json counts = nlohmann::json::array();
  nlohmann::json empirical = nlohmann::json::array();
  for (uint32_t n = 0; n <= a.m; ++n) {
    counts.push_back(res.counts[n]);
    empirical.push_back(res.empirical(n));
  }
  nlohmann::json j = {
      {"trials", res.trials}, {"m", a.m}, {"counts", counts}, {"empirical", empirical}};
  Sink sink(a.out);
  sink.out() << j.dump(2) << '\n';
  return 0;
}

const CLI::Validator LabelPath(
    [](std::string& s) {
      auto eq = s.find('=');
      return (eq == std::string::npos || eq == 0 || eq + 1 == s.size())
                 ? std::string("expected LABEL=PATH")
                 : std::string();
    },
    "LABEL=PATH");

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"host-level MLTree signatures for encrypted C&C traffic"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  unsigned jobs = 0;
  auto* config_o = app.add_option("--config", config_path, "key=value config file");
  auto* jobs_o = app.add_option("--jobs", jobs, "worker threads, 0 = all cores");

  BuildArgs build_a;
  auto* cmd_build = app.add_subcommand("build", "build a labeled signature from training pcaps");
  cmd_build->add_option("pcaps", build_a.pcaps, "training pcap files")
      ->required()
      ->check(CLI::ExistingFile);
  cmd_build->add_option("--label", build_a.label, "signature label")->required();
  cmd_build->add_option("--cc-ips", build_a.cc_ips, "known C&C addresses, one per line")
      ->check(CLI::ExistingFile);
  cmd_build->add_option("-o,--out", build_a.out, "signature file; merged per label if present");
  CommonFlags build_f;
  build_f.attach_tree(cmd_build);
  build_f.attach_pipeline(cmd_build);

  DetectArgs detect_a;
  auto* cmd_detect = app.add_subcommand("detect", "score testing pcaps against signatures");
  cmd_detect->add_option("pcaps", detect_a.pcaps, "testing pcap files")
      ->required()
      ->check(CLI::ExistingFile);
  cmd_detect->add_option("--signatures", detect_a.signatures, "signature file")->required();
  cmd_detect->add_option("--format", detect_a.format, "report format")
      ->check(CLI::IsMember({"jsonl", "csv"}));
  cmd_detect->add_option("--out", detect_a.out, "report file, default stdout");
  CommonFlags detect_f;
  detect_f.attach_scoring(cmd_detect);
  detect_f.attach_tree(cmd_detect);
  detect_f.attach_pipeline(cmd_detect);

  EvalArgs eval_a;
  auto* cmd_eval = app.add_subcommand("eval", "score a detection report against truth labels");
  cmd_eval->add_option("--truth", eval_a.truth, "host,label csv")->required();
  cmd_eval->add_option("--reports", eval_a.reports, "jsonl detection report")->required();
  cmd_eval->add_option("--out", eval_a.out, "metrics file, default stdout");

  TuneArgs tune_a;
  auto* cmd_tune = app.add_subcommand("tune", "sweep a parameter grid over labeled pcaps");
  cmd_tune->add_option("--train", tune_a.train, "labeled training pcap")
      ->required()
      ->check(LabelPath);
  cmd_tune->add_option("--test", tune_a.test, "labeled testing pcap")
      ->required()
      ->check(LabelPath);
  cmd_tune->add_option("--Ls", tune_a.Ls, "tree depths")->delimiter(',');
  cmd_tune->add_option("--alphas", tune_a.alphas, "alpha grid")->delimiter(',');
  cmd_tune->add_option("--betas", tune_a.betas, "beta grid")->delimiter(',');
  cmd_tune->add_option("--thetas", tune_a.thetas, "theta grid, default 10 log-spaced per L")
      ->delimiter(',');
  cmd_tune->add_option("--out", tune_a.out, "csv file, default stdout");
  CommonFlags tune_f;
  tune_f.attach_scoring(cmd_tune);
  tune_f.attach_tree(cmd_tune);
  tune_f.attach_pipeline(cmd_tune);

  SimulateArgs sim_a;
  auto* cmd_sim = app.add_subcommand("simulate", "generate synthetic host pcaps from a template");
  cmd_sim->add_option("--template", sim_a.tmpl, "traffic template json")->required();
  cmd_sim->add_option("--hosts", sim_a.hosts, "number of hosts")->check(CLI::PositiveNumber);
  cmd_sim->add_option("--seed", sim_a.seed, "base seed, host i uses seed+i");
  cmd_sim->add_option("--out", sim_a.out, "output directory")->required();

  TheoryArgs theory_a;
  auto* cmd_theory = app.add_subcommand("theory", "collision probability tools");
  cmd_theory->require_subcommand(1);
  auto* cmd_suggest = cmd_theory->add_subcommand("suggest", "suggest a detection threshold");
  cmd_suggest->add_option("--L", theory_a.L, "tree depth");
  cmd_suggest->add_option("--na", theory_a.na, "deployment host count")->required();
  cmd_suggest->add_option("--m", theory_a.m, "compared sequence length");
  cmd_suggest->add_option("--p", theory_a.p, "per-position collision probability");
  cmd_suggest->add_option("--out", theory_a.out, "output file, default stdout");
  auto* cmd_mc = cmd_theory->add_subcommand("mc", "Monte Carlo collision counts");
  cmd_mc->add_option("--trials", theory_a.trials, "trial count")->check(CLI::PositiveNumber);
  cmd_mc->add_option("--m", theory_a.m, "compared sequence length");
  cmd_mc->add_option("--seed", theory_a.seed, "rng seed");
  cmd_mc->add_option("--out", theory_a.out, "output file, default stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    Config cfg;
    if (config_o->count()) load_config_file(config_path, cfg);
    if (jobs_o->count()) cfg.jobs = jobs;
    build_f.apply(cfg);
    detect_f.apply(cfg);
    tune_f.apply(cfg);

    if (*cmd_build) return run_build(build_a, cfg);
    if (*cmd_detect) return run_detect(detect_a, cfg);
    if (*cmd_eval) return run_eval(eval_a, cfg);
    if (*cmd_tune) return run_tune(tune_a, cfg);
    if (*cmd_sim) return run_simulate(sim_a, cfg);
    if (*cmd_theory) {
      if (*cmd_suggest) return run_theory_suggest(theory_a, cfg);
      return run_theory_mc(theory_a, cfg);
    }
  } catch (const std::exception& e) {
    std::cerr << "mbtree: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
