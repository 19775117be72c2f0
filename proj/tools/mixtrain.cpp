// mixtrain command-line front end: train / attack / verify / export-data, and
// rerun from a run manifest.

#include <charconv>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "CLI11.hpp"
#include "mixtrain/mixtrain.hpp"

namespace fs = std::filesystem;
using namespace mixtrain;

namespace {

constexpr const char* kToolVersion = "1.0.0";

// sysexits-style codes.
constexpr int kExitOk = 0;
constexpr int kExitDiverged = 2;
constexpr int kExitUsage = 64;
constexpr int kExitIo = 74;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string text(const std::string& v) { return v; }
std::string text(bool v) { return v ? "true" : "false"; }
// Floats use the shortest text that reads back to the same value.
template <typename T>
std::string text(const T& v) {
  if constexpr (std::is_floating_point_v<T>) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
  } else {
    std::ostringstream os;
    os << v;
    return os.str();
  }
}
template <typename T>
std::string text(const std::optional<T>& v) {
  return v ? text(*v) : std::string();
}

// Every option of a subcommand is registered here so that the resolved value
// can be written to the manifest and fed back on rerun.
class Registry {
 public:
  template <typename T>
  CLI::Option* option(CLI::App* app, const std::string& name, T& var, const std::string& help) {
    fields_.emplace_back(name, [&var] { return text(var); });
    return app->add_option("--" + name, var, help)->capture_default_str();
  }

  CLI::Option* flag(CLI::App* app, const std::string& name, bool& var, const std::string& help) {
    fields_.emplace_back(name, [&var] { return text(var); });
    flags_.insert(name);
    return app->add_flag("--" + name, var, help);
  }

  [[nodiscard]] std::vector<std::pair<std::string, std::string>> values() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [k, f] : fields_) out.emplace_back(k, f());
    return out;
  }

  [[nodiscard]] bool is_flag(const std::string& name) const { return flags_.count(name) > 0; }

 private:
  std::vector<std::pair<std::string, std::function<std::string()>>> fields_;
  std::set<std::string> flags_;
};

std::string timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

// Plain key=value text. Keys "tool", "version", "command", "started",
// "finished" and anything under "result." are informational.
struct Manifest {
  std::vector<std::pair<std::string, std::string>> entries;

  void set(const std::string& k, const std::string& v) {
    for (auto& [key, val] : entries) {
      if (key == k) {
        val = v;
        return;
      }
    }
    entries.emplace_back(k, v);
  }

  [[nodiscard]] std::optional<std::string> get(const std::string& k) const {
    for (const auto& [key, val] : entries) {
      if (key == k) return val;
    }
    return std::nullopt;
  }

  void write(const fs::path& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw model::IoError("cannot write manifest " + path.string());
    for (const auto& [k, v] : entries) out << k << '=' << v << '\n';
  }

  static Manifest read(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw model::IoError("cannot read manifest " + path.string());
    Manifest m;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw UsageError("malformed manifest line: " + line);
      m.entries.emplace_back(line.substr(0, eq), line.substr(eq + 1));
    }
    return m;
  }
};

bool informational(const std::string& key) {
  return key == "tool" || key == "version" || key == "command" || key == "started" ||
         key == "finished" || key.rfind("result.", 0) == 0;
}

// ---- data specs -----------------------------------------------------------

std::map<std::string, std::string> parse_kv(const std::string& s) {
  std::map<std::string, std::string> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (part.empty()) continue;
    const auto eq = part.find('=');
    if (eq == std::string::npos) throw UsageError("expected key=value in data spec, got '" + part + "'");
    out[part.substr(0, eq)] = part.substr(eq + 1);
  }
  return out;
}

template <typename T>
T kv_get(const std::map<std::string, std::string>& kv, const std::string& key, T fallback) {
  const auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  std::istringstream is(it->second);
  T v{};
  if (!(is >> v)) throw UsageError("bad value for '" + key + "' in data spec");
  return v;
}

// moons:n=..,noise=..,seed=..   blobs:n=..,k=..,spread=..,seed=..
// idx:images,labels             csv:path
data::Dataset load_data(const std::string& spec, const std::string& normalize, std::size_t limit) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw UsageError("data spec needs a kind prefix: " + spec);
  const std::string kind = spec.substr(0, colon);
  const std::string rest = spec.substr(colon + 1);
  data::Dataset ds;
  bool mnist_like = false;
  if (kind == "moons") {
    const auto kv = parse_kv(rest);
    ds = data::synth_moons(kv_get<std::size_t>(kv, "n", 400), kv_get<double>(kv, "noise", 0.08),
                           kv_get<std::uint64_t>(kv, "seed", 0));
  } else if (kind == "blobs") {
    const auto kv = parse_kv(rest);
    ds = data::synth_blobs(kv_get<std::size_t>(kv, "n", 400), kv_get<std::size_t>(kv, "k", 3),
                           kv_get<double>(kv, "spread", 0.05), kv_get<std::uint64_t>(kv, "seed", 0));
  } else if (kind == "idx") {
    const auto comma = rest.find(',');
    if (comma == std::string::npos) throw UsageError("idx spec is idx:<images>,<labels>");
    ds = data::load_idx(rest.substr(0, comma), rest.substr(comma + 1));
    mnist_like = true;
  } else if (kind == "csv") {
    ds = data::read_csv(rest);
  } else {
    throw UsageError("unknown data kind: " + kind);
  }
  if (limit > 0 && limit < ds.size()) ds = ds.slice(0, limit);
  if (normalize == "mnist" || (normalize == "auto" && mnist_like)) {
    ds = data::normalize(ds, data::mnist_normalization(ds.dim()));
  } else if (normalize != "none" && normalize != "auto") {
    throw UsageError("--normalize must be auto, none or mnist");
  }
  ds.validate();
  return ds;
}

std::vector<std::size_t> parse_sizes(const std::string& s) {
  std::vector<std::size_t> out;
  if (s.empty()) return out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      out.push_back(std::stoul(part));
    } catch (const std::exception&) {
      throw UsageError("bad layer width '" + part + "'");
    }
  }
  return out;
}

fs::path or_default(const std::string& given, const fs::path& base, const std::string& suffix) {
  if (!given.empty()) return given;
  return fs::path(base.string() + suffix);
}

// ---- subcommands ----------------------------------------------------------

struct DataOptions {
  std::string data;
  std::string normalize = "auto";
  std::size_t limit = 0;

  void add(CLI::App* app, Registry& r) {
    r.option(app, "data", data, "moons:n=..,noise=..,seed=.. | blobs:... | idx:<images>,<labels> | csv:<path>")
        ->required();
    r.option(app, "normalize", normalize, "auto (mnist preset for idx), none, mnist");
    r.option(app, "limit", limit, "use only the first N samples (0 = all)");
  }
  [[nodiscard]] data::Dataset load() const { return load_data(data, normalize, limit); }
};

struct TrainOptions {
  DataOptions data;
  std::string scheme = "mixtrain";
  std::string hidden = "64,64";
  std::size_t epochs = 20;
  std::size_t batch_size = 50;
  std::string optimizer = "adam";
  double lr = 1e-3;
  double lr_decay = 0.6;
  std::size_t decay_every = 5;
  float epsilon = 0.1F;
  float eps_start = 0.01F;
  std::size_t warmup_epochs = 10;
  std::optional<std::size_t> k;
  std::optional<double> alpha0;
  std::optional<double> acc_target;
  int pgd_steps = 40;
  float pgd_step = 0.01F;
  std::uint64_t seed = 0;
  std::string out;
  std::string epoch_csv;
  std::string manifest;
};

struct AttackOptions {
  DataOptions data;
  std::string model;
  std::string attack = "pgd";
  float epsilon = 0.1F;
  int pgd_steps = 40;
  float pgd_step = 0.01F;
  int restarts = 1;
  int ia_iters = 20;
  float ia_step = 0.0F;
  float ia_eps0 = 0.0F;
  float ia_p = 2.0F;
  std::uint64_t seed = 0;
  std::string out;
  std::string manifest;
};

struct VerifyOptions {
  DataOptions data;
  std::string model;
  float epsilon = 0.1F;
  std::size_t threads = 1;
  int max_depth = 20;
  std::int64_t timeout_ms = 10000;
  bool no_era = false;
  int pgd_steps = 40;
  float pgd_step = 0.01F;
  std::uint64_t seed = 0;
  std::string out;
  std::string manifest;
};

struct ExportOptions {
  DataOptions data;
  std::string out;
};

attack::AttackConfig attack_config(const AttackOptions& o) {
  attack::AttackConfig c;
  c.kind = attack::parse_attack_kind(o.attack);
  c.epsilon = o.epsilon;
  c.pgd_steps = o.pgd_steps;
  c.pgd_step = o.pgd_step;
  c.restarts = o.restarts;
  c.interval_iterations = o.ia_iters;
  c.interval_step = o.ia_step;
  c.interval_eps0 = o.ia_eps0;
  c.interval_growth = o.ia_p;
  c.seed = o.seed;
  return c;
}

void finish_manifest(Manifest& m, const std::string& command, const Registry& reg,
                     const std::string& started) {
  Manifest out;
  out.set("tool", "mixtrain");
  out.set("version", kToolVersion);
  out.set("command", command);
  for (const auto& [k, v] : reg.values()) out.set(k, v);
  for (const auto& [k, v] : m.entries) out.set(k, v);
  out.set("started", started);
  out.set("finished", timestamp());
  m = std::move(out);
}

int run_train(const TrainOptions& o, const Registry& reg) {
  const auto started = timestamp();
  const auto scheme = train::parse_scheme(o.scheme);
  if (scheme != train::Scheme::mixtrain && (o.k || o.alpha0 || o.acc_target)) {
    throw UsageError("--k, --alpha0 and --acc-target only apply to --scheme mixtrain");
  }
  if (o.out.empty()) throw UsageError("--out is required");
  const auto ds = o.data.load();

  train::TrainConfig cfg;
  cfg.scheme = scheme;
  cfg.epochs = o.epochs;
  cfg.batch_size = o.batch_size;
  cfg.optimizer.kind = train::parse_optimizer(o.optimizer);
  cfg.optimizer.lr = o.lr;
  cfg.optimizer.decay = o.lr_decay;
  cfg.optimizer.decay_every = o.decay_every;
  cfg.epsilon = o.epsilon;
  cfg.epsilon_start = o.eps_start;
  cfg.warmup_epochs = o.warmup_epochs;
  cfg.k = o.k;
  if (o.alpha0) cfg.alpha0 = *o.alpha0;
  if (o.acc_target) cfg.acc_target = *o.acc_target;
  cfg.seed = o.seed;
  cfg.attack.epsilon = o.epsilon;
  cfg.attack.pgd_steps = o.pgd_steps;
  cfg.attack.pgd_step = o.pgd_step;
  cfg.attack.seed = o.seed;

  std::vector<std::size_t> sizes{ds.dim()};
  for (auto w : parse_sizes(o.hidden)) sizes.push_back(w);
  sizes.push_back(ds.num_classes);
  auto net = train::initial_network(sizes, o.seed);

  const fs::path out = o.out;
  const auto manifest_path = or_default(o.manifest, out, ".manifest");
  const auto csv_path = or_default(o.epoch_csv, out, ".epochs.csv");
  std::ofstream csv(csv_path, std::ios::trunc);
  if (!csv) throw model::IoError("cannot write " + csv_path.string());
  train::write_epoch_csv_header(csv);

  const std::size_t kp = cfg.k_prime(ds.size());
  if (scheme == train::Scheme::mixtrain && cfg.raw_k_prime(ds.size()) == 0) {
    std::cerr << "warning: k'=round(k/(n/m)) rounds to 0; using k'=1\n";
  }
  Manifest m;
  m.set("result.k_prime", std::to_string(kp));
  m.set("result.dataset", ds.provenance);
  m.set("result.n", std::to_string(ds.size()));
  int code = kExitOk;
  try {
    auto res = train::train(std::move(net), ds, cfg, [&](const train::EpochReport& r) {
      train::write_epoch_csv_row(csv, r);
      csv.flush();
      std::cerr << "epoch " << r.epoch << " eps=" << r.epsilon << " alpha=" << r.alpha
                << " loss=" << r.mixed_loss << " acc=" << r.sampled_accuracy << '\n';
    });
    model::save(res.net, out);
    m.set("result.status", "ok");
  } catch (const train::DivergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    m.set("result.status", "diverged");
    code = kExitDiverged;
  }
  finish_manifest(m, "train", reg, started);
  m.write(manifest_path);
  return code;
}

int run_attack(const AttackOptions& o, const Registry& reg) {
  const auto started = timestamp();
  const auto net = model::load(o.model);
  const auto ds = o.data.load();
  const auto cfg = attack_config(o);
  const auto rep = attack::attack_success_rate(net, ds, cfg);

  std::ostringstream csv;
  csv << "index,success,loss,iters\n";
  for (std::size_t i = 0; i < rep.outcomes.size(); ++i) {
    const auto& r = rep.outcomes[i];
    csv << i << ',' << (r.success ? 1 : 0) << ',' << std::setprecision(9) << r.loss << ','
        << r.iterations << '\n';
  }
  csv << "rate=" << std::setprecision(6) << rep.rate << '\n';
  if (o.out.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream f(o.out, std::ios::trunc);
    if (!f) throw model::IoError("cannot write " + o.out);
    f << csv.str();
    std::cout << "rate=" << rep.rate << '\n';
  }
  Manifest m;
  m.set("result.rate", text(rep.rate));
  finish_manifest(m, "attack", reg, started);
  m.write(or_default(o.manifest, o.out.empty() ? fs::path("attack") : fs::path(o.out), ".manifest"));
  return kExitOk;
}

int run_verify(const VerifyOptions& o, const Registry& reg) {
  const auto started = timestamp();
  const auto net = model::load(o.model);
  const auto ds = o.data.load();
  verify::RobustnessSpec spec;
  spec.epsilon = o.epsilon;
  spec.workers = o.threads;
  spec.max_depth = o.max_depth;
  spec.timeout_ms = o.timeout_ms;
  verify::VerdictReport rep;
  if (o.no_era) {
    spec.validate();
    rep = verify::parallel_verify(net, ds, spec);
  } else {
    attack::AttackConfig pgd;
    pgd.pgd_steps = o.pgd_steps;
    pgd.pgd_step = o.pgd_step;
    pgd.seed = o.seed;
    rep = verify::metrics(net, ds, o.epsilon, pgd, spec);
  }
  if (o.out.empty()) {
    verify::write_report_csv(rep, std::cout);
  } else {
    verify::write_report_csv(rep, fs::path(o.out));
    std::cout << verify::summary_line(rep.metrics) << '\n';
  }
  if (rep.contradictions > 0) {
    std::cerr << "error: " << rep.contradictions << " verified inputs were broken by the attack\n";
  }
  Manifest m;
  m.set("result.summary", verify::summary_line(rep.metrics));
  m.set("result.contradictions", std::to_string(rep.contradictions));
  finish_manifest(m, "verify", reg, started);
  m.write(or_default(o.manifest, o.out.empty() ? fs::path("verify") : fs::path(o.out), ".manifest"));
  return kExitOk;
}

int run_export(const ExportOptions& o) {
  data::write_csv(data::denormalize(o.data.load()), o.out);
  return kExitOk;
}

struct Cli {
  CLI::App app{"mixtrain: verifiably robust training, attacks and verification"};
  TrainOptions train_opts;
  AttackOptions attack_opts;
  VerifyOptions verify_opts;
  ExportOptions export_opts;
  Registry train_reg, attack_reg, verify_reg, export_reg;
  std::string rerun_manifest;
  std::string rerun_out;
  CLI::App* train_cmd = nullptr;
  CLI::App* attack_cmd = nullptr;
  CLI::App* verify_cmd = nullptr;
  CLI::App* export_cmd = nullptr;
  CLI::App* rerun_cmd = nullptr;

  Cli() {
    app.require_subcommand(1);

    train_cmd = app.add_subcommand("train", "train a network");
    auto& t = train_opts;
    auto& tr = train_reg;
    tr.option(train_cmd, "scheme", t.scheme, "regular | adv | verifiable | mixtrain");
    t.data.add(train_cmd, tr);
    tr.option(train_cmd, "hidden", t.hidden, "hidden layer widths, comma separated");
    tr.option(train_cmd, "epochs", t.epochs, "training epochs");
    tr.option(train_cmd, "batch-size", t.batch_size, "batch size m");
    tr.option(train_cmd, "optimizer", t.optimizer, "adam | sgd");
    tr.option(train_cmd, "lr", t.lr, "learning rate");
    tr.option(train_cmd, "lr-decay", t.lr_decay, "learning-rate factor per decay period");
    tr.option(train_cmd, "decay-every", t.decay_every, "epochs per decay period (0 = off)");
    tr.option(train_cmd, "epsilon", t.epsilon, "target L-inf radius in [0,1] pixel units");
    tr.option(train_cmd, "eps-start", t.eps_start, "warm-up starting radius");
    tr.option(train_cmd, "warmup-epochs", t.warmup_epochs, "epochs to reach the target radius");
    tr.option(train_cmd, "k", t.k, "mixtrain: robust samples per epoch (default: one per batch)");
    tr.option(train_cmd, "alpha0", t.alpha0, "mixtrain: initial robust weight (default 0.8)");
    tr.option(train_cmd, "acc-target", t.acc_target, "mixtrain: accuracy target (default 0.9)");
    tr.option(train_cmd, "pgd-steps", t.pgd_steps, "adv: PGD iterations");
    tr.option(train_cmd, "pgd-step", t.pgd_step, "adv: PGD step size");
    tr.option(train_cmd, "seed", t.seed, "random seed");
    tr.option(train_cmd, "out", t.out, "model file to write");
    tr.option(train_cmd, "epoch-csv", t.epoch_csv, "per-epoch CSV (default <out>.epochs.csv)");
    tr.option(train_cmd, "manifest", t.manifest, "manifest path (default <out>.manifest)");

    attack_cmd = app.add_subcommand("attack", "attack a network on a dataset");
    auto& a = attack_opts;
    auto& ar = attack_reg;
    ar.option(attack_cmd, "model", a.model, "model file")->required();
    a.data.add(attack_cmd, ar);
    ar.option(attack_cmd, "attack", a.attack, "fgsm | pgd | interval");
    ar.option(attack_cmd, "epsilon", a.epsilon, "L-inf radius in [0,1] pixel units");
    ar.option(attack_cmd, "pgd-steps", a.pgd_steps, "PGD iterations");
    ar.option(attack_cmd, "pgd-step", a.pgd_step, "PGD step size");
    ar.option(attack_cmd, "restarts", a.restarts, "PGD random restarts");
    ar.option(attack_cmd, "ia-iters", a.ia_iters, "interval attack iterations");
    ar.option(attack_cmd, "ia-step", a.ia_step, "interval attack step (0 = eps/4)");
    ar.option(attack_cmd, "ia-eps0", a.ia_eps0, "interval attack starting region (0 = eps/16)");
    ar.option(attack_cmd, "ia-p", a.ia_p, "interval attack region growth factor");
    ar.option(attack_cmd, "seed", a.seed, "random seed");
    ar.option(attack_cmd, "out", a.out, "per-sample CSV (default stdout)");
    ar.option(attack_cmd, "manifest", a.manifest, "manifest path (default <out>.manifest)");

    verify_cmd = app.add_subcommand("verify", "certify robustness and report ACC/ERA/VRA");
    auto& v = verify_opts;
    auto& vr = verify_reg;
    vr.option(verify_cmd, "model", v.model, "model file")->required();
    v.data.add(verify_cmd, vr);
    vr.option(verify_cmd, "epsilon", v.epsilon, "L-inf radius in [0,1] pixel units");
    vr.option(verify_cmd, "threads", v.threads, "worker threads");
    vr.option(verify_cmd, "max-depth", v.max_depth, "maximum bisection depth");
    vr.option(verify_cmd, "timeout-ms", v.timeout_ms, "per-input time budget (0 = none)");
    vr.flag(verify_cmd, "no-era", v.no_era, "skip the PGD attack (ERA reported as ACC)");
    vr.option(verify_cmd, "pgd-steps", v.pgd_steps, "PGD iterations for ERA");
    vr.option(verify_cmd, "pgd-step", v.pgd_step, "PGD step size for ERA");
    vr.option(verify_cmd, "seed", v.seed, "random seed for the ERA attack");
    vr.option(verify_cmd, "out", v.out, "per-input CSV (default stdout)");
    vr.option(verify_cmd, "manifest", v.manifest, "manifest path (default <out>.manifest)");

    export_cmd = app.add_subcommand("export-data", "write a dataset as CSV (x0,...,label)");
    export_opts.data.add(export_cmd, export_reg);
    export_reg.option(export_cmd, "out", export_opts.out, "CSV path")->required();

    rerun_cmd = app.add_subcommand("rerun", "repeat a run from its manifest");
    rerun_cmd->add_option("manifest", rerun_manifest, "manifest file")->required();
    rerun_cmd->add_option("--out", rerun_out, "write the main artifact here instead");
  }

  int dispatch() {
    if (train_cmd->parsed()) return run_train(train_opts, train_reg);
    if (attack_cmd->parsed()) return run_attack(attack_opts, attack_reg);
    if (verify_cmd->parsed()) return run_verify(verify_opts, verify_reg);
    if (export_cmd->parsed()) return run_export(export_opts);
    return rerun();
  }

  int rerun() {
    auto m = Manifest::read(rerun_manifest);
    const auto command = m.get("command");
    if (!command || (*command != "train" && *command != "attack" && *command != "verify")) {
      throw UsageError("manifest has no rerunnable command");
    }
    const Registry& reg = *command == "train" ? train_reg : *command == "attack" ? attack_reg : verify_reg;
    if (!rerun_out.empty()) {
      m.set("out", rerun_out);
      m.set("manifest", "");
      m.set("epoch-csv", "");
    }
    std::vector<std::string> args{"mixtrain", *command};
    for (const auto& [k, val] : m.entries) {
      if (informational(k) || val.empty()) continue;
      if (reg.is_flag(k)) {
        if (val == "true") args.push_back("--" + k);
        continue;
      }
      args.push_back("--" + k);
      args.push_back(val);
    }
    Cli fresh;
    std::vector<const char*> argv;
    for (const auto& s : args) argv.push_back(s.c_str());
    fresh.app.parse(static_cast<int>(argv.size()), argv.data());
    return fresh.dispatch();
  }
};

}  // namespace

int main(int argc, char** argv) {
  Cli cli;
  try {
    cli.app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = cli.app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }
  try {
    return cli.dispatch();
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: manifest: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const model::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const model::FormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
