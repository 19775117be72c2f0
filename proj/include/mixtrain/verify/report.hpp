#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "mixtrain/attack/attack.hpp"
#include "mixtrain/data/dataset.hpp"
#include "mixtrain/model/network.hpp"
#include "mixtrain/model/serialize.hpp"
#include "mixtrain/verify/verifier.hpp"

namespace mixtrain::verify {

struct Accuracies {
  double acc = 0.0;
  double era = 0.0;
  double vra = 0.0;
};

struct VerdictReport {
  std::vector<Verdict> verdicts;
  std::vector<bool> correct;
  std::vector<bool> unbroken;  // correct and PGD found nothing (all true when ERA skipped)
  bool era_computed = false;
  Accuracies metrics;
  // (input, epsilon) pairs marked verified that an attack nevertheless broke.
  // Must stay zero; counted rather than hidden.
  std::size_t contradictions = 0;
  double wall_millis = 0.0;
};

inline VerdictReport parallel_verify(const Network& net, const data::Dataset& ds,
                                     const RobustnessSpec& spec) {
  if (ds.empty()) throw std::invalid_argument("parallel_verify: empty dataset");
  std::vector<std::vector<float>> xs;
  std::vector<std::size_t> labels;
  xs.reserve(ds.size());
  for (const auto& s : ds.samples) {
    xs.push_back(s.x.values());
    labels.push_back(s.y);
  }
  const auto t0 = std::chrono::steady_clock::now();
  VerdictReport rep;
  rep.verdicts = verify_inputs(net, xs, labels, spec, ds.domain());
  rep.wall_millis =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  std::size_t correct = 0;
  std::size_t verified = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const bool ok = !rep.verdicts[i].misclassified;
    rep.correct.push_back(ok);
    rep.unbroken.push_back(ok);
    correct += ok ? 1 : 0;
    verified += rep.verdicts[i].kind == VerdictKind::verified ? 1 : 0;
  }
  const auto n = static_cast<double>(ds.size());
  rep.metrics.acc = static_cast<double>(correct) / n;
  rep.metrics.era = rep.metrics.acc;
  rep.metrics.vra = static_cast<double>(verified) / n;
  return rep;
}

// ACC / ERA / VRA. ERA runs `attack_cfg` (PGD by default) on every correct
// input; a verified input the attack breaks is counted as a contradiction and
// as unbroken-false, so the ordering VRA <= ERA <= ACC can only fail through
// such a contradiction.
inline VerdictReport metrics(const Network& net, const data::Dataset& ds, float epsilon,
                             const attack::AttackConfig& attack_cfg, RobustnessSpec spec) {
  spec.epsilon = epsilon;
  auto rep = parallel_verify(net, ds, spec);
  auto cfg = attack_cfg;
  cfg.epsilon = epsilon;
  const auto domain = ds.domain();
  std::size_t unbroken = 0;
  std::size_t verified_clean = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (!rep.correct[i]) continue;
    bool broken = false;
    if (epsilon > 0.0F) {
      auto rng = numerics::Rng::derive(cfg.seed, i);
      broken = attack::run_attack(net, ds.samples[i].x.span(), ds.samples[i].y, cfg, domain, rng).success;
    }
    rep.unbroken[i] = !broken;
    unbroken += broken ? 0 : 1;
    if (rep.verdicts[i].kind == VerdictKind::verified) {
      if (broken) {
        ++rep.contradictions;
      } else {
        ++verified_clean;
      }
    }
  }
  rep.era_computed = true;
  const auto n = static_cast<double>(ds.size());
  rep.metrics.era = static_cast<double>(unbroken) / n;
  rep.metrics.vra = static_cast<double>(verified_clean) / n;
  return rep;
}

inline std::string summary_line(const Accuracies& m) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4) << "ACC=" << m.acc << ",ERA=" << m.era
     << ",VRA=" << m.vra;
  return os.str();
}

// index,verdict,nodes,millis per input, then the summary line.
inline void write_report_csv(const VerdictReport& rep, std::ostream& os) {
  os << "index,verdict,nodes,millis\n";
  for (std::size_t i = 0; i < rep.verdicts.size(); ++i) {
    const auto& v = rep.verdicts[i];
    os << i << ',' << to_string(v.kind) << ',' << v.nodes << ',' << std::fixed
       << std::setprecision(3) << v.millis << '\n';
    os.unsetf(std::ios::fixed);
  }
  os << summary_line(rep.metrics) << '\n';
}

inline void write_report_csv(const VerdictReport& rep, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw model::IoError("cannot open " + path.string() + " for writing");
  write_report_csv(rep, out);
}

}  // namespace mixtrain::verify
