#include "gossip/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "gossip/binary_analytic.hpp"
#include "gossip/freshness_split.hpp"
#include "gossip/multistate_analytic.hpp"

namespace gossip::cli {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) {
  if (std::isnan(v)) return "";
  std::ostringstream s;
  s << std::setprecision(12) << v;
  return s.str();
}

double parse_double(const std::string& s) {
  if (s.empty()) return kNaN;
  return std::stod(s);
}

const char* param_name(SweepParam p) {
  switch (p) {
    case SweepParam::LambdaS: return "lambda_s";
    case SweepParam::Lambda: return "lambda";
    case SweepParam::K: return "k";
  }
  return "?";
}

SweepParam parse_param(const std::string& s) {
  if (s == "lambda_s" || s == "lambda-s") return SweepParam::LambdaS;
  if (s == "lambda") return SweepParam::Lambda;
  if (s == "k") return SweepParam::K;
  throw Error(ErrorCode::InvalidConfig, "unknown sweep parameter '" + s + "'");
}

std::vector<double> parse_value_list(const std::string& s) {
  std::vector<double> out;
  std::istringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidConfig, "bad sweep value '" + item + "'");
    }
  }
  return out;
}

// Writes to --out when given, otherwise to the command's stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : fallback_(fallback) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw Error(ErrorCode::Io, "cannot write " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : fallback_; }

 private:
  std::ofstream file_;
  std::ostream& fallback_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Analytics facade

AnalyticPoint analytic_point(const GeneratorMatrix& g, const NetworkParams& p) {
  p.validate();
  AnalyticPoint out;
  out.pi = stationary_distribution(g).probs;
  if (g.size() == 2) {
    const auto src = binary::BinarySource::from(g);
    const auto profile = binary::freshness_recursion(src.q12, src.q21, p);
    const auto acc = binary::average_accuracy(src.q12, src.q21, p, profile.at(2));
    for (int k = 1; k <= p.n; ++k) out.f.push_back(profile.f(k));
    out.c_modes = {acc.modes.v1, acc.modes.v2};
  } else {
    const auto joint = multistate::backward_construct(g, p);
    out.f = joint.f;
    out.c_modes = multistate::mode_tagged_accuracy(joint.pi_at(1));
  }
  out.c = std::accumulate(out.c_modes.begin(), out.c_modes.end(), 0.0);
  const auto occupancy = split::g_recursion(g, p);
  out.g = occupancy.g;
  const auto report = split::fresh_accurate_fraction(occupancy, out.c_modes);
  for (const auto& row : report.rows) out.G.push_back(row.fresh_accurate);
  return out;
}

// ---------------------------------------------------------------------------
// Sweeps

double ComparisonRow::z() const {
  if (std::isnan(analytic) || std::isnan(simulated)) return kNaN;
  const double diff = simulated - analytic;
  if (std_error > 0.0) return diff / std_error;
  if (diff == 0.0) return 0.0;
  return diff > 0 ? std::numeric_limits<double>::infinity()
                  : -std::numeric_limits<double>::infinity();
}

bool ComparisonRow::flagged() const {
  const double score = z();
  return !std::isnan(score) && std::abs(score) > 3.0;
}

void SweepSpec::validate() const {
  fixed.validate();
  if (values.empty()) throw Error(ErrorCode::InvalidConfig, "sweep needs at least one value");
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (!(values[i] > values[i - 1])) {
      throw Error(ErrorCode::InvalidConfig, "sweep values must be strictly increasing");
    }
  }
  if (!analytic && !simulate) {
    throw Error(ErrorCode::InvalidConfig, "enable at least one of analytic / simulate");
  }
  if (parameter == SweepParam::K) {
    for (double v : values) {
      if (v != std::floor(v) || v < 1 || v > fixed.n) {
        throw Error(ErrorCode::KOutOfRange, "k sweep value " + fmt(v) + " outside 1..n");
      }
    }
  } else if (k < 1 || k > fixed.n) {
    throw Error(ErrorCode::KOutOfRange, "k outside 1..n");
  }
  for (const auto& q : quantities) {
    if (q != "f" && q != "c" && q != "n_count" && q != "G_product" && q != "G_joint") {
      throw Error(ErrorCode::InvalidConfig, "unknown quantity '" + q + "'");
    }
  }
  if (simulate && batches < 2) throw Error(ErrorCode::TooFewBatches, "batches must be >= 2");
}

std::uint64_t point_seed(std::uint64_t base, std::size_t i) {
  // Decorrelated per-point seeds; SplitMix64 finalizer over (base, i).
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (i + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<sim::SimReport> run_all(const std::vector<sim::SimConfig>& configs,
                                    unsigned threads) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  std::vector<sim::SimReport> out(configs.size());
  std::size_t next = 0;
  while (next < configs.size()) {
    std::vector<std::future<sim::SimReport>> wave;
    const std::size_t end = std::min(configs.size(), next + threads);
    for (std::size_t i = next; i < end; ++i) {
      wave.push_back(std::async(std::launch::async, [&configs, i] { return sim::run(configs[i]); }));
    }
    for (std::size_t i = next; i < end; ++i) out[i] = wave[i - next].get();
    next = end;
  }
  return out;
}

std::vector<ComparisonRow> sweep_and_compare(const SweepSpec& spec) {
  spec.validate();
  const std::size_t m = spec.generator.size();

  auto params_at = [&](double v) {
    NetworkParams p = spec.fixed;
    if (spec.parameter == SweepParam::LambdaS) p.lambda_s = v;
    if (spec.parameter == SweepParam::Lambda) p.lambda = v;
    return p;
  };
  auto k_at = [&](double v) {
    return spec.parameter == SweepParam::K ? static_cast<int>(v) : spec.k;
  };

  std::vector<sim::SimReport> reports;
  if (spec.simulate) {
    std::vector<sim::SimConfig> configs;
    for (std::size_t i = 0; i < spec.values.size(); ++i) {
      const double v = spec.values[i];
      const NetworkParams p = params_at(v);
      std::vector<int> ks{k_at(v)};
      if (ks.front() != p.n) ks.push_back(p.n);
      configs.push_back(sim::SimConfig{
          .generator = spec.generator,
          .params = p,
          .seed = point_seed(spec.seed, i),
          .warmup_events = spec.events / 10,
          .measure_events = spec.events,
          .subset_sizes = ks,
          .batches = spec.batches,
      });
    }
    reports = run_all(configs, spec.threads);
  }

  std::vector<ComparisonRow> rows;
  for (std::size_t i = 0; i < spec.values.size(); ++i) {
    const double v = spec.values[i];
    const NetworkParams p = params_at(v);
    const int k = k_at(v);
    std::optional<AnalyticPoint> a;
    if (spec.analytic) a = analytic_point(spec.generator, p);
    const sim::SimReport* r = spec.simulate ? &reports[i] : nullptr;

    auto emit = [&](const std::string& quantity, int index, double analytic,
                    const std::string& sim_name, int sim_index) {
      ComparisonRow row{v, quantity, index, analytic, kNaN, kNaN};
      if (r != nullptr) {
        const auto& e = r->get(sim_name, sim_index);
        row.simulated = e.value;
        row.std_error = e.std_error;
      }
      rows.push_back(row);
    };

    for (const auto& q : spec.quantities) {
      const auto ku = static_cast<std::size_t>(k - 1);
      if (q == "f") {
        emit("f", k, a ? a->f[ku] : kNaN, "f", k);
      } else if (q == "c") {
        emit("c", p.n, a ? a->c : kNaN, "c", p.n);
      } else if (q == "G_product" || q == "G_joint") {
        emit(q, k, a ? a->G[ku] : kNaN, q, k);
      } else if (q == "n_count") {
        for (std::size_t s = 0; s < m; ++s) {
          const int label = static_cast<int>(s + 1);
          emit("n_count_k" + std::to_string(k), label, a ? k * a->pi[s] : kNaN,
               "n_count_k" + std::to_string(k), label);
        }
      }
    }
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const ComparisonRow& x, const ComparisonRow& y) { return x.value < y.value; });
  return rows;
}

std::string comparison_csv(const std::vector<ComparisonRow>& rows, SweepParam param) {
  std::ostringstream out;
  out << "param,value,quantity,index,analytic,simulated,stderr,z,flag\n";
  for (const auto& r : rows) {
    out << param_name(param) << ',' << fmt(r.value) << ',' << r.quantity << ',' << r.index << ','
        << fmt(r.analytic) << ',' << fmt(r.simulated) << ',' << fmt(r.std_error) << ','
        << fmt(r.z()) << ',' << (r.flagged() ? 1 : 0) << '\n';
  }
  return out.str();
}

std::vector<ComparisonRow> parse_comparison_csv(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line) || line != "param,value,quantity,index,analytic,simulated,stderr,z,flag") {
    throw Error(ErrorCode::InvalidConfig, "unexpected comparison header");
  }
  std::vector<ComparisonRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::string field;
    std::istringstream row(line);
    while (std::getline(row, field, ',')) f.push_back(field);
    while (f.size() < 9) f.emplace_back();
    try {
      ComparisonRow r{parse_double(f[1]), f[2], std::stoi(f[3]), parse_double(f[4]),
                      parse_double(f[5]), parse_double(f[6])};
      if ((f[8] == "1") != r.flagged()) {
        throw Error(ErrorCode::InvalidConfig, "flag disagrees with z in row: " + line);
      }
      rows.push_back(std::move(r));
    } catch (const std::invalid_argument&) {
      throw Error(ErrorCode::InvalidConfig, "bad comparison row: " + line);
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Subcommands

namespace {

struct RateFlags {
  int n = 10;
  double lambda_s = 1.0;
  double lambda = 1.0;

  NetworkParams params() const { return NetworkParams{n, lambda_s, lambda}; }
  void attach(CLI::App* cmd) {
    cmd->add_option("--n", n, "number of nodes")->required();
    cmd->add_option("--lambda-s", lambda_s, "total source push rate")->required();
    cmd->add_option("--lambda", lambda, "per-node gossip rate")->required();
  }
};

struct SourceFlags {
  std::string generator_file;
  std::optional<double> q12;
  std::optional<double> q21;

  void attach(CLI::App* cmd) {
    cmd->add_option("--generator", generator_file, "generator JSON file");
    cmd->add_option("--q12", q12, "binary rate 1->2");
    cmd->add_option("--q21", q21, "binary rate 2->1");
  }
  GeneratorMatrix load() const {
    if (!generator_file.empty()) return load_generator_json(generator_file);
    if (q12 && q21) return GeneratorMatrix::binary(*q12, *q21);
    throw Error(ErrorCode::InvalidConfig, "give --generator or both --q12 and --q21");
  }
};

void write_binary_table(const GeneratorMatrix& g, const NetworkParams& p,
                        std::optional<double> symmetric, std::ostream& out) {
  const auto src = binary::BinarySource::from(g);
  const auto profile = binary::freshness_recursion(src.q12, src.q21, p);
  const auto acc = binary::average_accuracy(src.q12, src.q21, p, profile.at(2));

  std::vector<double> fsym;
  double csym = kNaN;
  if (symmetric) {
    fsym = binary::symmetric_freshness(*symmetric, p);
    csym = binary::symmetric_accuracy(*symmetric, p, fsym.size() > 1 ? fsym[1] : fsym[0]);
  }
  out << "k,f1_mode1,f1_mode2,f_k,c_mode1,c_mode2,c";
  if (symmetric) out << ",f_k_sym,c_sym,delta";
  out << '\n';
  for (int k = 1; k <= p.n; ++k) {
    const auto& fk = profile.at(k);
    out << k << ',' << fmt(fk.v1) << ',' << fmt(fk.v2) << ',' << fmt(fk.sum()) << ','
        << fmt(acc.modes.v1) << ',' << fmt(acc.modes.v2) << ',' << fmt(acc.c());
    if (symmetric) {
      const double f_sym = fsym[static_cast<std::size_t>(k - 1)];
      const double delta = std::max(std::abs(f_sym - fk.sum()), std::abs(csym - acc.c()));
      out << ',' << fmt(f_sym) << ',' << fmt(csym) << ',' << fmt(delta);
    }
    out << '\n';
  }
}

int report_error(const Error& e, std::ostream& err) {
  err << "error: " << e.what() << '\n';
  return e.is_numeric() ? kNumericFailure : kInputError;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Steady-state information accuracy in timeliness-based gossip networks",
               "gossip-accuracy"};
  app.require_subcommand(1);
  std::string out_path;
  app.add_option("--out", out_path, "write the primary CSV here instead of stdout");

  // analytic-binary
  auto* binary_cmd = app.add_subcommand("analytic-binary", "two-state source recursions");
  double q12 = 0.0, q21 = 0.0;
  std::optional<double> symmetric;
  RateFlags binary_rates;
  binary_cmd->add_option("--q12", q12, "rate 1->2");
  binary_cmd->add_option("--q21", q21, "rate 2->1");
  binary_cmd->add_option("--symmetric", symmetric,
                         "use q12 = q21 = Q and cross-check the scalar recursion");
  binary_rates.attach(binary_cmd);
  binary_cmd->add_option("--out", out_path, "output CSV path");

  // analytic-multistate
  auto* multi_cmd = app.add_subcommand("analytic-multistate", "joint-chain construction");
  std::string multi_generator;
  std::string emit_pi;
  RateFlags multi_rates;
  multi_cmd->add_option("--generator", multi_generator, "generator JSON file")->required();
  multi_cmd->add_option("--emit-pi", emit_pi, "also write k,q,r,prob here");
  multi_rates.attach(multi_cmd);
  multi_cmd->add_option("--out", out_path, "output CSV path");

  // split
  auto* split_cmd = app.add_subcommand("split", "fresh-and-accurate vs stale-and-accurate");
  SourceFlags split_source;
  RateFlags split_rates;
  std::optional<int> split_k;
  std::string g_out;
  split_source.attach(split_cmd);
  split_rates.attach(split_cmd);
  split_cmd->add_option("--k", split_k, "subset size (default n)");
  split_cmd->add_option("--g-out", g_out, "also write k,m,g_km here");
  split_cmd->add_option("--out", out_path, "output CSV path");

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "event-driven simulation");
  std::string sim_config;
  std::string sidecar;
  sim_cmd->add_option("--config", sim_config, "simulation JSON config")->required();
  sim_cmd->add_option("--sidecar", sidecar, "config echo JSON (default <out>.json)");
  sim_cmd->add_option("--out", out_path, "output CSV path");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "analytic vs simulation over a parameter");
  SourceFlags sweep_source;
  RateFlags sweep_rates;
  std::string sweep_param = "lambda_s";
  std::string sweep_values;
  std::string sweep_config;
  std::vector<std::string> quantities{"f"};
  std::string modes = "analytic,simulate";
  int sweep_k = 1;
  std::int64_t events = 2'250'000;
  int batches = 30;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  bool strict = false;
  sweep_source.attach(sweep_cmd);
  sweep_cmd->add_option("--n", sweep_rates.n, "number of nodes");
  sweep_cmd->add_option("--lambda-s", sweep_rates.lambda_s, "source push rate (fixed)");
  sweep_cmd->add_option("--lambda", sweep_rates.lambda, "gossip rate (fixed)");
  sweep_cmd->add_option("--param", sweep_param, "lambda_s | lambda | k");
  sweep_cmd->add_option("--values", sweep_values, "comma-separated, strictly increasing");
  sweep_cmd->add_option("--config", sweep_config, "sweep JSON instead of flags");
  sweep_cmd->add_option("--quantity", quantities, "f | c | n_count | G_product | G_joint")
      ->delimiter(',');
  sweep_cmd->add_option("--modes", modes, "analytic,simulate");
  sweep_cmd->add_option("--k", sweep_k, "subset size when not sweeping k");
  sweep_cmd->add_option("--events", events, "measured events per point");
  sweep_cmd->add_option("--batches", batches, "batch-means windows");
  sweep_cmd->add_option("--seed", seed, "base seed");
  sweep_cmd->add_option("--threads", threads, "worker threads (0 = all cores)");
  sweep_cmd->add_flag("--strict", strict, "exit 3 if any |z| > 3");
  sweep_cmd->add_option("--out", out_path, "output CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*binary_cmd) {
      NetworkParams p = binary_rates.params();
      if (symmetric) q12 = q21 = *symmetric;
      const auto g = GeneratorMatrix::binary(q12, q21);
      Sink sink(out_path, out);
      write_binary_table(g, p, symmetric, sink.stream());
      return kOk;
    }

    if (*multi_cmd) {
      const auto g = load_generator_json(multi_generator);
      const NetworkParams p = multi_rates.params();
      const auto result = multistate::backward_construct(g, p);
      Sink sink(out_path, out);
      sink.stream() << "k,f_k\n";
      for (int k = 1; k <= p.n; ++k) sink.stream() << k << ',' << fmt(result.f_at(k)) << '\n';
      if (!emit_pi.empty()) {
        Sink pi_sink(emit_pi, out);
        pi_sink.stream() << "k,q,r,prob\n";
        for (int k = 1; k <= p.n; ++k) {
          const auto& pi = result.pi_at(k);
          for (std::size_t q = 0; q < pi.states; ++q)
            for (std::size_t r = 0; r < pi.states; ++r)
              pi_sink.stream() << k << ',' << q + 1 << ',' << r + 1 << ',' << fmt(pi.at(q, r))
                               << '\n';
        }
      }
      return kOk;
    }

    if (*split_cmd) {
      const auto g = split_source.load();
      const NetworkParams p = split_rates.params();
      const int k = split_k.value_or(p.n);
      rate_triple(p, k);  // range check
      const auto c_modes = analytic_point(g, p).c_modes;
      const auto occupancy = split::g_recursion(g, p);
      const auto report = split::fresh_accurate_fraction(occupancy, c_modes);
      Sink sink(out_path, out);
      const auto& row = report.at(k);
      auto& os = sink.stream();
      os << 'k';
      for (std::size_t m = 0; m < g.size(); ++m) os << ",g_mode" << m + 1;
      os << ",G_k,stale_accurate\n" << k;
      for (double v : occupancy.at(k)) os << ',' << fmt(v);
      os << ',' << fmt(row.fresh_accurate) << ',' << fmt(row.stale_accurate) << '\n';
      if (!g_out.empty()) {
        Sink g_sink(g_out, out);
        g_sink.stream() << "k,m,g_km\n";
        for (int kk = 1; kk <= p.n; ++kk) {
          const auto& gk = occupancy.at(kk);
          for (std::size_t m = 0; m < gk.size(); ++m)
            g_sink.stream() << kk << ',' << m + 1 << ',' << fmt(gk[m]) << '\n';
        }
      }
      return kOk;
    }

    if (*sim_cmd) {
      const auto cfg = sim::load_sim_config(sim_config);
      const auto report = sim::run(cfg);
      Sink sink(out_path, out);
      sink.stream() << sim::report_csv(report);
      std::string side = sidecar;
      if (side.empty() && !out_path.empty()) side = out_path + ".json";
      if (!side.empty()) {
        Sink side_sink(side, out);
        nlohmann::ordered_json doc;
        doc["config"] = nlohmann::ordered_json::parse(sim::sim_config_json(cfg));
        doc["sim_time"] = report.sim_time;
        doc["event_counts"] = {{"source", report.counts.source},
                               {"push", report.counts.push},
                               {"gossip", report.counts.gossip},
                               {"gossip_accepted", report.counts.gossip_accepted}};
        side_sink.stream() << doc.dump(2) << '\n';
      }
      return kOk;
    }

    if (*sweep_cmd) {
      std::optional<GeneratorMatrix> g;
      if (!sweep_config.empty()) {
        std::ifstream in(sweep_config);
        if (!in) throw Error(ErrorCode::Io, "cannot open sweep config " + sweep_config);
        nlohmann::json doc;
        try {
          doc = nlohmann::json::parse(in);
          if (doc.contains("generator")) {
            g = parse_generator_json(doc["generator"].dump());
          } else if (doc.contains("generator_file")) {
            std::filesystem::path file = doc["generator_file"].get<std::string>();
            if (file.is_relative()) file = std::filesystem::path(sweep_config).parent_path() / file;
            g = load_generator_json(file);
          }
          sweep_rates.n = doc.value("n", sweep_rates.n);
          sweep_rates.lambda_s = doc.value("lambda_s", sweep_rates.lambda_s);
          sweep_rates.lambda = doc.value("lambda", sweep_rates.lambda);
          sweep_param = doc.value("param", sweep_param);
          if (doc.contains("values")) {
            std::ostringstream joined;
            for (const auto& v : doc["values"]) joined << v.get<double>() << ',';
            sweep_values = joined.str();
          }
          if (doc.contains("quantities")) quantities = doc["quantities"].get<std::vector<std::string>>();
          if (doc.contains("modes")) {
            modes.clear();
            for (const auto& m : doc["modes"]) modes += m.get<std::string>() + ",";
          }
          sweep_k = doc.value("k", sweep_k);
          events = doc.value("events", events);
          batches = doc.value("batches", batches);
          seed = doc.value("seed", seed);
        } catch (const nlohmann::json::exception& e) {
          throw Error(ErrorCode::InvalidConfig, std::string("sweep config: ") + e.what());
        }
      }
      if (!g) g = sweep_source.load();
      SweepSpec spec{
          .parameter = parse_param(sweep_param),
          .values = parse_value_list(sweep_values),
          .generator = *g,
          .fixed = sweep_rates.params(),
          .analytic = modes.find("analytic") != std::string::npos,
          .simulate = modes.find("simulate") != std::string::npos,
          .quantities = quantities,
          .k = sweep_k,
          .events = events,
          .batches = batches,
          .seed = seed,
          .threads = threads,
      };
      const auto rows = sweep_and_compare(spec);
      Sink sink(out_path, out);
      sink.stream() << comparison_csv(rows, spec.parameter);
      double max_z = 0.0;
      bool any_flag = false;
      for (const auto& r : rows) {
        if (!std::isnan(r.z())) max_z = std::max(max_z, std::abs(r.z()));
        any_flag = any_flag || r.flagged();
      }
      err << "# rows=" << rows.size() << " max|z|=" << fmt(max_z)
          << (any_flag ? " FLAGGED" : " ok") << '\n';
      return strict && any_flag ? kStrictFailure : kOk;
    }
  } catch (const Error& e) {
    return report_error(e, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kNumericFailure;
  }
  return kInputError;
}

}  // namespace gossip::cli
